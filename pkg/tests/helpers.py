"""Shared oracle helpers: independent of the implementation paths they check."""

import numpy as np

import gossiptd as g


def random_chain(rng, m, self_loop=0.0):
    """Random dense irreducible aperiodic chain with random costs."""
    P = rng.random((m, m)) + 0.05
    P /= P.sum(axis=1, keepdims=True)
    if self_loop:
        P = (1.0 - self_loop) * P + self_loop * np.eye(m)
    c = rng.normal(size=(m, m))
    return g.MarkovModel(P=P, c=c)


def random_basis(rng, m, k, agent_id=0):
    return g.FeatureBasis(phi=rng.normal(size=(m, k)), agent_id=agent_id)


def birth_death_stationary(P):
    """Detailed-balance closed form eta(i+1)/eta(i) = p_up(i)/p_down(i+1)."""
    m = P.shape[0]
    eta = np.ones(m)
    for i in range(m - 1):
        eta[i + 1] = eta[i] * P[i, i + 1] / P[i + 1, i]
    return eta / eta.sum()


def power_series_value(model, alpha, terms=500):
    """Truncated sum of alpha^t P^t cbar."""
    cbar = g.mean_cost(model)
    total = np.zeros(model.m)
    term = cbar.copy()
    for _ in range(terms):
        total += term
        term = alpha * (model.P @ term)
    return total


def cesaro_differential_value(model, eta, terms=2000):
    """Truncated sum of (P^t cbar - mu* 1), shifted to eta^T J = 0."""
    cbar = g.mean_cost(model)
    mu = float(eta.eta @ cbar)
    total = np.zeros(model.m)
    term = cbar.copy()
    for _ in range(terms):
        total += term - mu
        term = model.P @ term
    return total - float(eta.eta @ total)


def classical_td_fixed_point(model, basis, alpha, eta):
    """Single-agent TD(0) stationarity: Phi^T D (cbar + alpha P Phi r - Phi r) = 0."""
    D = eta.eta
    Phi = basis.phi
    A = Phi.T @ (D[:, None] * (alpha * model.P @ Phi - Phi))
    return np.linalg.solve(A, -Phi.T @ (D * g.mean_cost(model)))


def enumerate_expected_distributed_update(model, bases, gm, eta, weights, alpha):
    """Exact expectation of the coupled discounted update at given weights.

    Enumerates X_t ~ eta, X_{t+1} ~ P and each agent's neighbor draw, calling
    the actual step function with unit step size.
    """
    from gossiptd.learner import td0_distributed_step

    phis = [b.phi for b in bases.bases]
    n = bases.n_agents
    out = [np.zeros_like(w) for w in weights]
    for x in range(model.m):
        for x_next in np.flatnonzero(model.P[x]):
            p_trans = eta.eta[x] * model.P[x, x_next]
            cost = float(model.c[x, x_next])
            for y in range(n):
                new = td0_distributed_step(
                    x, int(x_next), cost, weights, phis, alpha, 1.0, [y] * n
                )
                for i in range(n):
                    out[i] += p_trans * gm.q[i, y] * (new[i] - weights[i])
    return out


def enumerate_expected_avgcost_update(model, bases, gm, eta, weights, mu, k):
    """Exact expectation of the coupled average-cost update (weights and mu)."""
    from gossiptd.learner import avgcost_distributed_step

    phis = [b.phi for b in bases.bases]
    n = bases.n_agents
    out = [np.zeros_like(w) for w in weights]
    mu_out = 0.0
    for x in range(model.m):
        for x_next in np.flatnonzero(model.P[x]):
            p_trans = eta.eta[x] * model.P[x, x_next]
            cost = float(model.c[x, x_next])
            for y in range(n):
                new, new_mu = avgcost_distributed_step(
                    x, int(x_next), cost, weights, mu, phis, k, 1.0, [y] * n
                )
                for i in range(n):
                    out[i] += p_trans * gm.q[i, y] * (new[i] - weights[i])
            mu_only = mu + k * (cost - mu)
            mu_out += p_trans * (mu_only - mu)
    return out, mu_out
