"""Stochastic TD(0) iterations: centralized, gossip-coupled, and uncoupled.

The step functions are pure (they return fresh arrays and read only
pre-update values), which keeps them directly enumerable in tests. `run`
wires them into a seeded simulation loop over a chain trajectory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import chain as chain_mod
from .chain import MarkovModel
from .errors import DivergenceError, StructuralError
from .features import BasisEnsemble, validate_independence
from .gossip import GossipMatrix, validate_gossip

WEIGHT_BLOWUP = 1e12


@dataclass(frozen=True)
class PowerSchedule:
    """Step sizes gamma_t = a / (1 + t/scale)^p.

    Admissible (divergent sum, summable squares) for a > 0, scale > 0 and
    0.5 < p <= 1. The scale parameter stretches the decay without changing
    the asymptotics; the slow eigenmodes of the queue configuration need a
    near-constant step over the first ~1e5 iterations to be learnable.
    """

    a: float = 0.1
    p: float = 0.75
    scale: float = 50_000.0

    def __post_init__(self):
        if self.a <= 0 or self.scale <= 0 or not 0.5 < self.p <= 1.0:
            raise StructuralError(
                "step schedule needs a > 0, scale > 0 and p in (0.5, 1] "
                f"(got a={self.a}, p={self.p}, scale={self.scale})"
            )

    def gamma(self, t: int) -> float:
        return self.a / (1.0 + t / self.scale) ** self.p

    def gammas(self, steps: int) -> np.ndarray:
        return self.a / (1.0 + np.arange(steps) / self.scale) ** self.p


@dataclass
class AgentEnsemble:
    """Mutable learner state: per-agent weight vectors plus the mu scalar."""

    weights: list
    mu: float = 0.0
    t: int = 0

    @classmethod
    def zeros(cls, bases: BasisEnsemble) -> "AgentEnsemble":
        return cls(weights=[np.zeros(k) for k in bases.sizes])


@dataclass(frozen=True)
class RunConfig:
    steps: int
    seed: int = 0
    schedule: PowerSchedule = field(default_factory=PowerSchedule)
    mode: str = "distributed"  # distributed | uncoupled | centralized
    criterion: str = "discounted"  # discounted | average
    alpha: float | None = 0.9
    k: float = 1.0
    record_every: int = 1000
    initial_state: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise StructuralError("steps must be >= 1")
        if self.mode not in ("distributed", "uncoupled", "centralized"):
            raise StructuralError(f"unknown mode {self.mode!r}")
        if self.criterion not in ("discounted", "average"):
            raise StructuralError(f"unknown criterion {self.criterion!r}")
        if self.criterion == "discounted":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise StructuralError("discounted mode needs alpha in (0,1)")
        if self.k <= 0:
            raise StructuralError("k must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "schedule" in doc and isinstance(doc["schedule"], dict):
            doc["schedule"] = PowerSchedule(**doc["schedule"])
        return cls(**doc)


def td0_centralized_step(x, x_next, cost, r, phi, alpha, gamma_t):
    """One discounted TD(0) update from transition (x, x_next) with cost."""
    td = cost + alpha * (phi[x_next] @ r) - phi[x] @ r
    return r + gamma_t * td * phi[x]


def td0_distributed_step(x, x_next, cost, weights, phis, alpha, gamma_t, neighbors):
    """Synchronous gossip-coupled update; every agent reads pre-update weights.

    `neighbors[i]` is the agent polled by agent i for its bootstrap value.
    """
    new = []
    for i, phi in enumerate(phis):
        y = neighbors[i]
        td = cost + alpha * (phis[y][x_next] @ weights[y]) - phi[x] @ weights[i]
        new.append(weights[i] + gamma_t * td * phi[x])
    return new


def avgcost_centralized_step(x, x_next, cost, r, mu, phi, k, gamma_t):
    """Average-cost TD(0): both updates read the pre-update mu."""
    td = cost - mu + phi[x_next] @ r - phi[x] @ r
    new_r = r + gamma_t * td * phi[x]
    new_mu = mu + k * gamma_t * (cost - mu)
    return new_r, new_mu


def avgcost_distributed_step(x, x_next, cost, weights, mu, phis, k, gamma_t, neighbors):
    """Gossip-coupled average-cost update with one shared mu scalar."""
    new = []
    for i, phi in enumerate(phis):
        y = neighbors[i]
        td = cost - mu + phis[y][x_next] @ weights[y] - phi[x] @ weights[i]
        new.append(weights[i] + gamma_t * td * phi[x])
    new_mu = mu + k * gamma_t * (cost - mu)
    return new, new_mu


def simulate_states(
    model: MarkovModel, steps: int, initial_state: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample a length-(steps+1) state path by inverse CDF per row."""
    cdfs = np.cumsum(model.P, axis=1)
    u = rng.random(steps)
    states = np.empty(steps + 1, dtype=np.int64)
    states[0] = initial_state
    last = model.m - 1
    s = initial_state
    for t in range(steps):
        s = min(int(np.searchsorted(cdfs[s], u[t], side="right")), last)
        states[t + 1] = s
    return states


@dataclass
class Trajectory:
    """Recorded snapshots of a run (step 0, every record_every, and the end)."""

    steps: np.ndarray  # recorded step indices
    weights: list  # per agent: (num_records, n_i)
    mu: np.ndarray | None
    config: RunConfig
    final: AgentEnsemble

    @property
    def n_agents(self) -> int:
        return len(self.weights)

    def write_weights_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "agent", "weight_index", "value"])
            for rec, step in enumerate(self.steps):
                for i, w in enumerate(self.weights):
                    for j, value in enumerate(w[rec]):
                        writer.writerow([int(step), i, j, repr(float(value))])

    def write_mu_csv(self, path) -> None:
        if self.mu is None:
            raise StructuralError("run has no mu series (discounted criterion)")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "mu"])
            for step, value in zip(self.steps, self.mu):
                writer.writerow([int(step), repr(float(value))])


def _check_finite(weights, mu, step):
    for w in weights:
        if not np.all(np.isfinite(w)) or np.max(np.abs(w)) > WEIGHT_BLOWUP:
            raise DivergenceError(step, "weight vector out of range")
    if mu is not None and (not np.isfinite(mu) or abs(mu) > WEIGHT_BLOWUP):
        raise DivergenceError(step, "mu out of range")


def run(
    model: MarkovModel,
    bases: BasisEnsemble,
    gm: GossipMatrix | None,
    config: RunConfig,
) -> Trajectory:
    """Simulate one full learning run; bit-reproducible for a fixed seed.

    Chain transitions and neighbor polling use independent seeded streams,
    so coupled and uncoupled runs with the same seed see the same state path.
    """
    chain_mod.validate_chain(model)
    for b in bases.bases:
        validate_independence(b)
    n = bases.n_agents
    if config.mode == "distributed":
        if gm is None:
            raise StructuralError("distributed mode needs a gossip matrix")
        validate_gossip(gm)
        if gm.n != n:
            raise StructuralError("gossip matrix size does not match agent count")
    if config.mode == "centralized" and n != 1:
        raise StructuralError("centralized mode expects a single agent basis")

    T = config.steps
    rng_chain = np.random.default_rng([config.seed, 0])
    rng_gossip = np.random.default_rng([config.seed, 1])
    states = simulate_states(model, T, config.initial_state, rng_chain)
    costs = model.c[states[:-1], states[1:]]
    gammas = config.schedule.gammas(T)

    neighbors = None
    if config.mode == "distributed":
        u = rng_gossip.random((T, n))
        cdfs = gm.row_cdfs()
        neighbors = np.empty((T, n), dtype=np.int64)
        for i in range(n):
            neighbors[:, i] = np.minimum(
                np.searchsorted(cdfs[i], u[:, i], side="right"), n - 1
            )

    phis = [b.phi for b in bases.bases]
    weights = [np.zeros(k) for k in bases.sizes]
    mu = 0.0 if config.criterion == "average" else None
    discounted = config.criterion == "discounted"
    alpha = config.alpha
    k = config.k

    rec_steps = [0]
    rec_weights = [[w.copy() for w in weights]]
    rec_mu = [mu]

    for t in range(T):
        x, x_next = int(states[t]), int(states[t + 1])
        cost = float(costs[t])
        gamma_t = gammas[t]
        if config.mode == "distributed":
            nb = neighbors[t]
            if discounted:
                weights = td0_distributed_step(
                    x, x_next, cost, weights, phis, alpha, gamma_t, nb
                )
            else:
                weights, mu = avgcost_distributed_step(
                    x, x_next, cost, weights, mu, phis, k, gamma_t, nb
                )
        else:
            # centralized and uncoupled both bootstrap from the agent's own basis
            if discounted:
                weights = [
                    td0_centralized_step(x, x_next, cost, weights[i], phis[i], alpha, gamma_t)
                    for i in range(n)
                ]
            else:
                new_weights = []
                for i in range(n):
                    phi = phis[i]
                    td = cost - mu + phi[x_next] @ weights[i] - phi[x] @ weights[i]
                    new_weights.append(weights[i] + gamma_t * td * phi[x])
                weights = new_weights
                mu = mu + k * gamma_t * (cost - mu)
        if (t + 1) % config.record_every == 0 or t + 1 == T:
            _check_finite(weights, mu, t + 1)
            if t + 1 != rec_steps[-1]:
                rec_steps.append(t + 1)
                rec_weights.append([w.copy() for w in weights])
                rec_mu.append(mu)

    per_agent = [
        np.array([snap[i] for snap in rec_weights]) for i in range(n)
    ]
    final = AgentEnsemble(weights=[w.copy() for w in weights], mu=mu or 0.0, t=T)
    return Trajectory(
        steps=np.array(rec_steps, dtype=np.int64),
        weights=per_agent,
        mu=None if mu is None else np.array(rec_mu, dtype=float),
        config=config,
        final=final,
    )
