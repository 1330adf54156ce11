"""Lifted agent-state chain and direct fixed-point solvers.

The distributed iteration is analyzed through a Markov chain on pairs
(agent, state) with transition probability q(i,j) p(x,y). Its stationary
weights and block feature matrix turn the limiting dynamics into a linear
system whose solution is the convergence point of the stochastic scheme;
solving that system directly yields machine-precision oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from . import chain as chain_mod
from .chain import MarkovModel, StationaryWeights
from .errors import AssumptionViolationError, NumericalError
from .features import BasisEnsemble, validate_independence
from .gossip import GossipMatrix, validate_gossip

SOLVER_TOL = 1e-9
A6_TOL = 1e-8


@dataclass(frozen=True)
class AugmentedSystem:
    """rho (nm x nm), Psi (nm x sum n_i), nu (nm), ctilde (nm)."""

    rho: np.ndarray
    Psi: np.ndarray
    nu: np.ndarray
    ctilde: np.ndarray
    sizes: tuple  # per-agent weight dimensions
    n_agents: int
    m: int

    def split(self, r: np.ndarray) -> list:
        """Split a concatenated weight vector into per-agent pieces."""
        out = []
        offset = 0
        for k in self.sizes:
            out.append(np.asarray(r[offset : offset + k]))
            offset += k
        return out


@dataclass(frozen=True)
class FixedPoint:
    r_star: np.ndarray
    residual: float
    mu_star: float | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "r_star": self.r_star.tolist(),
                "mu_star": self.mu_star,
                "residual": self.residual,
            }
        )


def build_augmented(
    model: MarkovModel,
    gm: GossipMatrix,
    bases: BasisEnsemble,
    eta: StationaryWeights | None = None,
) -> AugmentedSystem:
    """Assemble the lifted chain, ordered (agent 1, state 1..m), (agent 2, ...)."""
    chain_mod.validate_chain(model)
    validate_gossip(gm)
    for b in bases.bases:
        validate_independence(b)
    if gm.n != bases.n_agents:
        raise NumericalError(
            f"gossip matrix has {gm.n} agents but ensemble has {bases.n_agents}"
        )
    if eta is None:
        eta = chain_mod.stationary_distribution(model)

    n, m = gm.n, model.m
    rho = np.kron(gm.q, model.P)
    Psi = block_diag(*(b.phi for b in bases.bases))
    nu = np.tile(eta.eta, n) / n
    ctilde = np.tile(chain_mod.mean_cost(model), n)

    aug = AugmentedSystem(
        rho=rho,
        Psi=Psi,
        nu=nu,
        ctilde=ctilde,
        sizes=bases.sizes,
        n_agents=n,
        m=m,
    )
    _check_invariants(aug)
    return aug


def _check_invariants(aug: AugmentedSystem) -> None:
    if np.max(np.abs(aug.rho.sum(axis=1) - 1.0)) > 1e-10:
        raise NumericalError("lifted transition matrix is not row-stochastic")
    resid = np.max(np.abs(aug.nu @ aug.rho - aug.nu))
    if resid > 1e-10:
        raise AssumptionViolationError(
            "(A3)",
            f"nu is not stationary for the lifted chain (residual {resid:.2e}); "
            "is Q doubly stochastic?",
        )
    sv = np.linalg.svd(aug.Psi, compute_uv=False)
    if sv[-1] <= aug.Psi.shape[0] * np.finfo(float).eps * sv[0]:
        raise AssumptionViolationError(
            "(A1)", "block feature matrix is rank deficient"
        )


def verify_lifted_chain(aug: AugmentedSystem) -> None:
    """Irreducibility and aperiodicity of the lifted chain."""
    dummy = MarkovModel(P=aug.rho, c=np.zeros_like(aug.rho))
    rep = chain_mod.validate_chain(dummy, raise_on_error=False)
    if not rep.ok:
        raise AssumptionViolationError(
            "lifted-chain",
            "lifted chain is not irreducible and aperiodic: "
            + "; ".join(rep.messages)
            + " (check (A2) for P and (A3) for Q)",
        )


def solve_discounted_fixed_point(aug: AugmentedSystem, alpha: float) -> FixedPoint:
    """Solve Psi^T diag(nu) (alpha rho - I) Psi r = -Psi^T diag(nu) ctilde."""
    if not 0.0 < alpha < 1.0:
        raise NumericalError(f"alpha must lie in (0,1), got {alpha}")
    PsiN = aug.Psi.T * aug.nu[None, :]
    A = PsiN @ (alpha * aug.rho - np.eye(len(aug.nu))) @ aug.Psi
    b = -PsiN @ aug.ctilde
    try:
        r = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("discounted fixed-point system is singular") from exc
    residual = float(np.linalg.norm(A @ r - b))
    if residual > SOLVER_TOL:
        raise NumericalError(f"fixed-point residual {residual:.2e} above tolerance")
    return FixedPoint(r_star=r, residual=residual)


def check_a6(aug: AugmentedSystem) -> None:
    """The all-ones vector must not be representable: e not in range(Psi)."""
    e = np.ones(aug.Psi.shape[0])
    sol, *_ = np.linalg.lstsq(aug.Psi, e, rcond=None)
    resid = float(np.linalg.norm(aug.Psi @ sol - e))
    if resid / np.linalg.norm(e) <= A6_TOL:
        raise AssumptionViolationError(
            "(A6)", "the constant vector lies in the span of the block features"
        )


def solve_average_fixed_point(aug: AugmentedSystem, mu_star: float) -> FixedPoint:
    """Solve Psi^T diag(nu) (rho - I) Psi r = -Psi^T diag(nu) (ctilde - mu* e)."""
    check_a6(aug)
    PsiN = aug.Psi.T * aug.nu[None, :]
    A = PsiN @ (aug.rho - np.eye(len(aug.nu))) @ aug.Psi
    b = -PsiN @ (aug.ctilde - mu_star)
    try:
        r = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("average-cost fixed-point system is singular") from exc
    residual = float(np.linalg.norm(A @ r - b))
    if residual > SOLVER_TOL:
        raise NumericalError(f"fixed-point residual {residual:.2e} above tolerance")
    return FixedPoint(r_star=r, residual=residual, mu_star=mu_star)
