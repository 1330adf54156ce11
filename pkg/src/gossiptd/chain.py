"""Finite Markov chain model and exact policy-evaluation quantities.

Everything here is deterministic dense linear algebra: stationary
distribution, discounted and average-cost value functions, Bellman
operators, and the contraction factor of P restricted to the subspace
orthogonal to the constant vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.sparse.csgraph import connected_components

from .errors import AssumptionViolationError, NumericalError, StructuralError

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
RESIDUAL_TOL = 1e-10
POISSON_TOL = 1e-9


@dataclass(frozen=True)
class MarkovModel:
    """Transition matrix P and per-transition cost matrix c on m states."""

    P: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise StructuralError(f"P must be square, got shape {P.shape}")
        if c.shape != P.shape:
            raise StructuralError(f"c shape {c.shape} does not match P shape {P.shape}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.P.shape[0]

    def to_json(self) -> str:
        return json.dumps({"P": self.P.tolist(), "c": self.c.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "MarkovModel":
        doc = json.loads(text)
        return cls(P=np.array(doc["P"], dtype=float), c=np.array(doc["c"], dtype=float))


@dataclass(frozen=True)
class StationaryWeights:
    """Stationary probability vector eta; diag(eta) is the weighting matrix."""

    eta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    row_stochastic: bool
    irreducible: bool
    aperiodic: bool
    messages: list = field(default_factory=list)


def _reachability_closure(adj: np.ndarray) -> np.ndarray:
    """Boolean transitive closure by repeated squaring."""
    reach = adj.copy()
    m = adj.shape[0]
    for _ in range(int(np.ceil(np.log2(max(m, 2)))) + 1):
        reach = reach | (reach @ reach)
    return reach


def validate_chain(model: MarkovModel, raise_on_error: bool = True) -> ValidationReport:
    """Check row-stochasticity plus irreducibility and aperiodicity (A2)."""
    P = model.P
    m = model.m
    messages = []

    row_ok = bool(np.all(P >= 0) and np.all(np.abs(P.sum(axis=1) - 1.0) < ROW_SUM_TOL))
    if not row_ok:
        messages.append("rows of P must be nonnegative and sum to 1")
        if raise_on_error:
            raise StructuralError("; ".join(messages))

    adj = P > 0
    reach = _reachability_closure(adj)
    irreducible = bool(reach.all())
    if not irreducible:
        messages.append("chain is reducible")

    # Strict positivity of P^k for k = m^2 is sufficient for aperiodicity of
    # an irreducible chain at this scale; computed on the boolean skeleton.
    aperiodic = False
    if irreducible:
        power = adj.copy()
        for _ in range(int(np.ceil(np.log2(max(m * m, 2)))) + 1):
            power = (power @ power)
        aperiodic = bool(power.all())
        if not aperiodic:
            messages.append("chain is periodic")

    ok = row_ok and irreducible and aperiodic
    if not ok and raise_on_error:
        raise AssumptionViolationError("(A2)", "; ".join(messages))
    return ValidationReport(ok, row_ok, irreducible, aperiodic, messages)


def stationary_distribution(model: MarkovModel) -> StationaryWeights:
    """Solve eta^T P = eta^T, sum(eta) = 1 by a direct null-space solve."""
    P = model.P
    ns = null_space(P.T - np.eye(model.m))
    if ns.shape[1] != 1:
        raise NumericalError(
            f"stationary null space has dimension {ns.shape[1]}, expected 1"
        )
    eta = ns[:, 0]
    eta = eta / eta.sum()
    if np.any(eta <= 0):
        raise NumericalError("stationary vector has non-positive entries")
    resid = np.max(np.abs(eta @ P - eta))
    if resid > STATIONARY_TOL:
        raise NumericalError(f"stationary residual {resid:.2e} above tolerance")
    return StationaryWeights(eta=eta)


def mean_cost(model: MarkovModel) -> np.ndarray:
    """Expected one-step cost per state: cbar(i) = sum_j p(i,j) c(i,j)."""
    return np.einsum("ij,ij->i", model.P, model.c)


def discounted_value(model: MarkovModel, alpha: float) -> np.ndarray:
    """Exact discounted value: solves (I - alpha P) J = cbar."""
    if not 0.0 < alpha < 1.0:
        raise StructuralError(f"discount alpha must lie in (0,1), got {alpha}")
    cbar = mean_cost(model)
    J = np.linalg.solve(np.eye(model.m) - alpha * model.P, cbar)
    resid = np.max(np.abs((np.eye(model.m) - alpha * model.P) @ J - cbar))
    if resid > RESIDUAL_TOL:
        raise NumericalError(f"discounted-value residual {resid:.2e}")
    return J


def average_cost(model: MarkovModel, eta: StationaryWeights | None = None) -> float:
    """Long-run average cost mu* = eta^T cbar."""
    if eta is None:
        eta = stationary_distribution(model)
    return float(eta.eta @ mean_cost(model))


def basic_differential_value(
    model: MarkovModel, eta: StationaryWeights | None = None
) -> np.ndarray:
    """Solution of the Poisson equation J = cbar - mu* 1 + P J with eta^T J = 0.

    Solved as a stacked least-squares system [(I - P); eta^T] J = [cbar - mu*; 0].
    """
    if eta is None:
        eta = stationary_distribution(model)
    cbar = mean_cost(model)
    mu = float(eta.eta @ cbar)
    A = np.vstack([np.eye(model.m) - model.P, eta.eta])
    b = np.concatenate([cbar - mu, [0.0]])
    J, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = np.max(np.abs(A @ J - b))
    if resid > POISSON_TOL:
        raise NumericalError(f"Poisson-equation residual {resid:.2e}")
    return J


def weighted_norm(x: np.ndarray, eta: StationaryWeights | np.ndarray) -> float:
    """Stationary-weighted norm sqrt(sum_i eta(i) x(i)^2)."""
    w = eta.eta if isinstance(eta, StationaryWeights) else np.asarray(eta)
    x = np.asarray(x, dtype=float)
    if x.shape != w.shape:
        raise StructuralError(f"shape mismatch: x {x.shape} vs eta {w.shape}")
    return float(np.sqrt(w @ (x * x)))


def bellman_discounted(x: np.ndarray, model: MarkovModel, alpha: float) -> np.ndarray:
    """Discounted Bellman operator: cbar + alpha P x."""
    return mean_cost(model) + alpha * (model.P @ x)


def bellman_average(
    x: np.ndarray, model: MarkovModel, eta: StationaryWeights | None = None
) -> np.ndarray:
    """Average-cost Bellman operator: cbar - mu* 1 + P x."""
    cbar = mean_cost(model)
    mu = average_cost(model, eta)
    return cbar - mu + model.P @ x


def _single_equivalence_class(P: np.ndarray) -> bool:
    """True when two states sharing a positive-probability predecessor always
    chain together into one class over the whole state space."""
    adj = P > 0
    shared = adj.T @ adj  # (a,b): some row has positive mass on both
    n_comp, _ = connected_components(shared, directed=False)
    return n_comp == 1


def orthogonal_contraction_factor(
    model: MarkovModel, eta: StationaryWeights | None = None
) -> float:
    """sup of ||P x|| / ||x|| (weighted norm) over x with eta^T x = 0.

    Computed as the largest singular value of D^{1/2} P B, where the columns
    of B are an eta-orthonormal basis of the complement of the constant
    vector. Strictly below 1 only when the state space forms a single
    equivalence class, e.g. when every state has a self-loop.
    """
    if not _single_equivalence_class(model.P):
        raise AssumptionViolationError(
            "single-class",
            "state space splits into multiple equivalence classes; "
            "the orthogonal contraction factor is not below 1 "
            "(add self-loops to every state)",
        )
    if eta is None:
        eta = stationary_distribution(model)
    w = eta.eta
    sqrt_d = np.sqrt(w)
    N = null_space(w[None, :])  # basis of {x : eta^T x = 0}
    # Re-orthonormalize in the eta-inner product: B = N R^{-1} with QR of
    # D^{1/2} N, so B^T D B = I and eta^T B = 0.
    _, R = np.linalg.qr(sqrt_d[:, None] * N)
    B = np.linalg.solve(R.T, N.T).T
    factor = float(np.linalg.norm(sqrt_d[:, None] * (model.P @ B), ord=2))
    return factor


def add_self_loops(model: MarkovModel, delta: float) -> MarkovModel:
    """Replace P by (1 - delta) P + delta I; costs are unchanged."""
    if not 0.0 < delta < 1.0:
        raise StructuralError(f"self-loop probability must lie in (0,1), got {delta}")
    return MarkovModel(P=(1.0 - delta) * model.P + delta * np.eye(model.m), c=model.c)
