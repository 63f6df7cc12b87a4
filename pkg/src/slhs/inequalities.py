"""Transition magnitudes and the SLHS inequality evaluators.

For local bases ``i`` (Alice) and ``j`` (Bob) the joint transition magnitude
is ``|<i^a j^b| rho |i^a' j^b'>|``. The three inequality patterns, summed over
ordered pairs ``a != a'`` (and ``b != b'``), are

* aligned:  ``|<i^a  j^a| rho |i^a' j^a'>|``, bound ``(d - 1)/d``
* swapped:  ``|<i^a' j^a| rho |i^a  j^a'>|``, bound ``(d - 1)/d``
* combined: ``|<i^a' j^b| rho |i^a  j^b'>|``, bound ``(d - 1)**2``

Every separable state satisfies all three.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .basis_opt import OptimizerConfig, optimize
from .qcore import BipartiteState, DensityMatrix, DimensionError, LocalBasis, Ket

VIOLATION_SLACK = 1e-12


class InequalityKind(str, Enum):
    ALIGNED = "aligned"
    SWAPPED = "swapped"
    COMBINED = "combined"

    @property
    def code(self):
        return {"aligned": _kernels.ALIGNED, "swapped": _kernels.SWAPPED, "combined": _kernels.COMBINED}[
            self.value
        ]


KINDS = tuple(InequalityKind)


@dataclass(frozen=True)
class TransitionSpec:
    basis: LocalBasis
    a: int
    a_prime: int

    def __post_init__(self):
        d = self.basis.dim
        if not (0 <= self.a < d and 0 <= self.a_prime < d):
            raise IndexError(f"indices ({self.a}, {self.a_prime}) out of range for d={d}")
        if self.a == self.a_prime:
            raise ValueError("a transition needs two distinct basis vectors")


@dataclass(frozen=True, eq=False)
class InequalityReport:
    kind: InequalityKind
    lhs: float
    bound: float
    terms: dict
    violated: bool
    basisA: LocalBasis
    basisB: LocalBasis
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "lhs": self.lhs,
            "bound": self.bound,
            "violated": self.violated,
            "converged": self.converged,
            "terms": {",".join(map(str, k)): v for k, v in sorted(self.terms.items())},
            "basis_a": [[[z.real, z.imag] for z in row] for row in self.basisA.unitary],
            "basis_b": [[[z.real, z.imag] for z in row] for row in self.basisB.unitary],
        }


def _as_kind(kind):
    return kind if isinstance(kind, InequalityKind) else InequalityKind(kind)


def local_transition(rho, t: TransitionSpec) -> float:
    """``|<i^a| rho |i^a'>|`` for a single-system state."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if mat.shape != (t.basis.dim, t.basis.dim):
        raise DimensionError(f"state of shape {mat.shape} vs basis of dimension {t.basis.dim}")
    u = t.basis.unitary
    return float(abs(u[:, t.a].conj() @ mat @ u[:, t.a_prime]))


def joint_transition(s: BipartiteState, basisA: LocalBasis, basisB: LocalBasis, a, a_prime, b, b_prime) -> float:
    if basisA.dim != s.dA or basisB.dim != s.dB:
        raise DimensionError("basis dimensions do not match the state")
    for x, dim in ((a, s.dA), (a_prime, s.dA), (b, s.dB), (b_prime, s.dB)):
        if not 0 <= x < dim:
            raise IndexError(f"basis index {x} out of range for dimension {dim}")
    if a == a_prime or b == b_prime:
        raise ValueError("joint transitions need a != a' and b != b'")
    ua, ub = basisA.unitary, basisB.unitary
    bra = np.kron(ua[:, a], ub[:, b])
    ket = np.kron(ua[:, a_prime], ub[:, b_prime])
    return float(abs(bra.conj() @ s.mat @ ket))


def bound(kind, d: int) -> float:
    kind = _as_kind(kind)
    if kind is InequalityKind.COMBINED:
        return float((d - 1) ** 2)
    return (d - 1) / d


def _term_map(r, d, kind):
    """Per-term magnitudes keyed by ``(a, a', b, b')`` from a rotated matrix ``r``."""
    terms = {}
    for a in range(d):
        for ap in range(d):
            if a == ap:
                continue
            if kind is InequalityKind.ALIGNED:
                terms[(a, ap, a, ap)] = abs(r[a * d + a, ap * d + ap])
            elif kind is InequalityKind.SWAPPED:
                terms[(a, ap, a, ap)] = abs(r[ap * d + a, a * d + ap])
            else:
                for b in range(d):
                    for bp in range(d):
                        if b != bp:
                            terms[(a, ap, b, bp)] = abs(r[ap * d + b, a * d + bp])
    return {k: float(v) for k, v in terms.items()}


def _square(s):
    if s.dA != s.dB:
        raise DimensionError(f"inequalities are defined for d x d systems, got {s.dA}x{s.dB}")
    return s.dA


def evaluate(s: BipartiteState, kind, basisA: LocalBasis | None = None, basisB: LocalBasis | None = None) -> InequalityReport:
    """Evaluate one inequality at fixed local bases (computational by default)."""
    kind = _as_kind(kind)
    d = _square(s)
    basisA = LocalBasis.computational(d) if basisA is None else basisA
    basisB = LocalBasis.computational(d) if basisB is None else basisB
    if basisA.dim != d or basisB.dim != d:
        raise DimensionError("basis dimensions do not match the state")
    w = np.kron(basisA.unitary, basisB.unitary)
    terms = _term_map(w.conj().T @ s.mat @ w, d, kind)
    lhs = float(sum(terms.values()))
    b = bound(kind, d)
    return InequalityReport(kind, lhs, b, terms, lhs > b + VIOLATION_SLACK, basisA, basisB)


class LhsObjective:
    """``f(UA, UB) -> lhs`` backed by the active kernel, with a fused search path."""

    def __init__(self, s: BipartiteState, kind):
        self.kind = _as_kind(kind)
        self.d = _square(s)
        self.rho = np.ascontiguousarray(s.mat)
        self.code = self.kind.code

    def __call__(self, ua, ub):
        return _kernels.inequality_lhs(self.rho, ua, ub, self.d, self.code)

    def search(self, x, u0a, u0b):
        return _kernels.search_lhs(x, u0a, u0b, self.rho, self.d, self.code)


def lhs_objective(s: BipartiteState, kind):
    return LhsObjective(s, kind)


def max_violation(s: BipartiteState, kind, opt: OptimizerConfig | None = None) -> InequalityReport:
    """Evaluate at the best local bases found by :func:`basis_opt.optimize`."""
    kind = _as_kind(kind)
    d = _square(s)
    point = optimize(lhs_objective(s, kind), d, opt)
    report = evaluate(s, kind, point.basisA, point.basisB)
    fixed = evaluate(s, kind)
    if fixed.lhs > report.lhs:
        report = fixed
    return InequalityReport(
        kind,
        report.lhs,
        report.bound,
        report.terms,
        report.violated,
        report.basisA,
        report.basisB,
        converged=point.converged,
        extra={"evals": point.evals},
    )


# -- bound attainability ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundOracleResult:
    d: int
    value: float
    target: float
    rhoA: np.ndarray
    rhoB: np.ndarray
    transitionsA: np.ndarray
    transitionsB: np.ndarray


def _state_from_params(x, d):
    g = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
    m = g @ g.conj().T
    return m / np.trace(m).real


def product_transition_sum(rho_a, rho_b) -> float:
    """``sum_{a != a'} |rhoA[a, a']| |rhoB[a, a']|`` for two single-system states."""
    ta, tb = np.abs(rho_a), np.abs(rho_b)
    return float((ta * tb).sum() - (np.diag(ta) * np.diag(tb)).sum())


def bound_oracle(d: int, cfg: OptimizerConfig | None = None) -> BoundOracleResult:
    """Numerically maximize :func:`product_transition_sum` over state pairs.

    States are parameterized as ``G G^dagger / Tr`` with unconstrained complex
    ``G``; each restart runs BFGS from a Ginibre start.
    """
    cfg = OptimizerConfig(restarts=8) if cfg is None else cfg
    n = 2 * d * d

    def f(x):
        return -product_transition_sum(_state_from_params(x[:n], d), _state_from_params(x[n:], d))

    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        x0 = rng.standard_normal(2 * n)
        res = minimize(f, x0, method="BFGS", options={"gtol": 1e-10, "maxiter": cfg.max_evals})
        if best is None or res.fun < best.fun:
            best = res
    rho_a = _state_from_params(best.x[:n], d)
    rho_b = _state_from_params(best.x[n:], d)
    off = ~np.eye(d, dtype=bool)
    return BoundOracleResult(
        d,
        -float(best.fun),
        (d - 1) / d,
        rho_a,
        rho_b,
        np.abs(rho_a)[off],
        np.abs(rho_b)[off],
    )


def uniform_superposition(d: int) -> Ket:
    return Ket(np.ones(d) / np.sqrt(d))
