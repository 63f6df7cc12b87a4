"""State families and closed-form detection thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qcore import BipartiteState, DensityMatrix, Ket, ginibre, random_density

BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


def bell(kind: str = "phi+") -> Ket:
    s = 1 / np.sqrt(2)
    amps = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    if kind not in amps:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    return Ket(np.array(amps[kind], dtype=complex))


@dataclass(frozen=True)
class WernerSpec:
    p: float
    alpha: float = 0.5
    kind: str = "phi_plus"
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.kind not in ("phi_plus", "psi_plus"):
            raise ValueError(f"kind must be 'phi_plus' or 'psi_plus', got {self.kind!r}")


@dataclass(frozen=True)
class IsotropicSpec:
    d: int
    p: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be at least 2, got {self.d}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class ThresholdTable:
    d: int
    entangled: float
    steerable: float
    slhs: float


def werner_ket(spec: WernerSpec) -> Ket:
    amps = np.zeros(4, dtype=complex)
    lo, hi = (0, 3) if spec.kind == "phi_plus" else (1, 2)
    amps[lo] = np.sqrt(spec.alpha)
    amps[hi] = np.sqrt(1 - spec.alpha) * np.exp(1j * spec.phase)
    return Ket(amps)


def werner(spec: WernerSpec) -> BipartiteState:
    """``p |psi><psi| + (1 - p) I/4`` with the generalized Bell ket of ``spec``."""
    psi = werner_ket(spec)
    mat = spec.p * psi.projector() + (1 - spec.p) * np.eye(4) / 4
    return BipartiteState(2, 2, DensityMatrix(mat))


def isotropic(spec: IsotropicSpec) -> BipartiteState:
    d, p = spec.d, spec.p
    omega = np.zeros(d * d)
    omega[[i * d + i for i in range(d)]] = 1.0
    mat = (1 - p) * np.eye(d * d) / d**2 + (p / d) * np.outer(omega, omega)
    return BipartiteState(d, d, DensityMatrix(mat))


def threshold_fractions(d: int):
    """Exact (entangled, steerable, slhs) thresholds on ``p`` for the isotropic family."""
    if d < 2:
        raise ValueError("d must be at least 2")
    harmonic = sum(Fraction(1, r) for r in range(2, d + 1))
    return Fraction(1, d + 1), harmonic / (d - 1), Fraction(1, d)


def thresholds(d: int) -> ThresholdTable:
    ent, steer, slhs = threshold_fractions(d)
    return ThresholdTable(d, float(ent), float(steer), float(slhs))


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def lhs_assemblage_state(seed, settings: int, d: int = 2, outcomes=None) -> BipartiteState:
    """Random state ``sum_{a,theta} p(a, theta) |a><a| (x) rho_{a|theta}``.

    Flags on A are computational-basis projectors for the first ``outcomes``
    values of ``a`` (all ``d`` by default); the conditional states on B are
    Ginibre states and ``p(a, theta)`` is Dirichlet-uniform.
    """
    outcomes = d if outcomes is None else outcomes
    if settings < 1:
        raise ValueError("settings must be at least 1")
    if not 1 <= outcomes <= d:
        raise ValueError(f"outcomes must lie in [1, {d}]")
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(outcomes * settings)).reshape(outcomes, settings)
    mat = np.zeros((d * d, d * d), dtype=complex)
    for a in range(outcomes):
        flag = np.zeros((d, d))
        flag[a, a] = 1.0
        for t in range(settings):
            mat += weights[a, t] * np.kron(flag, random_density(d, rng).mat)
    return BipartiteState(d, d, DensityMatrix(mat))


def random_separable(seed, terms: int, dA: int = 2, dB: int = 2) -> BipartiteState:
    """Dirichlet-weighted mixture of ``terms`` Ginibre product states."""
    if not 1 <= terms <= 16:
        raise ValueError("terms must lie in [1, 16]")
    rng = _rng(seed)
    q = rng.dirichlet(np.ones(terms))
    mat = np.zeros((dA * dB, dA * dB), dtype=complex)
    for w in q:
        mat += w * np.kron(random_density(dA, rng).mat, random_density(dB, rng).mat)
    return BipartiteState(dA, dB, DensityMatrix(mat))


def random_pure_product(seed, dA: int = 2, dB: int = 2) -> BipartiteState:
    rng = _rng(seed)
    u = ginibre(dA, rng, 1)[:, 0]
    v = ginibre(dB, rng, 1)[:, 0]
    psi = np.kron(u / np.linalg.norm(u), v / np.linalg.norm(v))
    return BipartiteState(dA, dB, DensityMatrix(np.outer(psi, psi.conj())))
