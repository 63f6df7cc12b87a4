"""The transition-based nonlocality measure and local-channel probes.

For a ``d x d`` state the measure sums, over ordered index pairs with
``a != a'`` and ``b != b'``, the excess of ``|<i^a j^b| rho |i^a' j^b'>|`` over
the separable ceiling ``1/d**2``::

    N(rho) = sum max(|<i^a j^b| rho |i^a' j^b'>| - 1/d**2, 0)

Local operations are products of Kraus maps ``r_k^A (x) r_k^B``, either paired
on a shared index ``k`` or enumerated over all index pairs. Channels may be
trace non-increasing; each branch is renormalized by its weight ``p_k``.

The probes check, on random inputs, that mixing never increases ``N`` (an
exact consequence of the triangle inequality), that element-wise
monotonicity holds for diagonal channels, and that separable inputs stay
inside every inequality after local channels.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .basis_opt import OptimizerConfig, optimize
from .families import random_separable
from .inequalities import KINDS, evaluate, max_violation
from .qcore import BipartiteState, DensityMatrix, DimensionError, LocalBasis, ginibre, haar_unitary, random_density

COMPLETENESS_TOL = 1e-10
BRANCH_CUTOFF = 1e-14
SLACK_TOL = 1e-9

SIDES = ("A", "B", "joint")
CHANNEL_KINDS = ("diagonal", "mixed_unitary", "general")


class ChannelError(ValueError):
    """A Kraus set violates completeness or its declared structure."""


class MeasureVariant(str, Enum):
    FIXED_BASIS = "fixed_basis"
    PER_TERM_OPT = "per_term_opt"
    SHARED_OPT = "shared_opt"


def _as_variant(v):
    return v if isinstance(v, MeasureVariant) else MeasureVariant(v)


# -- channels ----------------------------------------------------------------


def _readonly(m):
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Kraus operators acting on one side (or jointly).

    ``validate=False`` skips the completeness check; this is used for the
    second half of a paired channel, whose operators are only constrained
    jointly with their partners.
    """

    side: str
    ops: tuple
    kind: str = "general"
    validate: bool = True

    def __post_init__(self):
        if self.side not in SIDES:
            raise ChannelError(f"side must be one of {SIDES}, got {self.side!r}")
        if self.kind not in CHANNEL_KINDS:
            raise ChannelError(f"kind must be one of {CHANNEL_KINDS}, got {self.kind!r}")
        ops = tuple(_readonly(k) for k in self.ops)
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(k.shape != shape for k in ops):
            raise ChannelError("Kraus operators must be square and share one shape")
        object.__setattr__(self, "ops", ops)
        if self.kind == "diagonal":
            for k in ops:
                if np.abs(k - np.diag(np.diag(k))).max() > COMPLETENESS_TOL:
                    raise ChannelError("kind='diagonal' requires diagonal Kraus operators")
        if self.validate:
            check_completeness(ops)

    @property
    def dim(self):
        return self.ops[0].shape[0]

    def completeness(self):
        return sum(k.conj().T @ k for k in self.ops)


def check_completeness(ops):
    """Raise :class:`ChannelError` unless ``sum K^dagger K <= I`` up to 1e-10."""
    s = sum(k.conj().T @ k for k in ops)
    top = np.linalg.eigvalsh(0.5 * (s + s.conj().T)).max()
    if top > 1 + COMPLETENESS_TOL:
        raise ChannelError(f"sum of K^dagger K exceeds the identity (largest eigenvalue {top:.12g})")
    return top


def identity_channel(d, side="A"):
    return KrausChannel(side, [np.eye(d)], "diagonal")


def phase_damping(gamma, side="A"):
    if not 0 <= gamma <= 1:
        raise ChannelError("gamma must lie in [0, 1]")
    k0 = np.diag([1.0, np.sqrt(1 - gamma)])
    k1 = np.diag([0.0, np.sqrt(gamma)])
    return KrausChannel(side, [k0, k1], "diagonal")


def amplitude_damping(gamma, side="A"):
    if not 0 <= gamma <= 1:
        raise ChannelError("gamma must lie in [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]])
    return KrausChannel(side, [k0, k1], "general")


def depolarizing(d, side="A"):
    """Fully depolarizing map ``rho -> Tr(rho) I/d`` with Kraus ops ``|i><j|/sqrt(d)``."""
    ops = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d))
            k[i, j] = 1 / np.sqrt(d)
            ops.append(k)
    return KrausChannel(side, ops, "general")


def random_diagonal(d, rng, n_ops=2, side="A"):
    """Diagonal Kraus set whose squared moduli sum to one on every basis state."""
    g = ginibre(n_ops, rng, d)
    g /= np.linalg.norm(g, axis=0)
    return KrausChannel(side, [np.diag(row) for row in g], "diagonal")


def random_kraus(d, rng, n_ops=2, side="A"):
    """Kraus blocks of a random isometry ``C^d -> C^(n_ops d)`` (QR of a Ginibre matrix)."""
    q, _ = np.linalg.qr(ginibre(n_ops * d, rng, d))
    return KrausChannel(side, [q[k * d : (k + 1) * d] for k in range(n_ops)], "general")


def paired_mixed_unitary(d, weights, rng):
    """Paired channel ``{(sqrt(q_k) U_k, V_k)}`` with Haar-random unitaries.

    Each side alone is not complete (the B operators are unitaries), only the
    pairs are, so the B half is built unvalidated.
    """
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ChannelError("mixing weights must be non-negative and sum to 1")
    ua = [np.sqrt(q) * haar_unitary(d, rng) for q in weights]
    ub = [haar_unitary(d, rng) for _ in weights]
    return (
        KrausChannel("A", ua, "mixed_unitary", validate=False),
        KrausChannel("B", ub, "mixed_unitary", validate=False),
    )


@dataclass(frozen=True, eq=False)
class ChannelOutput:
    branches: tuple
    total: BipartiteState

    @property
    def trace(self):
        return float(np.trace(self.total.mat).real)


def _joint_ops(chanA, chanB, paired):
    if paired:
        if len(chanA.ops) != len(chanB.ops):
            raise ChannelError("paired channels need equal numbers of Kraus operators")
        return [np.kron(ka, kb) for ka, kb in zip(chanA.ops, chanB.ops)]
    return [np.kron(ka, kb) for ka in chanA.ops for kb in chanB.ops]


def apply_channel(s: BipartiteState, chanA: KrausChannel, chanB: KrausChannel, paired=False) -> ChannelOutput:
    """Apply ``r_k^A (x) r_k^B`` and return the renormalized branches and their sum."""
    if chanA.dim != s.dA or chanB.dim != s.dB:
        raise DimensionError(f"channels of dimensions {chanA.dim}, {chanB.dim} on a {s.dA}x{s.dB} state")
    ops = _joint_ops(chanA, chanB, paired)
    check_completeness(ops)
    branches = []
    total = np.zeros_like(s.mat)
    for k in ops:
        out = k @ s.mat @ k.conj().T
        p = float(np.trace(out).real)
        if p < BRANCH_CUTOFF:
            continue
        total += out
        branches.append((p, BipartiteState(s.dA, s.dB, DensityMatrix(out / p))))
    return ChannelOutput(tuple(branches), BipartiteState(s.dA, s.dB, DensityMatrix(total)))


# -- the measure ---------------------------------------------------------------


def _term_keys(d):
    return [
        (a, ap, b, bp)
        for a in range(d)
        for ap in range(d)
        for b in range(d)
        for bp in range(d)
        if a != ap and b != bp
    ]


def _excess_terms(r, d):
    off = 1.0 / d**2
    return {
        (a, ap, b, bp): max(abs(r[a * d + b, ap * d + bp]) - off, 0.0) for a, ap, b, bp in _term_keys(d)
    }


@dataclass(frozen=True, eq=False)
class MeasureResult:
    """Value of ``N`` with its per-term contributions.

    ``bases`` is a ``(basisA, basisB)`` pair for the fixed and shared
    variants, and a map from term key to such a pair for ``per_term_opt``.
    """

    value: float
    per_term: dict
    bases: object
    variant: MeasureVariant

    def to_dict(self):
        return {
            "variant": self.variant.value,
            "value": self.value,
            "per_term": {",".join(map(str, k)): v for k, v in sorted(self.per_term.items())},
        }


class _MeasureObjective:
    def __init__(self, rho, d):
        self.rho = np.ascontiguousarray(rho)
        self.d = d
        self.offset = 1.0 / d**2

    def __call__(self, ua, ub):
        return _kernels.measure_sum(self.rho, ua, ub, self.d, self.offset)

    def search(self, x, u0a, u0b):
        return _kernels.search_measure(x, u0a, u0b, self.rho, self.d, self.offset)


class _TermObjective:
    def __init__(self, rho, d, key):
        a, ap, b, bp = key
        self.rho = np.ascontiguousarray(rho)
        self.row, self.col = a * d + b, ap * d + bp

    def __call__(self, ua, ub):
        return abs(_kernels.transform(self.rho, ua, ub)[self.row, self.col])


def n_measure(s: BipartiteState, variant="fixed_basis", basisA=None, basisB=None, cfg=None) -> MeasureResult:
    """Evaluate ``N`` under one of the three basis readings.

    ``fixed_basis`` needs both bases. ``per_term_opt`` maximizes every term
    over its own basis pair; ``shared_opt`` maximizes the whole sum over one
    pair. Optimized variants default to 8 restarts.
    """
    variant = _as_variant(variant)
    if s.dA != s.dB:
        raise DimensionError(f"the measure is defined for d x d systems, got {s.dA}x{s.dB}")
    d = s.dA
    cfg = OptimizerConfig(restarts=8) if cfg is None else cfg
    if variant is MeasureVariant.FIXED_BASIS:
        if basisA is None or basisB is None:
            raise ValueError("fixed_basis needs both basisA and basisB")
        if basisA.dim != d or basisB.dim != d:
            raise DimensionError("basis dimensions do not match the state")
        r = _kernels.transform(np.ascontiguousarray(s.mat), basisA.unitary, basisB.unitary)
        terms = _excess_terms(r, d)
        return MeasureResult(float(sum(terms.values())), terms, (basisA, basisB), variant)
    if variant is MeasureVariant.SHARED_OPT:
        point = optimize(_MeasureObjective(s.mat, d), d, cfg)
        fixed = n_measure(s, "fixed_basis", point.basisA, point.basisB)
        return MeasureResult(fixed.value, fixed.per_term, fixed.bases, variant)
    off = 1.0 / d**2
    terms, bases = {}, {}
    for key in _term_keys(d):
        point = optimize(_TermObjective(s.mat, d, key), d, cfg)
        terms[key] = max(point.score - off, 0.0)
        bases[key] = (point.basisA, point.basisB)
    return MeasureResult(float(sum(terms.values())), terms, bases, variant)


def _computational_pair(d):
    return LocalBasis.computational(d), LocalBasis.computational(d)


def _n(s, variant, cfg):
    variant = _as_variant(variant)
    if variant is MeasureVariant.FIXED_BASIS:
        return n_measure(s, variant, *_computational_pair(s.dA)).value
    return n_measure(s, variant, cfg=cfg).value


# -- probes ----------------------------------------------------------------


@dataclass(frozen=True)
class AxiomBReport:
    """Slacks ``rhs - lhs`` of the element-wise and full-measure monotonicity checks.

    Element-wise: for every measured element ``(ab, a'b')`` of the
    computational basis, ``sum_k |<ab| K_k rho K_k^dagger |a'b'>|`` against
    ``|<ab| rho |a'b'>|``; ``elementwise_slack`` is the smallest slack.
    """

    elementwise_lhs: float
    elementwise_rhs: float
    elementwise_slack: float
    measure_lhs: float
    measure_rhs: float
    measure_slack: float
    variant: str

    @property
    def negative(self):
        return self.elementwise_slack < -SLACK_TOL or self.measure_slack < -SLACK_TOL


def axiom_b_probe(s: BipartiteState, chanA, chanB, paired=False, variant="fixed_basis", cfg=None) -> AxiomBReport:
    variant = _as_variant(variant)
    d = s.dA
    ops = _joint_ops(chanA, chanB, paired)
    out = apply_channel(s, chanA, chanB, paired)
    keys = _term_keys(d)
    rows = np.array([a * d + b for a, ap, b, bp in keys])
    cols = np.array([ap * d + bp for a, ap, b, bp in keys])
    before = np.abs(s.mat[rows, cols])
    after = sum(np.abs((k @ s.mat @ k.conj().T)[rows, cols]) for k in ops)
    worst = int(np.argmin(before - after))
    m_rhs = _n(s, variant, cfg)
    m_lhs = sum(p * _n(b, variant, cfg) for p, b in out.branches)
    return AxiomBReport(
        float(after[worst]),
        float(before[worst]),
        float(before[worst] - after[worst]),
        float(m_lhs),
        float(m_rhs),
        float(m_rhs - m_lhs),
        variant.value,
    )


@dataclass(frozen=True)
class AxiomCReport:
    lhs: float
    rhs: float
    slack: float
    variant: str


def axiom_c_probe(components, variant="fixed_basis", cfg=None) -> AxiomCReport:
    """Compare ``N(sum p_i rho_i)`` with ``sum p_i N(rho_i)``."""
    if not components:
        raise ValueError("need at least one component")
    weights = np.array([p for p, _ in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ValueError(f"weights must be non-negative and sum to 1, got sum {weights.sum()!r}")
    dims = {(st.dA, st.dB) for _, st in components}
    if len(dims) != 1:
        raise DimensionError("all components must share one subsystem split")
    dA, dB = dims.pop()
    mix = sum(p * st.mat for p, st in components)
    lhs = _n(BipartiteState(dA, dB, DensityMatrix(mix)), variant, cfg)
    rhs = sum(p * _n(st, variant, cfg) for p, st in components)
    return AxiomCReport(float(lhs), float(rhs), float(rhs - lhs), _as_variant(variant).value)


@dataclass(frozen=True)
class ProbeRow:
    trial: int
    slack: float
    variant: str
    channel_kind: str


@dataclass(frozen=True, eq=False)
class ProbeReport:
    name: str
    rows: tuple
    violations: int

    @property
    def min_slack(self):
        return min(r.slack for r in self.rows)

    def to_csv_rows(self):
        yield ("trial", "slack", "variant", "channel_kind")
        for r in self.rows:
            yield (r.trial, repr(r.slack), r.variant, r.channel_kind)


PROBE_CHANNELS = ("diagonal", "amplitude_damping", "general", "mixed_unitary", "depolarizing")


def random_channel_pair(kind, d, rng):
    """``(chanA, chanB, paired)`` for one of :data:`PROBE_CHANNELS`."""
    if kind == "diagonal":
        return random_diagonal(d, rng, 2, "A"), random_diagonal(d, rng, 2, "B"), False
    if kind == "amplitude_damping":
        if d != 2:
            raise DimensionError("amplitude damping is a qubit channel")
        g = rng.uniform(0, 1, size=2)
        return amplitude_damping(g[0], "A"), amplitude_damping(g[1], "B"), False
    if kind == "general":
        return random_kraus(d, rng, 2, "A"), random_kraus(d, rng, 2, "B"), False
    if kind == "mixed_unitary":
        a, b = paired_mixed_unitary(d, rng.dirichlet(np.ones(3)), rng)
        return a, b, True
    if kind == "depolarizing":
        return depolarizing(d, "A"), depolarizing(d, "B"), False
    raise ValueError(f"unknown channel kind {kind!r}; expected one of {PROBE_CHANNELS}")


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SLHS_THREADS", "")
    return max(1, int(env)) if env.strip() else 1


def _run_trials(fn, args, workers):
    workers = _workers(workers)
    if workers == 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, args, chunksize=max(1, len(args) // (4 * workers))))


def _axiom_b_trial(args):
    seed, trial, kind, d, variant = args
    rng = np.random.default_rng([seed, trial])
    s = BipartiteState(d, d, random_density(d * d, rng))
    chanA, chanB, paired = random_channel_pair(kind, d, rng)
    rep = axiom_b_probe(s, chanA, chanB, paired, variant)
    return [
        ProbeRow(trial, rep.elementwise_slack, "elementwise", kind),
        ProbeRow(trial, rep.measure_slack, rep.variant, kind),
    ]


def axiom_b_trials(seed, trials, channel_kind="diagonal", d=2, variant="fixed_basis", workers=None) -> ProbeReport:
    """Element-wise and full-measure monotonicity on Ginibre states."""
    variant = _as_variant(variant).value
    out = _run_trials(_axiom_b_trial, [(seed, t, channel_kind, d, variant) for t in range(trials)], workers)
    rows = tuple(r for pair in out for r in pair)
    return ProbeReport("axiom_b", rows, sum(r.slack < -SLACK_TOL for r in rows))


def _axiom_c_trial(args):
    seed, trial, d = args
    rng = np.random.default_rng([seed, trial])
    n = int(rng.integers(2, 5))
    weights = rng.dirichlet(np.ones(n))
    comps = [(float(w), BipartiteState(d, d, random_density(d * d, rng))) for w in weights]
    # rounding can leave the weights a few ulps off one
    comps[-1] = (1.0 - sum(w for w, _ in comps[:-1]), comps[-1][1])
    rep = axiom_c_probe(comps)
    return [ProbeRow(trial, rep.slack, rep.variant, "mixing")]


def axiom_c_trials(seed, trials, d=2, workers=None) -> ProbeReport:
    out = _run_trials(_axiom_c_trial, [(seed, t, d) for t in range(trials)], workers)
    rows = tuple(r for rs in out for r in rs)
    return ProbeReport("axiom_c", rows, sum(r.slack < -SLACK_TOL for r in rows))


def _inequality_slacks(s, optimized_cfg=None):
    """Smallest ``bound - lhs`` over all inequality kinds and whether any is violated."""
    worst, violated = np.inf, False
    for kind in KINDS:
        rep = evaluate(s, kind) if optimized_cfg is None else max_violation(s, kind, optimized_cfg)
        worst = min(worst, rep.bound - rep.lhs)
        violated = violated or rep.violated
    return worst, violated


def _theorem1_trial(args):
    seed, trial, d, cfg = args
    rng = np.random.default_rng([seed, trial])
    s = random_separable(rng, int(rng.integers(1, 5)), d, d)
    kinds = [k for k in PROBE_CHANNELS if d == 2 or k != "amplitude_damping"]
    kind = kinds[int(rng.integers(len(kinds)))]
    chanA, chanB, paired = random_channel_pair(kind, d, rng)
    out = apply_channel(s, chanA, chanB, paired)
    fixed, bad = _inequality_slacks(out.total)
    for _, branch in out.branches:
        sl, v = _inequality_slacks(branch)
        fixed, bad = min(fixed, sl), bad or v
    opt, bad_opt = _inequality_slacks(out.total, cfg)
    return [
        (ProbeRow(trial, float(fixed), "fixed_basis", kind), bad),
        (ProbeRow(trial, float(opt), "shared_opt", kind), bad_opt),
    ]


def theorem1_probe(seed, trials, d=2, cfg=None, workers=None) -> ProbeReport:
    """Separable inputs through random local channels, checked against every inequality.

    Each trial uses ``default_rng([seed, trial])`` to draw a separable state
    and a channel family from :data:`PROBE_CHANNELS`. The total output and
    every branch are checked in the computational bases; the total is also
    checked at optimized bases (``cfg``, default 2 restarts of 300
    evaluations).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    cfg = OptimizerConfig(restarts=2, max_evals=300, seed=seed) if cfg is None else cfg
    out = _run_trials(_theorem1_trial, [(seed, t, d, cfg) for t in range(trials)], workers)
    flat = [x for rs in out for x in rs]
    return ProbeReport("theorem1", tuple(r for r, _ in flat), sum(v for _, v in flat))
