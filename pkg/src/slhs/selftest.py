"""Bell-state self-testing from maximal transition amplitudes.

Given orthonormal pairs ``phi^0, phi^1`` on each side and
``xi^{0,1} = (phi^0 +- phi^1)/sqrt(2)``, the conditions

    <phi0 phi0|rho|phi1 phi1> = 1/2,  <xi0 xi0|rho|xi1 xi1> = 1/2,
    <phi0 phi1|rho|phi1 phi0> = 0

force ``rho = |Phi><Phi|`` with ``Phi = (|phi0 phi0> + |phi1 phi1>)/sqrt(2)``.
This module checks the conditions, exposes the coefficient algebra that
leads from them to the conclusion, certifies fidelity, and searches for
near-feasible states with low fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .basis_opt import OptimizerConfig
from .qcore import BipartiteState, DensityMatrix, DimensionError, Ket, LocalBasis, fidelity_with_pure

CERT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SelfTestAssumptions:
    phiA: LocalBasis
    phiB: LocalBasis
    epsilon: float = 1e-9

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.phiA.dim < 2 or self.phiB.dim < 2:
            raise ValueError("phi bases need dimension at least 2")

    @classmethod
    def computational(cls, dA=2, dB=None, epsilon=1e-9):
        dB = dA if dB is None else dB
        return cls(LocalBasis.computational(dA), LocalBasis.computational(dB), epsilon)

    def pair(self, side):
        u = (self.phiA if side == "A" else self.phiB).unitary
        return u[:, 0], u[:, 1]

    def xi(self, side):
        p0, p1 = self.pair(side)
        return (p0 + p1) / np.sqrt(2), (p0 - p1) / np.sqrt(2)


@dataclass(frozen=True)
class ResidualReport:
    phi_aligned: float
    xi_aligned: float
    phi_swapped: float
    epsilon: float

    @property
    def values(self):
        return (self.phi_aligned, self.xi_aligned, self.phi_swapped)

    @property
    def max(self):
        return max(self.values)

    @property
    def met(self):
        return self.max <= self.epsilon

    def to_dict(self):
        return {
            "phi_aligned": self.phi_aligned,
            "xi_aligned": self.xi_aligned,
            "phi_swapped": self.phi_swapped,
        }


@dataclass(frozen=True, eq=False)
class AlgebraTrace:
    alpha: dict
    residuals: dict

    def coefficient(self, i, j, k, l):
        """``alpha_{ij}^{kl} = <phi^i phi^j| rho |phi^k phi^l>``."""
        return self.alpha[(i, j, k, l)]


@dataclass(frozen=True)
class SelfTestVerdict:
    assumptions_met: bool
    max_residual: float
    fidelity: float
    certified: bool
    residuals: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "assumptions_met": self.assumptions_met,
            "residuals": self.residuals,
            "max_residual": self.max_residual,
            "fidelity": self.fidelity,
            "certified": self.certified,
        }


class AssumptionsNotMet(ValueError):
    def __init__(self, report: ResidualReport):
        super().__init__(f"self-test assumptions not met: {report.to_dict()} > epsilon={report.epsilon}")
        self.report = report


def _check_dims(s, a):
    if a.phiA.dim != s.dA or a.phiB.dim != s.dB:
        raise DimensionError(
            f"phi bases ({a.phiA.dim}, {a.phiB.dim}) do not match state dims ({s.dA}, {s.dB})"
        )


def _element(mat, a0, b0, a1, b1):
    return complex(np.kron(a0, b0).conj() @ mat @ np.kron(a1, b1))


def _residuals_of(mat, a: SelfTestAssumptions):
    p0a, p1a = a.pair("A")
    p0b, p1b = a.pair("B")
    x0a, x1a = a.xi("A")
    x0b, x1b = a.xi("B")
    return (
        abs(_element(mat, p0a, p0b, p1a, p1b) - 0.5),
        abs(_element(mat, x0a, x0b, x1a, x1b) - 0.5),
        abs(_element(mat, p0a, p1b, p1a, p0b)),
    )


def check_assumptions(s: BipartiteState, a: SelfTestAssumptions) -> ResidualReport:
    _check_dims(s, a)
    r = _residuals_of(s.mat, a)
    return ResidualReport(*r, epsilon=a.epsilon)


def target_state(a: SelfTestAssumptions) -> Ket:
    p0a, p1a = a.pair("A")
    p0b, p1b = a.pair("B")
    return Ket((np.kron(p0a, p0b) + np.kron(p1a, p1b)) / np.sqrt(2))


def algebra_trace(s: BipartiteState, a: SelfTestAssumptions) -> AlgebraTrace:
    """Coefficients in the phi product basis and the residual of each step.

    Residual keys, all zero for the exact Bell state:

    * ``hermiticity``: ``max |alpha_ij^kl - conj(alpha_kl^ij)|``
    * ``normalization``: ``|sum alpha_ij^ij - 1|``
    * ``sign_sums``: deviation of the two ``(-1)``-weighted sums over the
      ``{0, 1}`` block from 2
    * ``block_balance``: ``|a00 - a01 - a10 + a11 - 1|`` on the diagonal
    * ``outside_population``: ``2 a01 + 2 a10 + sum of the other diagonals``
    * ``diagonal_pair``: ``|a00 + a11 - 1|``
    * ``cauchy_schwarz``: ``max(|alpha_ij^kl|^2 - alpha_ij^ij alpha_kl^kl, 0)``
    * ``product_bound``: ``max(1/4 - a00 a11, 0)``
    * ``squared_difference``: ``(a00 - a11)^2``
    * ``bell_coefficients``: largest deviation of ``a00, a11, alpha_00^11,
      alpha_11^00`` from 1/2, and of every other coefficient from 0
    """
    rep = check_assumptions(s, a)
    if not rep.met:
        raise AssumptionsNotMet(rep)
    dA, dB = s.dA, s.dB
    w = np.kron(a.phiA.unitary, a.phiB.unitary)
    c = w.conj().T @ s.mat @ w
    alpha = {}
    for i in range(dA):
        for j in range(dB):
            for k in range(dA):
                for l in range(dB):
                    alpha[(i, j, k, l)] = complex(c[i * dB + j, k * dB + l])

    def diag(i, j):
        return alpha[(i, j, i, j)].real

    herm = max(abs(v - alpha[(k, l, i, j)].conjugate()) for (i, j, k, l), v in alpha.items())
    norm = abs(sum(diag(i, j) for i in range(dA) for j in range(dB)) - 1.0)
    block = [(i, j) for i in (0, 1) for j in (0, 1)]
    sum_kl = sum((-1) ** (k + l) * alpha[(i, j, k, l)] for i, j in block for k, l in block)
    sum_ij = sum((-1) ** (i + j) * alpha[(i, j, k, l)] for i, j in block for k, l in block)
    sign_sums = max(abs(sum_kl - 2.0), abs(sum_ij - 2.0))
    a00, a01, a10, a11 = diag(0, 0), diag(0, 1), diag(1, 0), diag(1, 1)
    balance = abs(a00 - a01 - a10 + a11 - 1.0)
    others = sum(diag(i, j) for i in range(dA) for j in range(dB) if (i, j) not in block)
    outside = abs(2 * a01 + 2 * a10 + others)
    pair = abs(a00 + a11 - 1.0)
    cs = 0.0
    for (i, j, k, l), v in alpha.items():
        cs = max(cs, abs(v) ** 2 - diag(i, j) * diag(k, l))
    product = max(0.25 - a00 * a11, 0.0)
    sqdiff = (a00 - a11) ** 2
    bell_keys = {(0, 0, 0, 0), (1, 1, 1, 1), (0, 0, 1, 1), (1, 1, 0, 0)}
    bell = max(abs(v - 0.5) if key in bell_keys else abs(v) for key, v in alpha.items())
    residuals = {
        "hermiticity": herm,
        "normalization": norm,
        "sign_sums": sign_sums,
        "block_balance": balance,
        "outside_population": outside,
        "diagonal_pair": pair,
        "cauchy_schwarz": max(cs, 0.0),
        "product_bound": product,
        "squared_difference": sqdiff,
        "bell_coefficients": bell,
    }
    return AlgebraTrace(alpha, {k: float(v) for k, v in residuals.items()})


def certify(s: BipartiteState, a: SelfTestAssumptions, tol: float = CERT_TOL) -> SelfTestVerdict:
    rep = check_assumptions(s, a)
    fid = fidelity_with_pure(s.rho, target_state(a))
    certified = rep.met and fid >= 1 - tol
    return SelfTestVerdict(rep.met, rep.max, fid, certified, rep.to_dict())


# -- adversarial oracle -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AdversarialResult:
    state: BipartiteState
    infidelity: float
    max_residual: float
    feasible: bool
    converged: bool


_PENALTY_SCHEDULE = (1e2, 1e4, 1e6, 1e8)
FEASIBILITY_SLACK = 1e-7


def _constraint_functionals(a: SelfTestAssumptions):
    """``(M, target)`` pairs with residual ``|Tr(M rho) - target|``."""
    p0a, p1a = a.pair("A")
    p0b, p1b = a.pair("B")
    x0a, x1a = a.xi("A")
    x0b, x1b = a.xi("B")

    def functional(a0, b0, a1, b1):
        # <u|rho|v> = Tr(|v><u| rho)
        return np.outer(np.kron(a1, b1), np.kron(a0, b0).conj())

    return [
        (functional(p0a, p0b, p1a, p1b), 0.5),
        (functional(x0a, x0b, x1a, x1b), 0.5),
        (functional(p0a, p1b, p1a, p0b), 0.0),
    ]


def penalty_objective(a: SelfTestAssumptions, epsilon: float):
    """``(objective, parts, unpack)`` for the penalized search over ``x = (Re G, Im G)``.

    ``objective(x, mu)`` returns value and gradient of
    ``-(1 - F) + mu * sum(max(r_i - epsilon, 0)^2)``.
    """
    n = a.phiA.dim * a.phiB.dim
    phi = target_state(a).amps
    proj = np.outer(phi, phi.conj())
    functionals = _constraint_functionals(a)

    def unpack(x):
        g = (x[: n * n] + 1j * x[n * n :]).reshape(n, n)
        t = np.vdot(g, g).real
        return g, t, g @ g.conj().T / t

    def parts(x):
        _, _, rho = unpack(x)
        r = [abs(np.trace(m @ rho) - c) for m, c in functionals]
        infid = 1.0 - np.trace(proj @ rho).real
        excess = sum(max(v - epsilon, 0.0) ** 2 for v in r)
        return infid, max(r), excess

    def objective(x, mu):
        # value and gradient; for z = Tr(M G G^+)/t, dz/dG* = (M G - z G)/t
        g, t, rho = unpack(x)
        fid = np.trace(proj @ rho).real
        value = fid - 1.0
        grad = (proj @ g - fid * g) / t
        for m, c in functionals:
            z = np.trace(m @ rho)
            r = abs(z - c)
            if r <= epsilon:
                continue
            w = mu * (r - epsilon) / r
            value += mu * (r - epsilon) ** 2
            dz = (m @ g - z * g) / t
            dzc = (m.conj().T @ g - np.conj(z) * g) / t
            grad = grad + w * (np.conj(z - c) * dz + (z - c) * dzc)
        grad = 2 * grad.reshape(-1)
        return value, np.concatenate([grad.real, grad.imag])

    return objective, parts, unpack


def adversarial_search(epsilon: float, dA: int = 2, dB: int = 2, cfg: OptimizerConfig | None = None,
                       assumptions: SelfTestAssumptions | None = None) -> AdversarialResult:
    """Maximize ``1 - F`` subject to all residuals ``<= epsilon``.

    Quadratic penalty on the excess residuals with an increasing weight
    schedule; states are ``G G^dagger / Tr`` of an unconstrained complex
    ``G``, optimized by L-BFGS with the analytic gradient. Returns the worst
    state found among near-feasible candidates (excess residual at most
    ``FEASIBILITY_SLACK``); if none qualifies, the least infeasible one with
    ``feasible=False``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    cfg = OptimizerConfig(restarts=32, max_evals=4000) if cfg is None else cfg
    a = SelfTestAssumptions.computational(dA, dB, epsilon) if assumptions is None else assumptions
    n = dA * dB
    objective, parts, unpack = penalty_objective(a, epsilon)

    best = None
    converged = True
    for rnd in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, rnd])
        x = rng.standard_normal(2 * n * n)
        for mu in _PENALTY_SCHEDULE:
            res = minimize(
                objective,
                x,
                args=(mu,),
                jac=True,
                method="L-BFGS-B",
                options={"maxfun": cfg.max_evals, "maxiter": cfg.max_evals, "ftol": 1e-16, "gtol": 1e-14},
            )
            x = res.x
            converged = converged and res.status != 1
        infid, rmax, _ = parts(x)
        feasible = rmax <= epsilon + FEASIBILITY_SLACK
        cand = (feasible, infid if feasible else -rmax, x, infid, rmax)
        if best is None or cand[:2] > best[:2]:
            best = cand
    feasible, _, x, infid, rmax = best
    rho = unpack(x)[2]
    state = BipartiteState(dA, dB, DensityMatrix(0.5 * (rho + rho.conj().T)))
    return AdversarialResult(state, max(float(infid), 0.0), float(rmax), bool(feasible), bool(converged))
