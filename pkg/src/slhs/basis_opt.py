"""Maximization of basis-dependent objectives over pairs of local unitaries.

A basis pair is searched as ``U0 @ exp(i H(x))`` around a starting pair
``U0`` (the identity for restart 0, Haar-random afterwards), where ``H(x)``
is the generalized Gell-Mann expansion of :func:`hermitian_from_params`.
Restart ``r`` draws from its own stream ``default_rng([seed, r])``, so the
result for ``n`` restarts is a prefix of the run with ``n + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur
from scipy.optimize import minimize, minimize_scalar

from . import _kernels
from .qcore import LocalBasis, haar_unitary

METHODS = ("nelder_mead", "coordinate_rotations")


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_evals: int = 2000
    seed: int = 0
    tol: float = 1e-8
    method: str = "nelder_mead"

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True, eq=False)
class BasisPoint:
    paramsA: np.ndarray
    paramsB: np.ndarray
    score: float
    converged: bool = True
    evals: int = 0

    @property
    def unitaryA(self):
        d = int(round(np.sqrt(self.paramsA.size)))
        return _kernels.unitary_from_params(self.paramsA, d)

    @property
    def unitaryB(self):
        d = int(round(np.sqrt(self.paramsB.size)))
        return _kernels.unitary_from_params(self.paramsB, d)

    @property
    def basisA(self):
        return LocalBasis(self.unitaryA)

    @property
    def basisB(self):
        return LocalBasis(self.unitaryB)


def hermitian_from_params(params, d: int) -> np.ndarray:
    """Hermitian generator with Gell-Mann coordinates ``params`` (length ``d**2``).

    Order: identity; for each pair ``j < k`` the antisymmetric then the
    symmetric generator; then the diagonal generators. ``exp(i H)`` is the
    corresponding basis unitary.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (d * d,):
        raise ValueError(f"expected {d * d} parameters for d={d}, got shape {params.shape}")
    return _kernels.gellmann_hermitian(params, d)


def unitary_from_params(params, d: int) -> np.ndarray:
    return _kernels.expi_hermitian(hermitian_from_params(params, d))


def _diag_generators(d):
    cols = [np.ones(d)]
    for l in range(1, d):
        v = np.zeros(d)
        v[:l] = 1.0
        v[l] = -l
        cols.append(v * np.sqrt(2.0 / (l * (l + 1))))
    return np.column_stack(cols)


def params_from_unitary(u) -> np.ndarray:
    """Gell-Mann coordinates of a Hermitian ``H`` with ``exp(i H) = u``."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    t, z = schur(u, output="complex")
    h = (z * np.angle(np.diag(t))) @ z.conj().T
    h = 0.5 * (h + h.conj().T)
    params = np.zeros(d * d)
    idx = 1
    for j in range(d):
        for k in range(j + 1, d):
            params[idx] = -h[j, k].imag
            params[idx + 1] = h[j, k].real
            idx += 2
    diag = np.linalg.solve(_diag_generators(d), np.diag(h).real)
    params[0] = diag[0]
    params[idx:] = diag[1:]
    return params


class _Counter:
    """Counts evaluations and remembers the best pair seen."""

    def __init__(self, objective, dA, dB):
        self.objective = objective
        self.dA, self.dB = dA, dB
        self.evals = 0
        self.best = -np.inf
        self._best = None
        self.fused = hasattr(objective, "search") and dA == dB

    def __call__(self, ua, ub):
        self.evals += 1
        val = float(self.objective(ua, ub))
        if val > self.best:
            self.best = val
            self._best = ("pair", ua, ub)
        return val

    def search(self, x, u0a, u0b):
        self.evals += 1
        val = float(self.objective.search(x, u0a, u0b))
        if val > self.best:
            self.best = val
            self._best = ("search", x.copy(), u0a, u0b)
        return val

    @property
    def best_pair(self):
        if self._best[0] == "pair":
            return self._best[1], self._best[2]
        _, x, u0a, u0b = self._best
        na = self.dA * self.dA - 1
        ua = u0a @ _kernels.unitary_from_params(_traceless(x[:na], self.dA), self.dA)
        ub = u0b @ _kernels.unitary_from_params(_traceless(x[na:], self.dB), self.dB)
        return ua, ub


def _traceless(x, d):
    full = np.zeros(d * d)
    full[1:] = x
    return full


def _nelder_mead(counter, u0a, u0b, dA, dB, cfg):
    na, nb = dA * dA - 1, dB * dB - 1

    if counter.fused:

        def f(x):
            return -counter.search(x, u0a, u0b)

    else:

        def f(x):
            ua = u0a @ _kernels.unitary_from_params(_traceless(x[:na], dA), dA)
            ub = u0b @ _kernels.unitary_from_params(_traceless(x[na:], dB), dB)
            return -counter(ua, ub)

    n = na + nb
    x0 = np.zeros(n)
    converged = False
    step = 0.5
    start = counter.evals
    while counter.evals - start < cfg.max_evals:
        simplex = np.vstack([x0, x0 + step * np.eye(n)])
        res = minimize(
            f,
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": cfg.max_evals - (counter.evals - start),
                "xatol": cfg.tol,
                "fatol": cfg.tol,
                "initial_simplex": simplex,
                "adaptive": n > 6,
            },
        )
        gained = -res.fun - (-f(x0))
        x0 = res.x
        converged = res.status == 0
        if not converged or gained <= cfg.tol or step < 1e-3:
            break
        # restart the simplex around the new point; NM stalls on kinks of |.|
        step *= 0.25
    return converged


def _coordinate_rotations(counter, u0a, u0b, dA, dB, cfg):
    ua, ub = u0a, u0b
    start = counter.evals
    grid = np.linspace(-np.pi / 2, np.pi / 2, 9)[:-1]
    current = counter(ua, ub)
    while counter.evals - start < cfg.max_evals:
        before = current
        for side, dim in (("A", dA), ("B", dB)):
            for k in range(1, dim * dim):
                e = np.zeros(dim * dim)
                e[k] = 1.0

                def rotated(t, side=side, dim=dim, e=e):
                    g = _kernels.unitary_from_params(t * e, dim)
                    return (ua @ g, ub) if side == "A" else (ua, ub @ g)

                vals = [counter(*rotated(t)) for t in grid]
                t0 = grid[int(np.argmax(vals))]
                res = minimize_scalar(
                    lambda t: -counter(*rotated(t)),
                    bounds=(t0 - np.pi / 8, t0 + np.pi / 8),
                    method="bounded",
                    options={"xatol": cfg.tol},
                )
                t_best = res.x if -res.fun >= max(vals) else t0
                cand = counter(*rotated(t_best))
                if cand > current:
                    ua, ub = rotated(t_best)
                    current = cand
                if counter.evals - start >= cfg.max_evals:
                    return False
        if current - before <= cfg.tol:
            return True
    return False


def optimize(objective, d: int, cfg: OptimizerConfig | None = None, dB: int | None = None) -> BasisPoint:
    """Maximize ``objective(UA, UB)`` over pairs of local unitaries.

    The identity pair is always evaluated, so the returned score is never
    below it. ``converged`` is False when any restart ran out of budget.
    An objective may also provide ``search(x, u0a, u0b)``, the same value at
    ``(u0a exp(iH(xa)), u0b exp(iH(xb)))`` for traceless coordinates ``x``;
    Nelder-Mead then calls it directly.
    """
    cfg = OptimizerConfig() if cfg is None else cfg
    dA, dB = d, d if dB is None else dB
    counter = _Counter(objective, dA, dB)
    counter(np.eye(dA, dtype=complex), np.eye(dB, dtype=complex))
    all_converged = True
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        if r == 0:
            u0a, u0b = np.eye(dA, dtype=complex), np.eye(dB, dtype=complex)
        else:
            u0a, u0b = haar_unitary(dA, rng), haar_unitary(dB, rng)
        if cfg.method == "nelder_mead":
            ok = _nelder_mead(counter, u0a, u0b, dA, dB, cfg)
        else:
            ok = _coordinate_rotations(counter, u0a, u0b, dA, dB, cfg)
        all_converged = all_converged and ok
    ua, ub = counter.best_pair
    return BasisPoint(
        params_from_unitary(ua),
        params_from_unitary(ub),
        counter.best,
        converged=all_converged,
        evals=counter.evals,
    )
