"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same
signature and the same numerical contract. The compiled module is preferred
at import time; this one is the fallback and the reference for tests.
"""

import numpy as np

ALIGNED, SWAPPED, COMBINED = 0, 1, 2

_TAYLOR_DEGREE = 18
_SCALE_TARGET = 0.25


def gellmann_hermitian(params, d):
    """Hermitian matrix from generalized Gell-Mann coordinates.

    Coordinate order: identity, then for every pair ``j < k`` the
    antisymmetric generator followed by the symmetric one, then the
    ``d - 1`` diagonal generators. Off-diagonal generators are unnormalized
    (entries of modulus 1), so for ``d = 2`` the order is I, Y, X, Z.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (d * d,):
        raise ValueError(f"expected {d * d} parameters, got {params.shape}")
    h = np.zeros((d, d), dtype=complex)
    h += params[0] * np.eye(d)
    idx = 1
    for j in range(d):
        for k in range(j + 1, d):
            y, x = params[idx], params[idx + 1]
            h[j, k] += x - 1j * y
            h[k, j] += x + 1j * y
            idx += 2
    for l in range(1, d):
        c = params[idx] * np.sqrt(2.0 / (l * (l + 1)))
        h[np.arange(l), np.arange(l)] += c
        h[l, l] -= l * c
        idx += 1
    return h


def expi_hermitian(h):
    """``exp(i h)`` by scaling and squaring a truncated Taylor series."""
    m = 1j * np.asarray(h, dtype=complex)
    n = m.shape[0]
    norm = np.sqrt((m.real**2 + m.imag**2).sum())
    s = 0
    while norm > _SCALE_TARGET:
        norm *= 0.5
        s += 1
    m = m / (2.0**s)
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, _TAYLOR_DEGREE + 1):
        term = term @ m / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def unitary_from_params(params, d):
    return expi_hermitian(gellmann_hermitian(params, d))


def transform(rho, ua, ub):
    """Matrix of ``rho`` in the product basis ``ua (x) ub`` (A-major)."""
    w = np.kron(ua, ub)
    return w.conj().T @ rho @ w


def _term_indices(d, kind):
    rows, cols = [], []
    if kind == ALIGNED:
        for a in range(d):
            for ap in range(d):
                if a != ap:
                    rows.append(a * d + a)
                    cols.append(ap * d + ap)
    elif kind == SWAPPED:
        for a in range(d):
            for ap in range(d):
                if a != ap:
                    rows.append(ap * d + a)
                    cols.append(a * d + ap)
    elif kind == COMBINED:
        for a in range(d):
            for ap in range(d):
                if a == ap:
                    continue
                for b in range(d):
                    for bp in range(d):
                        if b != bp:
                            rows.append(ap * d + b)
                            cols.append(a * d + bp)
    else:
        raise ValueError(f"unknown inequality kind {kind!r}")
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)


_INDEX_CACHE = {}


def term_indices(d, kind):
    key = (d, kind)
    if key not in _INDEX_CACHE:
        _INDEX_CACHE[key] = _term_indices(d, kind)
    return _INDEX_CACHE[key]


def inequality_lhs(rho, ua, ub, d, kind):
    r = transform(rho, ua, ub)
    rows, cols = term_indices(d, kind)
    return float(np.abs(r[rows, cols]).sum())


def measure_sum(rho, ua, ub, d, offset):
    r = transform(rho, ua, ub)
    idx = np.arange(d)
    a, ap, b, bp = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    mask = (a != ap) & (b != bp)
    vals = np.abs(r[(a * d + b)[mask], (ap * d + bp)[mask]]) - offset
    return float(np.clip(vals, 0.0, None).sum())


def _search_unitary(u0, coords, d):
    full = np.zeros(d * d)
    full[1:] = coords
    return u0 @ unitary_from_params(full, d)


def search_lhs(x, u0a, u0b, rho, d, kind):
    """Inequality lhs at ``(u0a exp(iH(xa)), u0b exp(iH(xb)))`` with traceless coordinates ``x``."""
    m = d * d - 1
    ua = _search_unitary(u0a, x[:m], d)
    ub = _search_unitary(u0b, x[m:], d)
    return inequality_lhs(rho, ua, ub, d, kind)


def search_measure(x, u0a, u0b, rho, d, offset):
    m = d * d - 1
    ua = _search_unitary(u0a, x[:m], d)
    ub = _search_unitary(u0b, x[m:], d)
    return measure_sum(rho, ua, ub, d, offset)
