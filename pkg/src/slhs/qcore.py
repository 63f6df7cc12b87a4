"""Dense quantum-state primitives.

Matrices are plain complex ``numpy`` arrays. The value types below wrap them
with validation; they are frozen, and the arrays they hold are marked
read-only so that instances can be shared freely.

Composite index convention (used everywhere in the package): the product
ket ``|a>|b>`` of a ``dA x dB`` system sits at row ``a * dB + b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HTOL = 1e-10
TTOL = 1e-10
PTOL = 1e-9
UTOL = 1e-10
NTOL = 1e-10


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class StateError(ValueError):
    """A matrix fails the density-matrix invariants."""


class StateFileError(ValueError):
    """A state file is malformed. The message names the offending field."""


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise StateError(f"{what} has non-finite entries")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _frozen(self.mat))

    @classmethod
    def from_matrix(cls, mat, repair=False):
        """Validate ``mat`` and wrap it.

        With ``repair=True`` eigenvalues in ``[-PTOL, 0)`` are clipped to
        zero and the result renormalized; anything worse is still rejected.
        """
        mat = np.asarray(mat, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"density matrix must be square, got {mat.shape}")
        _check_finite(mat, "density matrix")
        herm = np.abs(mat - mat.conj().T).max()
        if herm > HTOL:
            raise StateError(f"not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TTOL:
            raise StateError(f"trace {tr!r} differs from 1")
        w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
        if w.min() < -PTOL:
            raise StateError(f"not positive semidefinite (min eigenvalue {w.min():.3g})")
        if repair and w.min() < 0:
            w = np.clip(w, 0.0, None)
            mat = (v * w) @ v.conj().T
            mat = 0.5 * (mat + mat.conj().T) / np.trace(mat).real
        return cls(mat)

    @property
    def dim(self):
        return self.mat.shape[0]


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dA: int
    dB: int
    rho: DensityMatrix

    def __post_init__(self):
        if self.dA < 1 or self.dB < 1 or self.rho.dim != self.dA * self.dB:
            raise DimensionError(
                f"state of dimension {self.rho.dim} does not split as {self.dA}x{self.dB}"
            )

    @classmethod
    def from_matrix(cls, mat, dA, dB=None, repair=False):
        dB = dA if dB is None else dB
        return cls(dA, dB, DensityMatrix.from_matrix(mat, repair=repair))

    @property
    def mat(self):
        return self.rho.mat


@dataclass(frozen=True, eq=False)
class Ket:
    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amps))
        _check_finite(amps, "ket")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NTOL:
            raise StateError(f"ket norm {norm!r} differs from 1")
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self):
        return self.amps.shape[0]

    def projector(self):
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True, eq=False)
class LocalBasis:
    """Orthonormal basis of one subsystem, stored as the columns of a unitary."""

    unitary: np.ndarray

    def __post_init__(self):
        u = _frozen(self.unitary)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionError(f"basis matrix must be square, got {u.shape}")
        _check_finite(u, "basis")
        dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
        if dev > UTOL:
            raise StateError(f"basis vectors are not orthonormal (deviation {dev:.3g})")
        object.__setattr__(self, "unitary", u)

    @classmethod
    def from_vectors(cls, vectors):
        return cls(np.column_stack([np.ravel(v) for v in vectors]))

    @classmethod
    def computational(cls, d):
        return cls(np.eye(d))

    @property
    def dim(self):
        return self.unitary.shape[0]

    @property
    def vectors(self):
        return [self.unitary[:, k] for k in range(self.dim)]

    def ket(self, k):
        return Ket(self.unitary[:, k])


def tensor(a, b):
    """Kronecker product, A-major."""
    return np.kron(np.asarray(a), np.asarray(b))


def product_state(rho_a, rho_b):
    return BipartiteState(rho_a.dim, rho_b.dim, DensityMatrix(tensor(rho_a.mat, rho_b.mat)))


def partial_trace(s: BipartiteState, keep: str) -> DensityMatrix:
    """Reduced state of subsystem ``keep`` (``"A"`` or ``"B"``)."""
    if s.rho.dim != s.dA * s.dB:
        raise DimensionError("state dimension does not match its subsystem split")
    t = s.mat.reshape(s.dA, s.dB, s.dA, s.dB)
    if keep == "A":
        red = np.einsum("ibjb->ij", t)
    elif keep == "B":
        red = np.einsum("aiaj->ij", t)
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityMatrix(red)


def matrix_element(rho, bra, ket) -> complex:
    """``<bra| rho |ket>``. ``rho`` may be a DensityMatrix or an array."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    u = bra.amps if isinstance(bra, Ket) else np.asarray(bra)
    v = ket.amps if isinstance(ket, Ket) else np.asarray(ket)
    if mat.shape != (u.size, u.size) or u.size != v.size:
        raise DimensionError(
            f"cannot contract {mat.shape} matrix with kets of size {u.size}, {v.size}"
        )
    return complex(u.conj() @ mat @ v)


def product_ket(*kets):
    amps = np.array([1.0], dtype=complex)
    for k in kets:
        amps = np.kron(amps, k.amps if isinstance(k, Ket) else np.asarray(k))
    return Ket(amps)


def ginibre(d, rng, k=None):
    k = d if k is None else k
    return (rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))) / np.sqrt(2)


def random_density(d: int, seed) -> DensityMatrix:
    """Ginibre-induced random state ``G G^dagger / Tr(G G^dagger)``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = ginibre(d, rng)
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real)


def haar_unitary(d: int, seed) -> np.ndarray:
    """Haar-random unitary: QR of a Ginibre matrix with R's diagonal phase-fixed."""
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    q, r = np.linalg.qr(ginibre(d, rng))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def fidelity_with_pure(rho, psi) -> float:
    f = matrix_element(rho, psi, psi).real
    if f < -1e-12 or f > 1 + 1e-12:
        raise StateError(f"fidelity {f!r} outside [0, 1]")
    return min(max(f, 0.0), 1.0)


def is_density(mat, htol=HTOL, ttol=TTOL, ptol=PTOL):
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or not np.all(np.isfinite(mat)):
        return False
    if np.abs(mat - mat.conj().T).max() > htol:
        return False
    if abs(np.trace(mat).real - 1) > ttol:
        return False
    return np.linalg.eigvalsh(0.5 * (mat + mat.conj().T)).min() >= -ptol


# -- state files -------------------------------------------------------------


def state_to_dict(state):
    if isinstance(state, BipartiteState):
        dims, mat = [state.dA, state.dB], state.mat
    elif isinstance(state, DensityMatrix):
        dims, mat = [state.dim], state.mat
    else:
        raise TypeError(f"cannot serialize {type(state).__name__}")
    return {
        "dims": dims,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in mat],
    }


def _num(x):
    return format(x, ".17g")


def dumps_state(state):
    obj = state_to_dict(state)
    rows = ", ".join(
        "[" + ", ".join(f"[{_num(re)}, {_num(im)}]" for re, im in row) + "]"
        for row in obj["matrix"]
    )
    return f'{{"dims": {json.dumps(obj["dims"])}, "matrix": [{rows}]}}'


def state_from_dict(obj, repair=False):
    if not isinstance(obj, dict):
        raise StateFileError("top level must be a JSON object")
    for key in ("dims", "matrix"):
        if key not in obj:
            raise StateFileError(f"missing field {key!r}")
    dims = obj["dims"]
    if (
        not isinstance(dims, list)
        or len(dims) not in (1, 2)
        or not all(isinstance(x, int) and x >= 1 for x in dims)
    ):
        raise StateFileError(f"field 'dims' must be [d] or [dA, dB] of positive ints, got {dims!r}")
    n = int(np.prod(dims))
    rows = obj["matrix"]
    if not isinstance(rows, list) or len(rows) != n:
        raise StateFileError(f"field 'matrix' must have {n} rows")
    mat = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise StateFileError(f"matrix row {i} must have {n} entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
            ):
                raise StateFileError(f"matrix[{i}][{j}] must be [re, im], got {entry!r}")
            mat[i, j] = complex(entry[0], entry[1])
    try:
        if len(dims) == 1:
            return DensityMatrix.from_matrix(mat, repair=repair)
        return BipartiteState.from_matrix(mat, dims[0], dims[1], repair=repair)
    except (StateError, DimensionError) as exc:
        raise StateFileError(f"field 'matrix': {exc}") from exc


def loads_state(text, repair=False):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return state_from_dict(obj, repair=repair)


def read_state(path, repair=False):
    return loads_state(Path(path).read_text(), repair=repair)


def write_state(state, path):
    Path(path).write_text(dumps_state(state) + "\n")
