"""Small statevector simulator and the two-run transition estimator.

Qubit 0 is the most significant bit of the register index (A-major, same
as :mod:`slhs.qcore`). Bitstrings are written ``q0 q1 ...``.

The estimator measures the Bell-prep circuit in the x basis (H before each
detector) and in the y basis (S-dagger then H). For orthonormal pairs the
projector combinations

    eq12 = P(x+x+) + P(x-x-) - P(y+y+) - P(y-y-)
    eq13 = P(x+x+) + P(x-x-) + P(y+y+) + P(y-y-) - 1

equal ``2 Re <i^a j^a|rho|i^a' j^a'>`` and ``2 Re <i^a j^a'|rho|i^a' j^a>``
on two-qubit states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import BipartiteState, DimensionError, Ket, LocalBasis, matrix_element

MAX_QUBITS = 4

_S2 = 1 / np.sqrt(2)
GATES = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    wires: tuple
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"gate wires must be distinct, got {self.wires}")
        if self.kind == "CNOT":
            if len(self.wires) != 2:
                raise ValueError("CNOT takes (control, target)")
        elif self.kind == "U":
            u = np.asarray(self.matrix, dtype=complex)
            if u.shape != (2, 2) or np.abs(u.conj().T @ u - np.eye(2)).max() > 1e-10:
                raise ValueError("U gate needs a 2x2 unitary")
            object.__setattr__(self, "matrix", u)
            if len(self.wires) != 1:
                raise ValueError("single-qubit gate takes one wire")
        elif self.kind in GATES:
            if len(self.wires) != 1:
                raise ValueError("single-qubit gate takes one wire")
        else:
            raise ValueError(f"unknown gate {self.kind!r}")

    def unitary(self):
        return self.matrix if self.kind == "U" else GATES.get(self.kind)


@dataclass(frozen=True)
class Circuit:
    qubits: int
    ops: tuple = ()

    def __post_init__(self):
        if not 1 <= self.qubits <= MAX_QUBITS:
            raise ValueError(f"qubits must lie in [1, {MAX_QUBITS}]")
        object.__setattr__(self, "ops", tuple(self.ops))
        for g in self.ops:
            if any(not 0 <= w < self.qubits for w in g.wires):
                raise ValueError(f"gate {g.kind} on wires {g.wires} outside a {self.qubits}-qubit register")

    def then(self, *gates):
        return Circuit(self.qubits, self.ops + tuple(gates))


@dataclass(frozen=True)
class ShotRecord:
    shots: int
    counts: dict
    seed: int
    basis_run: str | None = None

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def to_dict(self):
        out = {"shots": self.shots, "counts": dict(sorted(self.counts.items()))}
        if self.basis_run is not None:
            out["basis_run"] = self.basis_run
        return out


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    runs: dict = field(default_factory=dict)

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr}


def _apply_1q(psi, u, wire, n):
    t = psi.reshape((2,) * n)
    t = np.tensordot(u, t, axes=([1], [wire]))
    return np.moveaxis(t, 0, wire).reshape(-1)


def _apply_cnot(psi, control, target, n):
    t = psi.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[control] = 1
    sub = t[tuple(idx)]
    axis = target if target < control else target - 1
    t[tuple(idx)] = np.flip(sub, axis=axis)
    return t.reshape(-1)


def statevector(c: Circuit) -> Ket:
    psi = np.zeros(2**c.qubits, dtype=complex)
    psi[0] = 1.0
    for g in c.ops:
        if g.kind == "CNOT":
            psi = _apply_cnot(psi, g.wires[0], g.wires[1], c.qubits)
        else:
            psi = _apply_1q(psi, g.unitary(), g.wires[0], c.qubits)
    return Ket(psi)


def _bitstrings(n):
    return [format(k, f"0{n}b") for k in range(2**n)]


def outcome_probabilities(c: Circuit, noise: float = 0.0) -> np.ndarray:
    """Computational-basis probabilities after depolarizing ``(1-l) rho + l I/2^n``."""
    if not 0.0 <= noise <= 1.0:
        raise ValueError(f"noise must lie in [0, 1], got {noise}")
    probs = np.abs(statevector(c).amps) ** 2
    probs = (1 - noise) * probs + noise / probs.size
    return probs / probs.sum()


def sample(c: Circuit, shots: int, seed, noise: float | None = None, basis_run: str | None = None) -> ShotRecord:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    probs = outcome_probabilities(c, 0.0 if noise is None else noise)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    counts = {b: int(n) for b, n in zip(_bitstrings(c.qubits), draws) if n}
    return ShotRecord(shots, counts, seed if isinstance(seed, int) else -1, basis_run)


# -- projector combinations --------------------------------------------------


def _xy_states(basis, a, a_prime):
    u, v = basis.unitary[:, a], basis.unitary[:, a_prime]
    return {
        "x+": (u + v) * _S2,
        "x-": (u - v) * _S2,
        "y+": (u + 1j * v) * _S2,
        "y-": (u - 1j * v) * _S2,
    }


def combo_identity(s: BipartiteState, basisA: LocalBasis, basisB: LocalBasis, a: int, a_prime: int, which: str) -> float:
    """Evaluate the four-projector combination ``which`` (``eq12`` or ``eq13``) exactly."""
    if which not in ("eq12", "eq13"):
        raise ValueError(f"which must be 'eq12' or 'eq13', got {which!r}")
    if basisA.dim != s.dA or basisB.dim != s.dB:
        raise DimensionError("basis dimensions do not match the state")
    for x, dim in ((a, min(s.dA, s.dB)), (a_prime, min(s.dA, s.dB))):
        if not 0 <= x < dim:
            raise IndexError(f"basis index {x} out of range")
    if a == a_prime:
        raise ValueError("a and a' must differ")
    sa, sb = _xy_states(basisA, a, a_prime), _xy_states(basisB, a, a_prime)

    def p(label):
        k = np.kron(sa[label], sb[label])
        return matrix_element(s.rho, k, k).real

    if which == "eq12":
        return p("x+") + p("x-") - p("y+") - p("y-")
    return p("x+") + p("x-") + p("y+") + p("y-") - 1.0


def bell_prep() -> Circuit:
    return Circuit(2, (Gate("H", (0,)), Gate("CNOT", (0, 1))))


_ROTATIONS = {
    "x": (Gate("H", (0,)),),
    "y": (Gate("Sdg", (0,)), Gate("H", (0,))),
}


def measurement_circuit(prep: Circuit, run: str) -> Circuit:
    """Append basis changes; ``run`` is one letter per qubit, e.g. ``"xy"``."""
    if len(run) != prep.qubits or any(ch not in _ROTATIONS for ch in run):
        raise ValueError(f"run label {run!r} must give x or y for each of {prep.qubits} qubits")
    gates = []
    for wire, ch in enumerate(run):
        gates += [Gate(g.kind, (wire,)) for g in _ROTATIONS[ch]]
    return prep.then(*gates)


_RUN_LABELS = {"xx": 0, "yy": 1, "xy": 2, "yx": 3}


def run_shots(run: str, shots: int, seed: int, noise: float, prep: Circuit | None = None) -> ShotRecord:
    prep = bell_prep() if prep is None else prep
    rng = np.random.default_rng([seed, _RUN_LABELS[run]])
    rec = sample(measurement_circuit(prep, run), shots, rng, noise, basis_run=run[0] if run[0] == run[1] else run)
    return ShotRecord(rec.shots, rec.counts, seed, rec.basis_run)


def _same(rec):
    return (rec.counts.get("00", 0) + rec.counts.get("11", 0)) / rec.shots


def _parity(rec):
    return 2 * _same(rec) - 1


def estimate_combo(shots: int, seed: int, noise: float, which: str, full_magnitude: bool = False, prep: Circuit | None = None) -> Estimate:
    """Estimate ``eq12`` or ``eq13`` from two simulated runs of the Bell-prep circuit.

    With ``full_magnitude`` two extra runs (x on A with y on B, and the
    reverse) recover the imaginary part, and the estimate becomes
    ``2 |element|`` instead of ``2 Re(element)``.
    """
    if which not in ("eq12", "eq13"):
        raise ValueError(f"which must be 'eq12' or 'eq13', got {which!r}")
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if not 0.0 <= noise <= 1.0:
        raise ValueError(f"noise must lie in [0, 1], got {noise}")
    rx = run_shots("xx", shots, seed, noise, prep)
    ry = run_shots("yy", shots, seed, noise, prep)
    qx, qy = _same(rx), _same(ry)
    var = qx * (1 - qx) / shots + qy * (1 - qy) / shots
    re = qx - qy if which == "eq12" else qx + qy - 1.0
    runs = {"x": rx, "y": ry}
    if not full_magnitude:
        return Estimate(re, float(np.sqrt(var)), runs)
    rxy = run_shots("xy", shots, seed, noise, prep)
    ryx = run_shots("yx", shots, seed, noise, prep)
    exy, eyx = _parity(rxy), _parity(ryx)
    # 2 Im of the aligned element is -(<XY> + <YX>)/2, of the swapped one (<XY> - <YX>)/2
    im = -(exy + eyx) / 2 if which == "eq12" else (exy - eyx) / 2
    var_im = (1 - exy**2) / shots / 4 + (1 - eyx**2) / shots / 4
    mag = float(np.hypot(re, im))
    if mag > 0:
        err = np.sqrt((re / mag) ** 2 * var + (im / mag) ** 2 * var_im)
    else:
        err = np.sqrt(var + var_im)
    runs.update({"xy": rxy, "yx": ryx})
    return Estimate(mag, float(err), runs)


def imaginary_combo(s: BipartiteState, basisA: LocalBasis, basisB: LocalBasis, a: int, a_prime: int, which: str) -> float:
    """Exact counterpart of the mixed-basis runs: ``2 Im`` of the matching element."""
    sa, sb = _xy_states(basisA, a, a_prime), _xy_states(basisB, a, a_prime)

    def corr(la, lb):
        tot = 0.0
        for sign_a in "+-":
            for sign_b in "+-":
                k = np.kron(sa[la + sign_a], sb[lb + sign_b])
                tot += (1 if sign_a == sign_b else -1) * matrix_element(s.rho, k, k).real
        return tot

    exy, eyx = corr("x", "y"), corr("y", "x")
    return -(exy + eyx) / 2 if which == "eq12" else (exy - eyx) / 2
