import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from slhs.circuits import (
    Circuit,
    Gate,
    ShotRecord,
    bell_prep,
    combo_identity,
    estimate_combo,
    imaginary_combo,
    measurement_circuit,
    outcome_probabilities,
    run_shots,
    sample,
    statevector,
)
from slhs.families import bell
from slhs.qcore import BipartiteState, LocalBasis, haar_unitary, random_density

from oracles import element

seeds = st.integers(0, 2**32 - 1)
Z2 = LocalBasis.computational(2)


def four_sigma(n, p):
    return 4 * np.sqrt(n * p * (1 - p))


class TestGates:
    def test_wires_distinct(self):
        with pytest.raises(ValueError):
            Gate("CNOT", (0, 0))

    def test_wire_in_register(self):
        with pytest.raises(ValueError):
            Circuit(2, (Gate("H", (2,)),))

    def test_register_size(self):
        with pytest.raises(ValueError):
            Circuit(5)

    def test_u_must_be_unitary(self):
        with pytest.raises(ValueError):
            Gate("U", (0,), np.ones((2, 2)))

    def test_unknown(self):
        with pytest.raises(ValueError):
            Gate("T", (0,))


class TestStatevector:
    def test_bell_prep(self):
        np.testing.assert_allclose(statevector(bell_prep()).amps, bell("phi+").amps, atol=1e-15)

    def test_empty(self):
        np.testing.assert_array_equal(statevector(Circuit(2)).amps, [1, 0, 0, 0])

    def test_xx_invariance(self):
        c = bell_prep().then(Gate("X", (0,)), Gate("X", (1,)))
        np.testing.assert_allclose(statevector(c).amps, bell("phi+").amps, atol=1e-15)

    def test_qubit_ordering(self):
        np.testing.assert_array_equal(statevector(Circuit(3, (Gate("X", (0,)),))).amps, np.eye(8)[4])

    @given(seeds)
    def test_against_dense_matrices(self, seed):
        rng = np.random.default_rng(seed)
        u = haar_unitary(2, rng)
        c = Circuit(3, (Gate("U", (1,), u), Gate("CNOT", (2, 0)), Gate("H", (2,)), Gate("CNOT", (1, 2))))
        eye = np.eye(2)
        P0, P1, X = np.diag([1, 0]), np.diag([0, 1]), np.array([[0, 1], [1, 0]])
        H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        m = np.kron(np.kron(eye, P0), eye) + np.kron(np.kron(eye, P1), X)
        m = m @ np.kron(np.kron(eye, eye), H)
        m = m @ (np.kron(np.kron(eye, eye), P0) + np.kron(np.kron(X, eye), P1))
        m = m @ np.kron(np.kron(eye, u), eye)
        np.testing.assert_allclose(statevector(c).amps, m[:, 0], atol=1e-14)


class TestSampling:
    def test_bell_counts(self):
        rec = sample(bell_prep(), 8192, 1)
        assert set(rec.counts) <= {"00", "11"}
        assert abs(rec.counts["00"] - 4096) <= four_sigma(8192, 0.5)

    def test_full_noise(self):
        rec = sample(bell_prep(), 8192, 2, noise=1.0)
        for b in ("00", "01", "10", "11"):
            assert abs(rec.counts[b] - 2048) <= four_sigma(8192, 0.25)

    def test_single_shot(self):
        rec = sample(bell_prep(), 1, 3)
        assert sum(rec.counts.values()) == 1

    def test_deterministic(self):
        assert sample(bell_prep(), 100, 9).counts == sample(bell_prep(), 100, 9).counts

    def test_noise_model(self):
        probs = outcome_probabilities(bell_prep(), 0.08)
        np.testing.assert_allclose(probs, [0.46 + 0.02, 0.02, 0.02, 0.48], atol=1e-15)

    def test_rejects(self):
        with pytest.raises(ValueError):
            sample(bell_prep(), 0, 1)
        with pytest.raises(ValueError):
            outcome_probabilities(bell_prep(), 1.5)

    def test_marginals_chi_square(self):
        u = haar_unitary(2, 4)
        c = Circuit(2, (Gate("U", (0,), u), Gate("H", (1,))))
        probs = np.abs(statevector(c).amps) ** 2
        pvals = []
        for seed in range(20):
            rec = sample(c, 4000, seed)
            counts = [rec.counts.get(b, 0) for b in ("00", "01", "10", "11")]
            pvals.append(chisquare(counts, 4000 * probs).pvalue)
        # 20 independent tests at 1%: expect at most a couple of rejections
        assert sum(p < 0.01 for p in pvals) <= 2

    def test_shot_record(self):
        with pytest.raises(ValueError):
            ShotRecord(3, {"00": 2}, 0)
        rec = run_shots("xx", 10, 5, 0.0)
        assert rec.to_dict()["basis_run"] == "x"
        assert sum(rec.to_dict()["counts"].values()) == 10


class TestCombos:
    def test_bell(self, phi_plus):
        assert combo_identity(phi_plus, Z2, Z2, 0, 1, "eq12") == pytest.approx(1)
        assert combo_identity(phi_plus, Z2, Z2, 0, 1, "eq13") == pytest.approx(0, abs=1e-15)

    def test_mixed(self, mixed4):
        for which in ("eq12", "eq13"):
            assert combo_identity(mixed4, Z2, Z2, 0, 1, which) == pytest.approx(0, abs=1e-15)

    def test_psi_plus(self, psi_plus):
        assert combo_identity(psi_plus, Z2, Z2, 0, 1, "eq12") == pytest.approx(0, abs=1e-15)
        assert combo_identity(psi_plus, Z2, Z2, 0, 1, "eq13") == pytest.approx(1)

    @given(seeds)
    def test_identities(self, seed):
        rng = np.random.default_rng(seed)
        s = BipartiteState(2, 2, random_density(4, rng))
        ua, ub = haar_unitary(2, rng), haar_unitary(2, rng)
        ba, bb = LocalBasis(ua), LocalBasis(ub)
        aligned = element(s.mat, ua, ub, 0, 0, 1, 1)
        swapped = element(s.mat, ua, ub, 0, 1, 1, 0)
        assert combo_identity(s, ba, bb, 0, 1, "eq12") == pytest.approx(2 * aligned.real, abs=1e-10)
        assert combo_identity(s, ba, bb, 0, 1, "eq13") == pytest.approx(2 * swapped.real, abs=1e-10)
        assert imaginary_combo(s, ba, bb, 0, 1, "eq12") == pytest.approx(2 * aligned.imag, abs=1e-10)
        assert imaginary_combo(s, ba, bb, 0, 1, "eq13") == pytest.approx(2 * swapped.imag, abs=1e-10)

    def test_errors(self, phi_plus):
        with pytest.raises(ValueError):
            combo_identity(phi_plus, Z2, Z2, 0, 0, "eq12")
        with pytest.raises(IndexError):
            combo_identity(phi_plus, Z2, Z2, 0, 2, "eq12")
        with pytest.raises(ValueError):
            combo_identity(phi_plus, Z2, Z2, 0, 1, "eq14")

    def test_measurement_circuit_realizes_projectors(self):
        # the y run maps |y+> to |0> on each qubit
        y_plus = np.array([1, 1j]) / np.sqrt(2)
        y_minus = np.array([1, -1j]) / np.sqrt(2)
        prep = Circuit(2, (Gate("U", (0,), np.column_stack([y_plus, y_minus])),))
        probs = outcome_probabilities(measurement_circuit(prep, "yx"))
        assert probs[0] + probs[1] == pytest.approx(1)
        with pytest.raises(ValueError):
            measurement_circuit(bell_prep(), "xz")


class TestEstimates:
    def test_noiseless(self):
        e = estimate_combo(8192, 7, 0.0, "eq12")
        assert abs(e.value - 1) <= 4 * max(e.stderr, 1 / 8192)

    def test_calibrated_noise(self):
        e = estimate_combo(8192, 7, 0.08, "eq12")
        assert abs(e.value - 0.92) <= 4 * e.stderr

    def test_full_noise(self):
        e = estimate_combo(8192, 7, 1.0, "eq12")
        assert abs(e.value) <= 4 * e.stderr

    def test_unbiased(self):
        vals = np.array([estimate_combo(2000, seed, 0.3, "eq12").value for seed in range(100)])
        se = estimate_combo(2000, 0, 0.3, "eq12").stderr / np.sqrt(100)
        assert abs(vals.mean() - 0.7) <= 3 * se

    def test_full_magnitude(self):
        e = estimate_combo(8192, 3, 0.08, "eq12", full_magnitude=True)
        assert abs(e.value - 0.92) <= 4 * e.stderr
        assert set(e.runs) == {"x", "y", "xy", "yx"}

    def test_phase_is_recovered(self):
        # a relative phase i hides the element from the real-part estimator
        prep = bell_prep().then(Gate("S", (0,)))
        re = estimate_combo(8192, 1, 0.0, "eq12", prep=prep)
        full = estimate_combo(8192, 1, 0.0, "eq12", full_magnitude=True, prep=prep)
        assert abs(re.value) <= 4 * re.stderr + 1e-3
        assert abs(full.value - 1) <= 4 * full.stderr + 1e-3

    def test_single_shot(self):
        e = estimate_combo(1, 0, 0.0, "eq12")
        assert e.value in (-1.0, 0.0, 1.0)

    def test_rejects(self):
        with pytest.raises(ValueError):
            estimate_combo(10, 0, -0.1, "eq12")
        with pytest.raises(ValueError):
            estimate_combo(0, 0, 0.0, "eq12")
