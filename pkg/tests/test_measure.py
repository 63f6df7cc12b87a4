import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slhs.basis_opt import OptimizerConfig
from slhs.families import bell, lhs_assemblage_state, random_separable
from slhs.inequalities import KINDS, evaluate
from slhs.measure import (
    ChannelError,
    KrausChannel,
    MeasureVariant,
    amplitude_damping,
    apply_channel,
    axiom_b_probe,
    axiom_b_trials,
    axiom_c_probe,
    axiom_c_trials,
    depolarizing,
    identity_channel,
    n_measure,
    paired_mixed_unitary,
    phase_damping,
    random_diagonal,
    random_kraus,
    theorem1_probe,
)
from slhs.qcore import BipartiteState, DensityMatrix, DimensionError, LocalBasis, haar_unitary, random_density

from oracles import element

seeds = st.integers(0, 2**32 - 1)
Z2 = LocalBasis.computational(2)
FAST = OptimizerConfig(restarts=2, max_evals=400)


def brute_n(rho, ua, ub, d):
    total = 0.0
    for a in range(d):
        for ap in range(d):
            for b in range(d):
                for bp in range(d):
                    if a != ap and b != bp:
                        total += max(abs(element(rho, ua, ub, a, b, ap, bp)) - 1 / d**2, 0.0)
    return total


class TestMeasure:
    def test_bell_fixed(self, phi_plus):
        r = n_measure(phi_plus, "fixed_basis", Z2, Z2)
        assert r.value == pytest.approx(0.5, abs=1e-12)
        assert sorted(v for v in r.per_term.values() if v > 0) == pytest.approx([0.25, 0.25])

    @pytest.mark.parametrize("variant", list(MeasureVariant))
    def test_mixed_any_variant(self, mixed4, variant):
        kw = {"basisA": Z2, "basisB": Z2} if variant is MeasureVariant.FIXED_BASIS else {"cfg": FAST}
        assert n_measure(mixed4, variant, **kw).value <= 1e-12

    def test_fixed_needs_bases(self, phi_plus):
        with pytest.raises(ValueError):
            n_measure(phi_plus, "fixed_basis")

    def test_rejects_rectangular(self):
        with pytest.raises(DimensionError):
            n_measure(BipartiteState(2, 3, DensityMatrix(np.eye(6) / 6)), "fixed_basis", Z2, Z2)

    @given(seeds, st.integers(2, 3))
    def test_matches_direct_sum(self, seed, d):
        rng = np.random.default_rng(seed)
        s = BipartiteState(d, d, random_density(d * d, rng))
        ua, ub = haar_unitary(d, rng), haar_unitary(d, rng)
        r = n_measure(s, "fixed_basis", LocalBasis(ua), LocalBasis(ub))
        assert r.value == pytest.approx(brute_n(s.mat, ua, ub, d), abs=1e-12)
        assert r.value == pytest.approx(sum(r.per_term.values()), abs=1e-12)

    @given(seeds)
    def test_relabeling_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        s = BipartiteState(2, 2, random_density(4, rng))
        ua, ub = haar_unitary(2, rng), haar_unitary(2, rng)
        v1 = n_measure(s, "fixed_basis", LocalBasis(ua), LocalBasis(ub)).value
        v2 = n_measure(s, "fixed_basis", LocalBasis(ua[:, ::-1]), LocalBasis(ub[:, ::-1])).value
        assert v1 == pytest.approx(v2, abs=1e-14)

    @given(seeds)
    def test_separable_in_any_basis(self, seed):
        rng = np.random.default_rng(seed)
        s = random_separable(rng, int(rng.integers(1, 8)))
        assert n_measure(s, "fixed_basis", LocalBasis(haar_unitary(2, rng)), LocalBasis(haar_unitary(2, rng))).value == 0

    def test_axiom_a_on_generated_states(self):
        for seed in range(1000):
            for s in (random_separable(seed, 1 + seed % 16), lhs_assemblage_state(seed, 1 + seed % 4)):
                assert n_measure(s, "fixed_basis", Z2, Z2).value == 0, seed

    def test_qutrit_product_state_exceeds_offset(self):
        # with d = 3 a product of two coherent qubit-like states has an element of 1/4 > 1/9
        v = np.array([1, 1, 0]) / np.sqrt(2)
        rho = np.kron(np.outer(v, v), np.outer(v, v))
        z3 = LocalBasis.computational(3)
        assert n_measure(BipartiteState(3, 3, DensityMatrix(rho)), "fixed_basis", z3, z3).value > 0

    def test_variant_ordering(self, phi_plus):
        fixed = n_measure(phi_plus, "fixed_basis", Z2, Z2).value
        shared = n_measure(phi_plus, "shared_opt", cfg=OptimizerConfig(restarts=4)).value
        per_term = n_measure(phi_plus, "per_term_opt", cfg=OptimizerConfig(restarts=4)).value
        assert fixed - 1e-9 <= shared <= per_term + 1e-9
        assert per_term == pytest.approx(1.0, abs=1e-6)

    def test_to_dict(self, phi_plus):
        d = n_measure(phi_plus, "fixed_basis", Z2, Z2).to_dict()
        assert d["variant"] == "fixed_basis" and len(d["per_term"]) == 4


class TestChannels:
    def test_identity_preserves(self, phi_plus):
        out = apply_channel(phi_plus, identity_channel(2, "A"), identity_channel(2, "B"))
        np.testing.assert_array_equal(out.total.mat, phi_plus.mat)
        assert len(out.branches) == 1

    def test_paired_mixed_unitary_trace(self):
        rng = np.random.default_rng(0)
        a, b = paired_mixed_unitary(2, [0.2, 0.3, 0.5], rng)
        out = apply_channel(BipartiteState(2, 2, random_density(4, rng)), a, b, paired=True)
        assert out.trace == pytest.approx(1, abs=1e-12)
        assert sum(p for p, _ in out.branches) == pytest.approx(1, abs=1e-12)

    def test_paired_halves_are_not_a_product_channel(self):
        rng = np.random.default_rng(1)
        a, b = paired_mixed_unitary(2, [0.5, 0.5], rng)
        with pytest.raises(ChannelError):
            apply_channel(BipartiteState(2, 2, random_density(4, rng)), a, b, paired=False)

    @pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
    def test_amplitude_damping_corner(self, phi_plus, gamma):
        out = apply_channel(phi_plus, amplitude_damping(gamma, "A"), identity_channel(2, "B"))
        assert out.total.mat[0, 3] == pytest.approx(np.sqrt(1 - gamma) / 2, abs=1e-15)

    def test_total_is_weighted_branches(self):
        rng = np.random.default_rng(2)
        s = BipartiteState(2, 2, random_density(4, rng))
        out = apply_channel(s, random_kraus(2, rng, 3, "A"), random_kraus(2, rng, 2, "B"))
        np.testing.assert_allclose(sum(p * b.mat for p, b in out.branches), out.total.mat, atol=1e-15)
        assert out.trace == pytest.approx(1, abs=1e-12)
        for _, b in out.branches:
            assert np.trace(b.mat).real == pytest.approx(1, abs=1e-12)

    def test_zero_branches_dropped(self, phi_plus):
        chan = KrausChannel("A", [np.eye(2), np.zeros((2, 2))], "diagonal")
        out = apply_channel(phi_plus, chan, identity_channel(2, "B"))
        assert len(out.branches) == 1

    def test_trace_non_increasing_allowed(self, phi_plus):
        out = apply_channel(phi_plus, phase_damping(0.4, "A"), KrausChannel("B", [np.diag([1, 0.5])], "diagonal"))
        assert out.trace < 1

    def test_completeness_violation(self):
        with pytest.raises(ChannelError):
            KrausChannel("A", [np.eye(2), np.eye(2)])

    def test_diagonal_kind_enforced(self):
        with pytest.raises(ChannelError):
            KrausChannel("A", [np.array([[0, 1], [1, 0]])], "diagonal")

    def test_structural_errors(self, phi_plus):
        with pytest.raises(ChannelError):
            KrausChannel("C", [np.eye(2)])
        with pytest.raises(ChannelError):
            KrausChannel("A", [])
        with pytest.raises(DimensionError):
            apply_channel(phi_plus, identity_channel(3), identity_channel(2, "B"))
        with pytest.raises(ChannelError):
            apply_channel(phi_plus, phase_damping(0.2), identity_channel(2, "B"), paired=True)

    @given(seeds, st.integers(2, 4), st.integers(1, 4))
    def test_random_families_complete(self, seed, d, n):
        rng = np.random.default_rng(seed)
        for chan in (random_kraus(d, rng, n), random_diagonal(d, rng, n), depolarizing(d)):
            np.testing.assert_allclose(chan.completeness(), np.eye(d), atol=1e-12)

    def test_depolarizing_output(self, phi_plus):
        out = apply_channel(phi_plus, depolarizing(2, "A"), depolarizing(2, "B"))
        np.testing.assert_allclose(out.total.mat, np.eye(4) / 4, atol=1e-15)


class TestAxiomB:
    def test_identity_slack_zero(self):
        s = BipartiteState(2, 2, random_density(4, 3))
        rep = axiom_b_probe(s, identity_channel(2, "A"), identity_channel(2, "B"))
        assert rep.elementwise_slack == 0
        assert rep.measure_slack == 0
        assert not rep.negative

    def test_diagonal_channels_elementwise(self):
        rep = axiom_b_trials(0, 1000, "diagonal")
        slacks = [r.slack for r in rep.rows if r.variant == "elementwise"]
        assert len(slacks) == 1000
        assert min(slacks) >= -1e-9

    @pytest.mark.parametrize("kind", ["general", "mixed_unitary", "amplitude_damping"])
    def test_general_channels_reported(self, kind):
        rep = axiom_b_trials(1, 50, kind)
        assert len(rep.rows) == 100
        assert all(np.isfinite(r.slack) for r in rep.rows)

    def test_unitary_counterexample(self):
        # a local rotation creates coherence on |00>: element-wise monotonicity needs more structure
        s = BipartiteState(2, 2, DensityMatrix(np.diag([1.0, 0, 0, 0])))
        h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        rep = axiom_b_probe(s, KrausChannel("A", [h]), KrausChannel("B", [h]))
        assert rep.elementwise_slack == pytest.approx(-0.25)


class TestAxiomC:
    def test_bell_and_noise(self, phi_plus, mixed4):
        assert axiom_c_probe([(0.6, phi_plus), (0.4, mixed4)]).slack >= 0

    def test_single_component(self, phi_plus):
        assert axiom_c_probe([(1.0, phi_plus)]).slack == 0

    def test_random_mixtures(self):
        rep = axiom_c_trials(0, 1000)
        assert rep.min_slack >= -1e-9
        assert rep.violations == 0

    def test_weight_mismatch(self, phi_plus, mixed4):
        with pytest.raises(ValueError):
            axiom_c_probe([(0.6, phi_plus), (0.6, mixed4)])
        with pytest.raises(ValueError):
            axiom_c_probe([])


class TestTheorem1:
    def test_small_run(self):
        rep = theorem1_probe(0, 40)
        assert rep.violations == 0
        assert len(rep.rows) == 80
        assert {r.variant for r in rep.rows} == {"fixed_basis", "shared_opt"}

    def test_entangled_input_keeps_violation(self, phi_plus):
        out = apply_channel(phi_plus, identity_channel(2, "A"), identity_channel(2, "B"))
        assert evaluate(out.total, "aligned").violated

    def test_depolarized_output_satisfies_everything(self, phi_plus):
        out = apply_channel(phi_plus, depolarizing(2, "A"), depolarizing(2, "B"))
        assert not any(evaluate(out.total, k).violated for k in KINDS)

    def test_parallel_matches_serial(self):
        a = theorem1_probe(3, 6, workers=1)
        b = theorem1_probe(3, 6, workers=2)
        assert a.rows == b.rows

    def test_csv_rows(self):
        rows = list(theorem1_probe(0, 2).to_csv_rows())
        assert rows[0] == ("trial", "slack", "variant", "channel_kind")
        assert len(rows) == 5

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            theorem1_probe(0, 0)
