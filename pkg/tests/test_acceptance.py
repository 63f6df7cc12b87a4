"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single ``criterion N PASS|FAIL`` line with its runtime,
visible under plain ``pytest``. Run on its own with

    python3 -m pytest tests/test_acceptance.py -v
"""

import sys
from contextlib import contextmanager
from time import perf_counter

import numpy as np
import pytest

from slhs.basis_opt import OptimizerConfig
from slhs.circuits import combo_identity, estimate_combo
from slhs.cli import sweep_rows
from slhs.families import IsotropicSpec, bell, isotropic, lhs_assemblage_state, random_separable, thresholds
from slhs.inequalities import KINDS, bound_oracle, evaluate, max_violation
from slhs.measure import axiom_b_trials, axiom_c_trials, theorem1_probe
from slhs.qcore import BipartiteState, DensityMatrix, LocalBasis, haar_unitary, random_density
from slhs.selftest import SelfTestAssumptions, adversarial_search, algebra_trace, certify

from oracles import element

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(capsys, number, title, budget):
    info = {}
    start = perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = perf_counter() - start
        passed = ok and elapsed < budget
        extra = " ".join(f"{k}={v}" for k, v in info.items())
        with capsys.disabled():
            print(f"\ncriterion {number} {'PASS' if passed else 'FAIL'}: {title} [{elapsed:.2f} s < {budget} s] {extra}")
    assert elapsed < budget, f"criterion {number} took {elapsed:.2f} s, budget {budget} s"


def test_criterion_1_werner_sweep(capsys):
    with criterion(capsys, 1, "Werner phi+ 101x101 aligned sweep", 1.0) as info:
        ps = np.linspace(0, 1, 101)
        alphas = np.linspace(0, 1, 101)
        rows = sweep_rows("werner-phi", "aligned", ps, alphas)
        assert len(rows) == 101 * 101
        err = max(abs(lhs - 2 * p * np.sqrt(a * (1 - a))) for p, a, lhs, _, _ in rows)
        info["max_err"] = f"{err:.1e}"
        assert err <= 1e-12
        half = [(p, v) for p, a, _, _, v in rows if a == 0.5]
        assert all(v == (p > 0.5) for p, v in half)


def test_criterion_2_maximal_violation(capsys):
    with criterion(capsys, 2, "aligned lhs of phi+ at z, z", 1.0) as info:
        s = BipartiteState(2, 2, DensityMatrix(bell("phi+").projector()))
        rep = evaluate(s, "aligned")
        info["lhs"] = rep.lhs
        assert rep.lhs == pytest.approx(1.0, abs=1e-12)
        assert rep.bound == 0.5 and rep.violated


def test_criterion_3_isotropic(capsys):
    with criterion(capsys, 3, "isotropic lhs, thresholds and ordering for d = 2..6", 1.0):
        for d in range(2, 7):
            for p in np.linspace(0, 1, 21):
                rep = evaluate(isotropic(IsotropicSpec(d, p)), "aligned")
                assert rep.lhs == pytest.approx((d - 1) * p, abs=1e-9)
            assert not evaluate(isotropic(IsotropicSpec(d, 1 / d - 1e-6)), "aligned").violated
            assert evaluate(isotropic(IsotropicSpec(d, 1 / d + 1e-6)), "aligned").violated
            t = thresholds(d)
            steer = sum(1 / r for r in range(2, d + 1)) / (d - 1)
            assert t.entangled == pytest.approx(1 / (d + 1), abs=1e-15)
            assert t.steerable == pytest.approx(steer, abs=1e-15)
            assert t.slhs == pytest.approx(1 / d, abs=1e-15)
            if d == 2:
                assert t.slhs == pytest.approx(t.steerable, abs=1e-15)
            else:
                assert t.entangled < t.slhs < t.steerable


def test_criterion_4_combination_identities(capsys):
    with criterion(capsys, 4, "projector combinations equal 2 Re(element) on 1000 states", 10.0) as info:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(1000):
            s = BipartiteState(2, 2, random_density(4, rng))
            ua, ub = haar_unitary(2, rng), haar_unitary(2, rng)
            ba, bb = LocalBasis(ua), LocalBasis(ub)
            aligned = element(s.mat, ua, ub, 0, 0, 1, 1)
            swapped = element(s.mat, ua, ub, 0, 1, 1, 0)
            worst = max(
                worst,
                abs(combo_identity(s, ba, bb, 0, 1, "eq12") - 2 * aligned.real),
                abs(combo_identity(s, ba, bb, 0, 1, "eq13") - 2 * swapped.real),
            )
        info["max_err"] = f"{worst:.1e}"
        assert worst <= 1e-10


def test_criterion_5_simulated_experiment(capsys):
    with criterion(capsys, 5, "simulated eq12 estimates at 8192 shots", 5.0) as info:
        clean = estimate_combo(8192, 7, 0.0, "eq12")
        noisy = estimate_combo(8192, 7, 0.08, "eq12")
        info["noiseless"] = f"{clean.value:.4f}+-{clean.stderr:.4f}"
        info["noisy"] = f"{noisy.value:.4f}+-{noisy.stderr:.4f}"
        assert abs(clean.value - 1.0) <= 4 * clean.stderr + 1e-12
        assert abs(noisy.value - 0.92) <= 4 * noisy.stderr


def test_criterion_6_self_testing(capsys):
    with criterion(capsys, 6, "certification of phi+ and adversarial search at epsilon 0", 60.0) as info:
        s = BipartiteState(2, 2, DensityMatrix(bell("phi+").projector()))
        a = SelfTestAssumptions.computational()
        verdict = certify(s, a)
        assert verdict.certified
        assert verdict.fidelity == pytest.approx(1.0, abs=1e-9)
        trace = algebra_trace(s, a)
        assert max(abs(r) for r in trace.residuals.values()) <= 1e-10
        res = adversarial_search(0.0, cfg=OptimizerConfig(restarts=32, max_evals=4000))
        info["infidelity"] = f"{res.infidelity:.1e}"
        assert res.infidelity <= 1e-6


def _violations(s):
    return [k.value for k in KINDS if evaluate(s, k).violated]


def test_criterion_7_separable_and_assemblage(capsys):
    with criterion(capsys, 7, "no violations by separable or assemblage states", 300.0) as info:
        states = [random_separable(seed, 1 + seed % 8) for seed in range(1000)]
        states += [lhs_assemblage_state(seed, 1 + seed % 4) for seed in range(1000)]
        fixed = sum(len(_violations(s)) for s in states)
        info["fixed_violations"] = fixed
        assert fixed == 0
        cfg = OptimizerConfig(restarts=8)
        worst = -np.inf
        optimized = 0
        for s in states[::20]:
            for k in KINDS:
                rep = max_violation(s, k, cfg)
                worst = max(worst, rep.lhs - rep.bound)
                optimized += rep.violated
        info["optimized_violations"] = optimized
        info["max_lhs_minus_bound"] = f"{worst:.2e}"
        assert optimized == 0


def test_criterion_8_resource_axioms(capsys):
    with criterion(capsys, 8, "axiom (c), element-wise axiom (b), channel probe", 300.0) as info:
        c = axiom_c_trials(0, 1000)
        info["axiom_c_min"] = f"{c.min_slack:.2e}"
        assert c.min_slack >= -1e-9

        b = axiom_b_trials(0, 1000, "diagonal")
        elementwise = min(r.slack for r in b.rows if r.variant == "elementwise")
        info["axiom_b_diag_min"] = f"{elementwise:.2e}"
        assert elementwise >= -1e-9

        t1 = theorem1_probe(0, 1000)
        info["theorem1_violations"] = t1.violations
        assert t1.violations == 0

        for kind in ("general", "mixed_unitary"):
            g = axiom_b_trials(0, 1000, kind)
            info[f"axiom_b_{kind}_min"] = f"{min(r.slack for r in g.rows if r.variant == 'elementwise'):.2e}"


def test_criterion_9_bound_oracle(capsys):
    with criterion(capsys, 9, "numerical maximum of the product transition sum", 120.0) as info:
        for d in range(2, 6):
            res = bound_oracle(d)
            info[f"d{d}"] = f"{res.value:.9f}"
            assert res.value == pytest.approx((d - 1) / d, abs=1e-6)
            np.testing.assert_allclose(res.transitionsA, 1 / d, atol=1e-3)
            np.testing.assert_allclose(res.transitionsB, 1 / d, atol=1e-3)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
