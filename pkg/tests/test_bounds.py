import numpy as np
import pytest

from smoothtrack import (Instance, ProblemParams, best_df_bound, bound_suite,
                         cort_consistency_term, empirical_ratio, eta, eta2,
                         gen_prediction_gap_instance, iga_cr_bound,
                         offline_optimal, pga_df_lower_bound, quadratic,
                         run_best, run_cort, run_iga, run_pga)
from smoothtrack.instances import RandomWalk, gen_random_instance


def params(w=1, l1=1.0, l2=0.1):
    return ProblemParams(w=w, lambda1=l1, lambda2=l2, d=1)


class TestRatio:
    def test_cases(self):
        assert empirical_ratio(2.0, 1.0) == 2.0
        assert empirical_ratio(1.3, 1.3) == 1.0
        assert empirical_ratio(1.0, 0.0) is None
        assert empirical_ratio(1.0, -1.0) is None


class TestInformedGreedyBound:
    def test_reference_point(self):
        rep = iga_cr_bound(params(w=1), m=2.0)
        assert rep.condition_holds
        assert rep.bound_value == pytest.approx(1.35, abs=1e-12)

    def test_w0_form(self):
        rep = iga_cr_bound(params(w=0, l2=0.3), m=1.6)
        assert rep.bound_value == pytest.approx(1 + 2 * 0.3 / (1.6 + 2))

    def test_condition_gate(self):
        # Large window, weak perturbation weight: no guarantee.
        rep = iga_cr_bound(params(w=10, l1=0.01), m=2.0)
        assert not rep.condition_holds
        assert rep.bound_value is None

    def test_large_weight_limit(self):
        # lambda1, lambda2 -> infinity jointly: bound -> 1 + 2*lambda2/(m*lambda1).
        m = 2.0
        for scale in (1e3, 1e6):
            p = params(w=3, l1=scale, l2=0.1 * scale)
            rep = iga_cr_bound(p, m)
            assert rep.bound_value == pytest.approx(
                1 + 2 * p.lambda2 / (m * p.lambda1), rel=1e-3)


class TestBlindDegradationBound:
    def test_reference_point(self):
        p = params(w=12)
        assert eta(p, 2.0) == pytest.approx(2.2118343195266275, abs=1e-15)
        assert eta2(p, 2.0) == pytest.approx(0.19154628143392216, abs=1e-12)
        rep = best_df_bound(p, m=2.0, ell=2.0)
        assert rep.bound_value == pytest.approx(20.832166097246738, abs=1e-9)

    def test_large_switching_limit(self):
        # Monotone decrease toward 1 + ell/m on a lambda2 grid.
        vals = [best_df_bound(params(w=2, l2=l2), 2.0, 2.0).bound_value
                for l2 in (0.1, 1.0, 10.0, 100.0, 1000.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(1 + 2.0 / 2.0, rel=0.05)


class TestPredictionTrustLowerBound:
    def test_reference_point(self):
        assert pga_df_lower_bound(2.0, [0.1, 0.3], 0.1, quadratic(1.0)) \
            == pytest.approx(3.0, abs=1e-12)

    def test_degenerate_errors(self):
        assert pga_df_lower_bound(2.0, [0.1, 0.1], 0.1, quadratic(1.0)) == 1.0

    def test_quadratic_scaling_of_gaps(self):
        base = pga_df_lower_bound(2.0, [0.1, 0.3], 0.1, quadratic(1.0)) - 1.0
        doubled = pga_df_lower_bound(2.0, [0.1, 0.5], 0.1, quadratic(1.0)) - 1.0
        assert doubled == pytest.approx(4.0 * base, rel=1e-12)

    def test_zero_emin_rejected(self):
        with pytest.raises(ValueError):
            pga_df_lower_bound(2.0, [0.1], 0.0, quadratic(1.0))


class TestTrustConsistencyTerm:
    def test_zero_theta(self):
        assert cort_consistency_term(params(w=12), 2.0, 2.0, 0.0) == 0.0

    def test_reference_point(self):
        assert cort_consistency_term(params(w=12), 2.0, 2.0, 1.0) \
            == pytest.approx(0.4268556961419928, abs=1e-12)

    def test_saturation(self):
        p = params(w=12)
        cap = 2 * 1.0 * 0.1 * 4.0 / (2.0 * eta(p, 2.0) * (eta(p, 2.0) - 2.0))
        assert cort_consistency_term(p, 2.0, 2.0, 1e6) == pytest.approx(
            cap, rel=1e-9)
        with pytest.raises(ValueError):
            cort_consistency_term(p, 2.0, 2.0, -1.0)


class TestBoundSuite:
    def test_random_instance_reports(self):
        inst = gen_random_instance(0, 30, params(w=1), RandomWalk(0.08))
        results = {
            "opt": offline_optimal(inst),
            "iga": run_iga(inst),
            "best": run_best(inst),
        }
        reports = {r.name: r for r in bound_suite(inst, results)}
        cr = reports["iga_cr_upper"]
        assert cr.condition_holds and cr.satisfied
        assert cr.empirical_value <= 1.35 * (1 + 1e-6)
        df = reports["best_df_upper"]
        assert df.satisfied
        assert df.empirical_value >= 1.0 - 1e-9

    def test_prediction_gap_lower_bound_satisfied(self):
        p = ProblemParams(w=0, lambda1=1.0, lambda2=1e-8, d=1)
        rng = np.random.default_rng(0)
        errors = rng.uniform(1e-3, 0.5, size=400)
        errors[0] = 1e-3
        inst, stream = gen_prediction_gap_instance([1.0], errors, 1e-3, p)
        results = {
            "opt": offline_optimal(inst),
            "iga": run_iga(inst),
            "pga": run_pga(inst, stream),
        }
        reports = {r.name: r for r in bound_suite(inst, results)}
        rep = reports["pga_df_lower"]
        assert rep.satisfied
        assert rep.empirical_value >= rep.bound_value * (1 - 1e-6)

    def test_cort_report_not_asserted(self):
        inst = gen_random_instance(1, 20, params(w=1), RandomWalk(0.05))
        results = {
            "opt": offline_optimal(inst),
            "iga": run_iga(inst),
            "cort": run_cort(inst, np.zeros((20, 1)), 0.5),
        }
        reports = {r.name: r for r in bound_suite(inst, results)}
        rep = reports["cort_consistency_term"]
        assert rep.satisfied is None
        assert rep.bound_value == pytest.approx(
            cort_consistency_term(inst.params, 2.0, 2.0, 0.5))

    def test_zero_instance_not_applicable(self):
        p = params(w=1)
        inst = Instance(tau=np.zeros((5, 1)), u=np.zeros((5, 1)),
                        f=quadratic(), params=p)
        results = {"opt": offline_optimal(inst), "iga": run_iga(inst),
                   "best": run_best(inst)}
        for rep in bound_suite(inst, results):
            assert rep.satisfied is None

    def test_missing_baseline_error(self):
        inst = gen_random_instance(2, 10, params(), RandomWalk(0.05))
        with pytest.raises(ValueError, match="iga"):
            bound_suite(inst, {"opt": offline_optimal(inst)})
