import numpy as np
import pytest

from smoothtrack import (Box, CortState, Instance, InformedGreedyPolicy,
                         Policy, ProblemParams, ProtocolError, quadratic,
                         run_best, run_cort, run_iga, run_naive_greedy,
                         run_pga, simulate, perfect_predictor)
from smoothtrack.instances import RandomWalk, gen_random_instance


def params(w=1, l1=1.0, l2=0.1, d=1, domain=None):
    return ProblemParams(w=w, lambda1=l1, lambda2=l2, d=d, domain=domain)


def random_instance(seed, T=30, w=1, d=1, domain=None, l1=1.0, l2=0.1):
    p = ProblemParams(w=w, lambda1=l1, lambda2=l2, d=d, domain=domain)
    return gen_random_instance(seed, T, p, RandomWalk(0.08))


class TestProtocol:
    def test_hidden_target_guarded(self):
        inst = random_instance(0, T=3)
        with pytest.raises(ProtocolError):
            simulate(InformedGreedyPolicy(inst.params), inst)

    def test_relaxed_revelation_allows_informed(self):
        inst = random_instance(0, T=3)
        res = simulate(InformedGreedyPolicy(inst.params), inst,
                       relaxed_revelation=True)
        assert res.T == 3

    def test_zero_policy_zero_instance(self):
        class Zero(Policy):
            name = "zero"

            def observe(self, obs):
                pass

            def act(self):
                return np.zeros(1)

        inst = Instance(tau=np.zeros((4, 1)), u=np.zeros((4, 1)),
                        f=quadratic(), params=params())
        assert simulate(Zero(), inst).total_cost == 0.0

    def test_out_of_domain_action_rejected(self):
        class Escape(Policy):
            name = "escape"

            def observe(self, obs):
                pass

            def act(self):
                return np.array([2.0])

        inst = random_instance(0, T=3, domain=Box.uniform(0.0, 1.0, 1))
        with pytest.raises(ProtocolError, match="slot 1"):
            simulate(Escape(), inst)

    def test_blind_policies_ignore_future_targets(self):
        # Scrambling u from slot k on must not change any action before k.
        base = random_instance(3, T=20)
        k = 10
        u2 = base.u.copy()
        u2[k:] = 0.91 - u2[k:]
        other = Instance(tau=base.tau, u=u2, f=base.f, params=base.params)
        for runner in (run_best, run_naive_greedy, lambda i: run_pga(
                i, np.zeros((i.T, 1))), lambda i: run_cort(
                i, np.zeros((i.T, 1)), 0.5)):
            a = runner(base).actions
            b = runner(other).actions
            assert np.array_equal(a[:k], b[:k])
            # Informed greedy, by contrast, reacts at slot k already.
        assert not np.allclose(run_iga(base).actions[:k + 1],
                               run_iga(other).actions[:k + 1])


class TestHandCases:
    def test_informed_first_step(self):
        inst = Instance(tau=[[0.3]], u=[[0.5]], f=quadratic(1.0),
                        params=params())
        res = run_iga(inst)
        assert res.actions[0, 0] == pytest.approx(0.65 / 1.35, abs=1e-12)

    def test_cost_free_instance_for_informed(self):
        # Constant reachable targets: after the transient the informed policy
        # holds the fixed point and pays nothing.
        v = 0.5
        T = 60
        inst = Instance(tau=np.full((T, 1), v), u=np.full((T, 1), v),
                        f=quadratic(1.0), params=params(w=2))
        res = run_iga(inst)
        assert res.step_totals[-1] < 1e-10

    def test_first_step_best_equals_naive(self):
        inst = random_instance(5, T=1)
        assert np.allclose(run_best(inst).actions, run_naive_greedy(inst).actions)

    def test_best_matches_naive_when_target_follows_action(self):
        # If u_t always equals the blind action, the informed replay follows
        # the same chain and the two blind policies coincide.
        T, d = 12, 1
        p = params(w=1)
        naive_actions = []
        tau = np.random.default_rng(8).uniform(0, 1, (T, 1))
        u = np.zeros((T, 1))
        from smoothtrack import StepProblem, per_step_argmin
        from smoothtrack.model import HistoryBuffer
        hist = HistoryBuffer(1, 1)
        for t in range(T):
            x = per_step_argmin(StepProblem(params=p, h=hist.sum(),
                                            z=hist.prev, tau=tau[t]))
            u[t] = x
            naive_actions.append(x)
            hist.push(x)
        inst = Instance(tau=tau, u=u, f=quadratic(1.0), params=p)
        best = run_best(inst)
        assert np.allclose(best.actions, np.asarray(naive_actions), atol=1e-12)
        assert np.allclose(best.actions, run_naive_greedy(inst).actions,
                           atol=1e-12)

    def test_pga_perfect_equals_informed(self):
        inst = random_instance(6, T=25, w=2)
        pga = run_pga(inst, perfect_predictor(inst))
        iga = run_iga(inst)
        assert np.allclose(pga.actions, iga.actions, atol=1e-8)
        assert pga.total_cost == pytest.approx(iga.total_cost, rel=1e-8)

    def test_pga_length_mismatch(self):
        inst = random_instance(6, T=10)
        with pytest.raises(Exception):
            run_pga(inst, np.zeros((9, 1)))


class TestCortState:
    def test_clip_ray_case(self):
        state = CortState(theta=0.5, d_sq=0.04)  # D = 0.2
        u_tilde, clipped = state.clip(np.array([0.7]), np.array([0.4]))
        assert clipped
        assert u_tilde[0] == pytest.approx(0.5)

    def test_clip_inactive_inside_ball(self):
        state = CortState(theta=2.0, d_sq=1.0)
        u_tilde, clipped = state.clip(np.array([0.6]), np.array([0.4]))
        assert not clipped
        assert u_tilde[0] == 0.6

    def test_clip_zero_gap(self):
        state = CortState(theta=0.5, d_sq=0.0)
        u_tilde, clipped = state.clip(np.array([0.4]), np.array([0.4]))
        assert clipped and u_tilde[0] == 0.4

    def test_radius_update_case(self):
        state = CortState(theta=0.5, d_sq=0.04)
        # ||u - x||^2 = 0.09, ||u~ - x|| = 0.1 -> 0.04 + 0.09 - 4*0.01 = 0.09
        x = np.array([0.0])
        state.absorb(u=np.array([0.3]), x=x, u_tilde=np.array([0.1]))
        assert state.d_sq == pytest.approx(0.09)

    def test_theta_zero_update_drops_clip_term(self):
        state = CortState(theta=0.0)
        state.absorb(u=np.array([0.3]), x=np.array([0.0]),
                     u_tilde=np.array([0.0]))
        assert state.d_sq == pytest.approx(0.09)

    def test_negative_theta_rejected(self):
        with pytest.raises(ValueError):
            CortState(theta=-0.1)


class TestCortPolicy:
    def test_theta_zero_equals_best(self):
        for seed in range(10):
            inst = random_instance(seed, T=40, w=2)
            preds = np.random.default_rng(seed + 100).uniform(0, 1, (40, 1))
            cort = run_cort(inst, preds, 0.0)
            best = run_best(inst)
            assert np.max(np.abs(cort.actions - best.actions)) <= 1e-10

    def test_first_step_equals_best_any_theta(self):
        inst = random_instance(11, T=5)
        preds = np.full((5, 1), 0.9)
        cort = run_cort(inst, preds, theta=3.0)
        best = run_best(inst)
        assert np.allclose(cort.actions[0], best.actions[0], atol=1e-12)

    def test_trust_invariants(self):
        for seed in range(5):
            inst = random_instance(seed, T=60, w=1)
            preds = np.random.default_rng(seed).uniform(0, 1, (60, 1))
            for theta in (0.0, 0.3, 1.0, 4.0):
                res = run_cort(inst, preds, theta)
                d_sq = res.extras["d_sq"]
                u_tilde = res.extras["u_tilde"]
                x_blind = res.extras["best_actions"]
                gaps = np.linalg.norm(u_tilde - x_blind, axis=1)
                radii = theta * np.sqrt(np.maximum(d_sq[:-1], 0.0))
                assert np.all(gaps <= radii + 1e-12)
                err = np.sum((inst.u - x_blind) ** 2, axis=1)
                assert np.all(d_sq[1:] >= err - 1e-12)

    def test_consistency_limit_matches_informed(self):
        inst = random_instance(13, T=50, w=1)
        res = run_cort(inst, perfect_predictor(inst), theta=1e3)
        iga = run_iga(inst)
        inactive = ~res.extras["clip_active"]
        assert inactive.sum() >= 40
        assert np.max(np.abs(res.actions[inactive] - iga.actions[inactive])) <= 1e-8

    def test_negative_theta_rejected(self):
        inst = random_instance(1, T=3)
        with pytest.raises(ValueError):
            run_cort(inst, np.zeros((3, 1)), -1.0)


class TestReferenceVsKernels:
    def test_all_policies_agree(self):
        for seed in (0, 1):
            for w in (0, 1, 3):
                for domain in (None, Box.uniform(0.0, 1.0, 1)):
                    inst = random_instance(seed, T=25, w=w, domain=domain)
                    preds = np.random.default_rng(seed + 7).uniform(
                        0, 1, (25, 1))
                    pairs = [
                        (run_iga(inst), run_iga(inst, reference=True)),
                        (run_best(inst), run_best(inst, reference=True)),
                        (run_naive_greedy(inst),
                         run_naive_greedy(inst, reference=True)),
                        (run_pga(inst, preds),
                         run_pga(inst, preds, reference=True)),
                        (run_cort(inst, preds, 0.7),
                         run_cort(inst, preds, 0.7, reference=True)),
                    ]
                    for fast, ref in pairs:
                        assert np.allclose(fast.actions, ref.actions,
                                           atol=1e-9), (fast.algorithm, w)

    def test_cort_diagnostics_agree(self):
        inst = random_instance(2, T=20, w=1)
        preds = np.random.default_rng(3).uniform(0, 1, (20, 1))
        fast = run_cort(inst, preds, 0.5)
        ref = run_cort(inst, preds, 0.5, reference=True)
        assert np.allclose(fast.extras["d_sq"], ref.extras["d_sq"], atol=1e-9)
        assert np.array_equal(fast.extras["clip_active"],
                              ref.extras["clip_active"])
        assert np.allclose(fast.extras["informed_actions"],
                           ref.extras["informed_actions"], atol=1e-9)

    def test_multidimensional(self):
        p = ProblemParams(w=2, lambda1=0.8, lambda2=0.2, d=3,
                          domain=Box.uniform(0.0, 1.0, 3))
        inst = gen_random_instance(4, 15, p, RandomWalk(0.1))
        preds = np.random.default_rng(5).uniform(0, 1, (15, 3))
        fast = run_cort(inst, preds, 0.4)
        ref = run_cort(inst, preds, 0.4, reference=True)
        assert np.allclose(fast.actions, ref.actions, atol=1e-9)
