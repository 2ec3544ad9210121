import numpy as np
import pytest
from scipy.stats import ks_2samp

from onebitnet import (ExponentialModel, GaussianModel, SimConfig,
                       build_uniform_matrix, empirical_cdf, ks_distance,
                       neighbor_sets_from_edges, reaction_time, run,
                       step_one_bit, step_quantized_state, step_unquantized)
from onebitnet.simulate import ONE_BIT_X, QUANTIZED_STATE, UNQUANTIZED
from onebitnet.validation import (explicit_one_bit_state, iterate_scheme,
                                  unquantized_matrix_state)
from tests.conftest import make_network


class TestSimConfig:
    def test_schedule_validation(self, gauss1, net_a25):
        with pytest.raises(ValueError, match="start at step 1"):
            SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=10,
                      trials=1, schedule=((2, 0),))
        with pytest.raises(ValueError, match="increasing"):
            SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=10,
                      trials=1, schedule=((1, 0), (1, 1)))
        with pytest.raises(ValueError, match="scheme"):
            SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=10,
                      trials=1, scheme="bogus")

    def test_hypothesis_steps(self, gauss1, net_a25):
        cfg = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=8,
                        trials=1, schedule=((1, 0), (4, 1), (7, 0)))
        np.testing.assert_array_equal(cfg.hypothesis_steps(),
                                      [0, 0, 0, 1, 1, 1, 0, 0])


class TestSingleSteps:
    def test_self_reliant_network_is_scalar_smoothing(self, gauss1):
        net = build_uniform_matrix([frozenset({0}), frozenset({1})], 1.0)
        y = np.array([0.4, -0.2])
        x = np.array([1.0, 0.5])
        got = step_one_bit(y, x, gauss1, net, 0.1)
        np.testing.assert_allclose(got, (1 - 0.1) * y + 0.1 * x, atol=1e-15)
        got_u = step_unquantized(y, x, net, 0.1)
        np.testing.assert_allclose(got_u, got, atol=1e-15)

    def test_hand_evaluated_single_step(self, gauss1):
        # node 9 (single neighbor 7), a = 0.25, mu = 0.1, from rest:
        # v_9 = 0.1 * 0.5; neighbor message E0 x = -1 with weight 0.75
        net = make_network(0.25)
        y = np.zeros(10)
        x = np.zeros(10)
        x[9] = 0.5
        x[7] = -0.2
        got = step_one_bit(y, x, gauss1, net, 0.1)
        np.testing.assert_allclose(got[9], 0.25 * 0.05 + 0.75 * (-1.0),
                                   atol=1e-15)
        assert got[9] == pytest.approx(-0.7375)

    def test_quantized_state_message_levels(self, gauss1):
        net = make_network(0.25)
        y = np.zeros(10)
        y[7] = 0.3 / 0.1  # v_7 = y + mu (x - y) = 0.3 when x = ... pick x directly
        x = np.zeros(10)
        got = step_quantized_state(np.zeros(10), np.full(10, 0.3), gauss1, net, 0.1)
        # all intermediate states are 0.03 >= 0, so every message is E1 x = 1
        expected_9 = 0.25 * (0.1 * 0.3) + 0.75 * 1.0
        np.testing.assert_allclose(got[9], expected_9, atol=1e-15)


class TestClosedFormOracles:
    def test_one_bit_and_unquantized_match_closed_forms(self):
        # randomized configurations, both oracles, 1e-12 agreement
        rng = np.random.default_rng(5)
        for _ in range(100):
            S = int(rng.integers(3, 8))
            ring = [(i, (i + 1) % S) for i in range(S)]
            extra = [(i, j) for i in range(S) for j in range(i + 1, S)
                     if rng.random() < 0.4]
            net = build_uniform_matrix(neighbor_sets_from_edges(S, ring + extra),
                                       rng.uniform(0.1, 0.95, S))
            mu = float(rng.uniform(0.02, 0.4))
            model = GaussianModel(float(rng.uniform(0.3, 3.0))) \
                if rng.random() < 0.5 else ExponentialModel(float(rng.uniform(1.5, 8.0)))
            n = int(rng.integers(1, 25))
            h = int(rng.integers(0, 2))
            x = model.sample(h, rng, (n, S))
            y0 = rng.normal(0.0, 1.0, S)
            y_end = iterate_scheme(net, model, mu, ONE_BIT_X, x, y0)
            for k in range(S):
                ref = explicit_one_bit_state(net, model, mu, k, x, y0)
                assert abs(y_end[k] - ref) < 1e-12
            y_end_u = iterate_scheme(net, model, mu, UNQUANTIZED, x, y0)
            ref_u = unquantized_matrix_state(net, mu, x, y0)
            np.testing.assert_allclose(y_end_u, ref_u, atol=1e-12)

    def test_run_matches_explicit_form_per_trial(self, gauss1):
        net = make_network(0.25)
        cfg = SimConfig(network=net, model=gauss1, mu=0.1, n_iters=12,
                        trials=5, seed=3)
        ens = run(cfg)
        from onebitnet.simulate import _trial_rng, draw_statistics
        for t in range(cfg.trials):
            rng = _trial_rng(cfg.seed, t)
            x = draw_statistics(gauss1, cfg.hypothesis_steps(), net.size, rng)
            for k in (0, 3, 9):
                ref = explicit_one_bit_state(net, gauss1, 0.1, k, x, np.zeros(10))
                assert abs(ens.terminal_states[t, k] - ref) < 1e-12


class TestRunDeterminism:
    def test_same_seed_bit_identical(self, expo5, net_a25):
        cfg = SimConfig(network=net_a25, model=expo5, mu=0.1, n_iters=30,
                        trials=64, seed=11)
        a = run(cfg, trajectory_nodes=(3,))
        b = run(cfg, trajectory_nodes=(3,))
        np.testing.assert_array_equal(a.terminal_states, b.terminal_states)
        np.testing.assert_array_equal(a.trajectories[3], b.trajectories[3])

    def test_chunking_does_not_change_trials(self, gauss1, net_a25):
        cfg = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=20,
                        trials=50, seed=7)
        a = run(cfg)
        b = run(cfg, chunk_trials=7)
        np.testing.assert_array_equal(a.terminal_states, b.terminal_states)

    def test_different_seeds_differ(self, gauss1, net_a25):
        cfg1 = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=10,
                         trials=8, seed=0)
        cfg2 = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=10,
                         trials=8, seed=1)
        assert not np.array_equal(run(cfg1).terminal_states,
                                  run(cfg2).terminal_states)


class TestStationarity:
    def test_transient_forgotten(self, gauss1, net_a25):
        # nonzero start decays like eta^n pathwise
        cfg = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=100,
                        trials=32, seed=2)
        base = run(cfg)
        shifted = run(cfg, y0=np.full(10, 3.0))
        eta_max = (1 - 0.1) * 0.25
        gap = np.max(np.abs(base.terminal_states - shifted.terminal_states))
        assert gap <= 3.0 * 10 * eta_max ** 100 + 1e-12

    def test_doubling_horizon_is_noise_level(self, gauss1, net_a25):
        cfg100 = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=100,
                           trials=2000, seed=4)
        cfg200 = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=200,
                           trials=2000, seed=5)
        s100 = run(cfg100).terminal_states[:, 3]
        s200 = run(cfg200).terminal_states[:, 3]
        assert ks_2samp(s100, s200).pvalue > 0.01


class TestEmpiricalCdf:
    def test_single_trial_step_function(self, gauss1, net_a25):
        cfg = SimConfig(network=net_a25, model=gauss1, mu=0.1, n_iters=5,
                        trials=1, seed=0)
        ens = run(cfg)
        cdf = empirical_cdf(ens, 3)
        v = ens.terminal_states[0, 3]
        assert cdf(v - 1e-9) == 0.0
        assert cdf(v) == 1.0

    def test_exchangeable_nodes_agree(self, gauss1):
        # complete graph with uniform weights: node CDFs match within noise
        S = 5
        edges = [(i, j) for i in range(S) for j in range(i + 1, S)]
        net = build_uniform_matrix(neighbor_sets_from_edges(S, edges), 0.4)
        cfg = SimConfig(network=net, model=gauss1, mu=0.1, n_iters=80,
                        trials=4000, seed=6)
        ens = run(cfg)
        assert ks_2samp(ens.terminal_states[:, 0],
                        ens.terminal_states[:, 3]).pvalue > 0.01

    def test_ks_distance_helper(self):
        sample = np.array([0.1, 0.4, 0.7])
        assert ks_distance(sample, lambda t: np.asarray(t)) == pytest.approx(
            max(abs(1 / 3 - 0.1), abs(0.4 - 1 / 3), abs(2 / 3 - 0.4),
                abs(0.7 - 2 / 3), abs(1.0 - 0.7)))


class TestReactionTime:
    def test_instantaneous_jump(self):
        traj = np.concatenate([np.zeros(50), np.ones(50)])
        assert reaction_time(traj, 51) == 1

    def test_geometric_approach(self):
        # reaching 90% of the gap takes ceil(log(0.1)/log(eta)) steps
        eta = 0.8
        n_pre, n_post = 40, 120
        post = 1 - eta ** np.arange(1, n_post + 1)
        traj = np.concatenate([np.zeros(n_pre), post])
        got = reaction_time(traj, n_pre + 1)
        assert got == int(np.ceil(np.log(0.1) / np.log(eta)))

    def test_unreached_signals(self):
        # a target beyond the settled level is never crossed
        traj = np.concatenate([np.zeros(50), np.linspace(0, 0.5, 50)])
        with pytest.raises(ValueError, match="unreached"):
            reaction_time(traj, 51, target_fraction=2.0)

    def test_downward_switch(self):
        traj = np.concatenate([np.ones(50), np.zeros(50)])
        assert reaction_time(traj, 51) == 1


class TestSchemeOrdering:
    def test_reaction_ordering_small_scale(self):
        # scaled-down version of the adaptivity experiment
        model = GaussianModel(2.0)
        net = make_network(0.75)
        schedule = ((1, 0), (301, 1), (601, 0))
        times = {}
        for scheme in (ONE_BIT_X, QUANTIZED_STATE, UNQUANTIZED):
            cfg = SimConfig(network=net, model=model, mu=0.1, n_iters=900,
                            trials=60, scheme=scheme, schedule=schedule, seed=1)
            ens = run(cfg, trajectory_nodes=(3,))
            times[scheme] = reaction_time(ens.trajectories[3], 301, post_end=600)
        assert times[ONE_BIT_X] < times[QUANTIZED_STATE]
        assert times[ONE_BIT_X] <= times[UNQUANTIZED]
