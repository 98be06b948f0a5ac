import numpy as np
import pytest
from helpers import random_ergodic, random_roster
from hypothesis import given, settings
from hypothesis import strategies as st

from hman import AgentRoster, Hman, validate
from hman.errors import ValidationError
from hman.model import (
    Trajectory,
    consensus_time,
    monte_carlo_msd,
    roster_from_spec,
    run_to_consensus,
    simulate,
    step,
    trial_rng,
    trajectory_csv,
)
from hman.moments import build_extended_recursion, iterate_eov


class TestRoster:
    def test_blocks(self):
        r = AgentRoster.from_blocks(3, 1, 1)
        assert r.names() == ["averager"] * 3 + ["copier", "voter"]
        assert (r.m_a, r.m_c, r.m_v) == (3, 1, 1)
        assert r.m_a + r.m_c + r.m_v == len(r)

    def test_arbitrary_order_and_aliases(self):
        r = AgentRoster(("v", "averager", "Copiers"))
        assert r.names() == ["voter", "averager", "copier"]
        assert r.indices("voter").tolist() == [0]

    def test_unknown_type(self):
        with pytest.raises(ValidationError):
            AgentRoster(("pundit",))

    def test_roster_length_must_match(self, five_g):
        with pytest.raises(ValidationError):
            Hman(five_g, AgentRoster.from_blocks(2, 1, 1))

    def test_from_spec(self):
        assert roster_from_spec({"averagers": 1, "voters": 2}).names() == ["averager", "voter", "voter"]
        assert roster_from_spec("copier", 2).m_c == 2
        with pytest.raises(ValidationError):
            roster_from_spec({"averagers": 1, "mystics": 1})


class TestStep:
    def test_constant_vector_without_voters(self, five_g):
        model = Hman(five_g, AgentRoster.from_blocks(3, 2, 0))
        x = np.full(5, 0.37)
        out = step(model, x, np.random.default_rng(0))
        np.testing.assert_allclose(out, x, atol=1e-15)

    @pytest.mark.parametrize("value", [0.0, 1.0])
    def test_consensus_states_absorb(self, five_model, value):
        rng = np.random.default_rng(1)
        x = np.full(5, value)
        for _ in range(50):
            x = step(five_model, x, rng)
        np.testing.assert_array_equal(x, value)

    def test_single_averager(self):
        model = Hman(validate([[1.0]]), AgentRoster.uniform(1, "averager"))
        assert step(model, [0.3], np.random.default_rng(0))[0] == 0.3

    def test_averagers_are_exact(self, five_model, five_x0):
        out = step(five_model, five_x0, np.random.default_rng(2))
        g = five_model.g.toarray()
        np.testing.assert_allclose(out[:3], g[:3] @ five_x0, atol=1e-15)

    def test_copier_takes_a_neighbour_value(self, five_model, five_x0):
        rng = np.random.default_rng(3)
        seen = {step(five_model, five_x0, rng)[3] for _ in range(200)}
        assert seen == {five_x0[1], five_x0[2], five_x0[3]}

    def test_copier_frequencies(self, five_model, five_x0):
        rng = np.random.default_rng(4)
        draws = np.array([step(five_model, five_x0, rng)[3] for _ in range(20000)])
        freq = [(draws == five_x0[j]).mean() for j in (1, 2, 3)]
        np.testing.assert_allclose(freq, [0.2, 0.2, 0.6], atol=4 * np.sqrt(0.25 / 20000))

    def test_voter_frequency(self, five_model, five_x0):
        rng = np.random.default_rng(5)
        f = 0.2 * five_x0[0] + 0.8 * five_x0[4]
        draws = np.array([step(five_model, five_x0, rng)[4] for _ in range(20000)])
        assert set(np.unique(draws)) <= {0.0, 1.0}
        assert abs(draws.mean() - f) < 4 * np.sqrt(f * (1 - f) / 20000)


class TestSimulate:
    def test_horizon_zero(self, five_model, five_x0):
        traj = simulate(five_model, five_x0, 0, seed=1)
        assert len(traj) == 1
        np.testing.assert_array_equal(traj.states[0], five_x0)

    def test_negative_horizon(self, five_model, five_x0):
        with pytest.raises(ValidationError):
            simulate(five_model, five_x0, -1)

    def test_rejects_out_of_range_opinions(self, five_model):
        with pytest.raises(ValidationError):
            simulate(five_model, [0.1, 0.2, 1.5, 0.0, 0.0], 3)

    def test_five_model_qualitative(self, five_model, five_x0):
        traj = simulate(five_model, five_x0, 300, seed=7)
        s = traj.states
        assert set(np.unique(s[1:, 4])) <= {0.0, 1.0}
        assert s.min() >= 0 and s.max() <= 1
        # the copier always holds last step's value of one of its neighbours
        for k in range(1, 301):
            assert np.any(np.isclose(s[k, 3], s[k - 1, [1, 2, 3]], atol=0))

    def test_all_averager_is_deterministic_iteration(self, five_g, five_x0):
        model = Hman(five_g, AgentRoster.uniform(5, "averager"))
        traj = simulate(model, five_x0, 60, seed=0)
        g = five_g.toarray()
        x = np.array(five_x0)
        for k in range(61):
            np.testing.assert_allclose(traj.states[k], x, atol=1e-12)
            x = g @ x

    def test_reproducible(self, five_model, five_x0):
        a = simulate(five_model, five_x0, 100, seed=3)
        b = simulate(five_model, five_x0, 100, seed=3)
        c = simulate(five_model, five_x0, 100, seed=4)
        np.testing.assert_array_equal(a.states, b.states)
        assert not np.array_equal(a.states, c.states)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 7), st.integers(0, 2**32 - 1))
    def test_bounded_and_binary_voters(self, n, seed):
        rng = np.random.default_rng(seed)
        model = Hman(random_ergodic(n, rng), random_roster(n, rng))
        traj = simulate(model, rng.random(n), 40, seed=seed % 1000)
        assert traj.states.min() >= 0 and traj.states.max() <= 1
        vi = model.roster.indices("voter")
        assert set(np.unique(traj.states[1:, vi])) <= {0.0, 1.0}

    def test_csv(self, five_model, five_x0):
        text = trajectory_csv(simulate(five_model, five_x0, 2, seed=0))
        lines = text.splitlines()
        assert lines[0] == "k,x_0,x_1,x_2,x_3,x_4"
        assert len(lines) == 4
        assert lines[1].split(",")[2] == "0.9"


class TestConsensusTime:
    def test_constant(self):
        assert consensus_time(Trajectory(np.full((4, 3), 0.5))) == 0

    def test_never(self):
        states = np.tile([0.0, 0.5], (10, 1))
        assert consensus_time(Trajectory(states), epsilon=0.1) is None

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValidationError):
            consensus_time(Trajectory(np.zeros((1, 2))), epsilon=0)

    def test_five_model_absorbs(self, five_model, five_x0):
        traj = simulate(five_model, five_x0, 3000, seed=11)
        k = consensus_time(traj)
        assert k is not None
        final = traj.states[k]
        assert np.ptp(final) < 1e-6 and final[4] in (0.0, 1.0)


class TestMonteCarlo:
    def test_trial_zero_is_simulate(self, five_model, five_x0):
        traj = simulate(five_model, five_x0, 25, seed=9)
        est = monte_carlo_msd(five_model, five_x0, 1, 25, seed=9)
        np.testing.assert_array_equal(est.mean, traj.states)

    def test_all_averager_has_zero_variance(self, five_g, five_x0):
        model = Hman(five_g, AgentRoster.uniform(5, "averager"))
        est = monte_carlo_msd(model, five_x0, 50, 20, seed=0)
        seq = iterate_eov(build_extended_recursion(model), five_x0, 20)
        np.testing.assert_allclose(est.stderr, 0.0, atol=1e-12)
        for i in range(5):
            np.testing.assert_allclose(est.msd[:, i], seq.msd(i, 0), atol=1e-12)

    def test_all_ones(self, five_model):
        est = monte_carlo_msd(five_model, np.ones(5), 200, 30, seed=0)
        assert not est.msd.any()

    def test_chunking_does_not_change_results(self, five_model, five_x0):
        a = monte_carlo_msd(five_model, five_x0, 300, 15, seed=5, chunk=7)
        b = monte_carlo_msd(five_model, five_x0, 300, 15, seed=5)
        np.testing.assert_allclose(a.msd, b.msd, rtol=1e-12, atol=1e-15)

    def test_trials_validated(self, five_model, five_x0):
        with pytest.raises(ValidationError):
            monte_carlo_msd(five_model, five_x0, 0, 5)

    def test_first_moment_is_martingale(self, five_model, five_x0):
        est = monte_carlo_msd(five_model, five_x0, 20000, 20, seed=21)
        g = five_model.g.toarray()
        x = np.array(five_x0)
        for k in range(21):
            dev = np.abs(est.mean[k] - x)
            assert np.all(dev <= 4 * est.mean_stderr[k] + 1e-12)
            x = g @ x

    def test_csv(self, five_model, five_x0):
        text = monte_carlo_msd(five_model, five_x0, 10, 2, seed=0).to_csv()
        lines = text.splitlines()
        assert lines[0] == "k,agent,msd,stderr"
        assert len(lines) == 1 + 3 * 5


class TestRunToConsensus:
    def test_matches_simulate(self, five_model, five_x0):
        runs = run_to_consensus(five_model, five_x0, 3, seed=11, block=17)
        for t in range(3):
            rng = trial_rng(11, t)
            x = np.array(five_x0)
            for _ in range(runs.times[t]):
                x = step(five_model, x, rng)
            assert np.ptp(x) < 1e-6
            assert runs.values[t] == pytest.approx(x.mean())

    def test_voter_model_absorbs_at_binary_values(self):
        g = random_ergodic(4, np.random.default_rng(2))
        model = Hman(g, AgentRoster.uniform(4, "voter"))
        runs = run_to_consensus(model, [1, 0, 0, 1], 500, seed=3)
        assert runs.reached.all()
        assert set(np.unique(runs.values)) <= {0.0, 1.0}
