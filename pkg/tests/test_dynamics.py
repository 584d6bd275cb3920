import numpy as np
import pytest

from relustab import (
    RnnModel,
    empirical_gain_lower_bound,
    example_rnn,
    hinf_norm,
    l2_norm,
    relu,
    relu_triple_satisfied,
    simulate,
)

from conftest import random_stable_model


class TestRelu:
    def test_values(self):
        np.testing.assert_array_equal(relu(np.array([-1.0, 0.0, 2.0])),
                                      [0.0, 0.0, 2.0])

    def test_matrix_input(self):
        out = relu(np.array([[-3.0, 4.0], [0.5, -0.5]]))
        np.testing.assert_array_equal(out, [[0.0, 4.0], [0.5, 0.0]])

    def test_triple_holds_on_graph(self, rng):
        xi = rng.standard_normal(50)
        assert relu_triple_satisfied(xi, relu(xi))

    def test_triple_rejects_off_graph(self, rng):
        xi = rng.standard_normal(10)
        assert not relu_triple_satisfied(xi, relu(xi) + 0.1)
        # negative "output" violates zeta >= 0
        assert not relu_triple_satisfied(np.ones(3), -np.ones(3))

    def test_triple_shape_mismatch(self):
        with pytest.raises(ValueError):
            relu_triple_satisfied(np.zeros(3), np.zeros(4))


class TestRnnModel:
    def test_dimensions(self):
        model = example_rnn()
        assert (model.n, model.m) == (6, 6)
        assert model.Lambda.shape == (6, 6)
        assert model.W_in.shape == (6, 6)
        assert model.W_out.shape == (6, 6)

    def test_parameter_injection(self):
        model = example_rnn(a=0.5, b=2.0)
        assert model.W_in[0, 2] == pytest.approx(0.52)
        assert model.W_in[2, 1] == 2.0
        base = example_rnn()
        mask = np.ones((6, 6), dtype=bool)
        mask[0, 2] = mask[2, 1] = False
        np.testing.assert_array_equal(model.W_in[mask], base.W_in[mask])

    def test_rejects_unstable_lambda(self):
        with pytest.raises(ValueError, match="Schur"):
            RnnModel(np.eye(2), np.ones((2, 1)), np.ones((1, 2)))
        with pytest.raises(ValueError, match="Schur"):
            RnnModel(np.array([[1.5]]), np.ones((1, 1)), np.ones((1, 1)))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            RnnModel(np.zeros((2, 3)), np.ones((2, 1)), np.ones((1, 2)))
        with pytest.raises(ValueError):
            RnnModel(np.zeros((2, 2)), np.ones((3, 1)), np.ones((1, 2)))
        with pytest.raises(ValueError):
            RnnModel(np.zeros((2, 2)), np.ones((2, 1)), np.ones((1, 3)))

    def test_matrices_read_only(self):
        model = example_rnn()
        with pytest.raises(ValueError):
            model.W_in[0, 0] = 1.0


class TestSimulate:
    def test_impulse_response_first_steps(self):
        # v = e1 at k=0, s = 0: the state inherits the impulse one step
        # later and, with W_out = I, so do z and w.
        model = example_rnn()
        horizon = 3
        v = np.zeros((horizon, 6))
        v[0, 0] = 1.0
        s = np.zeros((horizon, 6))
        traj = simulate(model, s, v, horizon)
        e1 = np.eye(6)[0]
        np.testing.assert_array_equal(traj.x[0], np.zeros(6))
        np.testing.assert_array_equal(traj.x[1], e1)
        np.testing.assert_array_equal(traj.z[1], e1)
        np.testing.assert_array_equal(traj.w[1], e1)

    def test_recursion_exact(self, rng):
        model = random_stable_model(rng)
        horizon = 40
        s = rng.standard_normal((horizon, model.m))
        v = rng.standard_normal((horizon, model.n))
        traj = simulate(model, s, v, horizon)
        assert traj.horizon == horizon
        assert traj.x.shape == (horizon + 1, model.n)
        for k in range(horizon):
            np.testing.assert_array_equal(traj.z[k], model.W_out @ traj.x[k])
            np.testing.assert_array_equal(traj.w[k],
                                          relu(traj.z[k] + s[k]))
            np.testing.assert_array_equal(
                traj.x[k + 1],
                model.Lambda @ traj.x[k] + model.W_in @ traj.w[k] + v[k])
            assert relu_triple_satisfied(traj.z[k] + s[k], traj.w[k])

    def test_signal_length_checked(self):
        model = example_rnn()
        with pytest.raises(ValueError):
            simulate(model, np.zeros((2, 6)), np.zeros((5, 6)), 5)
        with pytest.raises(ValueError):
            simulate(model, np.zeros((5, 5)), np.zeros((5, 6)), 5)


def test_l2_norm():
    assert l2_norm(np.array([[3.0], [4.0]])) == 5.0
    assert l2_norm(np.zeros((4, 2))) == 0.0


class TestHinfNorm:
    def test_scalar_lag_closed_form(self):
        # G(q) = 1 / (q - 0.5) peaks at q = 1 with value 2.
        model = RnnModel(np.array([[0.5]]), np.array([[1.0]]),
                         np.array([[1.0]]))
        assert hinf_norm(model, tol=1e-6) == pytest.approx(2.0, abs=1e-4)

    def test_zero_input_matrix(self):
        model = RnnModel(0.5 * np.eye(2), np.zeros((2, 1)), np.ones((1, 2)))
        assert hinf_norm(model) == 0.0

    def test_benchmark_operating_point(self):
        assert hinf_norm(example_rnn(0.0, 0.0)) == pytest.approx(
            0.9605, abs=1e-3)

    def test_matches_dense_frequency_grid(self, rng):
        # The true norm upper-bounds every frequency sample and the
        # bisection should sit just above the densest sample.
        for _ in range(3):
            model = random_stable_model(rng, n=3, m=2, rho=0.7)
            thetas = np.linspace(0.0, np.pi, 8192)
            peak = max(
                np.linalg.norm(
                    model.W_out @ np.linalg.solve(
                        np.exp(1j * th) * np.eye(3) - model.Lambda,
                        model.W_in), 2)
                for th in thetas)
            val = hinf_norm(model, tol=1e-6)
            assert val >= peak - 1e-6
            assert val <= peak * (1.0 + 1e-3) + 1e-6


class TestEmpiricalGain:
    def test_deterministic_given_seed(self):
        model = example_rnn(0.5, 0.5)
        g1 = empirical_gain_lower_bound(model, trials=5, horizon=30, seed=7)
        g2 = empirical_gain_lower_bound(model, trials=5, horizon=30, seed=7)
        assert g1 == g2

    def test_zero_input_matrix_bounds(self):
        # W_in = W_out = 0: z = 0 and w = relu(s), so the ratio is at
        # most 1; the estimate must stay a nonnegative lower bound.
        model = RnnModel(np.zeros((2, 2)), np.zeros((2, 2)),
                         np.zeros((2, 2)))
        g = empirical_gain_lower_bound(model, trials=10, horizon=20, seed=0)
        assert 0.0 <= g <= 1.0 + 1e-12

    def test_rejects_bad_counts(self):
        model = example_rnn()
        with pytest.raises(ValueError):
            empirical_gain_lower_bound(model, trials=0, horizon=10)
