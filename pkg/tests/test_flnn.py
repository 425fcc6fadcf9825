import numpy as np
import pytest

from flnnsc.flnn import (
    NetworkState,
    activation_pair,
    expand,
    expand_batch,
    forward,
    forward_batch,
    grad_w,
    init_network,
    sgd_step,
)
from flnnsc.linalg import solve_linear


class TestExpand:
    def test_scalar_zero(self):
        assert np.allclose(expand(np.array([0.0])), [0.0, 0.0, 1.0, 0.0, 1.0])

    def test_scalar_half(self):
        out = expand(np.array([0.5]))
        assert np.allclose(out, [0.5, 1.0, 0.0, 0.0, -1.0], atol=1e-15)

    def test_matches_pointwise_formula(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1.0, 1.0, 3)
        out = expand(x)
        for i, v in enumerate(x):
            expected = [v, np.sin(np.pi * v), np.cos(np.pi * v), np.sin(2 * np.pi * v), np.cos(2 * np.pi * v)]
            got = [out[i], out[3 + i], out[6 + i], out[9 + i], out[12 + i]]
            assert np.allclose(got, expected, atol=1e-15)

    def test_batch_matches_columns(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-1.0, 1.0, (4, 6))
        batch = expand_batch(x)
        for j in range(6):
            assert np.array_equal(batch[:, j], expand(x[:, j]))

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="expansion"):
            expand(np.zeros(2), "chebyshev")

    def test_lipschitz_bound(self):
        # |phi(x) - phi(y)| <= (1 + 2 pi) sqrt(5) |x - y| on [-1, 1]^d
        rng = np.random.default_rng(2)
        bound = (1.0 + 2.0 * np.pi) * np.sqrt(5.0)
        for _ in range(200):
            x = rng.uniform(-1.0, 1.0, 5)
            y = rng.uniform(-1.0, 1.0, 5)
            lhs = np.linalg.norm(expand(x) - expand(y))
            assert lhs <= bound * np.linalg.norm(x - y) + 1e-12


class TestActivations:
    @pytest.mark.parametrize("name", ["tanh", "sigmoid", "identity"])
    def test_derivative_matches_finite_differences(self, name):
        rho, rho_prime = activation_pair(name)
        rng = np.random.default_rng(3)
        u = rng.uniform(-3.0, 3.0, 50)
        eps = 1e-6
        fd = (rho(u + eps) - rho(u - eps)) / (2 * eps)
        assert np.allclose(rho_prime(u), fd, atol=1e-6)

    def test_unknown_activation(self):
        with pytest.raises(ValueError, match="activation"):
            activation_pair("relu")


class TestNetworkState:
    def test_init_shape_and_scale(self):
        net = init_network(4, rng=0)
        assert net.w.shape == (20, 20)
        assert np.all(np.abs(net.w) <= 1.0 / np.sqrt(20))

    def test_init_deterministic(self):
        assert np.array_equal(init_network(3, rng=7).w, init_network(3, rng=7).w)

    def test_rejects_bad_mu(self):
        with pytest.raises(ValueError, match="mu"):
            NetworkState(w=np.eye(5), mu=0.0)

    def test_rejects_rectangular_w(self):
        with pytest.raises(ValueError, match="square"):
            NetworkState(w=np.ones((5, 4)))


class TestForward:
    def test_zero_weights_tanh(self):
        net = NetworkState(w=np.zeros((10, 10)), activation="tanh")
        assert np.array_equal(forward(net, np.array([0.3, -0.5])), np.zeros(10))

    def test_identity_passthrough(self):
        net = NetworkState(w=np.eye(10), activation="identity")
        x = np.array([0.2, -0.7])
        assert np.allclose(forward(net, x), expand(x), atol=1e-15)

    def test_matches_composition(self):
        rng = np.random.default_rng(4)
        net = init_network(3, rng=rng)
        x = rng.uniform(-1, 1, 3)
        expected = np.tanh(net.w @ expand(x))
        assert np.allclose(forward(net, x), expected, atol=1e-14)

    def test_dimension_mismatch(self):
        net = init_network(3, rng=0)
        with pytest.raises(ValueError, match="dimension"):
            forward(net, np.zeros(4))


class TestForwardBatch:
    def test_single_column(self):
        rng = np.random.default_rng(5)
        net = init_network(2, rng=rng)
        x = rng.uniform(-1, 1, (2, 1))
        assert np.allclose(forward_batch(net, x)[:, 0], forward(net, x[:, 0]), atol=1e-13)

    def test_zero_weights(self):
        net = NetworkState(w=np.zeros((10, 10)))
        assert np.array_equal(forward_batch(net, np.zeros((2, 5))), np.zeros((10, 5)))

    def test_columnwise(self):
        rng = np.random.default_rng(6)
        net = init_network(3, rng=rng, activation="sigmoid")
        x = rng.uniform(-1, 1, (3, 7))
        batch = forward_batch(net, x)
        for j in range(7):
            assert np.allclose(batch[:, j], forward(net, x[:, j]), rtol=1e-12, atol=1e-14)


def _fit_decay_objective(w, phi, hz_col, beta):
    h_i = np.tanh(w @ phi)
    return 0.5 * np.sum((h_i - hz_col) ** 2) + 0.5 * beta * np.sum(w**2)


class TestGradW:
    def test_zero_residual_zero_beta(self):
        rng = np.random.default_rng(7)
        net = init_network(2, rng=rng, beta=0.0)
        x_i = rng.uniform(-1, 1, 2)
        h_i = forward(net, x_i)
        n = 4
        h = np.zeros((10, n))
        h[:, 0] = h_i
        z_i = np.zeros(n)
        z_i[0] = 1.0  # h @ z_i == h_i, so the residual vanishes
        assert np.allclose(grad_w(net, x_i, h_i, h, z_i), np.zeros((10, 10)), atol=1e-15)

    def test_decay_only(self):
        rng = np.random.default_rng(8)
        net = init_network(2, rng=rng, beta=1.0)
        x_i = rng.uniform(-1, 1, 2)
        h_i = forward(net, x_i)
        h = np.tile(h_i[:, None], (1, 3))
        z_i = np.array([1.0, 0.0, 0.0])
        assert np.allclose(grad_w(net, x_i, h_i, h, z_i), net.w, atol=1e-15)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        d, n = 2, 4
        net = init_network(d, rng=rng, beta=0.3)
        x_i = rng.uniform(-1, 1, d)
        h = rng.standard_normal((5 * d, n))  # held fixed
        z_i = rng.standard_normal(n)
        h_i = forward(net, x_i)
        analytic = grad_w(net, x_i, h_i, h, z_i)

        phi = expand(x_i)
        hz = h @ z_i
        eps = 1e-6
        fd = np.zeros_like(net.w)
        for r in range(net.w.shape[0]):
            for c in range(net.w.shape[1]):
                wp = net.w.copy()
                wp[r, c] += eps
                wm = net.w.copy()
                wm[r, c] -= eps
                fd[r, c] = (
                    _fit_decay_objective(wp, phi, hz, net.beta)
                    - _fit_decay_objective(wm, phi, hz, net.beta)
                ) / (2 * eps)
        assert np.linalg.norm(analytic - fd) <= 1e-5 * max(np.linalg.norm(fd), 1e-12)

    def test_dimension_checks(self):
        net = init_network(2, rng=0)
        with pytest.raises(ValueError):
            grad_w(net, np.zeros(2), np.zeros(9), np.zeros((10, 3)), np.zeros(3))
        with pytest.raises(ValueError):
            grad_w(net, np.zeros(2), np.zeros(10), np.zeros((10, 3)), np.zeros(4))


class TestSgdStep:
    def test_zero_gradient(self):
        net = init_network(2, rng=1)
        assert np.array_equal(sgd_step(net, np.zeros((10, 10))).w, net.w)

    def test_full_decay_step(self):
        net = NetworkState(w=np.eye(10) * 0.5, mu=1.0, beta=1.0)
        # gradient = beta * W with zero residual; one unit step zeroes W
        assert np.allclose(sgd_step(net, net.w).w, np.zeros((10, 10)), atol=1e-15)

    def test_arithmetic(self):
        rng = np.random.default_rng(10)
        net = init_network(2, rng=rng, mu=0.05)
        g = rng.standard_normal((10, 10))
        stepped = sgd_step(net, g)
        assert np.array_equal(stepped.w, net.w - 0.05 * g)
        assert stepped.mu == net.mu and stepped.beta == net.beta

    def test_shape_check(self):
        net = init_network(2, rng=0)
        with pytest.raises(ValueError, match="shape"):
            sgd_step(net, np.zeros((3, 3)))


def test_identity_activation_newton_step_reaches_stationarity():
    # With the identity activation and no decay, the batch objective
    # 0.5 sum_i |w phi_i - (h z)_i|^2 is linear least squares in w; one
    # exact solve of w (phi phi^T) = (h z) phi^T must zero the gradient.
    rng = np.random.default_rng(11)
    d, n = 1, 30
    x = rng.uniform(-1, 1, (d, n))
    phi = expand_batch(x)
    h = rng.standard_normal((5 * d, n))
    z = rng.standard_normal((n, n))
    target = h @ z

    gram = phi @ phi.T
    w_star = solve_linear(gram, phi @ target.T).T
    residual = w_star @ phi - target
    grad = residual @ phi.T  # batch gradient with identity activation
    assert np.linalg.norm(grad) <= 1e-8 * max(1.0, np.linalg.norm(target))

    net = NetworkState(w=w_star, activation="identity", beta=0.0)
    total = np.zeros_like(w_star)
    for i in range(n):
        total += grad_w(net, x[:, i], forward(net, x[:, i]), h, z[:, i])
    assert np.linalg.norm(total) <= 1e-8 * max(1.0, np.linalg.norm(target))
