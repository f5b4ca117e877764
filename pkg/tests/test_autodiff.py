import numpy as np
import pytest

from nlkit import autodiff, problems
from nlkit.autodiff import (DUAL_FORWARD, FD_CENTRAL, FD_FORWARD, DiffMode,
                            dense_jacobian, jvp, param_jacobian,
                            second_directional)
from nlkit.errors import NonFiniteValue

from conftest import central_fd_jacobian

ZERO_P = np.zeros(0)


def quad_pair(u, _p):
    # f = [u1^2, u1*u2], J = [[2u1, 0], [u2, u1]]
    out = np.zeros(2, dtype=u.dtype if u.dtype == object else float)
    out[0] = u[0] * u[0]
    out[1] = u[0] * u[1]
    return out


def test_jvp_linear_map():
    A = np.array([[1.0, 2.0, 0.0], [0.0, -1.0, 3.0], [4.0, 0.0, 1.0]])
    f = lambda u, _p: A @ u
    v = np.array([0.3, -1.2, 2.0])
    u = np.array([1.0, 1.0, 1.0])
    np.testing.assert_allclose(jvp(f, u, ZERO_P, v), A @ v, atol=1e-14)


def test_jvp_analytic_column():
    got = jvp(quad_pair, np.array([2.0, 3.0]), ZERO_P, np.array([1.0, 0.0]))
    np.testing.assert_allclose(got, [4.0, 3.0], atol=1e-14)


def test_jvp_modes_agree_on_brusselator():
    d = problems.brusselator_2d(4)
    rng = np.random.default_rng(7)
    u = d.problem.u0 + 0.1 * rng.standard_normal(d.n)
    v = rng.standard_normal(d.n)
    exact = jvp(d.problem.residual, u, d.problem.params, v, DUAL_FORWARD)
    approx = jvp(d.problem.residual, u, d.problem.params, v, FD_CENTRAL)
    scale = np.max(np.abs(exact))
    assert np.max(np.abs(exact - approx)) / scale < 1e-6


def test_jvp_nonfinite_direction_rejected():
    f = lambda u, _p: u
    with pytest.raises(NonFiniteValue):
        jvp(f, np.zeros(2), ZERO_P, np.array([np.nan, 0.0]))


def test_dense_jacobian_identity():
    f = lambda u, _p: u
    np.testing.assert_array_equal(dense_jacobian(f, np.ones(5), ZERO_P),
                                  np.eye(5))


def test_dense_jacobian_analytic():
    J = dense_jacobian(quad_pair, np.array([2.0, 3.0]), ZERO_P)
    np.testing.assert_allclose(J, [[4.0, 0.0], [3.0, 2.0]], atol=1e-14)


def test_dense_jacobian_rosenbrock_rows():
    d = problems.generalized_rosenbrock(3)
    J = dense_jacobian(d.problem.residual, np.ones(3), ZERO_P)
    np.testing.assert_allclose(J, [[-1.0, 0.0, 0.0],
                                   [-20.0, 10.0, 0.0],
                                   [0.0, -20.0, 10.0]], atol=1e-13)


def test_dense_jacobian_chunking_matches_column_jvps():
    # n > SEED_WIDTH forces multiple sweeps; columns must still be exact
    n = autodiff.SEED_WIDTH + 5
    rng = np.random.default_rng(0)
    A = rng.standard_normal((n, n))
    f = lambda u, _p: A @ (u * u)
    u = rng.standard_normal(n)
    J = dense_jacobian(f, u, ZERO_P)
    for j in [0, autodiff.SEED_WIDTH - 1, autodiff.SEED_WIDTH, n - 1]:
        col = jvp(f, u, ZERO_P, np.eye(n)[j])
        np.testing.assert_array_equal(J[:, j], col)


def test_jvp_agrees_with_fd_randomized():
    # smooth map exercising exp/sin/cos/sqrt/abs and division
    def f(u, _p):
        out = np.zeros(4, dtype=u.dtype if u.dtype == object else float)
        out[0] = np.exp(u[0] * 0.3) + u[1] * u[2]
        out[1] = np.sin(u[1]) * np.cos(u[3])
        out[2] = np.sqrt(1.0 + u[2] * u[2]) / (2.0 + np.abs(u[0]))
        out[3] = u[3] ** 3 - u[0] / (1.5 + np.sin(u[2]))
        return out

    rng = np.random.default_rng(42)
    for _ in range(100):
        u = rng.uniform(-2.0, 2.0, size=4)
        v = rng.standard_normal(4)
        exact = jvp(f, u, ZERO_P, v, DUAL_FORWARD)
        approx = jvp(f, u, ZERO_P, v, FD_CENTRAL)
        denom = max(np.max(np.abs(exact)), 1.0)
        assert np.max(np.abs(exact - approx)) / denom < 1e-6


def test_forward_fd_mode():
    u = np.array([2.0, 3.0])
    got = jvp(quad_pair, u, ZERO_P, np.array([1.0, 0.0]), FD_FORWARD)
    np.testing.assert_allclose(got, [4.0, 3.0], rtol=1e-6)


def test_second_directional_linear_is_zero():
    A = np.arange(9.0).reshape(3, 3)
    f = lambda u, _p: A @ u + 1.0
    got = second_directional(f, np.ones(3), ZERO_P, np.array([1.0, -2.0, 0.5]))
    np.testing.assert_allclose(got, np.zeros(3), atol=1e-12)


def test_second_directional_elementwise_square():
    f = lambda u, _p: u * u
    a = np.array([1.0, -2.0, 0.3])
    got = second_directional(f, np.array([5.0, 1.0, -2.0]), ZERO_P, a)
    np.testing.assert_allclose(got, 2.0 * a * a, atol=1e-12)


def test_second_directional_cubic_scalar():
    f = lambda u, _p: u ** 3
    got = second_directional(f, np.array([2.0]), ZERO_P, np.array([1.0]))
    np.testing.assert_allclose(got, [12.0], atol=1e-10)


def test_second_directional_fd_variant():
    f = lambda u, _p: u ** 3
    got = second_directional(f, np.array([2.0]), ZERO_P, np.array([1.0]),
                             FD_CENTRAL)
    np.testing.assert_allclose(got, [12.0], rtol=1e-5)


def test_param_jacobian_quadratic():
    f = lambda u, p: u * u - p
    J = param_jacobian(f, np.array([1.0, 2.0]), np.array([2.0, 5.0]))
    np.testing.assert_allclose(J, -np.eye(2), atol=1e-14)


def test_param_jacobian_independent_of_theta():
    f = lambda u, p: u * 3.0
    J = param_jacobian(f, np.ones(3), np.array([1.0, 2.0]))
    np.testing.assert_array_equal(J, np.zeros((3, 2)))


def test_param_jacobian_brusselator_modes_agree():
    d = problems.brusselator_2d(4)
    u = d.problem.u0
    exact = param_jacobian(d.problem.residual, u, d.problem.params, DUAL_FORWARD)
    approx = param_jacobian(d.problem.residual, u, d.problem.params, FD_CENTRAL)
    assert np.max(np.abs(exact - approx)) < 1e-6


def test_dense_jacobian_matches_independent_fd():
    d = problems.test23(4)  # wood
    u = d.problem.u0
    J = dense_jacobian(d.problem.residual, u, d.problem.params)
    J_fd = central_fd_jacobian(d.problem.residual, u, d.problem.params)
    np.testing.assert_allclose(J, J_fd, rtol=1e-5, atol=1e-5)


def test_abs_at_zero_uses_positive_sign():
    f = lambda u, _p: np.abs(u)
    J = dense_jacobian(f, np.zeros(1), ZERO_P)
    assert J[0, 0] == 1.0


def test_diffmode_validation():
    with pytest.raises(ValueError):
        DiffMode("bogus")
    with pytest.raises(ValueError):
        DiffMode("fd_forward", h=-1.0)


def test_nonfinite_output_detected():
    f = lambda u, _p: u / (u - u)  # 0/0 on purpose
    with pytest.raises(NonFiniteValue):
        with np.errstate(all="ignore"):
            dense_jacobian(f, np.ones(2), ZERO_P, FD_CENTRAL)
