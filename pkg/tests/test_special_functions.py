import numpy as np
from numpy.linalg import det
import pytest

from xxz_correlators.errors import ConvergenceError, PoleError
from xxz_correlators.models import ModelParams
from xxz_correlators.scalar_products import thermo_S_matrix
from xxz_correlators.special_functions import (
    cauchy_det_massless,
    elliptic_det_massive,
    massive_density_series,
    q_products,
    theta1,
    theta1_prime,
    theta2,
    theta3,
    theta4,
)
from xxz_correlators.thermo_density import closed_form_density

from .helpers import rel

Q = np.exp(-np.arccosh(2.0))
POINTS = np.array([0.1, -0.7 + 0.2j, 1.3 - 0.4j])


def test_parity():
    np.testing.assert_allclose(theta1(-POINTS, Q), -theta1(POINTS, Q), atol=1e-15)
    for theta in (theta2, theta3, theta4):
        np.testing.assert_allclose(theta(-POINTS, Q), theta(POINTS, Q), atol=1e-15)


def test_quasi_periodicity():
    np.testing.assert_allclose(theta1(POINTS + np.pi, Q), -theta1(POINTS, Q), atol=1e-14)
    np.testing.assert_allclose(theta3(POINTS + np.pi / 2, Q), theta4(POINTS, Q), atol=1e-14)


def test_jacobi_identity_at_the_origin():
    assert theta3(0.0, Q) ** 4 == pytest.approx(theta2(0.0, Q) ** 4 + theta4(0.0, Q) ** 4, rel=1e-14)


def test_derivative_at_the_origin():
    _, t1p = q_products(Q)
    assert theta1_prime(0.0, Q) == pytest.approx(t1p, rel=1e-14)
    assert t1p == pytest.approx(theta2(0.0, Q) * theta3(0.0, Q) * theta4(0.0, Q), rel=1e-13)


def test_derivative_matches_finite_difference():
    step = 1e-6
    slope = (theta1(POINTS + step, Q) - theta1(POINTS - step, Q)) / (2 * step)
    np.testing.assert_allclose(theta1_prime(POINTS, Q), slope, rtol=1e-8)


def test_series_band_and_nome_checks():
    zeta = -np.log(Q)
    with pytest.raises(ConvergenceError):
        theta1(1j * 4 * zeta, Q)
    with pytest.raises(ConvergenceError):
        theta1(0.1, 1.5)


def test_density_series_matches_the_closed_form(massive):
    alpha = np.linspace(-np.pi / 2, np.pi / 2, 13)
    np.testing.assert_allclose(
        massive_density_series(alpha, massive.zeta), closed_form_density(alpha, massive), rtol=1e-12
    )
    shifted = alpha + 0.3j * massive.zeta
    np.testing.assert_allclose(
        massive_density_series(shifted, massive.zeta), closed_form_density(shifted, massive), rtol=1e-10
    )


def test_density_series_diverges_at_half_zeta(massive):
    with pytest.raises(ConvergenceError):
        massive_density_series(np.array([0.5j * massive.zeta]), massive.zeta)


@pytest.mark.parametrize('m', [1, 2, 3, 5])
def test_cauchy_determinant(massless, rng, m):
    lam = rng.uniform(-1.5, 1.5, m)
    xi = rng.uniform(-1.5, 1.5, m) - 1j * rng.uniform(0.1, 0.9, m) * massless.zeta
    dense = det(thermo_S_matrix(lam, xi, massless))
    assert rel(cauchy_det_massless(lam, xi, massless.zeta), dense) < 1e-10


def test_cauchy_determinant_is_batched(massless, rng):
    xi = rng.uniform(-1, 1, 3) - 0.5j * massless.zeta
    lam = rng.uniform(-1, 1, (4, 3))
    batched = cauchy_det_massless(lam, xi, massless.zeta)
    assert batched.shape == (4,)
    assert batched[2] == pytest.approx(cauchy_det_massless(lam[2], xi, massless.zeta))


def test_cauchy_determinant_pole(massless):
    with pytest.raises(PoleError):
        cauchy_det_massless(np.array([0.2, 0.4]), np.array([0.4, 0.9]), massless.zeta)


@pytest.mark.parametrize('m', [1, 2, 4])
def test_elliptic_determinant(massive, rng, m):
    zeta = massive.zeta
    lam = rng.uniform(-np.pi / 2, np.pi / 2, m)
    beta = rng.uniform(-np.pi / 2, np.pi / 2, m) - 1j * rng.uniform(0.2, 0.8, m) * zeta
    matrix = massive_density_series(lam[:, None] - beta[None, :] - 0.5j * zeta, zeta)
    assert rel(elliptic_det_massive(lam, beta, massive.q), det(matrix)) < 1e-9
