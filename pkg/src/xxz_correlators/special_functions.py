"""Jacobi theta functions of nome q and the closed-form determinants of the density matrix.

Theta functions follow the convention with quasi-periods pi and pi*tau, q = exp(i pi tau):

    theta1(x) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1)x)
    theta2(x) = 2 sum_{n>=0} q^{(n+1/2)^2} cos((2n+1)x)
    theta3(x) = 1 + 2 sum_{n>=1} q^{n^2} cos(2nx)
    theta4(x) = 1 + 2 sum_{n>=1} (-1)^n q^{n^2} cos(2nx)

The series are cut where q^{(n+1/2)^2} e^{(2n+1)|Im x|} drops below the series tolerance. For the
massive XXZ chain q = exp(-zeta), so a shift of x by i*zeta is a shift by pi*tau.
"""

import math

import numpy as np

from .constants import POLE_TOL, SERIES_TOL
from .errors import ConvergenceError, PoleError
from .loader import default


def _series_length(zeta: float, max_imag: float) -> int:
    budget = -math.log(SERIES_TOL)
    u = (max_imag + math.sqrt(max_imag**2 + zeta * budget)) / zeta
    return int(math.ceil(u)) + 2


def _prepare(x, q: float, band: float | None) -> tuple[np.ndarray, float, int]:
    if not 0.0 < q < 1.0:
        raise ConvergenceError(f'Nome must lie in (0, 1), got q={q}')
    x = np.asarray(x, dtype=complex)
    zeta = -math.log(q)
    band = default('numerics', 'theta_band') if band is None else band
    max_imag = float(np.max(np.abs(x.imag))) if x.size else 0.0
    if max_imag > band * zeta:
        raise ConvergenceError(
            f'|Im x| = {max_imag:.3g} exceeds the theta-series band {band} * zeta = {band * zeta:.3g}'
        )
    return x, zeta, _series_length(zeta, max_imag)


def theta1(x, q: float, band: float | None = None):
    x, zeta, length = _prepare(x, q, band)
    n = np.arange(length)
    coeff = (-1.0) ** n * np.exp(-zeta * (n + 0.5) ** 2)
    return 2 * np.sum(coeff * np.sin((2 * n + 1) * x[..., None]), axis=-1)


def theta1_prime(x, q: float, band: float | None = None):
    """Derivative of theta1 in x."""
    x, zeta, length = _prepare(x, q, band)
    n = np.arange(length)
    coeff = (-1.0) ** n * (2 * n + 1) * np.exp(-zeta * (n + 0.5) ** 2)
    return 2 * np.sum(coeff * np.cos((2 * n + 1) * x[..., None]), axis=-1)


def theta2(x, q: float, band: float | None = None):
    x, zeta, length = _prepare(x, q, band)
    n = np.arange(length)
    coeff = np.exp(-zeta * (n + 0.5) ** 2)
    return 2 * np.sum(coeff * np.cos((2 * n + 1) * x[..., None]), axis=-1)


def theta3(x, q: float, band: float | None = None):
    x, zeta, length = _prepare(x, q, band)
    n = np.arange(1, length + 1)
    coeff = np.exp(-zeta * n**2)
    return 1 + 2 * np.sum(coeff * np.cos(2 * n * x[..., None]), axis=-1)


def theta4(x, q: float, band: float | None = None):
    x, zeta, length = _prepare(x, q, band)
    n = np.arange(1, length + 1)
    coeff = (-1.0) ** n * np.exp(-zeta * n**2)
    return 1 + 2 * np.sum(coeff * np.cos(2 * n * x[..., None]), axis=-1)


def q_products(q: float) -> tuple[float, float]:
    """Return (prod ((1-q^2n)/(1+q^2n))^2, theta1'(0) = 2 q^{1/4} prod (1-q^2n)^3)."""
    ratio_sq = 1.0
    cube = 1.0
    n = 1
    while True:
        q2n = q ** (2 * n)
        if q2n < SERIES_TOL:
            break
        ratio_sq *= ((1 - q2n) / (1 + q2n)) ** 2
        cube *= (1 - q2n) ** 3
        n += 1
    return ratio_sq, 2 * q**0.25 * cube


def g_constant(q: float, m: int) -> float:
    """g_m = prod((1-q^2n)/(1+q^2n))^2 * theta1'(0)^{m-1}."""
    ratio_sq, t1p = q_products(q)
    return ratio_sq * t1p ** (m - 1)


def c_constant(q: float, m: int) -> complex:
    """Normalization C_m of the elliptic determinant, C_m = (i/2pi)^m g_m."""
    return (0.5j / np.pi) ** m * g_constant(q, m)


def massive_density_series(alpha, zeta: float):
    """Fourier form of the massive ground-state density, (1/2pi) sum_n e^{2in alpha}/cosh(n zeta)."""
    alpha = np.asarray(alpha)
    max_imag = float(np.max(np.abs(np.imag(alpha)))) if alpha.size else 0.0
    rate = zeta - 2 * max_imag
    if rate <= 0:
        raise ConvergenceError(f'Fourier series diverges for |Im alpha| = {max_imag:.3g} >= zeta/2')
    length = int(math.ceil(-math.log(SERIES_TOL) / rate)) + 2
    n = np.arange(1, length + 1)
    terms = np.cos(2 * n * alpha[..., None]) / np.cosh(n * zeta)
    return (1 + 2 * np.sum(terms, axis=-1)) / (2 * np.pi)


def cauchy_det_massless(lam, xi, zeta: float):
    """Determinant of S_ab = (i/2zeta) / sinh(pi (lam_a - xi_b)/zeta).

    ``lam`` has shape (..., m) and is batched over leading axes; ``xi`` has shape (m,).
    """
    lam = np.asarray(lam, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    m = lam.shape[-1]
    k = np.pi / zeta
    value = np.full(lam.shape[:-1], (0.5j / zeta) ** m, dtype=complex)
    for a in range(m):
        for b in range(a):
            value = value * np.sinh(k * (lam[..., a] - lam[..., b]))
    for first in range(m):
        for second in range(first + 1, m):
            value = value * np.sinh(k * (xi[first] - xi[second]))
    den = np.prod(np.sinh(k * (lam[..., :, None] - xi[None, :])), axis=(-2, -1))
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError('Cauchy determinant: lam_a coincides with xi_k')
    return value / den


def elliptic_det_massive(lam, beta, q: float):
    """Closed form of det S~ with S~_ij = rho(lam_i - beta_j - i zeta/2), massive density rho.

    C_m prod_{j<k} theta1(lam_j - lam_k) theta1(beta_k - beta_j) / prod_{j,k} theta1(lam_j - beta_k)
    times theta2(sum_j (lam_j - beta_j)).
    """
    lam = np.asarray(lam, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    m = lam.shape[-1]
    value = np.full(lam.shape[:-1], c_constant(q, m), dtype=complex)
    for j in range(m):
        for k in range(j + 1, m):
            value = value * theta1(lam[..., j] - lam[..., k], q)
            value = value * theta1(beta[k] - beta[j], q)
    den = np.prod(theta1(lam[..., :, None] - beta[None, :], q), axis=(-2, -1))
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError('Elliptic determinant: lam_j coincides with beta_k')
    total = np.sum(lam - beta, axis=-1)
    return value * theta2(total, q) / den
