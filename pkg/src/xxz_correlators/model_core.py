"""Elementary functions of the XXZ model: R-matrix weights, vacuum eigenvalues, bare momentum,
scattering phase, kernel and bare energy.

Spectral parameters ``lam`` are complex in the multiplicative convention of the monodromy matrix.
Ground-state quantities are written in a real rapidity ``alpha``: ``lam = alpha`` in the massless
regime and ``lam = -1j * alpha`` in the massive one.
"""

from functools import lru_cache
import logging

import numpy as np
from numpy.polynomial import Polynomial

from .constants import POLE_TOL
from .errors import PoleError
from .models import ModelParams, Regime

logger = logging.getLogger(__name__)


def _guard(denominator, what: str):
    den = np.asarray(denominator)
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError(f'{what}: spectral parameter on a pole')
    return denominator


def b_fn(lam, mu, params: ModelParams):
    diff = np.asarray(lam, dtype=complex) - np.asarray(mu, dtype=complex)
    den = _guard(np.sinh(diff + params.eta), 'b(lam, mu)')
    return np.sinh(diff) / den


def c_fn(lam, mu, params: ModelParams):
    diff = np.asarray(lam, dtype=complex) - np.asarray(mu, dtype=complex)
    den = _guard(np.sinh(diff + params.eta), 'c(lam, mu)')
    return np.sinh(params.eta) / den


def a_fn(lam):
    return np.ones_like(np.asarray(lam, dtype=complex))


def d_fn(lam, params: ModelParams):
    """Vacuum eigenvalue of D: the product of b(lam, xi_i) over all sites."""
    lam = np.asarray(lam, dtype=complex)
    result = np.ones_like(lam)
    for xi in params.xi:
        result = result * b_fn(lam, xi, params)
    return result


def r_matrix(lam, mu, params: ModelParams) -> np.ndarray:
    b = complex(b_fn(lam, mu, params))
    c = complex(c_fn(lam, mu, params))
    return np.array(
        [
            [1, 0, 0, 0],
            [0, b, c, 0],
            [0, c, b, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def bare_momentum_p0(lam, params: ModelParams):
    """p0 = i ln[sinh(lam - eta/2) / sinh(lam + eta/2)] on the principal branch."""
    lam = np.asarray(lam, dtype=complex)
    half = params.eta / 2
    den = _guard(np.sinh(lam + half), 'p0')
    return 1j * np.log(np.sinh(lam - half) / den)


def scattering_phase(lam, params: ModelParams):
    """theta = i ln[sinh(eta + lam) / sinh(eta - lam)] on the principal branch."""
    lam = np.asarray(lam, dtype=complex)
    den = _guard(np.sinh(params.eta - lam), 'theta')
    return 1j * np.log(np.sinh(params.eta + lam) / den)


def coupling(params: ModelParams) -> float:
    """sin(zeta) or sinh(zeta): the factor between p0' and the bare energy."""
    if params.regime == Regime.MASSLESS:
        return float(np.sin(params.zeta))
    return float(np.sinh(params.zeta))


def _shifted_product(alpha, shift: float, params: ModelParams):
    # sinh(a + i s) sinh(a - i s) massless, sin(a + i s) sin(a - i s) massive
    if np.iscomplexobj(alpha):
        if params.regime == Regime.MASSLESS:
            return np.sinh(alpha + 1j * shift) * np.sinh(alpha - 1j * shift)
        return np.sin(alpha + 1j * shift) * np.sin(alpha - 1j * shift)
    alpha = np.asarray(alpha, dtype=float)
    if params.regime == Regime.MASSLESS:
        return np.sinh(alpha) ** 2 + np.sin(shift) ** 2
    return np.sin(alpha) ** 2 + np.sinh(shift) ** 2


def p0_prime(alpha, params: ModelParams):
    zeta = params.zeta
    return coupling(params) / _guard(_shifted_product(alpha, zeta / 2, params), 'p0 prime')


def kernel_K(alpha, params: ModelParams):
    zeta = params.zeta
    if params.regime == Regime.MASSLESS:
        numerator = np.sin(2 * zeta)
    else:
        numerator = np.sinh(2 * zeta)
    return numerator / (2 * np.pi * _guard(_shifted_product(alpha, zeta, params), 'kernel'))


def bare_energy_eps0(alpha, params: ModelParams, h: float | None = None):
    field = params.h if h is None else h
    return field - 2 * coupling(params) * p0_prime(alpha, params)


def saturation_field(params: ModelParams) -> float:
    """Field above which the ground state is the fully polarized vacuum."""
    return 4.0 * (1.0 + params.delta)


@lru_cache(maxsize=16)
def _coth_derivative_poly(order: int) -> Polynomial:
    # d^n/dz^n coth z = P_n(coth z), P_{n+1} = P_n' (1 - c^2)
    poly = Polynomial([0.0, 1.0])
    for _ in range(order):
        poly = poly.deriv() * Polynomial([1.0, 0.0, -1.0])
    return poly


def p0_derivative(alpha, params: ModelParams, order: int = 1):
    """Analytic ``order``-th derivative of the bare momentum in the real rapidity."""
    if order < 1:
        raise ValueError(f'Derivative order must be at least 1, got {order}')
    is_real = not np.iscomplexobj(alpha)
    alpha = np.asarray(alpha, dtype=complex)
    poly = _coth_derivative_poly(order - 1)
    half = params.zeta / 2
    if params.regime == Regime.MASSLESS:
        upper = 1.0 / _guard(np.tanh(alpha + 1j * half), 'p0 derivative')
        lower = 1.0 / _guard(np.tanh(alpha - 1j * half), 'p0 derivative')
        value = 1j * (poly(upper) - poly(lower))
    else:
        upper = 1.0 / _guard(np.tanh(half + 1j * alpha), 'p0 derivative')
        lower = 1.0 / _guard(np.tanh(half - 1j * alpha), 'p0 derivative')
        value = (1j) ** (order - 1) * poly(upper) + (-1j) ** (order - 1) * poly(lower)
    return value.real if is_real else value


def unwrapped_momentum(alpha, params: ModelParams):
    """Continuous real bare momentum along the real rapidity axis, odd in alpha."""
    alpha = np.asarray(alpha, dtype=float)
    half = params.zeta / 2
    if params.regime == Regime.MASSLESS:
        return 2 * np.arctan(np.tanh(alpha) / np.tan(half))
    return 2 * np.arctan2(np.cosh(half) * np.sin(alpha), np.sinh(half) * np.cos(alpha))


def unwrapped_phase(alpha, params: ModelParams):
    """Continuous real scattering phase; its derivative is -2 pi K."""
    alpha = np.asarray(alpha, dtype=float)
    zeta = params.zeta
    if params.regime == Regime.MASSLESS:
        return -2 * np.arctan(np.tanh(alpha) / np.tan(zeta))
    return -2 * np.arctan2(np.cosh(zeta) * np.sin(alpha), np.sinh(zeta) * np.cos(alpha))


def rapidity_from_alpha(alpha, params: ModelParams):
    alpha = np.asarray(alpha, dtype=complex)
    if params.regime == Regime.MASSLESS:
        return alpha
    return -1j * alpha


def alpha_from_rapidity(lam, params: ModelParams):
    lam = np.asarray(lam, dtype=complex)
    if params.regime == Regime.MASSLESS:
        return lam
    return 1j * lam


def real_offsets(params: ModelParams) -> np.ndarray:
    """Real shifts delta_k of the inhomogeneities, xi_k = eta/2 + delta_k (massless) or
    eta/2 - i delta_k (massive)."""
    shifted = alpha_from_rapidity(params.xi_array - params.eta / 2, params)
    if np.any(np.abs(shifted.imag) > 1e-12):
        raise ValueError(
            'Ground-state solver needs inhomogeneities on the line of the homogeneous value'
        )
    return shifted.real
