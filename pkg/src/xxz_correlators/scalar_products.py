"""Determinant formulas for scalar products of Bethe states.

All functions take rapidities in the spectral-parameter convention of the monodromy matrix.
Scalar products are <0| prod C(mu) prod B(lam) |0> with ``lam`` on shell.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.linalg import det

from .constants import POLE_TOL
from .errors import PoleError
from .model_core import a_fn, b_fn, d_fn
from .models import ModelParams
from .thermo_density import rho_tilde

logger = logging.getLogger(__name__)


def _as_roots(values) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=complex))


def _check_distinct(values: np.ndarray, what: str) -> None:
    diff = values[:, None] - values[None, :]
    np.fill_diagonal(diff, 1.0)
    if np.any(np.abs(np.sinh(diff)) < POLE_TOL):
        raise PoleError(f'{what}: coincident parameters')


def _coth(x):
    x = np.asarray(x, dtype=complex)
    t = np.tanh(x)
    if np.any(np.abs(t) < POLE_TOL):
        raise PoleError('coth evaluated at its pole')
    return 1.0 / t


def transfer_eigenvalue(mu, roots, params: ModelParams):
    """tau(mu) = a(mu) prod_k b^{-1}(lam_k, mu) + d(mu) prod_k b^{-1}(mu, lam_k)."""
    mu = np.asarray(mu, dtype=complex)
    roots = _as_roots(roots)
    first = a_fn(mu) * np.prod(1.0 / b_fn(roots, mu[..., None], params), axis=-1)
    second = d_fn(mu, params) * np.prod(1.0 / b_fn(mu[..., None], roots, params), axis=-1)
    return first + second


def transfer_eigenvalue_derivative(mu, roots, params: ModelParams, a: int):
    """Analytic derivative of tau(mu, {lam}) in lam_a."""
    mu = np.asarray(mu, dtype=complex)
    roots = _as_roots(roots)
    eta = params.eta
    lam_a = roots[a]
    first = np.prod(1.0 / b_fn(roots, mu[..., None], params), axis=-1)
    first = first * (_coth(lam_a - mu + eta) - _coth(lam_a - mu))
    second = d_fn(mu, params) * np.prod(1.0 / b_fn(mu[..., None], roots, params), axis=-1)
    second = second * (_coth(mu - lam_a) - _coth(mu - lam_a + eta))
    return a_fn(mu) * first + second


@dataclass
class SlavnovData:
    T_matrix: np.ndarray
    V_matrix: np.ndarray
    det_T: complex
    det_V: complex

    @property
    def value(self) -> complex:
        return self.det_T / self.det_V


def cauchy_det_V(roots, mu) -> complex:
    """Closed-form det of V_ab = 1/sinh(mu_b - lam_a)."""
    lam = _as_roots(roots)
    mu = _as_roots(mu)
    den = np.sinh(mu[None, :] - lam[:, None])
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError('Cauchy determinant: some mu_b equals lam_a')
    value = 1.0 + 0j
    n = len(lam)
    for a in range(n):
        for b in range(a + 1, n):
            value *= np.sinh(lam[a] - lam[b]) * np.sinh(mu[b] - mu[a])
    return complex(value / np.prod(den))


def slavnov_matrices(roots, mu, params: ModelParams) -> SlavnovData:
    lam = _as_roots(roots)
    mu = _as_roots(mu)
    if len(lam) != len(mu):
        raise ValueError(f'Need equal numbers of parameters, got {len(lam)} and {len(mu)}')
    n = len(lam)
    T = np.empty((n, n), dtype=complex)
    for a in range(n):
        T[a, :] = transfer_eigenvalue_derivative(mu, lam, params, a)
    den = np.sinh(mu[None, :] - lam[:, None])
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError('Slavnov determinant: some mu_b equals lam_a')
    V = 1.0 / den
    return SlavnovData(T_matrix=T, V_matrix=V, det_T=complex(det(T)), det_V=cauchy_det_V(lam, mu))


def slavnov_scalar_product(roots, mu, params: ModelParams) -> complex:
    """<0| prod C(mu_b) prod B(lam_a) |0> for on-shell ``roots`` and arbitrary ``mu``."""
    if len(_as_roots(roots)) == 0:
        return 1.0 + 0j
    return slavnov_matrices(roots, mu, params).value


def _phi(x, eta):
    return -_coth(eta + x) - _coth(eta - x)


@dataclass
class GaudinMatrix:
    Phi_prime: np.ndarray
    prefactor: complex

    @property
    def norm(self) -> complex:
        return self.prefactor * complex(det(self.Phi_prime))


def gaudin_matrix(roots, params: ModelParams) -> GaudinMatrix:
    lam = _as_roots(roots)
    n = len(lam)
    eta = params.eta
    if n == 0:
        return GaudinMatrix(np.empty((0, 0), dtype=complex), 1.0 + 0j)
    _check_distinct(lam, 'Gaudin matrix')
    diff = lam[:, None] - lam[None, :]
    off = ~np.eye(n, dtype=bool)

    phi = np.zeros((n, n), dtype=complex)
    phi[off] = _phi(diff[off], eta)
    xi = params.xi_array
    site_sum = np.sum(_coth(lam[:, None] - xi[None, :]) - _coth(lam[:, None] - xi[None, :] + eta), axis=1)
    matrix = phi.copy()
    np.fill_diagonal(matrix, site_sum - np.sum(phi, axis=1))

    prefactor = np.sinh(eta) ** n * np.prod(np.sinh(diff[off] + eta) / np.sinh(diff[off]))
    return GaudinMatrix(Phi_prime=matrix, prefactor=complex(prefactor))


def gaudin_norm(roots, params: ModelParams) -> float:
    """<0| prod C(lam) prod B(lam) |0> for on-shell roots.

    The norm of a ground state is real in both regimes. Raises ValueError when the imaginary
    part exceeds rounding; ``gaudin_matrix(...).norm`` gives the complex value for such inputs.
    """
    value = gaudin_matrix(roots, params).norm
    if abs(value.imag) > 1e-8 * abs(value):
        raise ValueError(f'Gaudin norm {value:.6g} is not real; roots are off the real line')
    return value.real


def psi_matrix(roots, kept: list[int], extra, params: ModelParams) -> np.ndarray:
    """Gaudin columns for the kept roots followed by one column per extra parameter x.

    An extra column is d tau(x)/d lam_a divided by -prod_k b^{-1}(lam_k, x). At an inhomogeneity
    d(x) = 0 and it reduces to sinh(eta)/(sinh(lam-x) sinh(lam-x+eta)).
    """
    lam = _as_roots(roots)
    extra = _as_roots(extra) if len(extra) else np.empty(0, dtype=complex)
    eta = params.eta
    phi = gaudin_matrix(lam, params).Phi_prime
    diff = lam[:, None] - extra[None, :]
    den = np.sinh(diff) * np.sinh(diff + eta)
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError('Psi matrix: a root coincides with an extra parameter')
    columns = np.sinh(eta) / den
    weight = d_fn(extra, params)
    if np.any(weight != 0):
        mirror = np.sinh(-diff) * np.sinh(eta - diff)
        if np.any(np.abs(mirror) < POLE_TOL):
            raise PoleError('Psi matrix: an extra parameter sits one eta above a root')
        forward = b_fn(lam[:, None], extra[None, :], params)
        ratio = np.prod(forward / b_fn(extra[None, :], lam[:, None], params), axis=0)
        columns = columns - (weight * ratio)[None, :] * np.sinh(eta) / mirror
    return np.concatenate([phi[:, kept], columns], axis=1)


def normalized_ratio_S(roots, dropped: list[int], extra, params: ModelParams) -> complex:
    """<0| prod_{kept} C(lam) prod_k C(x_k) prod B(lam) |0> / <psi|psi>.

    ``dropped[k]`` indexes the root replaced by ``extra[k]``; the remaining roots are kept.
    """
    lam = _as_roots(roots)
    n = len(lam)
    dropped = [int(k) for k in dropped]
    m = len(dropped)
    if m == 0:
        return 1.0 + 0j
    if len(extra) != m:
        raise ValueError(f'{m} dropped roots need {m} extra parameters, got {len(extra)}')
    if len(set(dropped)) != m or not all(0 <= k < n for k in dropped):
        raise ValueError(f'Invalid dropped indices {dropped} for {n} roots')
    x = _as_roots(extra)
    _check_distinct(x, 'Extra parameters')
    kept = [k for k in range(n) if k not in dropped]
    lam_d = lam[dropped]
    lam_k = lam[kept]
    eta = params.eta

    value = 1.0 + 0j
    for j in range(m):
        for k in range(j):
            value *= np.sinh(lam_d[k] - lam_d[j]) / np.sinh(x[k] - x[j])
    if len(kept):
        value *= np.prod(np.sinh(lam_k[:, None] - lam_d[None, :]) / np.sinh(lam_k[:, None] - x[None, :]))
    value *= np.prod(np.sinh(lam[:, None] - x[None, :] + eta) / np.sinh(lam[:, None] - lam_d[None, :] + eta))

    ordered = lam[kept + dropped]
    phi = gaudin_matrix(ordered, params).Phi_prime
    psi = psi_matrix(ordered, list(range(len(kept))), x, params)
    condition = np.linalg.cond(phi)
    if condition > 1e12:
        logger.warning('Gaudin matrix is ill-conditioned (cond=%.3e)', condition)
    return complex(value * det(psi) / det(phi))


def determinant_ratio(roots, dropped: list[int], extra, params: ModelParams) -> complex:
    """det Psi' / det Phi' with the dropped roots ordered last, the factor tending to det S."""
    lam = _as_roots(roots)
    kept = [k for k in range(len(lam)) if k not in dropped]
    ordered = lam[kept + list(dropped)]
    phi = gaudin_matrix(ordered, params).Phi_prime
    return complex(det(psi_matrix(ordered, list(range(len(kept))), extra, params)) / det(phi))


def thermo_S_matrix(lam, xi, params: ModelParams) -> np.ndarray:
    """S_ab = rho~(lam_a - xi_b + eta/2)."""
    lam = _as_roots(lam)
    xi = _as_roots(xi)
    return rho_tilde(lam[:, None] - xi[None, :] + params.eta / 2, params)


def thermo_ratio_estimate(roots, dropped: list[int], extra, params: ModelParams) -> complex:
    """Large-M estimate of det Psi'/det Phi' for a homogeneous chain: det S / (M^m prod rho~)."""
    lam = _as_roots(roots)
    lam_d = lam[list(dropped)]
    m = len(dropped)
    density = rho_tilde(lam_d, params)
    matrix = thermo_S_matrix(lam_d, extra, params)
    return complex(det(matrix) / (params.M**m * np.prod(density)))
