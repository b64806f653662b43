"""Thermodynamic-limit ground-state densities.

The density rho_h of Bethe roots solves the linear integral equation

    rho_h(a) + int_{-L}^{L} K(a - b) rho_h(b) db = p0'(a) / 2pi

on the Fermi interval [-L, L]; L follows from the dressed energy vanishing at the boundary. The
equations are discretized by the Nystrom method and their solutions interpolated with the same
quadrature, which also continues them to complex rapidities.
"""

import logging
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq

from .constants import POLE_TOL
from .errors import NoFermiBoundary, NonConvergence, PoleError
from .loader import default
from .model_core import (
    bare_energy_eps0,
    kernel_K,
    p0_derivative,
    p0_prime,
    real_offsets,
    saturation_field,
)
from .models import DensityProfile, ModelParams, QuadRule, Regime, SegmentDescriptor, SegmentKind
from .quadrature import gauss_rule, line_cutoff, periodic_rule, truncated_line
from .special_functions import q_products, theta3, theta4

logger = logging.getLogger(__name__)


def closed_form_density(alpha, params: ModelParams):
    """Zero-field density: 1/(2 zeta cosh(pi a/zeta)) massless, theta3/theta4 form massive."""
    zeta = params.zeta
    if params.regime == Regime.MASSLESS:
        den = np.cosh(np.pi * np.asarray(alpha) / zeta)
        if np.any(np.abs(den) < POLE_TOL):
            raise PoleError('Density evaluated at its pole')
        return 1.0 / (2 * zeta * den)
    q = params.q
    ratio_sq, _ = q_products(q)
    den = theta4(alpha, q)
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError('Density evaluated at its pole')
    value = ratio_sq * theta3(alpha, q) / den / (2 * np.pi)
    return value if np.iscomplexobj(alpha) else value.real


def rho_tilde(lam, params: ModelParams):
    """Density in the spectral-parameter variable: rho(lam) massless, i rho(i lam) massive."""
    lam = np.asarray(lam, dtype=complex)
    if params.regime == Regime.MASSLESS:
        return closed_form_density(lam, params)
    return 1j * closed_form_density(1j * lam, params)


def inhomogeneous_density(alpha, params: ModelParams):
    """Density of an inhomogeneous chain: the site average of shifted zero-field densities."""
    offsets = real_offsets(params)
    alpha = np.asarray(alpha)
    return np.mean(closed_form_density(alpha[..., None] - offsets, params), axis=-1)


def critical_field(zeta: float) -> float:
    """Field at which the massive gap closes, 4 sinh(zeta) sum_n (-1)^n / cosh(n zeta).

    This is the field at which the dressed energy of the filled zone vanishes at alpha = pi/2.
    """
    if zeta <= 0:
        raise ValueError(f'zeta must be positive, got {zeta}')
    length = int(math.ceil(40.0 / zeta)) + 2
    terms = [1.0] + [2.0 * (-1) ** n / math.cosh(n * zeta) for n in range(1, length)]
    return 4.0 * math.sinh(zeta) * math.fsum(terms)


def _nystrom_factor(grid: QuadRule, params: ModelParams):
    x = grid.nodes.real
    matrix = np.eye(len(x)) + kernel_K(x[:, None] - x[None, :], params) * grid.weights.real[None, :]
    return lu_factor(matrix)


def _derivative_rhs(alpha, params: ModelParams, m_max: int) -> np.ndarray:
    columns = [
        p0_derivative(alpha, params, b) / (2 * np.pi * math.factorial(b - 1))
        for b in range(1, m_max + 1)
    ]
    return np.stack(columns, axis=-1)


def _interpolate(grid: QuadRule, values: np.ndarray, lam, rhs: np.ndarray, params: ModelParams):
    """Nystrom extension f(lam) = rhs(lam) - sum_k w_k K(lam - x_k) f(x_k)."""
    lam = np.asarray(lam)
    if len(grid) == 0:
        return rhs
    kernel = kernel_K(lam[..., None] - grid.nodes.real, params) * grid.weights.real
    return rhs - kernel @ values


def _empty_grid() -> QuadRule:
    return QuadRule(
        nodes=np.empty(0, dtype=complex),
        weights=np.empty(0, dtype=complex),
        descriptor=SegmentDescriptor(SegmentKind.GAUSS, 0.0, 0.0),
    )


def _dressed_energy(params: ModelParams, boundary: float, n_grid: int):
    grid = gauss_rule(-boundary, boundary, n_grid)
    factor = _nystrom_factor(grid, params)
    eps = lu_solve(factor, bare_energy_eps0(grid.nodes.real, params))
    return grid, factor, eps


def dressed_energy_at_boundary(params: ModelParams, boundary: float, n_grid: int | None = None) -> float:
    """epsilon_h(L) for the dressed energy solved on [-L, L]."""
    n = default('numerics', 'lieb_grid') if n_grid is None else n_grid
    grid, _, eps = _dressed_energy(params, boundary, n)
    rhs = bare_energy_eps0(np.array([boundary]), params)
    return float(_interpolate(grid, eps, np.array([boundary]), rhs, params)[0])


def fermi_boundary(params: ModelParams, n_grid: int | None = None, max_iter: int | None = None) -> float:
    """Fermi boundary Lambda_h from epsilon_h(Lambda_h) = 0."""
    max_iter = default('numerics', 'boundary_max_iter') if max_iter is None else max_iter
    h = params.h
    if h >= saturation_field(params):
        return 0.0
    if params.regime == Regime.MASSIVE and h <= critical_field(params.zeta):
        raise NoFermiBoundary(
            f'h={h} is below the critical field {critical_field(params.zeta):.6g}; the zone stays filled'
        )
    if params.regime == Regime.MASSLESS and h <= 0:
        raise NoFermiBoundary('The massless zone extends to infinity at zero field')

    def boundary_value(boundary: float) -> float:
        return dressed_energy_at_boundary(params, boundary, n_grid)

    low = 1e-6
    if params.regime == Regime.MASSIVE:
        high = np.pi / 2
    else:
        high = 1.0
        while boundary_value(high) <= 0:
            high *= 2
            if high > 400 * params.zeta:
                raise NoFermiBoundary(f'No sign change of the dressed energy up to L={high}')
    if boundary_value(low) >= 0 or boundary_value(high) <= 0:
        raise NoFermiBoundary(f'Dressed energy does not change sign on [{low}, {high}]')
    logger.debug('Fermi boundary bracket [%g, %g] at h=%g', low, high, h)
    root, result = brentq(
        boundary_value, low, high, xtol=1e-14, rtol=1e-14, maxiter=max_iter, full_output=True, disp=False
    )
    if not result.converged:
        raise NonConvergence(
            f'Fermi boundary search stopped after {result.iterations} iterations ({result.flag}) at L={root:.6g}'
        )
    return float(root)


def zero_field_profile(
    params: ModelParams, n_grid: int | None = None, m_max: int | None = None
) -> DensityProfile:
    """Zero-field profile: closed-form density plus Nystrom derivative densities."""
    n = default('numerics', 'lieb_grid') if n_grid is None else n_grid
    columns = default('numerics', 'dimension_cap') if m_max is None else m_max
    if params.regime == Regime.MASSLESS:
        cutoff = line_cutoff(np.pi / params.zeta, default('numerics', 'tail_tol'))
        grid = truncated_line(cutoff, n)
    else:
        cutoff = np.pi / 2
        grid = periodic_rule(n)
    x = grid.nodes.real
    factor = _nystrom_factor(grid, params)
    rho_b = lu_solve(factor, _derivative_rhs(x, params, columns))
    eps = lu_solve(factor, bare_energy_eps0(x, params))
    return DensityProfile(
        params=params,
        grid=grid,
        rho=closed_form_density(x, params),
        lambda_F=cutoff,
        rho_b=rho_b,
        eps=eps,
        field_active=False,
    )


def solve_lieb(params: ModelParams, n_grid: int | None = None, m_max: int | None = None) -> DensityProfile:
    """Density profile at field ``params.h``.

    Massive chains below the critical field, and massless chains at h = 0, return the zero-field
    profile. Above the saturation field the profile is empty.
    """
    n = default('numerics', 'lieb_grid') if n_grid is None else n_grid
    columns = default('numerics', 'dimension_cap') if m_max is None else m_max
    if params.h == 0 or (
        params.regime == Regime.MASSIVE and params.h <= critical_field(params.zeta)
    ):
        if params.h > 0:
            logger.info('h=%g below the critical field: zero-field ground state', params.h)
        return zero_field_profile(params, n, columns)

    boundary = fermi_boundary(params, n)
    if boundary == 0.0:
        logger.info('h=%g above saturation: fully polarized ground state', params.h)
        return DensityProfile(
            params=params,
            grid=_empty_grid(),
            rho=np.empty(0),
            lambda_F=0.0,
            rho_b=np.empty((0, columns)),
            eps=np.empty(0),
            field_active=True,
        )

    grid, factor, eps = _dressed_energy(params, boundary, n)
    rho_b = lu_solve(factor, _derivative_rhs(grid.nodes.real, params, columns))
    if not (np.all(np.isfinite(rho_b)) and np.all(np.isfinite(eps))):
        raise NonConvergence(f'Nystrom solve on [-{boundary:.6g}, {boundary:.6g}] produced non-finite values')
    logger.info('h=%g: Fermi boundary %.12g', params.h, boundary)
    return DensityProfile(
        params=params,
        grid=grid,
        rho=rho_b[:, 0].copy(),
        lambda_F=boundary,
        rho_b=rho_b,
        eps=eps,
        field_active=True,
    )


def evaluate_density(profile: DensityProfile, lam, b: int = 1):
    """rho_{h,b} at real or complex rapidities, continued by the Nystrom formula."""
    return evaluate_columns(profile, lam, b)[..., b - 1]


def evaluate_columns(profile: DensityProfile, lam, m: int):
    """Array (..., m) with rho_{h,b}(lam) for b = 1..m."""
    if m > profile.m_max:
        raise ValueError(f'Profile holds {profile.m_max} derivative densities, {m} requested')
    lam = np.asarray(lam)
    rhs = _derivative_rhs(lam, profile.params, m)
    return _interpolate(profile.grid, profile.rho_b[:, :m], lam, rhs, profile.params)


def lieb_residual(profile: DensityProfile, points, refine: int = 2) -> float:
    """Max |rho + K*rho - p0'/2pi| at ``points``, the convolution taken on a finer grid."""
    params = profile.params
    n = max(2, refine * len(profile.grid))
    if profile.grid.descriptor.kind == SegmentKind.PERIODIC:
        fine = periodic_rule(n)
    elif profile.grid.descriptor.kind == SegmentKind.LINE:
        fine = truncated_line(profile.lambda_F, n)
    else:
        fine = gauss_rule(-profile.lambda_F, profile.lambda_F, n)
    points = np.asarray(points, dtype=float)
    rho_points = evaluate_density(profile, points)
    rho_fine = evaluate_density(profile, fine.nodes.real)
    convolution = kernel_K(points[:, None] - fine.nodes.real[None, :], params) @ (
        fine.weights.real * rho_fine
    )
    residual = rho_points + convolution - p0_prime(points, params) / (2 * np.pi)
    return float(np.max(np.abs(residual)))
