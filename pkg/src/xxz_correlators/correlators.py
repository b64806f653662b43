"""Ground-state correlation functions of the XXZ chain as multiple integrals.

The elementary blocks F_m = <E^{e'_1 e_1}_1 ... E^{e'_m e_m}_m> are m-fold integrals. Variables
of sites with e_j = 1 run over the displaced contour (Im = -zeta), the others over the ground-state
support. At h = 0 the density determinant is known in closed form; at h > 0 it is assembled from
the numerical derivative densities rho_{h,b}.

Every evaluation is repeated on a half-size grid; the difference is reported as the error
estimate.
"""

from collections.abc import Callable
from dataclasses import dataclass
from itertools import product
import logging
import math
import warnings

import numpy as np

from .constants import REMOVABLE_TOL
from .errors import ConvergenceWarning, DimensionCap, PoleError
from .finite_chain import apply_entry_to_dual
from .loader import default
from .model_core import b_fn
from .models import (
    BetheState,
    CorrelatorResult,
    CorrelatorSpec,
    DensityProfile,
    ModelParams,
    QuadRule,
    Regime,
    SegmentKind,
)
from .quadrature import (
    balanced_cutoff,
    circle_rule,
    concat,
    gauss_rule,
    integrate_nd,
    line_cutoff,
    periodic_rule,
    truncated_line,
)
from .scalar_products import normalized_ratio_S
from .special_functions import q_products, theta1, theta1_prime, theta2
from .thermo_density import critical_field, evaluate_columns, solve_lieb, zero_field_profile

logger = logging.getLogger(__name__)

Integrand = Callable[..., np.ndarray]
RuleFactory = Callable[[int], list[QuadRule]]


@dataclass(frozen=True)
class IntegrandContext:
    """Everything an integrand needs besides the block labels.

    ``profile`` is set for the density-determinant path (h > 0, or the zero-field residue path).
    """

    params: ModelParams
    profile: DensityProfile | None = None
    tail_tol: float | None = None
    circle_points: int | None = None

    @property
    def regime(self) -> Regime:
        return self.params.regime

    @property
    def zeta(self) -> float:
        return self.params.zeta

    @property
    def homogeneous(self) -> bool:
        return self.params.homogeneous


@dataclass(frozen=True)
class IntegralSetup:
    prefactor: complex
    integrand: Integrand
    rules: RuleFactory
    with_indices: bool = False


def _removable_ratio(num, den, dnum, dden, w):
    """num(w)/den(w) with the 0/0 points replaced by dnum/dden."""
    bottom = den(w)
    near = np.abs(bottom) < REMOVABLE_TOL
    value = num(w) / np.where(near, 1.0, bottom)
    if np.any(near):
        value = np.where(near, dnum(w) / dden(w), value)
    return value


def _massless_pair(w, zeta: float):
    k = np.pi / zeta
    shift = 1j * zeta
    return _removable_ratio(
        lambda x: np.sinh(k * x),
        lambda x: np.sinh(x - shift),
        lambda x: k * np.cosh(k * x),
        lambda x: np.cosh(x - shift),
        w,
    )


def _massive_pair(w, zeta: float, q: float):
    shift = 1j * zeta
    return _removable_ratio(
        lambda x: theta1(x, q),
        lambda x: np.sin(x - shift),
        lambda x: theta1_prime(x, q),
        lambda x: np.cos(x - shift),
        w,
    )


def _pairs(lam: np.ndarray, pair: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    value = np.ones(lam.shape[0], dtype=complex)
    for a in range(lam.shape[1]):
        for b in range(a):
            value = value * pair(lam[:, a] - lam[:, b])
    return value


def _homogeneous_site(x, site: int, m: int, shifted: bool, zeta: float, fn) -> np.ndarray:
    """fn^{j-1}(x + 3i zeta/2) fn^{m-j}(x + i zeta/2) on the displaced contour, x - i zeta/2 otherwise."""
    half = 0.5j * zeta
    first = fn(x + 3 * half) if shifted else fn(x - half)
    return first ** (site - 1) * fn(x + half) ** (m - site)


def _inhomogeneous_site(x, site: int, shifted: bool, xi: np.ndarray, zeta: float, fn) -> np.ndarray:
    shift = 1j * zeta if shifted else -1j * zeta
    value = np.ones_like(x)
    for k, point in enumerate(xi, start=1):
        if k < site:
            value = value * fn(x - point + shift)
        elif k > site:
            value = value * fn(x - point)
    return value


def _check_strip(points: np.ndarray, zeta: float) -> None:
    if np.any(points.imag >= 0) or np.any(points.imag <= -zeta):
        raise ValueError(f'Inhomogeneities must satisfy -zeta < Im < 0 (zeta={zeta:.6g})')


def _strip_width(zeta: float) -> float:
    # distance from the real line to the nearest singularity of a massless integrand
    return 0.5 * min(zeta, np.pi - zeta)


def _massless_setup(spec: CorrelatorSpec, ctx: IntegrandContext) -> IntegralSetup:
    zeta = ctx.zeta
    k = np.pi / zeta
    m = spec.m
    variables = spec.variables
    if ctx.homogeneous:
        prefactor = (-1) ** spec.s * (-k) ** (m * (m + 1) // 2) * (0.5 / np.pi) ** m
        offset = 0.0
        strip = _strip_width(zeta)

        def integrand(lam: np.ndarray) -> np.ndarray:
            value = _pairs(lam, lambda w: _massless_pair(w, zeta))
            for col, (site, shifted) in enumerate(variables):
                x = lam[:, col]
                value = value * _homogeneous_site(x, site, m, shifted, zeta, np.sinh) / np.cosh(k * x) ** m
            return value

    else:
        xi = ctx.params.xi_array[:m]
        _check_strip(xi, zeta)
        prefactor = (0.5 / (1j * zeta)) ** spec.s_prime * (0.5j / zeta) ** spec.s
        for a in range(m):
            for b in range(a + 1, m):
                prefactor *= np.sinh(k * (xi[a] - xi[b])) / np.sinh(xi[a] - xi[b])
        offset = float(np.max(np.abs(xi.real)))
        strip = float(min(_strip_width(zeta), np.min(-xi.imag), np.min(zeta + xi.imag)))

        def integrand(lam: np.ndarray) -> np.ndarray:
            value = _pairs(lam, lambda w: _massless_pair(w, zeta))
            value = value / np.prod(np.sinh(k * (lam[:, :, None] - xi[None, None, :])), axis=(1, 2))
            for col, (site, shifted) in enumerate(variables):
                value = value * _inhomogeneous_site(lam[:, col], site, shifted, xi, zeta, np.sinh)
            return value

    cutoff = line_cutoff(k, ctx.tail_tol, offset)

    def rules(n: int) -> list[QuadRule]:
        half_width = min(cutoff, balanced_cutoff(k, strip, n, offset))
        return [truncated_line(half_width, n, shift=-1j * zeta if shifted else 0j) for _, shifted in variables]

    return IntegralSetup(complex(prefactor), integrand, rules)


def _massive_setup(spec: CorrelatorSpec, ctx: IntegrandContext) -> IntegralSetup:
    zeta = ctx.zeta
    q = ctx.params.q
    m = spec.m
    variables = spec.variables
    ratio_sq, t1p = q_products(q)
    measure = (1 / (2j * np.pi)) ** spec.s_prime * (0.5j / np.pi) ** spec.s
    if ctx.homogeneous:
        prefactor = ratio_sq * t1p ** (m * (m + 1) // 2 - 1) * measure

        def integrand(lam: np.ndarray) -> np.ndarray:
            value = _pairs(lam, lambda w: _massive_pair(w, zeta, q))
            value = value * theta2(np.sum(lam + 0.5j * zeta, axis=1), q)
            for col, (site, shifted) in enumerate(variables):
                x = lam[:, col]
                value = value * _homogeneous_site(x, site, m, shifted, zeta, np.sin)
                value = value / theta1(x + 0.5j * zeta, q) ** m
            return value

    else:
        beta = 1j * ctx.params.xi_array[:m]
        _check_strip(beta, zeta)
        prefactor = ratio_sq * t1p ** (m - 1) * measure
        for a in range(m):
            for b in range(a + 1, m):
                prefactor *= theta1(beta[a] - beta[b], q) / np.sin(beta[a] - beta[b])

        def integrand(lam: np.ndarray) -> np.ndarray:
            value = _pairs(lam, lambda w: _massive_pair(w, zeta, q))
            value = value * theta2(np.sum(lam - beta[None, :], axis=1), q)
            value = value / np.prod(theta1(lam[:, :, None] - beta[None, None, :], q), axis=(1, 2))
            for col, (site, shifted) in enumerate(variables):
                value = value * _inhomogeneous_site(lam[:, col], site, shifted, beta, zeta, np.sin)
            return value

    def rules(n: int) -> list[QuadRule]:
        return [periodic_rule(n, shift=-1j * zeta if shifted else 0j) for _, shifted in variables]

    return IntegralSetup(complex(prefactor), integrand, rules)


def _circle_radius(ctx: IntegrandContext) -> float:
    if ctx.regime == Regime.MASSLESS:
        return 0.25 * min(ctx.zeta, np.pi - ctx.zeta)
    return 0.25 * ctx.zeta


def _support_rule(profile: DensityProfile, n: int) -> QuadRule:
    if profile.grid.descriptor.kind == SegmentKind.PERIODIC:
        return periodic_rule(n)
    if profile.grid.descriptor.kind == SegmentKind.LINE:
        zeta = profile.params.zeta
        half_width = min(profile.lambda_F, balanced_cutoff(np.pi / zeta, _strip_width(zeta), n))
        return truncated_line(half_width, n)
    return gauss_rule(-profile.lambda_F, profile.lambda_F, n)


def _density_setup(spec: CorrelatorSpec, ctx: IntegrandContext) -> IntegralSetup:
    """Integrand with the numerical determinant det rho_{h,b}(lam_a).

    Displaced-contour variables run over the support plus a circle around the density pole at
    -i zeta/2, which is the same closed contour as the three-piece path.
    """
    profile = ctx.profile
    zeta = ctx.zeta
    m = spec.m
    variables = spec.variables
    fn = np.sinh if ctx.regime == Regime.MASSLESS else np.sin
    n_circle = ctx.circle_points or default('numerics', 'circle_points')
    radius = _circle_radius(ctx)
    # density columns at the nodes of the rules built last
    current: dict[str, list[np.ndarray]] = {}

    def rules(n: int) -> list[QuadRule]:
        support = _support_rule(profile, n)
        displaced = concat(support, circle_rule(-0.5j * zeta, radius, n_circle))
        built = [displaced if shifted else support for _, shifted in variables]
        current['columns'] = [evaluate_columns(profile, rule.nodes, m) for rule in built]
        return built

    def integrand(lam: np.ndarray, indices: np.ndarray) -> np.ndarray:
        columns = current['columns']
        matrix = np.stack([columns[a][indices[:, a], :] for a in range(m)], axis=1)
        value = np.linalg.det(matrix).astype(complex)
        for a in range(m):
            for b in range(a):
                value = value / fn(lam[:, a] - lam[:, b] - 1j * zeta)
        for col, (site, shifted) in enumerate(variables):
            value = value * _homogeneous_site(lam[:, col], site, m, shifted, zeta, fn)
        return value

    return IntegralSetup(complex((-1) ** spec.s_prime), integrand, rules, with_indices=True)


def _setup(spec: CorrelatorSpec, ctx: IntegrandContext) -> IntegralSetup:
    if ctx.profile is not None:
        return _density_setup(spec, ctx)
    if ctx.regime == Regime.MASSLESS:
        return _massless_setup(spec, ctx)
    return _massive_setup(spec, ctx)


def _integrate(
    spec: CorrelatorSpec,
    ctx: IntegrandContext,
    grid: int | None,
    threads: int | None,
    dimension_cap: int | None,
) -> CorrelatorResult:
    if not spec.balanced:
        return CorrelatorResult(0j, 0.0, 0, spec.label)
    n = default('numerics', 'grid') if grid is None else grid
    setup = _setup(spec, ctx)
    parallel = threads is not None and threads > 1

    def run(points: int) -> tuple[complex, int]:
        rules = setup.rules(points)
        total = integrate_nd(
            setup.integrand,
            rules,
            parallel=parallel,
            threads=threads,
            dimension_cap=dimension_cap,
            with_indices=setup.with_indices,
        )
        return setup.prefactor * total, math.prod(len(rule) for rule in rules)

    coarse, _ = run(max(2, n // 2))
    value, nodes = run(n)
    err = abs(value - coarse)
    tol = default('numerics', 'doubling_tol')
    if err > tol * max(1.0, abs(value)):
        warnings.warn(
            f'{spec.label}: grid doubling changed the value by {err:.3e}',
            ConvergenceWarning,
            stacklevel=3,
        )
    logger.info('F_m[%s] = %.15g%+.3gj (err %.2e, %d nodes)', spec.label, value.real, value.imag, err, nodes)
    return CorrelatorResult(value=value, err_est=float(err), n_points=nodes, label=spec.label)


def F_m(
    spec: CorrelatorSpec,
    params: ModelParams,
    grid: int | None = None,
    threads: int | None = None,
    tail_tol: float | None = None,
    dimension_cap: int | None = None,
) -> CorrelatorResult:
    """Zero-field block from the closed-form density determinant.

    Homogeneous chains use the homogeneous-limit integrand; otherwise the first m
    inhomogeneities must lie in the strip -zeta < Im < 0 (in beta = i xi for Delta > 1).
    """
    ctx = IntegrandContext(params=params, tail_tol=tail_tol)
    return _integrate(spec, ctx, grid, threads, dimension_cap)


def field_F_m(
    spec: CorrelatorSpec,
    profile: DensityProfile,
    grid: int | None = None,
    circle_points: int | None = None,
    threads: int | None = None,
    dimension_cap: int | None = None,
) -> CorrelatorResult:
    """Block from the numerical determinant of the derivative densities of ``profile``.

    A massive profile below the critical field is the zero-field one, so the zero-field
    integral is returned directly.
    """
    params = profile.params
    if not params.homogeneous:
        raise ValueError('Finite-field blocks are implemented for homogeneous chains only')
    if spec.m > profile.m_max:
        raise ValueError(f'Profile holds {profile.m_max} derivative densities, block needs {spec.m}')
    if params.regime == Regime.MASSIVE and params.h > 0 and not profile.field_active:
        logger.info('h=%g below the critical field: using the zero-field block', params.h)
        return F_m(spec, params.with_field(0.0), grid, threads, dimension_cap=dimension_cap)
    if profile.field_active and len(profile.grid) == 0:
        value = 1.0 + 0j if all(pair == (1, 1) for pair in spec.pairs) else 0j
        return CorrelatorResult(value, 0.0, 0, spec.label)
    ctx = IntegrandContext(params=params, profile=profile, circle_points=circle_points)
    return _integrate(spec, ctx, grid, threads, dimension_cap)


def residue_path_F_m(
    spec: CorrelatorSpec,
    params: ModelParams,
    grid: int | None = None,
    circle_points: int | None = None,
    lieb_grid: int | None = None,
    threads: int | None = None,
) -> CorrelatorResult:
    """Zero-field block along the support plus pole circle, with numerical densities."""
    profile = zero_field_profile(params.with_field(0.0), lieb_grid, max(spec.m, 1))
    ctx = IntegrandContext(params=profile.params, profile=profile, circle_points=circle_points)
    return _integrate(spec, ctx, grid, threads, None)


def correlator(
    spec: CorrelatorSpec,
    params: ModelParams,
    grid: int | None = None,
    lieb_grid: int | None = None,
    circle_points: int | None = None,
    threads: int | None = None,
    tail_tol: float | None = None,
    dimension_cap: int | None = None,
    profile: DensityProfile | None = None,
) -> CorrelatorResult:
    """F_m at the field of ``params``, choosing the closed-form or numerical-density path."""
    if not spec.balanced:
        return CorrelatorResult(0j, 0.0, 0, spec.label)
    field_free = params.h == 0 or (
        params.regime == Regime.MASSIVE and params.h <= critical_field(params.zeta)
    )
    if field_free:
        return F_m(spec, params.with_field(0.0), grid, threads, tail_tol, dimension_cap)
    if profile is None:
        profile = solve_lieb(params, lieb_grid, max(spec.m, 1))
    return field_F_m(spec, profile, grid, circle_points, threads, dimension_cap)


def efp(m: int, params: ModelParams, **options) -> CorrelatorResult:
    """Emptiness formation probability: the block with every site in E^{22}."""
    if m < 1:
        raise ValueError(f'EFP needs m >= 1, got {m}')
    return correlator(CorrelatorSpec.efp(m), params, **options)


def _phi_m(roots: np.ndarray, xi: np.ndarray, params: ModelParams) -> complex:
    return complex(np.prod(b_fn(roots[:, None], xi[None, :], params)))


def finite_chain_F_m(spec: CorrelatorSpec, state: BetheState) -> complex:
    """Finite-chain block from the action formulas and normalized scalar products.

    The first m inhomogeneities must be pairwise distinct.
    """
    if not spec.balanced:
        return 0j
    params = state.params
    m = spec.m
    if m > params.M:
        raise ValueError(f'Block of length {m} does not fit on M={params.M} sites')
    roots = np.asarray(state.roots, dtype=complex)
    N = len(roots)
    xi = params.xi_array[:m]
    for a in range(m):
        for b in range(a):
            if abs(np.sinh(xi[a] - xi[b])) < REMOVABLE_TOL:
                raise PoleError('Finite-chain blocks need distinct inhomogeneities on the block sites')

    spectral = np.concatenate([roots, xi])
    terms: dict[frozenset[int], complex] = {frozenset(range(N)): 1.0 + 0j}
    for j, entry in enumerate(spec.pairs):
        terms = apply_entry_to_dual(params, entry, N + j, terms, spectral, at_inhomogeneity=True)

    total = 0j
    for subset, coeff in sorted(terms.items(), key=lambda item: sorted(item[0])):
        if len(subset) != N or coeff == 0:
            continue
        kept = {k for k in subset if k < N}
        dropped = sorted(set(range(N)) - kept)
        extras = sorted(k for k in subset if k >= N)
        total += coeff * normalized_ratio_S(roots, dropped, spectral[extras], params)
    logger.debug('finite-chain block %s: %d terms', spec.label, len(terms))
    return _phi_m(roots, xi, params) * total


_SIGMA_Z = (((1, 1), 1.0), ((2, 2), -1.0))
_IDENTITY = (((1, 1), 1.0), ((2, 2), 1.0))


def correlator_blocks(kind: str, distance: int) -> list[tuple[CorrelatorSpec, float]]:
    """Signed block expansion of <sigma^z_1 sigma^z_{1+d}> ('zz') or <sigma^+_1 sigma^-_{1+d}> ('pm')."""
    if distance < 1:
        raise ValueError(f'Distance must be at least 1, got {distance}')
    middle = [_IDENTITY] * (distance - 1)
    if kind == 'zz':
        factors = [_SIGMA_Z, *middle, _SIGMA_Z]
    elif kind == 'pm':
        factors = [(((2, 1), 1.0),), *middle, (((1, 2), 1.0),)]
    else:
        raise ValueError(f"Unknown correlator kind '{kind}' (expected zz or pm)")
    blocks = []
    for choice in product(*factors):
        pairs = tuple(pair for pair, _ in choice)
        sign = math.prod(weight for _, weight in choice)
        blocks.append((CorrelatorSpec(pairs), sign))
    return blocks


def spin_correlator(kind: str, distance: int, params: ModelParams, **options) -> CorrelatorResult:
    """Two-point function assembled from the signed sum of its blocks."""
    blocks = correlator_blocks(kind, distance)
    if distance + 1 > (options.get('dimension_cap') or default('numerics', 'dimension_cap')):
        raise DimensionCap(f'Distance {distance} needs {distance + 1}-fold integrals')
    profile = None
    field_free = params.h == 0 or (
        params.regime == Regime.MASSIVE and params.h <= critical_field(params.zeta)
    )
    if not field_free:
        profile = solve_lieb(params, options.get('lieb_grid'), distance + 1)
    value = 0j
    err = 0.0
    nodes = 0
    for spec, sign in blocks:
        result = correlator(spec, params, profile=profile, **options)
        value += sign * result.value
        err += abs(result.err_est)
        nodes += result.n_points
    if abs(value.imag) > max(1e-8, 10 * err):
        logger.warning('%s(%d): imaginary part %.3e above the quadrature error', kind, distance, value.imag)
    label = f'{kind}({distance})'
    return CorrelatorResult(value=complex(value.real), err_est=err, n_points=nodes, label=label)
