"""Verification batteries run by ``xxz-corr verify``.

Each check returns (passed, detail). A suite prints one line per passing check, a violation
block for the failures and a PASS k/n summary.
"""

from collections.abc import Callable
import logging
import sys

import numpy as np
from scipy.linalg import det

from .bethe_solver import solve_ground_state
from .correlators import F_m, field_F_m
from .finite_chain import (
    bethe_vector,
    build_monodromy,
    dual_bethe_vector,
    elementary,
    exact_ground_state,
    hamiltonian_sector,
    qisp_reconstruct,
    reduced_sandwich,
    spin_operator,
    verify_action_formulas,
)
from .models import CorrelatorSpec, ModelParams, RunConfig
from .quadrature import circle_rule
from .scalar_products import (
    cauchy_det_V,
    gaudin_norm,
    normalized_ratio_S,
    slavnov_scalar_product,
    thermo_S_matrix,
    transfer_eigenvalue,
)
from .special_functions import cauchy_det_massless, elliptic_det_massive, massive_density_series
from .thermo_density import closed_form_density, lieb_residual, solve_lieb, zero_field_profile

logger = logging.getLogger(__name__)

Check = Callable[[np.random.Generator, RunConfig], tuple[bool, str]]

SUITES = ('finite', 'determinants', 'thermo')


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b)) / max(1e-300, float(np.max(np.abs(b)))))


def _norm(op) -> float:
    return float(abs(op).max()) if op.nnz else 0.0


def _random_chain(rng: np.random.Generator, delta: float, M: int) -> ModelParams:
    base = ModelParams(delta=delta, M=M)
    offsets = rng.uniform(-0.4, 0.4, M) + 1j * rng.uniform(-0.1, 0.1, M)
    return base.with_chain(M, xi=[base.eta / 2 + x for x in offsets])


def _check_transfer_commute(rng, config):
    params = _random_chain(rng, 0.7, 4)
    lam, mu = rng.uniform(-1, 1, 2) + 0.2j
    t1 = build_monodromy(params, lam, config.chain_cap).transfer
    t2 = build_monodromy(params, mu, config.chain_cap).transfer
    dev = _norm(t1 @ t2 - t2 @ t1)
    return dev < 1e-10, f'|[t(lam), t(mu)]| = {dev:.2e}'


def _check_qisp(rng, config):
    worst = 0.0
    for delta in (0.3, 2.0):
        params = _random_chain(rng, delta, 4)
        for site in range(1, params.M + 1):
            for kind in ('-', '+', 'z'):
                rebuilt = qisp_reconstruct(params, site, kind, config.chain_cap)
                worst = max(worst, _norm(rebuilt - spin_operator(params.M, site, kind)))
    return worst < 1e-9, f'max deviation {worst:.2e}'


def _check_qisp_units(rng, config):
    params = _random_chain(rng, 0.7, 3)
    worst = 0.0
    for site in range(1, params.M + 1):
        for eps_prime in (1, 2):
            for eps in (1, 2):
                rebuilt = qisp_reconstruct(params, site, (eps_prime, eps), config.chain_cap)
                worst = max(worst, _norm(rebuilt - elementary(params.M, site, eps_prime, eps)))
    return worst < 1e-9, f'max deviation {worst:.2e}'


def _check_actions(rng, config):
    params = _random_chain(rng, 0.7, 5)
    report = verify_action_formulas(params, rng, n_draws=5)
    return report.max_deviation < 1e-9, f'max deviation {report.max_deviation:.2e} over {report.draws} draws'


def _check_two_site_energy(rng, config):
    params = ModelParams(delta=0.5, M=2)
    matrix, _ = hamiltonian_sector(params, 1)
    lowest = float(np.linalg.eigvalsh(matrix)[0])
    expected = -4.0 * (1.0 + params.delta)
    return abs(lowest - expected) < 1e-12, f'E0 = {lowest:.12g}, expected {expected:.12g}'


def _check_overlap(rng, config):
    params = ModelParams(delta=0.5, M=6)
    state = solve_ground_state(params)
    psi = bethe_vector(params, state.roots)
    exact = exact_ground_state(params).vector
    overlap = abs(np.vdot(exact, psi)) / (np.linalg.norm(exact) * np.linalg.norm(psi))
    return abs(overlap - 1) < 1e-8, f'|overlap| = {overlap:.12f}'


def _check_eigenvector(rng, config):
    params = ModelParams(delta=0.7, M=6)
    state = solve_ground_state(params)
    psi = bethe_vector(params, state.roots)
    mu = 0.3 - 0.2j
    lhs = build_monodromy(params, mu, config.chain_cap).transfer @ psi
    rhs = transfer_eigenvalue(mu, state.roots, params) * psi
    dev = _rel(lhs, rhs)
    return dev < 1e-9, f'relative deviation {dev:.2e}'


def _check_sandwich(rng, config):
    params = ModelParams(delta=0.7, M=6)
    state = solve_ground_state(params)
    reduced, direct = reduced_sandwich(params, state.roots, state.roots, [(2, 'z'), (3, 'z')])
    dev = abs(reduced - direct) / max(1e-300, abs(direct))
    return dev < 1e-8, f'relative deviation {dev:.2e}'


def _check_slavnov(rng, config):
    worst = 0.0
    for M in (2, 4, 6):
        params = ModelParams(delta=0.5, M=M)
        state = solve_ground_state(params)
        mu = rng.uniform(-1, 1, state.N) + 1j * rng.uniform(-0.3, 0.3, state.N)
        dense = dual_bethe_vector(params, mu) @ bethe_vector(params, state.roots)
        worst = max(worst, _rel(slavnov_scalar_product(state.roots, mu, params), dense))
    return worst < 1e-8, f'max relative deviation {worst:.2e}'


def _check_gaudin(rng, config):
    worst = 0.0
    for delta, M in ((0.5, 2), (0.5, 6), (2.0, 4)):
        params = ModelParams(delta=delta, M=M)
        state = solve_ground_state(params)
        dense = dual_bethe_vector(params, state.roots) @ bethe_vector(params, state.roots)
        worst = max(worst, _rel(gaudin_norm(state.roots, params), dense))
    return worst < 1e-8, f'max relative deviation {worst:.2e}'


def _check_cauchy_V(rng, config):
    worst = 0.0
    for n in range(1, 9):
        lam = rng.uniform(-1, 1, n) + 1j * rng.uniform(-0.5, 0.5, n)
        mu = rng.uniform(-1, 1, n) + 1j * rng.uniform(-0.5, 0.5, n)
        matrix = 1.0 / np.sinh(mu[None, :] - lam[:, None])
        worst = max(worst, _rel(cauchy_det_V(lam, mu), det(matrix)))
    return worst < 1e-10, f'max relative deviation {worst:.2e}'


def _det_deviation(closed, matrix: np.ndarray) -> float:
    """Relative deviation from the LU determinant, in units of its rounding bound."""
    bound = max(1e-9, 64 * np.finfo(float).eps * float(np.linalg.cond(matrix)))
    return _rel(closed, det(matrix)) / bound


def _check_cauchy_S(rng, config):
    params = ModelParams(delta=0.5)
    worst = 0.0
    for _ in range(10):
        for m in range(1, 6):
            lam = rng.uniform(-1.5, 1.5, m)
            xi = rng.uniform(-1.5, 1.5, m) - 1j * rng.uniform(0.1, 0.9, m) * params.zeta
            closed = cauchy_det_massless(lam, xi, params.zeta)
            worst = max(worst, _det_deviation(closed, thermo_S_matrix(lam, xi, params)))
    return worst <= 1, f'max deviation {worst:.2e} of the rounding bound over 50 draws'


def _check_elliptic(rng, config):
    params = ModelParams(delta=2.0)
    zeta = params.zeta
    worst = 0.0
    for _ in range(10):
        for m in range(1, 6):
            lam = rng.uniform(-np.pi / 2, np.pi / 2, m)
            beta = rng.uniform(-np.pi / 2, np.pi / 2, m) - 1j * rng.uniform(0.2, 0.8, m) * zeta
            matrix = massive_density_series(lam[:, None] - beta[None, :] - 0.5j * zeta, zeta)
            worst = max(worst, _det_deviation(elliptic_det_massive(lam, beta, params.q), matrix))
    return worst <= 1, f'max deviation {worst:.2e} of the rounding bound over 50 draws'


def _check_normalized_ratio(rng, config):
    params = ModelParams(delta=0.5, M=6)
    state = solve_ground_state(params)
    roots = state.roots
    ket = bethe_vector(params, roots)
    norm = dual_bethe_vector(params, roots) @ ket
    extra = params.xi_array[:1]
    dense = dual_bethe_vector(params, [*roots[1:], *extra]) @ ket / norm
    dev = _rel(normalized_ratio_S(roots, [0], extra, params), dense)
    return dev < 1e-8, f'relative deviation {dev:.2e}'


def _check_lieb(rng, config):
    worst = 0.0
    for delta in (0.5, 2.0):
        profile = zero_field_profile(ModelParams(delta=delta), config.lieb_grid, 1)
        worst = max(worst, lieb_residual(profile, np.linspace(-1, 1, 11)))
    return worst < 1e-8, f'max residual {worst:.2e}'


def _check_filling(rng, config):
    worst = 0.0
    for delta in (0.5, 2.0):
        profile = zero_field_profile(ModelParams(delta=delta), config.lieb_grid, 1)
        worst = max(worst, abs(profile.filling - 0.5))
    return worst < 1e-10, f'max |int rho - 1/2| = {worst:.2e}'


def _check_residue(rng, config):
    params = ModelParams(delta=0.5)
    rule = circle_rule(-0.5j * params.zeta, 0.2 * params.zeta, config.circle_points)
    value = rule.integrate(closed_form_density(rule.nodes, params))
    return abs(value + 1) < 1e-8, f'contour integral {value:.10g}'


def _check_below_critical(rng, config):
    params = ModelParams(delta=2.0, h=0.05)
    profile = solve_lieb(params, config.lieb_grid, 1)
    reference = zero_field_profile(params, config.lieb_grid, 1)
    same = not profile.field_active and np.array_equal(profile.rho_b, reference.rho_b)
    return same, 'zero-field profile returned' if same else 'profile changed below h_c'


def _check_efp_one(rng, config):
    worst = 0.0
    for delta in (0.5, 2.0):
        result = F_m(CorrelatorSpec.efp(1), ModelParams(delta=delta), grid=min(config.grid, 80))
        worst = max(worst, abs(result.value - 0.5))
    return worst < 1e-6, f'max |tau(1) - 1/2| = {worst:.2e}'


def _check_completeness(rng, config):
    params = ModelParams(delta=0.5)
    grid = min(config.grid, 80)
    up = F_m(CorrelatorSpec(((1, 1),)), params, grid=grid).value
    down = F_m(CorrelatorSpec(((2, 2),)), params, grid=grid).value
    return abs(up + down - 1) < 1e-6, f'F(11) + F(22) = {(up + down).real:.10f}'


def _check_field_density(rng, config):
    params = ModelParams(delta=0.5, h=1.0)
    profile = solve_lieb(params, config.lieb_grid, 1)
    block = field_F_m(CorrelatorSpec(((2, 2),)), profile, grid=config.grid)
    dev = abs(block.value - profile.filling)
    return dev < 1e-6, f'|F(22) - int rho_h| = {dev:.2e}'


_BATTERIES: dict[str, list[tuple[str, Check]]] = {
    'finite': [
        ('transfer matrices commute', _check_transfer_commute),
        ('local spins from the monodromy matrix', _check_qisp),
        ('matrix units from the monodromy matrix', _check_qisp_units),
        ('action formulas on dual states', _check_actions),
        ('two-site ground energy', _check_two_site_energy),
        ('Bethe vector is the exact ground state', _check_overlap),
        ('Bethe vector is a transfer-matrix eigenvector', _check_eigenvector),
        ('reduced sandwich equals direct sandwich', _check_sandwich),
    ],
    'determinants': [
        ('Slavnov scalar product', _check_slavnov),
        ('Gaudin norm', _check_gaudin),
        ('Cauchy determinant of V', _check_cauchy_V),
        ('massless density determinant', _check_cauchy_S),
        ('massive density determinant', _check_elliptic),
        ('normalized scalar product', _check_normalized_ratio),
    ],
    'thermo': [
        ('Lieb residual at zero field', _check_lieb),
        ('half filling at zero field', _check_filling),
        ('density residue', _check_residue),
        ('massive profile below the critical field', _check_below_critical),
        ('tau(1) = 1/2', _check_efp_one),
        ('F(11) + F(22) = 1', _check_completeness),
        ('field block equals the filling', _check_field_density),
    ],
}


def run_suite(suite: str, config: RunConfig, quiet: bool = False) -> bool:
    """Run one battery (or 'all'); print per-check lines and a PASS k/n summary."""
    names = SUITES if suite == 'all' else (suite,)
    for name in names:
        if name not in _BATTERIES:
            raise ValueError(f"Unknown verification suite '{name}'")
    rng = np.random.default_rng(config.seed)

    violations: list[str] = []
    total = 0
    for name in names:
        for label, check in _BATTERIES[name]:
            total += 1
            try:
                passed, detail = check(rng, config)
            except Exception as exc:  # a crashing check is a failed check
                logger.debug('Check %s raised', label, exc_info=True)
                passed, detail = False, f'{type(exc).__name__}: {exc}'
            if passed:
                if not quiet:
                    print(f'[ok:{name}] {label} ({detail})')
            else:
                violations.append(f'[{name}] {label}: {detail}')

    if violations:
        print('\nVerification failures detected:', file=sys.stderr)
        print('-' * 60, file=sys.stderr)
        for line in violations:
            print(f'  {line}', file=sys.stderr)
        print()
    print(f'{"PASS" if not violations else "FAIL"} {total - len(violations)}/{total}')
    return not violations
