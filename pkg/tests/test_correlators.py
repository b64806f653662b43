import math

import numpy as np
import pytest

from xxz_correlators.bethe_solver import solve_ground_state
from xxz_correlators.correlators import (
    F_m,
    correlator,
    correlator_blocks,
    efp,
    field_F_m,
    finite_chain_F_m,
    residue_path_F_m,
    spin_correlator,
)
from xxz_correlators.errors import DimensionCap, PoleError
from xxz_correlators import finite_chain
from xxz_correlators.finite_chain import (
    bethe_vector,
    dense_block,
    dual_bethe_vector,
    elementary,
    ground_state_average,
)
from xxz_correlators.model_core import bare_energy_eps0
from xxz_correlators.models import CorrelatorSpec, ModelParams, Regime
from xxz_correlators.quadrature import periodic_rule, truncated_line
from xxz_correlators.thermo_density import closed_form_density, critical_field, solve_lieb

from .helpers import inhomogeneous_chain, rel

pytestmark = pytest.mark.filterwarnings('ignore::xxz_correlators.errors.ConvergenceWarning')

GRID = 120
LIEB_GRID = 200


def _ground_energy_per_site(params: ModelParams) -> float:
    if params.regime == Regime.MASSLESS:
        rule = truncated_line(12.0 * params.zeta, 400)
    else:
        rule = periodic_rule(200)
    x = rule.nodes.real
    return float(np.sum(rule.weights.real * closed_form_density(x, params) * bare_energy_eps0(x, params, h=0.0)))


def test_single_site_efp_is_one_half(params):
    result = efp(1, params, grid=GRID)
    assert result.value == pytest.approx(0.5, abs=1e-7)
    assert result.n_points == GRID
    assert result.err_est < 1e-6


def test_single_site_blocks_add_up_to_one(params):
    up = F_m(CorrelatorSpec.parse('11'), params, grid=GRID).value
    down = F_m(CorrelatorSpec.parse('22'), params, grid=GRID).value
    assert up + down == pytest.approx(1.0, abs=1e-7)


def test_unbalanced_blocks_vanish(params):
    result = correlator(CorrelatorSpec.parse('21,22'), params)
    assert result.value == 0
    assert result.err_est == 0.0


def test_efp_needs_a_site(massless):
    with pytest.raises(ValueError):
        efp(0, massless)


def test_free_fermion_efp():
    result = efp(2, ModelParams(delta=0.0), grid=GRID)
    assert result.value.real == pytest.approx(0.25 - 1 / np.pi**2, abs=1e-6)
    assert abs(result.value.imag) < 1e-8


def test_efp_decreases_with_length(params):
    values = [efp(m, params, grid=60).value.real for m in (1, 2, 3)]
    assert values[0] > values[1] > values[2] > 0


def test_two_site_blocks_reduce_to_one_site(params):
    # summing the second site over both diagonal units leaves the single-site block
    pair = F_m(CorrelatorSpec.parse('22,22'), params, grid=GRID).value
    pair += F_m(CorrelatorSpec.parse('22,11'), params, grid=GRID).value
    assert pair == pytest.approx(0.5, abs=1e-6)


def test_free_fermion_nearest_neighbours():
    params = ModelParams(delta=0.0)
    zz = spin_correlator('zz', 1, params, grid=GRID)
    pm = spin_correlator('pm', 1, params, grid=GRID)
    assert zz.value.real == pytest.approx(-4 / np.pi**2, abs=1e-6)
    assert pm.value.real == pytest.approx(-1 / np.pi, abs=1e-6)
    assert zz.value.imag == 0


@pytest.mark.slow
@pytest.mark.parametrize('delta', [0.5, -0.4, 2.0])
def test_energy_from_nearest_neighbour_correlators(delta):
    params = ModelParams(delta=delta)
    zz = spin_correlator('zz', 1, params, grid=GRID).value.real
    pm = spin_correlator('pm', 1, params, grid=GRID).value.real
    assert 4 * pm + delta * (zz - 1) == pytest.approx(_ground_energy_per_site(params), abs=1e-6)


def test_block_expansion_of_two_point_functions():
    zz = correlator_blocks('zz', 1)
    assert [(spec.label, sign) for spec, sign in zz] == [
        ('11,11', 1.0),
        ('11,22', -1.0),
        ('22,11', -1.0),
        ('22,22', 1.0),
    ]
    pm = correlator_blocks('pm', 2)
    assert [(spec.label, sign) for spec, sign in pm] == [('21,11,12', 1.0), ('21,22,12', 1.0)]
    with pytest.raises(ValueError):
        correlator_blocks('xy', 1)
    with pytest.raises(ValueError):
        correlator_blocks('zz', 0)


def test_distance_beyond_the_dimension_cap(massless):
    with pytest.raises(DimensionCap):
        spin_correlator('zz', 4, massless, dimension_cap=4)


@pytest.mark.parametrize('delta', [0.5, 2.0])
def test_inhomogeneous_single_site(delta):
    chain = inhomogeneous_chain(delta, 2, spread=0.3)
    assert F_m(CorrelatorSpec.parse('22'), chain, grid=GRID).value == pytest.approx(0.5, abs=1e-7)


@pytest.mark.parametrize('delta', [0.5, 2.0])
def test_inhomogeneous_blocks_approach_the_homogeneous_ones(delta):
    spec = CorrelatorSpec.parse('21,12')
    homogeneous = F_m(spec, ModelParams(delta=delta), grid=GRID).value
    nearby = F_m(spec, inhomogeneous_chain(delta, 2, spread=1e-4), grid=GRID).value
    assert nearby == pytest.approx(homogeneous, abs=1e-3)


def test_inhomogeneities_outside_the_strip(massless):
    chain = massless.with_chain(2, xi=[0.1j, massless.eta / 2])
    with pytest.raises(ValueError):
        F_m(CorrelatorSpec.parse('22,22'), chain)


@pytest.mark.parametrize('label', ['22', '11', '22,22', '21,12'])
def test_residue_path_matches_the_closed_form(params, label):
    spec = CorrelatorSpec.parse(label)
    closed = F_m(spec, params, grid=GRID).value
    residue = residue_path_F_m(spec, params, grid=GRID, lieb_grid=LIEB_GRID).value
    assert residue == pytest.approx(closed, abs=1e-6)


def test_field_block_is_the_filling():
    params = ModelParams(delta=0.5, h=1.0)
    profile = solve_lieb(params, LIEB_GRID, 2)
    down = field_F_m(CorrelatorSpec.parse('22'), profile, grid=GRID).value
    up = field_F_m(CorrelatorSpec.parse('11'), profile, grid=GRID).value
    assert down == pytest.approx(profile.filling, abs=1e-6)
    assert up + down == pytest.approx(1.0, abs=1e-6)


def test_field_below_the_critical_value_is_the_zero_field_block(massive):
    spec = CorrelatorSpec.parse('22,22')
    below = massive.with_field(0.5 * critical_field(massive.zeta))
    assert correlator(spec, below, grid=64).value == pytest.approx(F_m(spec, massive, grid=64).value)
    profile = solve_lieb(below, LIEB_GRID, 2)
    assert field_F_m(spec, profile, grid=64).value == pytest.approx(F_m(spec, massive, grid=64).value)


def test_saturated_chain_has_all_spins_up(massless):
    saturated = massless.with_field(7.0)
    assert correlator(CorrelatorSpec.parse('11,11'), saturated).value == 1
    assert correlator(CorrelatorSpec.parse('22'), saturated).value == 0


def test_field_blocks_need_enough_densities():
    profile = solve_lieb(ModelParams(delta=0.5, h=1.0), LIEB_GRID, 1)
    with pytest.raises(ValueError):
        field_F_m(CorrelatorSpec.parse('22,22'), profile)


@pytest.mark.parametrize('delta', [0.5, 2.0])
@pytest.mark.parametrize('label', ['22', '11', '21,12', '12,21', '22,22', '11,22', '21,22,12'])
def test_finite_chain_blocks_match_dense_algebra(delta, label):
    params = inhomogeneous_chain(delta, 6, spread=0.2)
    state = solve_ground_state(params)
    spec = CorrelatorSpec.parse(label)
    bra = dual_bethe_vector(params, state.roots)
    ket = bethe_vector(params, state.roots)
    dense = dense_block(params, spec.pairs, bra, ket)
    assert rel(finite_chain_F_m(spec, state), dense) < 1e-7


def test_finite_chain_single_site_on_the_homogeneous_chain(chain_state):
    params = chain_state.params
    bra = dual_bethe_vector(params, chain_state.roots)
    ket = bethe_vector(params, chain_state.roots)
    spec = CorrelatorSpec.parse('22')
    assert finite_chain_F_m(spec, chain_state) == pytest.approx(dense_block(params, spec.pairs, bra, ket))


def test_finite_chain_blocks_need_distinct_inhomogeneities(chain_state):
    with pytest.raises(PoleError):
        finite_chain_F_m(CorrelatorSpec.parse('22,22'), chain_state)
    assert finite_chain_F_m(CorrelatorSpec.parse('21'), chain_state) == 0


@pytest.mark.slow
def test_three_site_efp_of_free_fermions():
    # det of the sine kernel on three sites
    matrix = np.array(
        [[0.5 if i == j else math.sin(np.pi * (i - j) / 2) / (np.pi * (i - j)) for j in range(3)] for i in range(3)]
    )
    expected = float(np.linalg.det(matrix))
    assert efp(3, ModelParams(delta=0.0), grid=80).value.real == pytest.approx(expected, abs=1e-6)


def _lattice_efp(delta: float, m: int, M: int) -> float:
    operator = elementary(M, 1, 2, 2)
    for site in range(2, m + 1):
        operator = operator @ elementary(M, site, 2, 2)
    return ground_state_average(ModelParams(delta=delta, M=M), operator)


@pytest.mark.slow
@pytest.mark.filterwarnings('ignore::xxz_correlators.errors.DegeneracyWarning')
@pytest.mark.parametrize('delta', [0.5, 2.0])
@pytest.mark.parametrize('m', [2, 3])
def test_efp_matches_extrapolated_lattice_values(monkeypatch, delta, m):
    monkeypatch.setattr(finite_chain, 'check_size', lambda M, cap=None: None)
    sizes = np.array([10.0, 12.0, 14.0])
    values = [_lattice_efp(delta, m, int(M)) for M in sizes]
    # a + b/M^2 + c/M^4 through the three chains
    design = np.stack([np.ones(3), sizes**-2, sizes**-4], axis=1)
    limit = np.linalg.solve(design, values)[0]
    result = efp(m, ModelParams(delta=delta), grid=60 if m == 3 else GRID)
    assert result.value.real == pytest.approx(limit, rel=1e-2)


@pytest.mark.slow
@pytest.mark.parametrize('label', ['22', '22,22'])
def test_small_field_approaches_zero_field(label):
    spec = CorrelatorSpec.parse(label)
    params = ModelParams(delta=0.5)
    zero = F_m(spec, params, grid=GRID).value
    small = correlator(spec, params.with_field(1e-3), grid=GRID, lieb_grid=LIEB_GRID).value
    assert small.real == pytest.approx(zero.real, abs=1e-3)


@pytest.mark.parametrize('h', [0.5, 1.0, 2.0, 3.5, 5.0])
def test_field_block_follows_the_filling_across_fields(h):
    profile = solve_lieb(ModelParams(delta=0.5, h=h), LIEB_GRID, 1)
    down = field_F_m(CorrelatorSpec.parse('22'), profile, grid=GRID).value
    assert 0 < profile.filling < 0.5
    assert rel(down, profile.filling) < 1e-6


def test_massive_field_above_the_critical_value():
    params = ModelParams(delta=2.0, h=4.0)
    assert params.h > critical_field(params.zeta)
    profile = solve_lieb(params, LIEB_GRID, 1)
    assert profile.field_active
    down = field_F_m(CorrelatorSpec.parse('22'), profile, grid=GRID).value
    up = field_F_m(CorrelatorSpec.parse('11'), profile, grid=GRID).value
    assert down == pytest.approx(profile.filling, abs=1e-6)
    assert up + down == pytest.approx(1.0, abs=1e-6)
    assert profile.filling < 0.5


@pytest.mark.slow
@pytest.mark.parametrize('m', [1, 2])
def test_blocks_are_continuous_across_the_isotropic_point(m):
    below = efp(m, ModelParams(delta=0.98), grid=GRID).value.real
    above = efp(m, ModelParams(delta=1.02), grid=GRID).value.real
    assert above == pytest.approx(below, rel=5e-2)
    if m == 2:
        # (1 + <sz sz>) / 4 with <sz sz> = 1/3 - 4 ln 2 / 3 at Delta = 1
        isotropic = (4 / 3 - 4 * math.log(2) / 3) / 4
        assert below == pytest.approx(isotropic, rel=5e-2)
        assert above == pytest.approx(isotropic, rel=5e-2)
