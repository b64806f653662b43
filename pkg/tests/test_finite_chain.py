import math

import numpy as np
import pytest

from xxz_correlators.bethe_solver import solve_ground_state
from xxz_correlators.errors import ConfigError, DegeneracyWarning, SizeError
from xxz_correlators.finite_chain import (
    apply_entry_to_dual,
    bethe_vector,
    build_monodromy,
    check_size,
    dense_block,
    dual_bethe_vector,
    dual_from_terms,
    elementary,
    exact_ground_state,
    ground_state_average,
    hamiltonian_sector,
    magnetization,
    qisp_reconstruct,
    reduced_sandwich,
    spin_operator,
    vacuum,
    verify_action_formulas,
)
from xxz_correlators.model_core import b_fn, c_fn, d_fn
from xxz_correlators.models import ModelParams
from xxz_correlators.scalar_products import transfer_eigenvalue

from .helpers import inhomogeneous_chain


def _norm(op) -> float:
    return float(np.max(np.abs(op.toarray()))) if op.nnz else 0.0


def test_matrix_units_flip_spins():
    lower = elementary(1, 1, 2, 1).toarray()
    np.testing.assert_array_equal(lower, [[0, 0], [1, 0]])
    raise_second = elementary(2, 2, 1, 2).toarray()
    assert raise_second[0, 2] == 1
    assert np.count_nonzero(raise_second) == 2


def test_pauli_algebra():
    plus, minus, z = (spin_operator(3, 2, kind) for kind in ('+', '-', 'z'))
    assert _norm(plus @ minus - minus @ plus - z) == 0
    x, y = spin_operator(3, 2, 'x'), spin_operator(3, 2, 'y')
    assert _norm(x @ y - 1j * z) < 1e-15
    with pytest.raises(ValueError):
        spin_operator(3, 1, 'w')


def test_single_site_monodromy(params):
    chain = params.with_chain(1, xi=[0.2 + params.eta / 2])
    lam = 0.5 + 0.1j
    blocks = build_monodromy(chain, lam)
    b = complex(b_fn(lam, chain.xi[0], chain))
    c = complex(c_fn(lam, chain.xi[0], chain))
    np.testing.assert_allclose(blocks.A.toarray(), np.diag([1, b]))
    np.testing.assert_allclose(blocks.D.toarray(), np.diag([b, 1]))
    np.testing.assert_allclose(blocks.B.toarray(), [[0, 0], [c, 0]])
    np.testing.assert_allclose(blocks.C.toarray(), [[0, c], [0, 0]])
    assert blocks.entry(1, 2) is blocks.B


def test_reference_state_eigenvalues(params):
    chain = inhomogeneous_chain(params.delta, 4)
    lam = 0.3 + 0.15j
    blocks = build_monodromy(chain, lam)
    up = vacuum(4)
    np.testing.assert_allclose(blocks.A @ up, up)
    np.testing.assert_allclose(blocks.D @ up, complex(d_fn(lam, chain)) * up)
    assert np.max(np.abs(blocks.C @ up)) == 0


def test_creation_operators_commute(params, rng):
    chain = inhomogeneous_chain(params.delta, 4)
    lam, mu = rng.uniform(-1, 1, 2) + 0.1j
    B_lam, B_mu = build_monodromy(chain, lam).B, build_monodromy(chain, mu).B
    assert _norm(B_lam @ B_mu - B_mu @ B_lam) < 1e-12 * _norm(B_lam) * _norm(B_mu)


def test_transfer_matrices_commute(params, rng):
    chain = inhomogeneous_chain(params.delta, 4)
    lam, mu = rng.uniform(-1, 1, 2) + 0.2j
    t1, t2 = build_monodromy(chain, lam).transfer, build_monodromy(chain, mu).transfer
    assert _norm(t1 @ t2 - t2 @ t1) < 1e-12 * _norm(t1) * _norm(t2)


@pytest.mark.parametrize('kind', ['-', '+', 'z'])
def test_local_spins_from_the_monodromy_matrix(params, kind):
    chain = inhomogeneous_chain(params.delta, 3)
    for site in (1, 2, 3):
        rebuilt = qisp_reconstruct(chain, site, kind)
        assert _norm(rebuilt - spin_operator(3, site, kind)) < 1e-9


def test_matrix_units_from_the_monodromy_matrix(massless):
    chain = massless.with_chain(3)
    for eps_prime in (1, 2):
        for eps in (1, 2):
            rebuilt = qisp_reconstruct(chain, 2, (eps_prime, eps))
            assert _norm(rebuilt - elementary(3, 2, eps_prime, eps)) < 1e-9


@pytest.mark.slow
@pytest.mark.parametrize('delta', [0.3, 0.7, 2.0])
@pytest.mark.parametrize('M', [4, 6, 8])
def test_local_spins_on_longer_chains(delta, M):
    chain = inhomogeneous_chain(delta, M)
    for site in sorted({1, M // 2, M}):
        for kind in ('-', '+', 'z'):
            rebuilt = qisp_reconstruct(chain, site, kind)
            assert _norm(rebuilt - spin_operator(M, site, kind)) < 1e-9
        rebuilt = qisp_reconstruct(chain, site, (2, 1))
        assert _norm(rebuilt - elementary(M, site, 2, 1)) < 1e-9


def test_size_cap():
    check_size(12)
    with pytest.raises(SizeError):
        check_size(13)
    with pytest.raises(SizeError):
        build_monodromy(ModelParams(delta=0.5, M=5), 0.1, cap=4)


@pytest.mark.parametrize('delta', [0.0, 0.5, 1.0, 3.0])
def test_two_site_ground_energy(delta):
    matrix, basis = hamiltonian_sector(ModelParams(delta=delta, M=2), 1)
    assert len(basis) == 2
    assert np.linalg.eigvalsh(matrix)[0] == pytest.approx(-4.0 * (1.0 + delta))


def test_isotropic_two_site_singlet():
    params = ModelParams(delta=1.0, M=2)
    assert exact_ground_state(params).energy == pytest.approx(-8.0)
    zz = spin_operator(2, 1, 'z') @ spin_operator(2, 2, 'z')
    assert ground_state_average(params, zz) == pytest.approx(-1.0)


def test_isotropic_chain_is_rotation_invariant():
    params = ModelParams(delta=1.0, M=8)
    state = exact_ground_state(params)
    zz = ground_state_average(params, spin_operator(8, 1, 'z') @ spin_operator(8, 2, 'z'))
    xx = ground_state_average(params, spin_operator(8, 1, 'x') @ spin_operator(8, 2, 'x'))
    assert zz == pytest.approx(xx, abs=1e-10)
    # E = M (3 <zz> - 1) on the SU(2) ground state
    assert zz == pytest.approx((state.energy / 8 + 1) / 3, abs=1e-10)
    with pytest.raises(ConfigError):
        build_monodromy(params, 0.1)


def test_sector_hamiltonian_is_symmetric():
    matrix, basis = hamiltonian_sector(ModelParams(delta=0.7, h=0.4, M=6), 2)
    assert len(basis) == math.comb(6, 2)
    np.testing.assert_allclose(matrix, matrix.T)


def test_bethe_vector_is_the_exact_ground_state(chain_state):
    params = chain_state.params
    psi = bethe_vector(params, chain_state.roots)
    exact = exact_ground_state(params).vector
    overlap = abs(np.vdot(exact, psi)) / (np.linalg.norm(exact) * np.linalg.norm(psi))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_bethe_vector_is_a_transfer_eigenvector(params):
    chain = params.with_chain(6)
    state = solve_ground_state(chain)
    psi = bethe_vector(chain, state.roots)
    mu = 0.3 - 0.2j
    lhs = build_monodromy(chain, mu).transfer @ psi
    rhs = transfer_eigenvalue(mu, state.roots, chain) * psi
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * np.max(np.abs(lhs)))


def test_massive_quasi_degeneracy_is_reported():
    params = ModelParams(delta=4.0, M=8)
    with pytest.warns(DegeneracyWarning):
        state = exact_ground_state(params)
    assert state.partner is not None


def test_field_picks_the_lowest_sector():
    state = exact_ground_state(ModelParams(delta=0.5, h=7.0, M=6))
    assert state.N == 0
    assert magnetization(state.vector, 6) == pytest.approx(1.0)


def test_ground_state_averages(chain_state):
    params = chain_state.params
    assert ground_state_average(params, spin_operator(6, 1, 'z')) == pytest.approx(0.0, abs=1e-12)
    assert magnetization(exact_ground_state(params).vector, 6) == pytest.approx(0.0, abs=1e-12)


def test_dense_block_on_the_bethe_state(chain_state):
    params = chain_state.params
    bra = dual_bethe_vector(params, chain_state.roots)
    ket = bethe_vector(params, chain_state.roots)
    down = dense_block(params, [(2, 2)], bra, ket)
    up = dense_block(params, [(1, 1)], bra, ket)
    assert down == pytest.approx(0.5)
    assert up + down == pytest.approx(1.0)
    flip = dense_block(params, [(2, 1), (1, 2)], bra, ket)
    assert flip == pytest.approx(dense_block(params, [(1, 2), (2, 1)], bra, ket))


def test_action_formulas(params, rng):
    report = verify_action_formulas(inhomogeneous_chain(params.delta, 5), rng, n_draws=6)
    assert report.draws == 6
    assert set(report.deviations) == {'A', 'B', 'C', 'D', 'B(xi) full', 'B(xi) reduced'}
    assert report.max_deviation < 1e-9


def test_c_action_appends_the_new_parameter(rng):
    chain = inhomogeneous_chain(0.5, 4)
    spectral = rng.uniform(-0.5, 0.5, 3) + 0.1j
    terms = apply_entry_to_dual(chain, (2, 1), 2, {frozenset({0, 1}): 2.0}, spectral)
    assert terms == {frozenset({0, 1, 2}): 2.0}
    np.testing.assert_allclose(dual_from_terms(chain, terms, spectral), 2.0 * dual_bethe_vector(chain, spectral))
    with pytest.raises(ValueError):
        apply_entry_to_dual(chain, (3, 1), 2, terms, spectral)


@pytest.mark.parametrize(
    'operators',
    [[(2, 'z'), (3, 'z')], [(1, '+'), (3, '-')], [(2, '-'), (4, '+')]],
)
def test_reduced_sandwich(operators):
    params = ModelParams(delta=0.7, M=6)
    state = solve_ground_state(params)
    reduced, direct = reduced_sandwich(params, state.roots, state.roots, operators)
    assert abs(direct) > 1e-8
    assert reduced == pytest.approx(direct, rel=1e-8)


def test_reduced_sandwich_needs_increasing_sites(chain_state):
    with pytest.raises(ValueError):
        reduced_sandwich(chain_state.params, chain_state.roots, chain_state.roots, [(3, 'z'), (2, 'z')])
