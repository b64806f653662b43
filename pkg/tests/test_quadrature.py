import math

import numpy as np
import pytest

from xxz_correlators.errors import BadDescriptor, DimensionCap
from xxz_correlators.quadrature import (
    circle_rule,
    concat,
    gauss_rule,
    integrate_nd,
    line_cutoff,
    periodic_rule,
    resolve_threads,
    truncated_line,
)


def test_gauss_rule_is_exact_for_polynomials():
    rule = gauss_rule(0.0, 2.0, 4)
    assert rule.integrate(rule.nodes**5 + rule.nodes**2) == pytest.approx(64 / 6 + 8 / 3)


def test_periodic_rule_converges_geometrically():
    rule = periodic_rule(40)
    value = rule.integrate(1.0 / (2.0 - np.cos(2 * rule.nodes)))
    assert value == pytest.approx(np.pi / np.sqrt(3), rel=1e-13)


def test_circle_rule_picks_up_residues():
    rule = circle_rule(0.5j, 0.3, 32)
    assert rule.integrate(1.0 / (rule.nodes - 0.5j)) == pytest.approx(2j * np.pi)
    assert abs(rule.integrate(rule.nodes**2)) < 1e-14


def test_shifted_line_follows_cauchy():
    half_width = 9.0
    rule = truncated_line(half_width, 200, shift=0.3j)
    assert rule.integrate(np.exp(-(rule.nodes**2))) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_concat_sums_pieces():
    left = gauss_rule(-1.0, 0.0, 6)
    right = gauss_rule(0.0, 2.0, 6)
    joined = concat(left, right)
    assert len(joined) == 12
    assert joined.parts == (left, right)
    assert joined.integrate(joined.nodes**3) == pytest.approx(3.75)


def test_line_cutoff_bounds_the_tail():
    cutoff = line_cutoff(2.0, 1e-10)
    assert 2 * math.exp(-2.0 * cutoff) == pytest.approx(1e-10)
    assert line_cutoff(2.0, 1e-10, offset=1.0) == pytest.approx(cutoff + 1.0)


@pytest.mark.parametrize(
    'build',
    [
        lambda: gauss_rule(1.0, 0.0, 4),
        lambda: gauss_rule(0.0, 1.0, 1),
        lambda: circle_rule(0j, 0.0, 8),
        lambda: concat(),
    ],
)
def test_bad_descriptors(build):
    with pytest.raises(BadDescriptor):
        build()


def test_tensor_product_integral():
    rule = gauss_rule(0.0, 1.0, 6)
    value = integrate_nd(lambda p: p[:, 0] ** 2 * p[:, 1], [rule, rule])
    assert value == pytest.approx(1 / 6)


def test_threaded_sum_is_deterministic():
    rule = gauss_rule(-1.0, 1.0, 15)

    def integrand(points):
        return np.exp(points[:, 0] * points[:, 1]) * np.cos(points[:, 2])

    serial = integrate_nd(integrand, [rule] * 3, chunk_size=37)
    threaded = integrate_nd(integrand, [rule] * 3, parallel=True, threads=4, chunk_size=37)
    assert serial == threaded


def test_dimension_cap():
    rule = gauss_rule(0.0, 1.0, 3)
    with pytest.raises(DimensionCap):
        integrate_nd(lambda p: np.ones(len(p)), [rule] * 3, dimension_cap=2)


def test_zero_dimensional_integral_evaluates_once():
    assert integrate_nd(lambda p: np.full(len(p), 2.5), []) == 2.5


def test_indices_follow_the_nodes():
    rule = gauss_rule(0.0, 1.0, 5)
    seen = []

    def integrand(points, indices):
        np.testing.assert_array_equal(points[:, 0], rule.nodes[indices[:, 0]])
        seen.append(len(points))
        return np.ones(len(points))

    assert integrate_nd(integrand, [rule, rule], with_indices=True) == pytest.approx(1.0)
    assert sum(seen) == 25


def test_thread_cap_from_environment(monkeypatch):
    monkeypatch.setenv('XXZ_THREADS', '2')
    assert resolve_threads(8) == 2
    monkeypatch.setenv('XXZ_THREADS', 'many')
    assert resolve_threads(3) == 3
    monkeypatch.delenv('XXZ_THREADS')
    assert resolve_threads(0) == 1
