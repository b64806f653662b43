"""One-dimensional contour rules and tensor-product integration.

Rules carry complex nodes and weights so that shifted lines and circles are integrated with the
same machinery as real intervals: for a parametrized contour z(t) the weights already contain
z'(t).
"""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
import logging
import math
import os

import numpy as np
from scipy.special import roots_legendre

from .constants import THREADS_ENV
from .errors import BadDescriptor, DimensionCap
from .loader import default
from .models import QuadRule, SegmentDescriptor, SegmentKind

logger = logging.getLogger(__name__)


def make_rule(descriptor: SegmentDescriptor, n_points: int) -> QuadRule:
    if n_points < 2:
        raise BadDescriptor(f'A rule needs at least 2 points, got {n_points}')
    descriptor.validate()

    if descriptor.kind == SegmentKind.GAUSS:
        x, w = roots_legendre(n_points)
        half = (descriptor.end - descriptor.start) / 2
        mid = (descriptor.end + descriptor.start) / 2
        nodes = half * x + mid + descriptor.shift
        weights = half * w
    elif descriptor.kind == SegmentKind.LINE:
        step = (descriptor.end - descriptor.start) / n_points
        nodes = descriptor.start + step * (np.arange(n_points) + 0.5) + descriptor.shift
        weights = np.full(n_points, step)
    elif descriptor.kind == SegmentKind.PERIODIC:
        step = (descriptor.end - descriptor.start) / n_points
        nodes = descriptor.start + step * np.arange(n_points) + descriptor.shift
        weights = np.full(n_points, step)
    elif descriptor.kind == SegmentKind.CIRCLE:
        angles = 2 * np.pi * np.arange(n_points) / n_points
        offsets = descriptor.radius * np.exp(1j * angles)
        nodes = descriptor.center + offsets
        weights = (2 * np.pi / n_points) * 1j * offsets
    else:
        raise BadDescriptor(f'Unsupported segment kind {descriptor.kind}')

    return QuadRule(
        nodes=np.asarray(nodes, dtype=complex),
        weights=np.asarray(weights, dtype=complex),
        descriptor=descriptor,
    )


def line_cutoff(decay_rate: float, tail_tol: float | None = None, offset: float = 0.0) -> float:
    """Half-width L beyond which an integrand bounded by 2 e^{-decay_rate |x|} falls below tail_tol."""
    tol = default('numerics', 'tail_tol') if tail_tol is None else tail_tol
    return offset + math.log(2.0 / tol) / decay_rate


def balanced_cutoff(decay_rate: float, strip: float, n_points: int, offset: float = 0.0) -> float:
    """Half-width at which the tail e^{-decay_rate L} matches the midpoint error for n points."""
    return offset + math.sqrt(math.pi * strip * n_points / decay_rate)


def truncated_line(half_width: float, n_points: int, shift: complex = 0j) -> QuadRule:
    """Midpoint rule on [-L, L] + shift, standing in for the full line.

    Integrands analytic in a strip of half-width d converge like e^{-pi d n / L}.
    """
    descriptor = SegmentDescriptor(SegmentKind.LINE, -half_width, half_width, shift=shift)
    return make_rule(descriptor, n_points)


def periodic_rule(n_points: int, shift: complex = 0j) -> QuadRule:
    """Trapezoid rule on one period [-pi/2, pi/2) + shift."""
    descriptor = SegmentDescriptor(SegmentKind.PERIODIC, -np.pi / 2, np.pi / 2, shift=shift)
    return make_rule(descriptor, n_points)


def gauss_rule(start: float, end: float, n_points: int) -> QuadRule:
    return make_rule(SegmentDescriptor(SegmentKind.GAUSS, start, end), n_points)


def circle_rule(center: complex, radius: float, n_points: int) -> QuadRule:
    """Counterclockwise circle; sum(weights * f) is the contour integral of f."""
    descriptor = SegmentDescriptor(SegmentKind.CIRCLE, center=center, radius=radius)
    return make_rule(descriptor, n_points)


def concat(*rules: QuadRule) -> QuadRule:
    """Union of contour pieces, integrated as their sum."""
    if not rules:
        raise BadDescriptor('Cannot concatenate an empty list of rules')
    return QuadRule(
        nodes=np.concatenate([rule.nodes for rule in rules]),
        weights=np.concatenate([rule.weights for rule in rules]),
        descriptor=SegmentDescriptor(SegmentKind.COMPOSITE),
        parts=tuple(rules),
    )


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: requested (or bundled default), capped by the XXZ_THREADS variable."""
    threads = default('numerics', 'threads') if requested is None else requested
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            threads = min(threads, int(cap))
        except ValueError:
            logger.warning('Ignoring non-integer %s=%r', THREADS_ENV, cap)
    return max(1, int(threads))


def integrate_nd(
    integrand: Callable[..., np.ndarray],
    rules: Sequence[QuadRule],
    parallel: bool = False,
    threads: int | None = None,
    chunk_size: int | None = None,
    dimension_cap: int | None = None,
    with_indices: bool = False,
) -> complex:
    """Tensor-product integral of ``integrand`` over the given rules.

    ``integrand(points)`` receives an array of shape (chunk, m) and returns shape (chunk,).
    With ``with_indices`` it is called as ``integrand(points, indices)`` where ``indices`` holds
    the per-dimension node numbers. Chunks are summed in a fixed order, so serial and threaded
    evaluation give identical results.
    """
    m = len(rules)
    cap = default('numerics', 'dimension_cap') if dimension_cap is None else dimension_cap
    if m > cap:
        raise DimensionCap(f'{m}-fold integral exceeds the dimension cap {cap}')
    if m == 0:
        return complex(integrand(np.zeros((1, 0), dtype=complex)).reshape(-1)[0])

    shape = tuple(len(rule) for rule in rules)
    total = math.prod(shape)
    size = chunk_size or default('numerics', 'chunk_size')
    starts = list(range(0, total, size))

    def evaluate(start: int) -> complex:
        flat = np.arange(start, min(start + size, total))
        indices = np.stack(np.unravel_index(flat, shape), axis=-1)
        points = np.empty(indices.shape, dtype=complex)
        weights = np.ones(len(flat), dtype=complex)
        for axis, rule in enumerate(rules):
            points[:, axis] = rule.nodes[indices[:, axis]]
            weights = weights * rule.weights[indices[:, axis]]
        values = integrand(points, indices) if with_indices else integrand(points)
        return complex(np.sum(weights * values))

    workers = resolve_threads(threads) if parallel else 1
    logger.debug('integrate_nd: %d nodes in %d chunks, %d worker(s)', total, len(starts), workers)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(evaluate, starts))
    else:
        partials = [evaluate(start) for start in starts]
    return complex(math.fsum(p.real for p in partials), math.fsum(p.imag for p in partials))
