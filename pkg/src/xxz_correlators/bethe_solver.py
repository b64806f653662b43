"""Ground-state Bethe roots of a finite chain.

The logarithmic Bethe equations are solved in the real rapidity ``alpha``:

    sum_k p0(alpha_j - delta_k) + sum_{k != j} theta(alpha_j - alpha_k) = 2 pi I_j

with continuous p0 and theta and the symmetric ground-state quantum numbers
I_j = j - (N + 1)/2. The inhomogeneities enter through their real offsets delta_k.
"""

import logging

import numpy as np
from scipy.optimize import brentq

from .loader import default
from .model_core import (
    alpha_from_rapidity,
    b_fn,
    bare_energy_eps0,
    d_fn,
    kernel_K,
    p0_prime,
    rapidity_from_alpha,
    real_offsets,
    unwrapped_momentum,
    unwrapped_phase,
)
from .models import BetheState, ModelParams, Regime

logger = logging.getLogger(__name__)


def ground_state_quantum_numbers(N: int) -> np.ndarray:
    return np.arange(1, N + 1) - (N + 1) / 2


def _massive_cdf(alpha: float, zeta: float) -> float:
    n = np.arange(1, int(40 / zeta) + 3)
    return (alpha + np.sum(np.sin(2 * n * alpha) / (n * np.cosh(n * zeta)))) / (2 * np.pi)


def _initial_guess(params: ModelParams, numbers: np.ndarray) -> np.ndarray:
    """Roots placed at quantiles of the zero-field density."""
    fractions = numbers / params.M
    zeta = params.zeta
    if params.regime == Regime.MASSLESS:
        return (zeta / np.pi) * np.arcsinh(np.tan(2 * np.pi * fractions))
    return np.array(
        [
            brentq(lambda a, f=f: _massive_cdf(a, zeta) - f, -np.pi / 2, np.pi / 2, xtol=1e-14)
            for f in fractions
        ]
    )


def _equations(alpha: np.ndarray, params: ModelParams, offsets: np.ndarray, numbers: np.ndarray):
    diff = alpha[:, None] - alpha[None, :]
    shifted = alpha[:, None] - offsets[None, :]
    residual = (
        np.sum(unwrapped_momentum(shifted, params), axis=1)
        + np.sum(unwrapped_phase(diff, params), axis=1)
        - 2 * np.pi * numbers
    )
    dtheta = -2 * np.pi * kernel_K(diff, params)
    diagonal = np.sum(p0_prime(shifted, params), axis=1) + np.sum(dtheta, axis=1) - np.diag(dtheta)
    jacobian = -dtheta
    np.fill_diagonal(jacobian, diagonal)
    return residual, jacobian


def bethe_residual(roots, params: ModelParams) -> float:
    """max_j |a/d(lam_j) prod_{k != j} b(lam_j, lam_k)/b(lam_k, lam_j) - 1|."""
    roots = np.asarray(roots, dtype=complex)
    worst = 0.0
    for j, lam in enumerate(roots):
        others = np.delete(roots, j)
        lhs = 1.0 / d_fn(lam, params)
        if len(others):
            lhs = lhs * np.prod(b_fn(lam, others, params) / b_fn(others, lam, params))
        worst = max(worst, abs(lhs - 1.0))
    return float(worst)


def solve_ground_state(
    params: ModelParams,
    quantum_numbers=None,
    max_iter: int | None = None,
    tol: float | None = None,
) -> BetheState:
    """Damped Newton solution of the logarithmic Bethe equations for ``params.N`` roots."""
    max_iter = default('bethe', 'max_iter') if max_iter is None else max_iter
    tol = default('bethe', 'tol') if tol is None else tol
    if params.M % 2:
        raise ValueError(f'Ground-state quantum numbers assume an even chain, got M={params.M}')
    numbers = (
        ground_state_quantum_numbers(params.N)
        if quantum_numbers is None
        else np.asarray(quantum_numbers, dtype=float)
    )
    offsets = real_offsets(params)
    alpha = _initial_guess(params, numbers)
    residual, jacobian = _equations(alpha, params, offsets, numbers)
    norm = np.max(np.abs(residual)) if len(alpha) else 0.0

    iteration = 0
    while norm > tol and iteration < max_iter:
        iteration += 1
        step = np.linalg.solve(jacobian, -residual)
        scale = 1.0
        while True:
            trial = alpha + scale * step
            trial_residual, trial_jacobian = _equations(trial, params, offsets, numbers)
            trial_norm = np.max(np.abs(trial_residual))
            if trial_norm < norm or scale < 2.0**-30:
                break
            scale /= 2
        alpha, residual, jacobian, norm = trial, trial_residual, trial_jacobian, trial_norm
        logger.debug('Newton iteration %d: |F| = %.3e (step scale %g)', iteration, norm, scale)

    converged = norm <= tol
    if not converged:
        logger.warning(
            'Bethe equations not converged after %d iterations (|F| = %.3e); returning best iterate',
            iteration,
            norm,
        )
    if params.regime == Regime.MASSIVE:
        alpha = np.mod(alpha + np.pi / 2, np.pi) - np.pi / 2
    roots = rapidity_from_alpha(alpha, params)
    return BetheState(
        roots=roots,
        alphas=alpha,
        quantum_numbers=numbers,
        residual=bethe_residual(roots, params) if len(roots) else 0.0,
        params=params,
        converged=converged,
        iterations=iteration,
    )


def bethe_energy(state: BetheState) -> float:
    """Energy of H - (h/2) sum sigma^z for a homogeneous Bethe state."""
    params = state.params
    if not params.homogeneous:
        raise ValueError('The energy sum rule holds for homogeneous chains only')
    alpha = alpha_from_rapidity(state.roots, params).real
    return float(-params.h * params.M / 2 + np.sum(bare_energy_eps0(alpha, params)))
