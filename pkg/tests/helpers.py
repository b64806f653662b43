import numpy as np

from xxz_correlators.models import ModelParams, Regime


def inhomogeneous_chain(delta: float, M: int, spread: float = 0.15) -> ModelParams:
    """Chain whose inhomogeneities sit on the line of the homogeneous value, pairwise distinct."""
    base = ModelParams(delta=delta, M=M)
    offsets = spread * np.linspace(-1.0, 1.0, M)
    if base.regime == Regime.MASSLESS:
        xi = [base.eta / 2 + x for x in offsets]
    else:
        xi = [base.eta / 2 - 1j * x for x in offsets]
    return base.with_chain(M, xi=xi)


def rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)
