from dataclasses import dataclass, field, replace
from enum import StrEnum
import math
from pathlib import Path

import numpy as np

from .constants import ISOTROPIC_GAP
from .errors import BadDescriptor, ConfigError


class Regime(StrEnum):
    MASSLESS = 'massless'
    MASSIVE = 'massive'
    # Delta = 1: only the lattice Hamiltonian, no trigonometric parametrization
    ISOTROPIC = 'isotropic'

    @classmethod
    def from_str(cls, value: str | None, default: 'Regime') -> 'Regime':
        if not value:
            return default
        lowered = value.strip().lower()
        for option in cls:
            if option.value == lowered:
                return option
        return default

    @classmethod
    def from_delta(cls, delta: float, allow_isotropic: bool = False) -> 'Regime':
        if delta <= -1.0:
            raise ConfigError(f'Delta={delta} lies in the ferromagnetic regime, which is not supported')
        if abs(delta - 1.0) < ISOTROPIC_GAP:
            if allow_isotropic:
                return cls.ISOTROPIC
            raise ConfigError('Delta=1 (isotropic point) is not supported; use 1 - d or 1 + d')
        return cls.MASSLESS if delta < 1.0 else cls.MASSIVE


class OutputFormat(StrEnum):
    CSV = 'csv'
    JSON = 'json'

    @classmethod
    def from_str(cls, value: str | None, default: 'OutputFormat') -> 'OutputFormat':
        if not value:
            return default
        lowered = value.strip().lower()
        for option in cls:
            if option.value == lowered:
                return option
        raise ConfigError(f"Unknown output format '{value}' (expected csv or json)")


@dataclass(frozen=True)
class ModelParams:
    """Anisotropy, field and lattice of an XXZ chain.

    ``xi`` holds the M inhomogeneities; ``None`` means the homogeneous chain with every
    ``xi_k = eta/2``. ``N`` defaults to ``M // 2``. At Delta = 1 only the lattice Hamiltonian
    operations are available.
    """

    delta: float
    h: float = 0.0
    M: int = 2
    N: int | None = None
    xi: tuple[complex, ...] | None = None

    def __post_init__(self) -> None:
        isotropic = Regime.from_delta(self.delta, allow_isotropic=True) == Regime.ISOTROPIC
        if self.h < 0:
            raise ConfigError(f'Magnetic field must be non-negative, got h={self.h}')
        if self.M < 1:
            raise ConfigError(f'Chain length must be positive, got M={self.M}')
        if self.N is None:
            object.__setattr__(self, 'N', self.M // 2)
        if not 0 <= self.N <= self.M // 2:
            raise ConfigError(f'Need 0 <= N <= M/2, got N={self.N}, M={self.M}')
        if self.xi is None:
            half = 0j if isotropic else self.eta / 2
            object.__setattr__(self, 'xi', tuple([half] * self.M))
        else:
            values = tuple(complex(x) for x in self.xi)
            if len(values) != self.M:
                raise ConfigError(f'Expected {self.M} inhomogeneities, got {len(values)}')
            object.__setattr__(self, 'xi', values)

    @property
    def regime(self) -> Regime:
        return Regime.from_delta(self.delta, allow_isotropic=True)

    @property
    def zeta(self) -> float:
        if self.regime == Regime.ISOTROPIC:
            raise ConfigError('Delta=1 has no anisotropy parameter; only the lattice Hamiltonian is available')
        if self.regime == Regime.MASSLESS:
            return math.acos(self.delta)
        return math.acosh(self.delta)

    @property
    def eta(self) -> complex:
        if self.regime == Regime.MASSLESS:
            return -1j * self.zeta
        return complex(-self.zeta)

    @property
    def q(self) -> float:
        """Nome of the massive-regime theta functions."""
        if self.regime != Regime.MASSIVE:
            raise ConfigError('The nome is only defined in the massive regime')
        return math.exp(-self.zeta)

    @property
    def homogeneous(self) -> bool:
        half = self.eta / 2
        return all(abs(x - half) < 1e-15 for x in self.xi)

    @property
    def xi_array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=complex)

    def with_field(self, h: float) -> 'ModelParams':
        return replace(self, h=h)

    def with_chain(self, M: int, N: int | None = None, xi=None) -> 'ModelParams':
        return replace(self, M=M, N=N, xi=None if xi is None else tuple(xi))


@dataclass
class BetheState:
    roots: np.ndarray
    alphas: np.ndarray
    quantum_numbers: np.ndarray
    residual: float
    params: ModelParams
    converged: bool = True
    iterations: int = 0

    @property
    def N(self) -> int:
        return len(self.roots)


class SegmentKind(StrEnum):
    GAUSS = 'gauss'
    LINE = 'line'
    PERIODIC = 'periodic'
    CIRCLE = 'circle'
    COMPOSITE = 'composite'


@dataclass(frozen=True)
class SegmentDescriptor:
    kind: SegmentKind
    start: float = -1.0
    end: float = 1.0
    shift: complex = 0j
    center: complex = 0j
    radius: float = 0.0

    def validate(self) -> None:
        if self.kind == SegmentKind.CIRCLE:
            if self.radius <= 0:
                raise BadDescriptor(f'Circle radius must be positive, got {self.radius}')
            return
        if self.kind == SegmentKind.COMPOSITE:
            raise BadDescriptor('Composite segments are built by concatenating rules')
        if not (math.isfinite(self.start) and math.isfinite(self.end)) or self.end <= self.start:
            raise BadDescriptor(f'Invalid segment [{self.start}, {self.end}]')


@dataclass(frozen=True)
class QuadRule:
    nodes: np.ndarray
    weights: np.ndarray
    descriptor: SegmentDescriptor
    parts: tuple['QuadRule', ...] = ()

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))


@dataclass(frozen=True)
class DensityProfile:
    """Ground-state rapidity density on a Nystrom grid.

    ``rho_b[:, b-1]`` holds the derivative density family at the nodes; column 0 solves the same
    equation as ``rho``. ``field_active`` is False when the field does not change the ground state.
    """

    params: ModelParams
    grid: QuadRule
    rho: np.ndarray
    lambda_F: float
    rho_b: np.ndarray
    eps: np.ndarray | None = None
    field_active: bool = False

    @property
    def m_max(self) -> int:
        return self.rho_b.shape[1] if self.rho_b.ndim == 2 else 0

    @property
    def filling(self) -> float:
        """Number of down spins per site, the integral of the density."""
        if len(self.grid) == 0:
            return 0.0
        return float(np.real(np.sum(self.grid.weights * self.rho)))

    @property
    def magnetization(self) -> float:
        return 1.0 - 2.0 * self.filling


@dataclass(frozen=True)
class CorrelatorSpec:
    """Ordered list of (epsilon_j, epsilon'_j) for the block <E^{e'_1 e_1}_1 ... E^{e'_m e_m}_m>."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        for eps, eps_prime in pairs:
            if eps not in (1, 2) or eps_prime not in (1, 2):
                raise ConfigError(f'Matrix-unit labels must be 1 or 2, got ({eps}, {eps_prime})')
        object.__setattr__(self, 'pairs', pairs)

    @classmethod
    def efp(cls, m: int) -> 'CorrelatorSpec':
        return cls(tuple([(2, 2)] * m))

    @classmethod
    def parse(cls, text: str) -> 'CorrelatorSpec':
        """Parse ``"22,11,21"`` into pairs (epsilon_j, epsilon'_j)."""
        pairs = []
        for token in text.split(','):
            token = token.strip()
            if len(token) != 2 or not token.isdigit():
                raise ConfigError(f"Cannot parse matrix-unit pair '{token}'")
            pairs.append((int(token[0]), int(token[1])))
        return cls(tuple(pairs))

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def alpha_plus(self) -> tuple[int, ...]:
        return tuple(j for j, (eps, _) in enumerate(self.pairs, start=1) if eps == 1)

    @property
    def alpha_minus(self) -> tuple[int, ...]:
        return tuple(j for j, (_, eps_prime) in enumerate(self.pairs, start=1) if eps_prime == 2)

    @property
    def s(self) -> int:
        return len(self.alpha_minus)

    @property
    def s_prime(self) -> int:
        return len(self.alpha_plus)

    @property
    def balanced(self) -> bool:
        return self.s + self.s_prime == self.m

    @property
    def variables(self) -> tuple[tuple[int, bool], ...]:
        """Integration variables as (site, on_shifted_contour), mu' sites descending then mu ascending."""
        plus = [(j, True) for j in sorted(self.alpha_plus, reverse=True)]
        minus = [(j, False) for j in sorted(self.alpha_minus)]
        return tuple(plus + minus)

    @property
    def label(self) -> str:
        return ','.join(f'{eps}{eps_prime}' for eps, eps_prime in self.pairs)

    def extend(self, pair: tuple[int, int]) -> 'CorrelatorSpec':
        return CorrelatorSpec(self.pairs + (pair,))


@dataclass(frozen=True)
class CorrelatorResult:
    value: complex
    err_est: float
    n_points: int
    label: str = ''


@dataclass
class RunConfig:
    command: str
    delta: float = 0.5
    h: float = 0.0
    m: int = 1
    kind: str = 'zz'
    distance: int = 1
    suite: str = 'all'
    points: int = 201
    grid: int = 120
    lieb_grid: int = 256
    circle_points: int = 64
    tail_tol: float = 1e-14
    dimension_cap: int = 4
    chain_cap: int = 12
    threads: int = 1
    output_format: OutputFormat = OutputFormat.CSV
    out: Path | None = None
    seed: int = 7
    notices: list[str] = field(default_factory=list)

    def model(self) -> ModelParams:
        return ModelParams(delta=self.delta, h=self.h)
