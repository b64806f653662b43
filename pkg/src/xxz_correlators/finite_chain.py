"""Exact finite-lattice algebra for the inhomogeneous XXZ chain.

Basis states are integers whose bit ``k - 1`` is set when site ``k`` carries a down spin, so
``0`` is the reference state with all spins up. Operators are scipy sparse matrices; dual
(bra) vectors are plain arrays multiplied from the right, ``bra @ X == X.T @ bra``.
"""

from dataclasses import dataclass, field
import logging
import warnings

import numpy as np
from scipy import sparse
from scipy.linalg import eigh

from .errors import DegeneracyWarning, SizeError
from .loader import default
from .model_core import a_fn, b_fn, c_fn, d_fn
from .models import ModelParams, Regime

logger = logging.getLogger(__name__)

SpinOperator = sparse.csr_matrix


def check_size(M: int, cap: int | None = None) -> None:
    limit = default('numerics', 'chain_cap') if cap is None else cap
    if M > limit:
        raise SizeError(f'M={M} exceeds the dense-algebra cap of {limit} sites')


def _down_bits(M: int, site: int) -> np.ndarray:
    return (np.arange(1 << M) >> (site - 1)) & 1


def identity(M: int) -> SpinOperator:
    return sparse.identity(1 << M, dtype=complex, format='csr')


def elementary(M: int, site: int, eps_prime: int, eps: int) -> SpinOperator:
    """Matrix unit E^{eps' eps} = |eps'><eps| acting on ``site``; 1 is up, 2 is down."""
    dim = 1 << M
    states = np.arange(dim)
    mask = 1 << (site - 1)
    bits = _down_bits(M, site)
    source = states[bits == eps - 1]
    if eps_prime == eps:
        target = source
    elif eps_prime == 2:
        target = source | mask
    else:
        target = source & ~mask
    data = np.ones(len(source), dtype=complex)
    return sparse.csr_matrix((data, (target, source)), shape=(dim, dim))


def spin_operator(M: int, site: int, kind: str) -> SpinOperator:
    """Pauli-type operator: '+', '-', 'z', 'x', 'y' or 'id'."""
    if kind == '+':
        return elementary(M, site, 1, 2)
    if kind == '-':
        return elementary(M, site, 2, 1)
    if kind == 'z':
        return (elementary(M, site, 1, 1) - elementary(M, site, 2, 2)).tocsr()
    if kind == 'x':
        return (elementary(M, site, 1, 2) + elementary(M, site, 2, 1)).tocsr()
    if kind == 'y':
        return (-1j * elementary(M, site, 1, 2) + 1j * elementary(M, site, 2, 1)).tocsr()
    if kind == 'id':
        return identity(M)
    raise ValueError(f"Unknown spin operator kind '{kind}'")


@dataclass
class MonodromyBlocks:
    """Operator entries of T(lam) = L_M(lam) ... L_1(lam) in auxiliary space."""

    A: SpinOperator
    B: SpinOperator
    C: SpinOperator
    D: SpinOperator
    lam: complex
    params: ModelParams

    @property
    def transfer(self) -> SpinOperator:
        return (self.A + self.D).tocsr()

    def entry(self, eps: int, eps_prime: int) -> SpinOperator:
        """T_{eps eps'}: A, B, C, D for (1,1), (1,2), (2,1), (2,2)."""
        return {(1, 1): self.A, (1, 2): self.B, (2, 1): self.C, (2, 2): self.D}[(eps, eps_prime)]


def _local_blocks(params: ModelParams, lam: complex, site: int) -> list[list[SpinOperator]]:
    M = params.M
    xi = params.xi[site - 1]
    b = complex(b_fn(lam, xi, params))
    c = complex(c_fn(lam, xi, params))
    down = _down_bits(M, site)
    upper = sparse.diags(np.where(down, b, 1.0).astype(complex), format='csr')
    lower = sparse.diags(np.where(down, 1.0, b).astype(complex), format='csr')
    return [
        [upper, c * elementary(M, site, 2, 1)],
        [c * elementary(M, site, 1, 2), lower],
    ]


def build_monodromy(params: ModelParams, lam: complex, cap: int | None = None) -> MonodromyBlocks:
    check_size(params.M, cap)
    blocks = _local_blocks(params, lam, 1)
    for site in range(2, params.M + 1):
        local = _local_blocks(params, lam, site)
        blocks = [
            [
                (local[row][0] @ blocks[0][col] + local[row][1] @ blocks[1][col]).tocsr()
                for col in range(2)
            ]
            for row in range(2)
        ]
    return MonodromyBlocks(
        A=blocks[0][0], B=blocks[0][1], C=blocks[1][0], D=blocks[1][1], lam=lam, params=params
    )


def _reconstruction_kernel(blocks: MonodromyBlocks, kind) -> SpinOperator:
    if kind == '-':
        return blocks.B
    if kind == '+':
        return blocks.C
    if kind == 'z':
        return (blocks.A - blocks.D).tocsr()
    eps_prime, eps = kind
    return blocks.entry(eps, eps_prime)


def qisp_reconstruct(params: ModelParams, site: int, kind, cap: int | None = None) -> SpinOperator:
    """Local operator at ``site`` rebuilt from monodromy entries at the inhomogeneities.

    ``kind`` is '-', '+', 'z' or a pair (eps', eps) for E^{eps' eps}.
    """
    check_size(params.M, cap)
    result = identity(params.M)
    for alpha in range(1, params.M + 1):
        blocks = build_monodromy(params, params.xi[alpha - 1], cap)
        factor = _reconstruction_kernel(blocks, kind) if alpha == site else blocks.transfer
        result = (result @ factor).tocsr()
    return result


def sector_basis(M: int, N: int) -> np.ndarray:
    states = np.arange(1 << M)
    counts = np.array([bin(int(s)).count('1') for s in states])
    return states[counts == N]


def hamiltonian_sector(params: ModelParams, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense H - (h/2) sum sigma^z restricted to N down spins, with its basis.

    H = sum_m [sx sx + sy sy + Delta (sz sz - 1)] on the periodic chain.
    """
    M = params.M
    check_size(M)
    basis = sector_basis(M, N)
    matrix = np.zeros((len(basis), len(basis)))
    for i in range(M):
        j = (i + 1) % M
        differ = ((basis >> i) & 1) != ((basis >> j) & 1)
        matrix[np.diag_indices(len(basis))] += np.where(differ, -2.0 * params.delta, 0.0)
        flipped = basis[differ] ^ ((1 << i) | (1 << j))
        matrix[np.searchsorted(basis, flipped), np.nonzero(differ)[0]] += 2.0
    matrix[np.diag_indices(len(basis))] += -params.h / 2 * (M - 2 * N)
    return matrix, basis


def _embed(vector: np.ndarray, basis: np.ndarray, M: int) -> np.ndarray:
    full = np.zeros(1 << M, dtype=complex)
    full[basis] = vector
    return full


def lowest_levels(params: ModelParams, N: int, k: int = 2) -> tuple[np.ndarray, list[np.ndarray]]:
    """The k lowest eigenpairs in the N-down-spin sector, vectors embedded in the full space."""
    matrix, basis = hamiltonian_sector(params, N)
    k = min(k, len(basis))
    energies, vectors = eigh(matrix, subset_by_index=[0, k - 1])
    return energies, [_embed(vectors[:, i], basis, params.M) for i in range(k)]


@dataclass
class GroundState:
    energy: float
    vector: np.ndarray
    N: int
    gap: float = float('inf')
    partner: np.ndarray | None = field(default=None, repr=False)


def exact_ground_state(params: ModelParams) -> GroundState:
    """Lowest eigenpair; at h = 0 in the S^z = 0 sector, otherwise over all sectors N <= M/2."""
    M = params.M
    check_size(M)
    sectors = [M // 2] if params.h == 0 else list(range(M // 2 + 1))
    candidates = []
    for N in sectors:
        energies, vectors = lowest_levels(params, N, k=2)
        candidates.append((energies, vectors, N))
    candidates.sort(key=lambda item: item[0][0])
    energies, vectors, N = candidates[0]

    tol = default('finite', 'degeneracy_tol')
    scale = max(1.0, abs(energies[0]))
    if len(candidates) > 1 and abs(candidates[1][0][0] - energies[0]) < tol * scale:
        warnings.warn(
            f'Sectors N={N} and N={candidates[1][2]} are degenerate within {tol:g}',
            DegeneracyWarning,
            stacklevel=2,
        )
    gap = float(energies[1] - energies[0]) if len(energies) > 1 else float('inf')
    if params.regime == Regime.MASSIVE and gap < tol * scale:
        warnings.warn(
            f'Two lowest levels in sector N={N} are split by only {gap:.3e}',
            DegeneracyWarning,
            stacklevel=2,
        )
    logger.debug('Exact ground state M=%d: E=%.12g in sector N=%d (gap %.3e)', M, energies[0], N, gap)
    return GroundState(
        energy=float(energies[0]),
        vector=vectors[0],
        N=N,
        gap=gap,
        partner=vectors[1] if len(vectors) > 1 else None,
    )


def expectation(vector: np.ndarray, operator: SpinOperator) -> complex:
    return complex(np.vdot(vector, operator @ vector) / np.vdot(vector, vector))


def ground_state_average(params: ModelParams, operator: SpinOperator) -> float:
    """Ground-state expectation; at Delta > 1 the average over the two lowest states."""
    state = exact_ground_state(params)
    value = expectation(state.vector, operator)
    if params.regime == Regime.MASSIVE and state.partner is not None:
        value = (value + expectation(state.partner, operator)) / 2
    return float(value.real)


def magnetization(vector: np.ndarray, M: int) -> float:
    """Site-averaged <sigma^z>."""
    down = np.array([bin(s).count('1') for s in range(1 << M)])
    weights = np.abs(vector) ** 2
    return float(np.sum(weights * (M - 2 * down)) / (M * np.sum(weights)))


def vacuum(M: int) -> np.ndarray:
    state = np.zeros(1 << M, dtype=complex)
    state[0] = 1.0
    return state


def bethe_vector(params: ModelParams, roots) -> np.ndarray:
    """prod_j B(lam_j) |0>."""
    ket = vacuum(params.M)
    for lam in roots:
        ket = build_monodromy(params, lam).B @ ket
    return ket


def dual_bethe_vector(params: ModelParams, roots) -> np.ndarray:
    """<0| prod_j C(lam_j) as a row vector."""
    bra = vacuum(params.M)
    for lam in roots:
        bra = build_monodromy(params, lam).C.T @ bra
    return bra


def dense_block(params: ModelParams, pairs, bra: np.ndarray, ket: np.ndarray) -> complex:
    """<bra| E^{e'_1 e_1}_1 ... E^{e'_m e_m}_m |ket> / <bra|ket> for pairs (e_j, e'_j)."""
    vector = ket
    for site in range(len(pairs), 0, -1):
        eps, eps_prime = pairs[site - 1]
        vector = elementary(params.M, site, eps_prime, eps) @ vector
    return complex((bra @ vector) / (bra @ ket))


def _sinh_prod(values) -> complex:
    return complex(np.prod(np.sinh(np.asarray(values, dtype=complex))))


def apply_entry_to_dual(
    params: ModelParams,
    entry: tuple[int, int],
    new: int,
    terms: dict[frozenset[int], complex],
    spectral: np.ndarray,
    at_inhomogeneity: bool = False,
) -> dict[frozenset[int], complex]:
    """Act with T_{entry}(spectral[new]) from the right on sum_S coeff <0| prod_{k in S} C(spectral[k]).

    The result is again a combination of dual states labelled by index sets. With
    ``at_inhomogeneity`` the B action uses the reduced sum valid when d(spectral[new]) = 0.
    """
    eta = params.eta
    lam = np.asarray(spectral, dtype=complex)
    result: dict[frozenset[int], complex] = {}

    def add(key: frozenset[int], value: complex) -> None:
        result[key] = result.get(key, 0j) + value

    for subset, coeff in terms.items():
        members = sorted(subset)
        extended = members + [new]
        if entry == (2, 1):
            add(frozenset(extended), coeff)
        elif entry == (1, 1):
            for a_prime in extended:
                rest = [k for k in extended if k != a_prime]
                value = complex(a_fn(lam[a_prime]))
                value *= _sinh_prod(lam[members] - lam[a_prime] + eta)
                value /= _sinh_prod(lam[rest] - lam[a_prime])
                add(frozenset(rest), coeff * value)
        elif entry == (2, 2):
            for a in extended:
                rest = [k for k in extended if k != a]
                value = complex(d_fn(lam[a], params))
                if value == 0:
                    continue
                value *= _sinh_prod(lam[a] - lam[members] + eta)
                value /= _sinh_prod(lam[a] - lam[rest])
                add(frozenset(rest), coeff * value)
        elif entry == (1, 2):
            outer = members if at_inhomogeneity else extended
            for a in outer:
                d_value = complex(d_fn(lam[a], params))
                if d_value == 0:
                    continue
                not_a = [k for k in extended if k != a]
                first = d_value * _sinh_prod(lam[a] - lam[members] + eta)
                first /= _sinh_prod(lam[a] - lam[not_a])
                for a_prime in not_a:
                    rest = [k for k in not_a if k != a_prime]
                    value = complex(a_fn(lam[a_prime]))
                    if at_inhomogeneity:
                        value *= _sinh_prod(lam[[k for k in members if k != a]] - lam[a_prime] + eta)
                    else:
                        value *= _sinh_prod(lam[not_a] - lam[a_prime] + eta)
                        value /= np.sinh(lam[new] - lam[a_prime] + eta)
                    value /= _sinh_prod(lam[rest] - lam[a_prime])
                    add(frozenset(rest), coeff * first * value)
        else:
            raise ValueError(f'Unknown monodromy entry {entry}')
    return result


def dual_from_terms(params: ModelParams, terms: dict[frozenset[int], complex], spectral) -> np.ndarray:
    bra = np.zeros(1 << params.M, dtype=complex)
    for subset, coeff in terms.items():
        bra = bra + coeff * dual_bethe_vector(params, [spectral[k] for k in sorted(subset)])
    return bra


@dataclass
class ActionReport:
    deviations: dict[str, float] = field(default_factory=dict)
    draws: int = 0

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    def record(self, name: str, value: float) -> None:
        self.deviations[name] = max(self.deviations.get(name, 0.0), value)


def _random_spectral(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.uniform(-0.8, 0.8, size) + 1j * rng.uniform(-0.4, 0.4, size)


def verify_action_formulas(
    params: ModelParams, rng: np.random.Generator, n_draws: int = 20, max_N: int = 3
) -> ActionReport:
    """Compare the explicit action sums with dense products on random dual states."""
    report = ActionReport()
    names = {(1, 1): 'A', (1, 2): 'B', (2, 1): 'C', (2, 2): 'D'}
    for _ in range(n_draws):
        N = int(rng.integers(0, min(max_N, params.M - 1) + 1))
        spectral = _random_spectral(rng, N + 1)
        start = {frozenset(range(N)): 1.0 + 0j}
        bra = dual_bethe_vector(params, spectral[:N])
        blocks = build_monodromy(params, spectral[N])
        for entry, name in names.items():
            lhs = blocks.entry(*entry).T @ bra
            rhs = dual_from_terms(
                params, apply_entry_to_dual(params, entry, N, start, spectral), spectral
            )
            scale = max(1.0, float(np.max(np.abs(lhs))))
            report.record(name, float(np.max(np.abs(lhs - rhs))) / scale)

        site = int(rng.integers(1, params.M + 1))
        spectral = spectral.copy()
        spectral[N] = params.xi[site - 1]
        lhs = build_monodromy(params, spectral[N]).B.T @ bra
        for reduced, name in ((False, 'B(xi) full'), (True, 'B(xi) reduced')):
            terms = apply_entry_to_dual(params, (1, 2), N, start, spectral, at_inhomogeneity=reduced)
            rhs = dual_from_terms(params, terms, spectral)
            scale = max(1.0, float(np.max(np.abs(lhs))))
            report.record(name, float(np.max(np.abs(lhs - rhs))) / scale)
        report.draws += 1
    return report


_KERNEL_OF_KIND = {'-': '-', '+': '+', 'z': 'z'}


def reduced_sandwich(
    params: ModelParams, mu, lam, operators: list[tuple[int, str]]
) -> tuple[complex, complex]:
    """<psi(mu)| sigma_{i1} ... sigma_{ik} |psi(lam)> through monodromy entries, and directly.

    ``operators`` lists (site, kind) with increasing sites and kinds '-', '+', 'z'; both mu and
    lam must solve the Bethe equations. Returns (reduced, direct).
    """
    sites = [site for site, _ in operators]
    if sites != sorted(set(sites)):
        raise ValueError('Operator sites must be strictly increasing')
    M = params.M
    bra = dual_bethe_vector(params, mu)
    ket = bethe_vector(params, lam)
    xi = params.xi_array

    prefactor = 1.0 + 0j
    for alpha in range(1, sites[0]):
        prefactor /= complex(np.prod(b_fn(np.asarray(mu), xi[alpha - 1], params)))
    for alpha in range(sites[-1] + 1, M + 1):
        prefactor /= complex(np.prod(b_fn(np.asarray(lam), xi[alpha - 1], params)))

    kinds = dict(operators)
    middle = identity(M)
    for alpha in range(sites[0], sites[-1] + 1):
        blocks = build_monodromy(params, xi[alpha - 1])
        factor = (
            _reconstruction_kernel(blocks, _KERNEL_OF_KIND[kinds[alpha]])
            if alpha in kinds
            else blocks.transfer
        )
        middle = (middle @ factor).tocsr()
    reduced = prefactor * complex(bra @ (middle @ ket))

    direct_op = identity(M)
    for site, kind in operators:
        direct_op = (direct_op @ spin_operator(M, site, kind)).tocsr()
    direct = complex(bra @ (direct_op @ ket))
    return reduced, direct
