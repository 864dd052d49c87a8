#
# For licensing see accompanying LICENSE file.
#

import dataclasses
from dataclasses import dataclass
from functools import lru_cache
from collections.abc import Mapping

import numpy as np

from qme.errors import ValidationError
from qme.linalg import check_sites, hermitian_eig, z_signs


def _normalize_coupling(coupling, n_sites):
    if coupling is None:
        return ()
    if isinstance(coupling, Mapping):
        coupling = [(j, k, value) for (j, k), value in coupling.items()]

    triples = []
    seen = set()
    for i, item in enumerate(coupling):
        field = f'system.coupling[{i}]'
        try:
            j, k, value = item
            j, k, value = int(j), int(k), float(value)
        except (TypeError, ValueError):
            raise ValidationError(field, f'expected a [j, k, value] triple, got {item!r}') from None
        if not 1 <= j < k <= n_sites:
            raise ValidationError(field, f'coupling key ({j},{k}) must satisfy 1 <= j < k <= {n_sites}')
        if not np.isfinite(value):
            raise ValidationError(field, 'coupling must be finite')
        if (j, k) in seen:
            raise ValidationError(field, f'duplicate coupling key ({j},{k})')
        seen.add((j, k))
        triples.append((j, k, value))
    return tuple(sorted(triples))


@dataclass(frozen=True)
class SystemSpec:
    """ N Ising-coupled two-level systems at inverse temperature ``beta``.

    ``coupling`` holds ``(j, k, delta_zz)`` triples with 1-based sites and
    ``j < k``; a mapping ``{(j, k): value}`` is accepted as well.
    """
    n_sites: int
    epsilon: tuple
    coupling: tuple = ()
    beta: float = 1.0

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValidationError('system.n_sites', f'must be a positive integer, got {self.n_sites!r}')
        object.__setattr__(self, 'n_sites', int(self.n_sites))
        check_sites(self.n_sites)

        epsilon = tuple(float(e) for e in np.atleast_1d(np.asarray(self.epsilon, dtype=float)))
        if len(epsilon) != self.n_sites:
            raise ValidationError('system.epsilon', f'expected {self.n_sites} on-site energies, got {len(epsilon)}')
        if not np.all(np.isfinite(epsilon)):
            raise ValidationError('system.epsilon', 'on-site energies must be finite')
        object.__setattr__(self, 'epsilon', epsilon)
        object.__setattr__(self, 'coupling', _normalize_coupling(self.coupling, self.n_sites))

        beta = float(self.beta)
        if not np.isfinite(beta) or beta <= 0:
            raise ValidationError('system.beta', f'must be positive and finite, got {self.beta!r}')
        object.__setattr__(self, 'beta', beta)

    @classmethod
    def two_qubit(cls, epsilon, delta=0.0, beta=1.0):
        return cls(2, tuple(epsilon), ((1, 2, delta),), beta)

    @property
    def temperature(self):
        return 1.0 / self.beta

    def coupling_matrix(self):
        """ Symmetric N x N matrix of delta_zz with zero diagonal """
        matrix = np.zeros((self.n_sites, self.n_sites))
        for j, k, value in self.coupling:
            matrix[j - 1, k - 1] = value
            matrix[k - 1, j - 1] = value
        return matrix

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_epsilon(self, epsilon):
        return self.replace(epsilon=tuple(epsilon))

    def with_beta(self, beta):
        return self.replace(beta=beta)


def hamiltonian_diagonal(spec):
    signs = z_signs(spec.n_sites)
    eps = np.asarray(spec.epsilon)
    energies = 0.5 + 0.5 * eps @ signs
    for j, k, value in spec.coupling:
        energies = energies + value * signs[j - 1] * signs[k - 1]
    return energies


@lru_cache(maxsize=64)
def _cached_diagonal(spec):
    energies = hamiltonian_diagonal(spec)
    energies.setflags(write=False)
    return energies


@lru_cache(maxsize=64)
def thermal_populations(spec):
    """ Boltzmann weights of the computational basis states, normalised """
    energies = _cached_diagonal(spec)
    weights = np.exp(-spec.beta * (energies - energies.min()))
    populations = weights / weights.sum()
    populations.setflags(write=False)
    return populations


def _read_only_diag(values):
    matrix = np.diag(values).astype(complex)
    matrix.setflags(write=False)
    return matrix


# only the diagonals are cached; a dense 2^N x 2^N copy is built per call
def build_hamiltonian(spec):
    """ H_S = 1/2 I + sum_j eps_j/2 sz_j + sum_{j<k} delta_jk sz_j sz_k (diagonal) """
    return _read_only_diag(_cached_diagonal(spec))


def thermal_state(spec):
    return _read_only_diag(thermal_populations(spec))


def exchange_classes(spec, tol=1e-12):
    """ Group sites whose transposition leaves eps and the coupling matrix invariant """
    n = spec.n_sites
    eps = np.asarray(spec.epsilon)
    coupling = spec.coupling_matrix()
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eps[i] - eps[j]) > tol:
                continue
            others = [k for k in range(n) if k not in (i, j)]
            if np.all(np.abs(coupling[i, others] - coupling[j, others]) <= tol):
                parent[find(j)] = find(i)

    classes = {}
    for i in range(n):
        classes.setdefault(find(i), []).append(i)
    return [members for _, members in sorted(classes.items())]


def energy_levels(spec):
    """ Distinct levels of H_S, with basis states related by site exchange merged into one level """
    diagonal = hamiltonian_diagonal(spec)
    bits = (1 - z_signs(spec.n_sites)) // 2
    signature = np.stack([bits[members].sum(axis=0) for members in exchange_classes(spec)], axis=1)
    levels = {}
    for row, value in zip(map(tuple, signature), diagonal):
        levels.setdefault(row, value)
    return np.sort(np.fromiter(levels.values(), dtype=float))


def spectrum_and_gap(spec):
    eigenvalues = hermitian_eig(build_hamiltonian(spec), check=False).eigenvalues
    levels = energy_levels(spec)
    gap = float(levels[1] - levels[0]) if levels.size > 1 else 0.0
    return eigenvalues, gap


def two_qubit_gap(epsilon, delta):
    """ Gap of the two-site H_S from its labelled energies E_00, E_01, E_10, E_11 """
    e1, e2 = epsilon
    e00 = 0.5 + 0.5 * (e1 + e2) + delta
    e01 = 0.5 + 0.5 * (e1 - e2) - delta
    e10 = 0.5 - 0.5 * (e1 - e2) - delta
    e11 = 0.5 - 0.5 * (e1 + e2) + delta
    levels = [e00, e01, e11] if e1 == e2 else [e00, e01, e10, e11]
    levels = sorted(levels)
    return levels[1] - levels[0]
