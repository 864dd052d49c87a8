#
# For licensing see accompanying LICENSE file.
#

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np
import numpy.typing as npt

from qme.cfg.constants import NULL_BRANCH_PROBABILITY
from qme.errors import BadSite, BadStrength, ValidationError
from qme.linalg import embed_site, identity, is_density_matrix, n_sites_of, pauli


@dataclass(frozen=True)
class DetectorSpec:
    site: int
    kappa: float

    def __post_init__(self):
        if isinstance(self.site, bool) or int(self.site) != self.site or self.site < 1:
            raise BadSite(f'Detector site must be a positive integer, got {self.site!r}')
        kappa = float(self.kappa)
        if not np.isfinite(kappa) or not 0.0 <= kappa <= 1.0:
            raise BadStrength(f'Measurement strength must lie in [0, 1], got {self.kappa!r}')
        object.__setattr__(self, 'site', int(self.site))
        object.__setattr__(self, 'kappa', kappa)


@dataclass(frozen=True, eq=False)
class MeasurementBranch:
    """ One outcome history; ``state`` is None when the outcome has (numerically) zero probability """
    label: str
    probability: float
    state: Optional[npt.NDArray[np.complex128]]
    operator: npt.NDArray[np.complex128] = field(repr=False)

    @property
    def is_null(self):
        return self.state is None


def kraus_pair(det, n_sites):
    root_k, root_c = np.sqrt(det.kappa), np.sqrt(1.0 - det.kappa)
    even = 0.5 * (root_k + root_c)
    odd = 0.5 * (root_k - root_c)
    sx = embed_site(pauli('x'), det.site, n_sites)
    eye = identity(n_sites)
    return even * eye + odd * sx, even * eye - odd * sx


def measure(rho, detectors, check=True):
    """ Branches of sequential measurements, detector 1 applied first.

    Outcome labels read left to right in detector order; the composite
    operator of a branch is M_m ... M_1.
    """
    n_sites = n_sites_of(rho)
    if check and not is_density_matrix(rho):
        raise ValidationError('rho', 'input is not a valid density matrix')
    pairs = [kraus_pair(det, n_sites) for det in detectors]

    branches = []
    for outcome in product((0, 1), repeat=len(pairs)):
        operator = identity(n_sites)
        for pair, sign in zip(pairs, outcome):
            operator = pair[sign] @ operator
        unnormalized = operator @ rho @ operator.conj().T
        probability = min(max(float(np.trace(unnormalized).real), 0.0), 1.0)
        label = ''.join('+-'[sign] for sign in outcome)
        if probability < NULL_BRANCH_PROBABILITY:
            state = None
        else:
            state = unnormalized / probability
            state = 0.5 * (state + state.conj().T)
        branches.append(MeasurementBranch(label, probability, state, operator))
    return branches


def unconditional_state(rho, detectors):
    """ Ensemble state sum_k M_k rho M_k^dagger """
    branches = measure(rho, detectors, check=False)
    return sum(b.operator @ rho @ b.operator.conj().T for b in branches)


def select_branch(branches, label):
    for branch in branches:
        if branch.label == label:
            return branch
    raise ValidationError('branch', f'no branch labelled {label!r} among {[b.label for b in branches]}')
