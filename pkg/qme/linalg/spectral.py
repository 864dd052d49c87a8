#
# For licensing see accompanying LICENSE file.
#

from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigh

from qme.errors import DomainError, NotHermitian
from qme.linalg.checks import is_hermitian


class EigenDecomposition(NamedTuple):
    eigenvalues: npt.NDArray[np.float64]
    eigenvectors: npt.NDArray[np.complex128]

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(a, check=True):
    """ Ascending eigendecomposition of a Hermitian matrix """
    if check and not is_hermitian(a):
        raise NotHermitian('Eigendecomposition needs a Hermitian matrix')
    eigenvalues, eigenvectors = eigh(a)
    return EigenDecomposition(np.asarray(eigenvalues, dtype=float), np.asarray(eigenvectors, dtype=complex))


def matrix_function(a, f, check=True):
    """ V f(L) V^dagger for Hermitian ``a``; ``f`` maps real eigenvalues to reals """
    decomposition = hermitian_eig(a, check=check)
    with np.errstate(all='ignore'):
        values = np.asarray(f(decomposition.eigenvalues), dtype=float)
    if values.shape != decomposition.eigenvalues.shape:
        values = np.broadcast_to(values, decomposition.eigenvalues.shape)
    if not np.all(np.isfinite(values)):
        bad = decomposition.eigenvalues[~np.isfinite(values)]
        raise DomainError(f'Function undefined at eigenvalue(s) {bad.tolist()}')
    v = decomposition.eigenvectors
    return (v * values) @ v.conj().T
