#
# For licensing see accompanying LICENSE file.
#

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigvalsh

from qme.cfg.constants import EIGENVALUE_FLOOR, HERMITIAN_TOL, TRACE_TOL, UNITARY_TOL


def is_square(a: npt.NDArray) -> bool:
    return a.ndim == 2 and a.shape[0] == a.shape[1]


def is_hermitian(a: npt.NDArray, tol: float = HERMITIAN_TOL) -> bool:
    return is_square(a) and bool(np.max(np.abs(a - a.conj().T), initial=0.0) < tol)


def is_unitary(a: npt.NDArray, tol: float = UNITARY_TOL) -> bool:
    if not is_square(a):
        return False
    residual = a.conj().T @ a - np.eye(a.shape[0])
    return bool(np.max(np.abs(residual)) < tol)


def is_density_matrix(a: npt.NDArray, tol: float = TRACE_TOL) -> bool:
    if not is_hermitian(a):
        return False
    if abs(np.trace(a) - 1.0) >= tol:
        return False
    return bool(eigvalsh(a).min() >= EIGENVALUE_FLOOR)
