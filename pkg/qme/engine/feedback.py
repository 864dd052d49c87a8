#
# For licensing see accompanying LICENSE file.
#

import numpy as np

from qme.errors import ShapeMismatch, UnsupportedSize
from qme.linalg import check_sites, kron_all, pauli


def local_rotation(theta):
    """ exp(-i theta sy / 2) = cos(theta/2) I - i sin(theta/2) sy """
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def local_feedback_unitary(theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    check_sites(theta.size)
    return kron_all([local_rotation(t) for t in theta])


def global_feedback_unitary(theta, n_sites=2):
    """ cos(theta) I - i sin(theta) sy (x) sy on a two-site register """
    if n_sites != 2:
        raise UnsupportedSize(f'Global feedback is defined for two sites, got {n_sites}')
    theta = float(np.asarray(theta, dtype=float).reshape(-1)[0])
    sy_sy = np.kron(pauli('y'), pauli('y'))
    return np.cos(theta) * np.eye(4, dtype=complex) - 1j * np.sin(theta) * sy_sy


def feedback_unitary(theta, mode, n_sites):
    if mode == 'local':
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.size != n_sites:
            raise ShapeMismatch(f'Expected {n_sites} feedback angles, got {theta.size}')
        return local_feedback_unitary(theta)
    elif mode == 'global':
        return global_feedback_unitary(theta, n_sites)
    raise ValueError(f'Unknown feedback mode {mode!r}')


def apply_feedback(rho, u):
    if rho.shape != u.shape:
        raise ShapeMismatch(f'State {rho.shape} and unitary {u.shape} differ in shape')
    rho_f = u @ rho @ u.conj().T
    return 0.5 * (rho_f + rho_f.conj().T)
