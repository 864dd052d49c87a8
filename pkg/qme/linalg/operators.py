#
# For licensing see accompanying LICENSE file.
#

from functools import reduce

import numpy as np

from qme.cfg.constants import N_MAX
from qme.errors import BadSite, SizeLimit


_PAULI = {
    'identity': ((1, 0), (0, 1)),
    'x': ((0, 1), (1, 0)),
    'y': ((0, -1j), (1j, 0)),
    'z': ((1, 0), (0, -1)),
}
_PAULI['i'] = _PAULI['identity']

MAX_DIM = 2 ** N_MAX


def pauli(which):
    """ 2x2 Pauli matrix: 'x', 'y', 'z' or 'identity' """
    try:
        return np.array(_PAULI[which.lower()], dtype=complex)
    except KeyError:
        raise ValueError(f'Unknown Pauli matrix {which!r}') from None


def identity(n_sites):
    check_sites(n_sites)
    return np.eye(2 ** n_sites, dtype=complex)


def check_sites(n_sites):
    if n_sites < 1:
        raise SizeLimit(f'Register needs at least one site, got {n_sites}')
    if n_sites > N_MAX:
        raise SizeLimit(f'{n_sites} sites exceed the dense limit of {N_MAX}')


def n_sites_of(a):
    """ Number of qubits a square operator acts on """
    dim = a.shape[0]
    n_sites = dim.bit_length() - 1
    if a.ndim != 2 or a.shape[1] != dim or dim != 2 ** n_sites:
        raise SizeLimit(f'Operator of shape {a.shape} is not a square power-of-two matrix')
    return n_sites


def kron(a, b):
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise SizeLimit(f'Product dimension {dim} exceeds {MAX_DIM}')
    return np.kron(a, b)


def kron_all(ops):
    return reduce(kron, ops)


def embed_site(op, site, n_sites):
    """ I^(site-1) (x) op (x) I^(n_sites-site); sites count from 1 """
    check_sites(n_sites)
    if not 1 <= site <= n_sites:
        raise BadSite(f'Site {site} outside 1..{n_sites}')
    left = np.eye(2 ** (site - 1), dtype=complex)
    right = np.eye(2 ** (n_sites - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


def site_mask(site, n_sites):
    """ Bit of a computational basis index that holds ``site`` (site 1 is the most significant) """
    return 1 << (n_sites - site)


def z_signs(n_sites):
    """ Eigenvalues of sz_j on every basis state, shape (n_sites, 2**n_sites) """
    check_sites(n_sites)
    index = np.arange(2 ** n_sites)
    shifts = n_sites - np.arange(1, n_sites + 1)
    bits = (index[None, :] >> shifts[:, None]) & 1
    return 1 - 2 * bits
