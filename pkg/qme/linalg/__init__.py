#
# For licensing see accompanying LICENSE file.
#

from .operators import pauli, identity, kron, kron_all, embed_site, site_mask, z_signs, n_sites_of, check_sites
from .checks import is_square, is_hermitian, is_unitary, is_density_matrix
from .spectral import EigenDecomposition, hermitian_eig, matrix_function
