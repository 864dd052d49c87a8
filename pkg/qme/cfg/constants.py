#
# For licensing see accompanying LICENSE file.
#

import numpy as np


# largest register kept as dense matrices (dim 4096)
N_MAX = 12

# operator tagging tolerances
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10

# eigenvalues below this count as exact zeros in 0 log 0 sums
ZERO_EIGENVALUE = 1e-14
NULL_BRANCH_PROBABILITY = 1e-14
DRIFT_TOL = 1e-10
UNDEFINED_EFFICIENCY = 1e-14

# landscape analysis
HESSIAN_STEP = 1e-4
DEGENERATE_EIGENVALUE = 1e-7
FLAT_TOL = 1e-14
NEWTON_STEPS = 5
GRID_MIN_SIZE = 8
GRID_MAX_SITES = 3
GLOBAL_GRID_SIZE = 3600

# method=both agreement
CROSSCHECK_WARN = 1e-6
CROSSCHECK_FAIL = 1e-4

ROBUSTNESS_RANDOM_DIRECTIONS = 32

CONFIGURATIONS = {
    'n1': 'n=1',
    'n2_D1': 'n=2:D1',
    'n2_D1D2': 'n=2:D1D2',
}
GLOBAL_LABEL = 'global'
AVERAGE_BRANCH = 'avg'
BRANCH_POLICIES = ('all', 'plus_only', 'expected')

TWO_PI = 2.0 * np.pi
