#
# For licensing see accompanying LICENSE file.
#

import numpy as np
from loguru import logger

from qme.cfg.constants import CROSSCHECK_FAIL, CROSSCHECK_WARN, DEGENERATE_EIGENVALUE, GLOBAL_GRID_SIZE
from qme.engine import energy
from qme.errors import CrossCheckFailed, UnsupportedSize
from qme.linalg import pauli
from qme.optimizer.landscape import FeedbackLandscape, GlobalFeedbackLandscape
from qme.optimizer.search import StationaryPoint, grid_search, hybrid_search
from qme.utils.general import wrap_angles


def select_minimum(points):
    for point in points:
        if point.classification in ('minimum', 'degenerate'):
            return point
    return points[0]


def optimal_feedback(rho_m, spec, cfg, method='hybrid'):
    if method not in ('hybrid', 'grid', 'both'):
        raise ValueError(f'Unknown search method {method!r}')
    landscape = FeedbackLandscape(rho_m, spec)

    if method == 'grid':
        return select_minimum(grid_search(rho_m, spec, cfg, landscape=landscape))

    hybrid = hybrid_search(rho_m, spec, cfg, landscape=landscape)
    if method == 'both':
        grid = grid_search(rho_m, spec, cfg, landscape=landscape)
        disagreement = abs(hybrid[0].feedback_energy - grid[0].feedback_energy)
        if disagreement > CROSSCHECK_FAIL:
            raise CrossCheckFailed(f'Hybrid and grid minima differ by {disagreement:.3e}')
        if disagreement > CROSSCHECK_WARN:
            logger.warning(f'Hybrid and grid minima differ by {disagreement:.3e}')
    return select_minimum(hybrid)


def optimal_global_feedback(rho_m, spec, cfg=None):
    """ Best single angle of the two-site sy sy feedback, closed form checked on a 1-D grid """
    if spec.n_sites != 2:
        raise UnsupportedSize(f'Global feedback is defined for two sites, got {spec.n_sites}')
    landscape = GlobalFeedbackLandscape(rho_m, spec)
    theta = landscape.optimum()

    lattice = np.linspace(-np.pi, np.pi, GLOBAL_GRID_SIZE, endpoint=False)
    lattice_min = float(np.min(landscape.energy(lattice)))
    best = float(landscape.energy(theta))
    if best > lattice_min + 1e-10:
        raise CrossCheckFailed(f'Closed-form global optimum {best:.12g} above grid minimum {lattice_min:.12g}')

    curvature = float(landscape.curvature(theta))
    if abs(curvature) < DEGENERATE_EIGENVALUE:
        classification = 'degenerate'
    else:
        classification = 'minimum' if curvature > 0 else 'maximum'
    return StationaryPoint(
        theta=(float(wrap_angles(theta)),),
        feedback_energy=best,
        gradient_norm=float(abs(landscape.derivative(theta))),
        classification=classification,
    )


def single_qubit_optimum(rho_m, spec):
    """ Energy-minimizing tangent solution for one qubit: (theta*, E_F*) """
    if spec.n_sites != 1:
        raise UnsupportedSize(f'Closed-form optimum is for one site, got {spec.n_sites}')
    a = energy(rho_m, pauli('z'))
    b = energy(rho_m, pauli('x'))
    eps = spec.epsilon[0]
    theta = float(wrap_angles(np.arctan2(0.5 * eps * b, -0.5 * eps * a)))
    return theta, 0.5 - 0.5 * abs(eps) * np.hypot(a, b)
