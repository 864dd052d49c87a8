#
# For licensing see accompanying LICENSE file.
#

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.ndimage import minimum_filter
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from qme.cfg.constants import FLAT_TOL, GRID_MAX_SITES, GRID_MIN_SIZE, HESSIAN_STEP, NEWTON_STEPS, TWO_PI
from qme.errors import SearchFailed, SizeLimit, ValidationError
from qme.optimizer.landscape import FeedbackLandscape, classify, finite_difference_hessian
from qme.utils.general import angle_difference, wrap_angles


@dataclass(frozen=True)
class SearchConfig:
    grid_spacing: float = 0.1
    grid_range: tuple = (-np.pi, np.pi)
    k_max: int = 200
    convergence_tol: float = 1e-10
    cluster_tol: float = 1e-3
    gradient_tol: float = 1e-8
    grid_size: int = 361
    batch_size: int = 65_536

    def __post_init__(self):
        lo, hi = (float(v) for v in self.grid_range)
        object.__setattr__(self, 'grid_range', (lo, hi))
        if not hi > lo:
            raise ValidationError('search.grid_range', f'needs min < max, got {self.grid_range}')
        for name in ('grid_spacing', 'convergence_tol', 'cluster_tol', 'gradient_tol'):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise ValidationError(f'search.{name}', f'must be positive, got {value}')
            object.__setattr__(self, name, value)
        if self.grid_spacing >= hi - lo:
            raise ValidationError('search.grid_spacing', 'must be smaller than the grid range')
        for name in ('k_max', 'grid_size', 'batch_size'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValidationError(f'search.{name}', f'must be a positive integer, got {value!r}')
            object.__setattr__(self, name, int(value))

    @classmethod
    def from_cfg(cls, cfg):
        return cls(
            grid_spacing=cfg.grid_spacing,
            grid_range=tuple(cfg.grid_range),
            k_max=cfg.k_max,
            convergence_tol=cfg.convergence_tol,
            cluster_tol=cfg.cluster_tol,
            gradient_tol=cfg.gradient_tol,
            grid_size=cfg.grid_size,
            batch_size=cfg.batch_size,
        )


@dataclass(frozen=True)
class StationaryPoint:
    theta: tuple
    feedback_energy: float
    gradient_norm: float
    classification: str

    def to_dict(self):
        return {
            'theta': list(self.theta),
            'feedback_energy': self.feedback_energy,
            'gradient_norm': self.gradient_norm,
            'classification': self.classification,
        }


def make_point(landscape, theta, classification=None):
    theta = wrap_angles(theta)
    if classification is None:
        classification = classify(finite_difference_hessian(landscape.energy, theta, HESSIAN_STEP))
    return StationaryPoint(
        theta=tuple(float(t) for t in theta),
        feedback_energy=float(landscape.energy(theta)),
        gradient_norm=float(np.linalg.norm(landscape.gradient(theta))),
        classification=classification,
    )


def degenerate_point(landscape):
    return make_point(landscape, np.zeros(landscape.n_sites), classification='degenerate')


def sort_points(points):
    return sorted(points, key=lambda p: (p.feedback_energy, p.theta))


def _coordinate_update(current, a, b, branch):
    if branch == 'min':
        new = np.arctan2(b, -a)
    elif branch == 'nearest':
        # stationary pair atan2(-B, A) and its pi-shift, keep the one closest to the current angle
        first = np.arctan2(-b, a)
        second = first + np.pi
        closer = np.abs(angle_difference(first, current)) <= np.abs(angle_difference(second, current))
        new = np.where(closer, first, second)
    else:
        raise ValueError(f'Unknown refinement branch {branch!r}')
    return wrap_angles(np.where(np.hypot(a, b) > FLAT_TOL, new, current))


def refine_batch(landscape, seeds, cfg, branch='min'):
    """ Cyclic coordinate fixed-point iteration for a batch of seeds.

    branch='min' moves each coordinate to its sinusoid minimum atan2(B, -A);
    branch='nearest' moves it to the stationary angle (mod pi) closest to the
    current one, which also reaches maxima and saddles.
    """
    theta = wrap_angles(np.atleast_2d(seeds))
    converged = np.zeros(theta.shape[0], dtype=bool)
    iterations = np.zeros(theta.shape[0], dtype=int)
    active = np.arange(theta.shape[0])

    for iteration in range(1, cfg.k_max + 1):
        current = theta[active]
        previous = current.copy()
        for j in range(landscape.n_sites):
            a, b = landscape.coordinate_coefficients(current, j)
            current[:, j] = _coordinate_update(current[:, j], a, b, branch)
        change = np.max(np.abs(angle_difference(current, previous)), axis=1)
        theta[active] = current
        iterations[active] = iteration
        done = change < cfg.convergence_tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return theta, converged, iterations


def fixed_point_refine(rho_m, spec, seed, cfg, branch='min', landscape=None):
    landscape = landscape or FeedbackLandscape(rho_m, spec)
    seed = np.atleast_1d(np.asarray(seed, dtype=float))
    if not np.all(np.isfinite(seed)):
        raise ValidationError('seed', 'seed angles must be finite')
    theta, converged, iterations = refine_batch(landscape, seed[None, :], cfg, branch)
    return theta[0], bool(converged[0]), int(iterations[0])


def cluster_representatives(theta, scores, tol):
    """ Single-linkage clusters under the wrapped l-infinity distance; lowest score represents each """
    theta = np.atleast_2d(theta)
    if theta.shape[0] == 0:
        return np.zeros(0, dtype=int)
    shifted = np.mod(theta + np.pi, TWO_PI)
    shifted[shifted >= TWO_PI] = 0.0
    tree = cKDTree(shifted, boxsize=TWO_PI)
    pairs = tree.query_pairs(r=tol, p=np.inf, output_type='ndarray')
    size = theta.shape[0]
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(size, size))
    _, labels = connected_components(graph, directed=False)
    order = np.lexsort((np.arange(size), scores, labels))
    _, first = np.unique(labels[order], return_index=True)
    return np.sort(order[first])


def iter_seed_batches(cfg, n_sites):
    lo, hi = cfg.grid_range
    axis = np.arange(lo, hi, cfg.grid_spacing)
    total = axis.size ** n_sites
    for start in range(0, total, cfg.batch_size):
        index = np.arange(start, min(start + cfg.batch_size, total))
        multi = np.unravel_index(index, (axis.size,) * n_sites)
        yield np.stack([axis[m] for m in multi], axis=1)


def hybrid_search(rho_m, spec, cfg, landscape=None):
    """ Seed-and-refine search over the coarse Cartesian grid.

    Every seed is refined twice (minimizing and nearest-stationary branch),
    converged points are clustered and each cluster is classified by its
    Hessian. Result is sorted by feedback energy.
    """
    landscape = landscape or FeedbackLandscape(rho_m, spec)
    if landscape.is_flat:
        return [degenerate_point(landscape)]

    found = []
    n_seeds = 0
    for seeds in iter_seed_batches(cfg, landscape.n_sites):
        n_seeds += seeds.shape[0]
        for branch in ('min', 'nearest'):
            theta, converged, _ = refine_batch(landscape, seeds, cfg, branch)
            found.append(theta[converged])
    points = np.concatenate(found, axis=0)
    if points.shape[0]:
        gradient_norm = np.linalg.norm(landscape.gradient(points), axis=1)
        points = points[gradient_norm < cfg.gradient_tol]
    if points.shape[0] == 0:
        raise SearchFailed(f'No seed out of {n_seeds} converged to a stationary point')

    energies = landscape.energy(points)
    representatives = cluster_representatives(points, energies, cfg.cluster_tol)
    logger.debug(f'Hybrid search: {n_seeds} seeds, {points.shape[0]} converged, {representatives.size} clusters')
    return sort_points(make_point(landscape, points[i]) for i in representatives)


def newton_polish(landscape, theta, max_step, steps=NEWTON_STEPS):
    """ Newton steps -H^-1 grad, each clipped to ``max_step`` in the l-infinity norm """
    theta = np.atleast_2d(np.asarray(theta, dtype=float)).copy()
    for _ in range(steps):
        grad = landscape.gradient(theta)
        step = -np.einsum('pjk,pk->pj', np.linalg.pinv(landscape.hessian(theta)), grad)
        scale = np.max(np.abs(step), axis=1, keepdims=True) / max_step
        step = step / np.maximum(scale, 1.0)
        theta = wrap_angles(theta + step)
    return theta


def grid_search(rho_m, spec, cfg, grid_size=None, landscape=None):
    """ Stationary points from the gradient norm on a periodic M^N lattice """
    grid_size = int(grid_size or cfg.grid_size)
    if spec.n_sites > GRID_MAX_SITES:
        raise SizeLimit(f'Grid search costs M^N evaluations and is limited to {GRID_MAX_SITES} sites')
    if grid_size < GRID_MIN_SIZE:
        raise ValidationError('search.grid_size', f'needs at least {GRID_MIN_SIZE} points per axis')
    landscape = landscape or FeedbackLandscape(rho_m, spec)
    if landscape.is_flat:
        return [degenerate_point(landscape)]

    n = landscape.n_sites
    spacing = TWO_PI / grid_size
    axis = -np.pi + spacing * np.arange(grid_size)
    rest = np.stack(np.meshgrid(*[axis] * (n - 1), indexing='ij'), axis=-1) if n > 1 else np.zeros((0,))
    gradient_norm = np.empty((grid_size,) * n)
    for i, first in enumerate(axis):
        if n == 1:
            lattice = np.array([first])
        else:
            lattice = np.concatenate([np.full(rest.shape[:-1] + (1,), first), rest], axis=-1)
        gradient_norm[i] = np.linalg.norm(landscape.gradient(lattice), axis=-1)

    candidates = (minimum_filter(gradient_norm, size=3, mode='wrap') == gradient_norm)
    candidates |= gradient_norm < cfg.gradient_tol
    if candidates.all():
        return [degenerate_point(landscape)]

    theta = axis[np.argwhere(candidates)]
    representatives = cluster_representatives(theta, gradient_norm[candidates], 1.5 * spacing)
    theta = newton_polish(landscape, theta[representatives], spacing)
    theta = theta[np.linalg.norm(landscape.gradient(theta), axis=1) < cfg.gradient_tol]
    if theta.shape[0] == 0:
        raise SearchFailed(f'No lattice candidate polished to a stationary point (M={grid_size})')

    energies = landscape.energy(theta)
    representatives = cluster_representatives(theta, energies, cfg.cluster_tol)
    logger.debug(f'Grid search: M={grid_size}, {int(candidates.sum())} candidates, {representatives.size} points')
    return sort_points(make_point(landscape, theta[i]) for i in representatives)
