#
# For licensing see accompanying LICENSE file.
#

import dataclasses
from functools import partial
from itertools import product

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from tqdm import tqdm

from qme.cfg.constants import AVERAGE_BRANCH, CONFIGURATIONS, GLOBAL_LABEL, ROBUSTNESS_RANDOM_DIRECTIONS
from qme.engine import (
    DetectorSpec,
    SystemSpec,
    average_metrics,
    cycle_metrics,
    measure,
    select_branch,
    spectrum_and_gap,
    thermal_state,
    two_qubit_gap,
)
from qme.errors import NullBranch, UnsupportedSize, ValidationError
from qme.optimizer import FeedbackLandscape, SearchConfig, optimal_feedback, optimal_global_feedback
from qme.sweeps.records import (
    BetaFit,
    GapRecord,
    LocalGlobalPair,
    RobustnessRecord,
    SurfacePoint,
    SweepRecord,
)


def map_points(fn, items, n_jobs=1, desc=None, progress=False):
    """ Evaluate independent sweep points, results in input order """
    items = list(items)
    iterator = tqdm(items, desc=desc, disable=not progress, leave=False)
    if n_jobs == 1 or len(items) < 2:
        return [fn(item) for item in iterator]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(item) for item in iterator)


def configuration_setup(spec, configuration, kappa):
    """ (system, detectors) of one engine configuration at strength ``kappa`` """
    if configuration == 'n1':
        single = SystemSpec(1, (spec.epsilon[0],), (), spec.beta)
        return single, [DetectorSpec(1, kappa)]
    if spec.n_sites < 2:
        raise UnsupportedSize(f'Configuration {configuration!r} needs two sites')
    if configuration == 'n2_D1':
        return spec, [DetectorSpec(1, kappa)]
    if configuration == 'n2_D1D2':
        return spec, [DetectorSpec(1, kappa), DetectorSpec(2, kappa)]
    raise ValidationError('sweep.configurations', f'unknown configuration {configuration!r}')


def plus_branch(detectors):
    return '+' * len(detectors)


def _chosen_branches(branches, detectors, policy, branch_label=None):
    if policy == 'plus_only':
        return [select_branch(branches, branch_label or plus_branch(detectors))]
    if policy in ('all', 'expected'):
        return [b for b in branches if not b.is_null]
    raise ValidationError('branch_policy', f'unknown branch policy {policy!r}')


def branch_records(variable, value, label, spec, detectors, search_cfg, method='hybrid',
                   policy='plus_only', branch_label=None):
    """ Optimize the feedback of each selected branch and evaluate its cycle """
    branches = measure(thermal_state(spec), detectors, check=False)
    records = []
    for branch in _chosen_branches(branches, detectors, policy, branch_label):
        if branch.is_null:
            raise NullBranch(f'Branch {branch.label!r} has zero probability at {variable}={value}')
        point = optimal_feedback(branch.state, spec, search_cfg, method)
        metrics = cycle_metrics(spec, branch, point.theta)
        records.append(SweepRecord(variable, value, label, branch.label, branch.probability, point.theta, metrics))
        logger.debug(f'{label} {variable}={value} branch {branch.label}: W_ext={metrics.work_extracted:.6g}')

    if policy == 'plus_only':
        return records
    probabilities = [r.probability for r in records]
    expected_work = float(np.dot(probabilities, [r.metrics.work_extracted for r in records]))
    if policy == 'expected':
        metrics = average_metrics([r.metrics for r in records], probabilities)
        return [SweepRecord(variable, value, label, AVERAGE_BRANCH, float(sum(probabilities)), (), metrics,
                            expected_work)]
    return [dataclasses.replace(r, expected_work=expected_work) for r in records]


def _kappa_point(kappa, spec, configuration, search_cfg, method, policy):
    system, detectors = configuration_setup(spec, configuration, kappa)
    return branch_records('kappa', float(kappa), CONFIGURATIONS[configuration], system, detectors,
                          search_cfg, method, policy)


def kappa_sweep(spec, configuration, kappa_grid, branch_policy='plus_only', search_cfg=None,
                method='hybrid', n_jobs=1, progress=False):
    search_cfg = search_cfg or SearchConfig()
    fn = partial(_kappa_point, spec=spec, configuration=configuration, search_cfg=search_cfg,
                 method=method, policy=branch_policy)
    logger.info(f'Kappa sweep {CONFIGURATIONS.get(configuration, configuration)}: {len(kappa_grid)} points')
    results = map_points(fn, kappa_grid, n_jobs, desc=f'kappa {configuration}', progress=progress)
    return [record for point in results for record in point]


def coupling_sweep(epsilon_pair, delta_grid, beta=1.0):
    records = []
    for delta in delta_grid:
        spec = SystemSpec.two_qubit(epsilon_pair, float(delta), beta)
        eigenvalues, gap = spectrum_and_gap(spec)
        records.append(GapRecord(float(delta), tuple(float(e) for e in eigenvalues), gap,
                                 float(two_qubit_gap(epsilon_pair, float(delta)))))
    return records


def _detuning_point(xi, base_spec, kappa, configurations, search_cfg, method, policy):
    eps1 = base_spec.epsilon[0]
    spec = base_spec.with_epsilon((eps1, eps1 + xi))
    records = []
    for configuration in configurations:
        system, detectors = configuration_setup(spec, configuration, kappa)
        records += branch_records('xi', float(xi), CONFIGURATIONS[configuration], system, detectors,
                                  search_cfg, method, policy)
    return records


def detuning_sweep(base_spec, xi_grid, kappa=0.1, configurations=('n2_D1', 'n2_D1D2'), branch_policy='plus_only',
                   search_cfg=None, method='hybrid', n_jobs=1, progress=False):
    """ eps_2 = eps_1 + xi at fixed coupling and strength """
    if base_spec.n_sites != 2:
        raise UnsupportedSize('Detuning sweep needs two sites')
    search_cfg = search_cfg or SearchConfig()
    fn = partial(_detuning_point, base_spec=base_spec, kappa=kappa, configurations=tuple(configurations),
                 search_cfg=search_cfg, method=method, policy=branch_policy)
    logger.info(f'Detuning sweep: {len(xi_grid)} points, kappa={kappa}')
    results = map_points(fn, xi_grid, n_jobs, desc='detuning', progress=progress)
    records = [record for point in results for record in point]
    for label, monotone in detuning_monotonicity(records).items():
        if not monotone:
            logger.warning(f'Efficiency is not non-decreasing in xi for {label}')
    return records


def detuning_monotonicity(records, tol=1e-12):
    """ configuration -> whether efficiency is non-decreasing in xi """
    curves = {}
    for record in records:
        curves.setdefault((record.configuration, record.branch), []).append(
            (record.value, record.metrics.efficiency))
    result = {}
    for (label, branch), curve in curves.items():
        curve.sort(key=lambda item: item[0])
        values = np.array([np.nan if e is None else e for _, e in curve])
        result[f'{label} {branch}'] = bool(np.all(np.diff(values) >= -tol))
    return result


def _local_global_point(kappa, spec, configuration, search_cfg, method, policy):
    system, detectors = configuration_setup(spec, configuration, kappa)
    branches = measure(thermal_state(system), detectors, check=False)
    pairs = []
    for branch in _chosen_branches(branches, detectors, 'all' if policy == 'expected' else policy):
        local = optimal_feedback(branch.state, system, search_cfg, method)
        best = optimal_global_feedback(branch.state, system, search_cfg)
        local_record = SweepRecord('kappa', float(kappa), CONFIGURATIONS[configuration], branch.label,
                                   branch.probability, local.theta, cycle_metrics(system, branch, local.theta))
        global_record = SweepRecord('kappa', float(kappa), GLOBAL_LABEL, branch.label, branch.probability,
                                    best.theta, cycle_metrics(system, branch, best.theta, mode='global'))
        pairs.append(LocalGlobalPair(float(kappa), branch.label, local_record, global_record))
    return pairs


def local_vs_global(spec, kappa_grid, configuration='n2_D1D2', branch_policy='plus_only', search_cfg=None,
                    method='hybrid', n_jobs=1, progress=False):
    if spec.n_sites != 2:
        raise UnsupportedSize('Local-vs-global comparison needs two sites')
    search_cfg = search_cfg or SearchConfig()
    fn = partial(_local_global_point, spec=spec, configuration=configuration, search_cfg=search_cfg,
                 method=method, policy=branch_policy)
    logger.info(f'Local vs global feedback: {len(kappa_grid)} points')
    results = map_points(fn, kappa_grid, n_jobs, desc='local-vs-global', progress=progress)
    return [pair for point in results for pair in point]


def _work(landscape, theta):
    return landscape.measured_energy - landscape.energy(theta)


def perturbed_work_ratio(spec, branch, theta_opt, delta):
    """ W_ext(theta* + delta) / W_ext(theta*) """
    landscape = FeedbackLandscape(branch.state, spec)
    theta_opt = np.asarray(theta_opt, dtype=float)
    return float(_work(landscape, theta_opt + np.asarray(delta, dtype=float)) / _work(landscape, theta_opt))


def robustness_sweep(spec, branch, theta_opt, error_grid, unit='degrees',
                     random_directions=ROBUSTNESS_RANDOM_DIRECTIONS, seed=0):
    """ Worst-case work ratio under per-angle additive errors.

    Directions are the 2^N sign corners plus ``random_directions`` uniform
    draws from [-1, 1]^N, all scaled by each error magnitude.
    """
    if branch.is_null:
        raise NullBranch(f'Branch {branch.label!r} has no state')
    if unit not in ('degrees', 'radians'):
        raise ValidationError('sweep.error_unit', f'unknown unit {unit!r}')
    landscape = FeedbackLandscape(branch.state, spec)
    theta_opt = np.asarray(theta_opt, dtype=float)
    n = theta_opt.size
    corners = np.array(list(product((-1.0, 1.0), repeat=n)))
    rng = np.random.default_rng(seed)
    directions = np.vstack([corners, rng.uniform(-1.0, 1.0, size=(random_directions, n))])
    base = float(_work(landscape, theta_opt))

    records = []
    for error in error_grid:
        radians = float(np.deg2rad(error)) if unit == 'degrees' else float(error)
        deltas = radians * directions
        if abs(base) <= 1e-14:
            records.append(RobustnessRecord(float(error), radians, None, None, tuple(deltas[0])))
            continue
        ratios = _work(landscape, theta_opt + deltas) / base
        worst = int(np.argmin(ratios))
        records.append(RobustnessRecord(float(error), radians, float(ratios[worst]), float(np.mean(ratios)),
                                        tuple(float(d) for d in deltas[worst])))
    return records


def _beta_point(beta, spec_template, configuration, kappa, search_cfg, method):
    system, detectors = configuration_setup(spec_template.with_beta(beta), configuration, kappa)
    return branch_records('beta', float(beta), CONFIGURATIONS[configuration], system, detectors,
                          search_cfg, method, 'all')


def beta_fit(records, target):
    """ Record (beta, branch) closest to a (work, efficiency) target in summed relative mismatch """
    work_target, efficiency_target = target
    best = None
    for record in records:
        efficiency = record.metrics.efficiency
        residual = abs(record.metrics.work_extracted - work_target) / abs(work_target)
        residual += np.inf if efficiency is None else abs(efficiency - efficiency_target) / abs(efficiency_target)
        if best is None or residual < best.residual:
            best = BetaFit(record.value, record.configuration, record.branch, float(residual),
                           record.metrics.work_extracted, efficiency)
    return best


def beta_scan(spec_template, beta_grid, configuration='n2_D1D2', kappa=0.2, target=None, search_cfg=None,
              method='hybrid', n_jobs=1, progress=False):
    """ Repeat the optimized cycle per beta for every branch; optionally fit a (work, efficiency) target """
    beta_grid = [float(b) for b in beta_grid]
    if any(not np.isfinite(b) or b <= 0 for b in beta_grid):
        raise ValidationError('sweep.beta', 'inverse temperatures must be positive')
    search_cfg = search_cfg or SearchConfig()
    fn = partial(_beta_point, spec_template=spec_template, configuration=configuration, kappa=kappa,
                 search_cfg=search_cfg, method=method)
    logger.info(f'Beta scan: {len(beta_grid)} values, {configuration} at kappa={kappa}')
    results = map_points(fn, beta_grid, n_jobs, desc='beta', progress=progress)
    records = [record for point in results for record in point]

    fit = None
    if target is not None:
        fit = beta_fit(records, target)
        logger.info(f'Best fit to target {target}: beta={fit.beta}, branch {fit.branch}, residual={fit.residual:.4g}')
    return records, fit


def energy_surface(spec, detectors, branch_label=None, grid_size=121):
    """ E_F and W_ext on a periodic grid of both local angles """
    if spec.n_sites != 2:
        raise UnsupportedSize('Energy surface export needs two sites')
    branches = measure(thermal_state(spec), detectors, check=False)
    branch = select_branch(branches, branch_label or plus_branch(detectors))
    if branch.is_null:
        raise NullBranch(f'Branch {branch.label!r} has no state')
    landscape = FeedbackLandscape(branch.state, spec)
    axis = -np.pi + (2.0 * np.pi / grid_size) * np.arange(grid_size)
    theta = np.stack(np.meshgrid(axis, axis, indexing='ij'), axis=-1).reshape(-1, 2)
    energies = landscape.energy(theta)
    e_measured = landscape.measured_energy
    return [SurfacePoint((float(t[0]), float(t[1])), float(e), e_measured - float(e))
            for t, e in zip(theta, energies)]
