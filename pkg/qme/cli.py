#
# For licensing see accompanying LICENSE file.
#

import argparse
import json
import os

from loguru import logger
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from qme.cfg.config import cfg as default_cfg
from qme.cfg.constants import BRANCH_POLICIES, CONFIGURATIONS
from qme.engine import (
    DetectorSpec,
    SystemSpec,
    average_metrics,
    cycle_metrics,
    measure,
    spectrum_and_gap,
    thermal_state,
)
from qme.errors import BadSite, BadStrength, NullBranch, ParseError, QMEError, ValidationError
from qme.optimizer import (
    SearchConfig,
    grid_search,
    hybrid_search,
    optimal_feedback,
    optimal_global_feedback,
)
from qme.sweeps import (
    beta_scan,
    coupling_sweep,
    detuning_monotonicity,
    detuning_sweep,
    energy_surface,
    kappa_sweep,
    local_vs_global,
    plus_branch,
    robustness_sweep,
)
from qme.utils.config import get_cfg_items, grid_values
from qme.utils.general import find_cfg_diff, get_num_threads, safe_state
from qme.utils.identities import run_identities
from qme.utils.io import write_csv, write_json

COMMANDS = ('spectrum', 'cycle', 'optimize', 'sweep', 'identities')
SWEEP_KINDS = ('kappa', 'coupling', 'detuning', 'global', 'robustness', 'beta', 'surface')
METHODS = ('hybrid', 'grid', 'both')
BRANCH_FLAGS = {'all': 'all', 'plus': 'plus_only', 'plus_only': 'plus_only', 'expected': 'expected'}


def _base_config():
    base = OmegaConf.create(OmegaConf.to_container(default_cfg))
    OmegaConf.set_struct(base, True)
    OmegaConf.set_struct(base.grid, False)
    return base


def _reraise(field, exc):
    if isinstance(exc, QMEError):
        raise exc
    raise ValidationError(field, str(exc)) from None


def system_from_cfg(cfg):
    try:
        return SystemSpec(
            cfg.system.n_sites,
            tuple(cfg.system.epsilon),
            [tuple(t) for t in cfg.system.coupling],
            cfg.system.beta,
        )
    except (TypeError, ValueError) as exc:
        _reraise('system', exc)


def detectors_from_cfg(cfg, n_sites):
    detectors = []
    for i, item in enumerate(cfg.detectors):
        if not isinstance(item, DictConfig):
            raise ValidationError(f'detectors[{i}]', 'expected an object with site and kappa')
        for key in item:
            if key not in ('site', 'kappa'):
                raise ValidationError(f'detectors[{i}].{key}', 'unknown key')
        for key in ('site', 'kappa'):
            if item.get(key) is None:
                raise ValidationError(f'detectors[{i}].{key}', 'missing value')
        try:
            detector = DetectorSpec(item.site, item.kappa)
        except BadStrength as exc:
            raise ValidationError(f'detectors[{i}].kappa', str(exc)) from None
        except BadSite as exc:
            raise ValidationError(f'detectors[{i}].site', str(exc)) from None
        except (TypeError, ValueError) as exc:
            _reraise(f'detectors[{i}]', exc)
        if detector.site > n_sites:
            raise ValidationError(f'detectors[{i}].site', f'site {detector.site} outside 1..{n_sites}')
        detectors.append(detector)
    return detectors


def search_from_cfg(cfg):
    try:
        return SearchConfig.from_cfg(cfg.search)
    except (TypeError, ValueError) as exc:
        _reraise('search', exc)


def _check_choice(field, value, choices):
    if value not in choices:
        raise ValidationError(field, f'expected one of {list(choices)}, got {value!r}')


def validate_config(cfg):
    """ Build every typed object once so that invalid values fail before any computation """
    spec = system_from_cfg(cfg)
    detectors_from_cfg(cfg, spec.n_sites)
    search_from_cfg(cfg)
    _check_choice('search.method', cfg.search.method, METHODS)
    _check_choice('branch_policy', cfg.branch_policy, BRANCH_POLICIES)
    _check_choice('cycle.mode', cfg.cycle.mode, ('local', 'global'))
    _check_choice('sweep.kind', cfg.sweep.kind, SWEEP_KINDS)
    _check_choice('sweep.configuration', cfg.sweep.configuration, tuple(CONFIGURATIONS))
    _check_choice('sweep.error_unit', cfg.sweep.error_unit, ('degrees', 'radians'))
    _check_choice('output.format', cfg.output.format, ('csv', 'json'))
    for i, configuration in enumerate(cfg.sweep.configurations):
        _check_choice(f'sweep.configurations[{i}]', configuration, tuple(CONFIGURATIONS))
    if cfg.cycle.theta:
        expected = 1 if cfg.cycle.mode == 'global' else spec.n_sites
        if len(cfg.cycle.theta) != expected:
            raise ValidationError('cycle.theta', f'expected {expected} angles, got {len(cfg.cycle.theta)}')
    if cfg.cycle.mode == 'global' and spec.n_sites != 2:
        raise ValidationError('cycle.mode', 'global feedback needs two sites')
    for name in ('kappa', 'delta', 'xi', 'beta', 'errors'):
        grid_values(cfg.sweep[name], f'sweep.{name}')
    if not 0.0 <= cfg.sweep.kappa_fixed <= 1.0:
        raise ValidationError('sweep.kappa_fixed', 'must lie in [0, 1]')
    return cfg


def finalize_config(*sources):
    """ Merge sources over the struct defaults and validate the result """
    try:
        cfg = OmegaConf.merge(_base_config(), *sources)
    except OmegaConfBaseException as exc:
        field = getattr(exc, 'full_key', None) or 'config'
        raise ValidationError(field, str(exc).splitlines()[0]) from None
    return validate_config(cfg)


def parse_config(text, overrides=()):
    """ JSON text -> validated RunConfig (an OmegaConf DictConfig) """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError('Top-level value must be a JSON object', 1, 1)
    return finalize_config(data, *overrides)


def dump_config(cfg):
    return json.dumps(OmegaConf.to_container(cfg, resolve=True), indent=4)


def get_logger(cfg):
    logdir = cfg.output.path
    os.makedirs(logdir, exist_ok=True)
    with open(os.path.join(logdir, f'config_{cfg.exp_name}.json'), 'w') as f:
        f.write(dump_config(cfg) + '\n')
    sink = logger.add(os.path.join(logdir, f'{cfg.exp_name}.log'), level='INFO')
    logger.info(f'Logging to {logdir}')
    logger.info(OmegaConf.to_yaml(cfg))
    return sink


def _output_file(cfg, name):
    return os.path.join(cfg.output.path, f'{cfg.exp_name}_{name}.{cfg.output.format}')


def _write_rows(cfg, name, rows):
    path = _output_file(cfg, name)
    if cfg.output.format == 'json':
        return write_json(rows, path)
    return write_csv(rows, path)


def _fmt(value):
    return 'undefined' if value is None else f'{value:.6g}'


def _theta_str(theta):
    return '(' + ', '.join(f'{t:.6f}' for t in theta) + ')'


def run_spectrum(cfg):
    spec = system_from_cfg(cfg)
    if spec.n_sites == 2:
        records = coupling_sweep(spec.epsilon, grid_values(cfg.sweep.delta, 'sweep.delta'), spec.beta)
        rows = [r.to_row() for r in records]
        worst = max(abs(r.gap - r.gap_closed_form) for r in records)
        print(f'{len(records)} couplings, max |gap - closed form| = {worst:.3e}')
    else:
        eigenvalues, gap = spectrum_and_gap(spec)
        rows = [{**{f'e{i}': float(e) for i, e in enumerate(eigenvalues)}, 'gap': gap}]
        print(f'ground energy {eigenvalues[0]:.6g}, gap {gap:.6g}')
    _write_rows(cfg, 'spectrum', rows)


def _selected_branches(cfg, branches, detectors):
    if cfg.branch_policy == 'plus_only':
        label = cfg.sweep.branch or plus_branch(detectors)
        return [b for b in branches if b.label == label and not b.is_null]
    return [b for b in branches if not b.is_null]


def run_cycle(cfg):
    spec = system_from_cfg(cfg)
    detectors = detectors_from_cfg(cfg, spec.n_sites)
    search_cfg = search_from_cfg(cfg)
    branches = measure(thermal_state(spec), detectors, check=cfg.runtime.validate)

    results, metrics_list = [], []
    for branch in _selected_branches(cfg, branches, detectors):
        if cfg.cycle.theta:
            theta = tuple(float(t) for t in cfg.cycle.theta)
        elif cfg.cycle.mode == 'global':
            theta = optimal_global_feedback(branch.state, spec, search_cfg).theta
        else:
            theta = optimal_feedback(branch.state, spec, search_cfg, cfg.search.method).theta
        metrics = cycle_metrics(spec, branch, theta, cfg.cycle.mode)
        metrics_list.append(metrics)
        results.append({'branch': branch.label, 'probability': branch.probability, 'theta': list(theta),
                        **metrics.to_dict()})
        print(f'branch {branch.label or "-":>4}  p={branch.probability:.6g}  theta*={_theta_str(theta)}  '
              f'W_ext={metrics.work_extracted:.6g}  W_er={metrics.work_erasure:.6g}  eta={_fmt(metrics.efficiency)}')

    summary = {'mode': cfg.cycle.mode, 'branches': results}
    if cfg.branch_policy != 'plus_only' and results:
        probabilities = [r['probability'] for r in results]
        average = average_metrics(metrics_list, probabilities)
        summary['expected'] = average.to_dict()
        print(f'expected  W_ext={average.work_extracted:.6g}  eta={_fmt(average.efficiency)}')
    write_json(summary, os.path.join(cfg.output.path, f'{cfg.exp_name}_cycle.json'))


def run_optimize(cfg):
    spec = system_from_cfg(cfg)
    detectors = detectors_from_cfg(cfg, spec.n_sites)
    search_cfg = search_from_cfg(cfg)
    method = cfg.search.method
    branches = measure(thermal_state(spec), detectors, check=cfg.runtime.validate)

    results = []
    for branch in _selected_branches(cfg, branches, detectors):
        best = optimal_feedback(branch.state, spec, search_cfg, method)
        entry = {'branch': branch.label, 'probability': branch.probability, 'best': best.to_dict()}
        if method in ('hybrid', 'both'):
            entry['hybrid'] = [p.to_dict() for p in hybrid_search(branch.state, spec, search_cfg)]
        if method in ('grid', 'both'):
            entry['grid'] = [p.to_dict() for p in grid_search(branch.state, spec, search_cfg)]
        metrics = cycle_metrics(spec, branch, best.theta)
        entry['metrics'] = metrics.to_dict()
        results.append(entry)

        line = (f'branch {branch.label or "-":>4}  theta*={_theta_str(best.theta)}  E_F={best.feedback_energy:.12g}  '
                f'W_ext={metrics.work_extracted:.6g}  eta={_fmt(metrics.efficiency)}')
        if method == 'both':
            gap = abs(entry['hybrid'][0]['feedback_energy'] - entry['grid'][0]['feedback_energy'])
            entry['agreement'] = gap
            line += f'  hybrid/grid |dE|={gap:.3e}'
        print(line)
    write_json({'method': method, 'branches': results}, os.path.join(cfg.output.path, f'{cfg.exp_name}_optimize.json'))


def run_sweep(cfg):
    kind = cfg.sweep.kind
    spec = system_from_cfg(cfg)
    search_cfg = search_from_cfg(cfg)
    n_jobs = get_num_threads(cfg.runtime.threads)
    common = dict(search_cfg=search_cfg, method=cfg.search.method, n_jobs=n_jobs, progress=cfg.runtime.progress)

    if kind == 'kappa':
        kappas = grid_values(cfg.sweep.kappa, 'sweep.kappa')
        for configuration in cfg.sweep.configurations:
            records = kappa_sweep(spec, configuration, kappas, cfg.branch_policy, **common)
            n_angles = max((len(r.theta_opt) for r in records), default=0)
            _write_rows(cfg, f'kappa_{configuration}', [r.to_row(n_angles) for r in records])
            best = max(records, key=lambda r: r.metrics.work_extracted)
            efficiencies = [r.metrics.efficiency for r in records if r.metrics.efficiency is not None]
            print(f'{CONFIGURATIONS[configuration]:>9}: max W_ext={best.metrics.work_extracted:.6g} '
                  f'at kappa={best.value:g}, max eta={_fmt(max(efficiencies, default=None))}')
    elif kind == 'coupling':
        run_spectrum(cfg)
    elif kind == 'detuning':
        xis = grid_values(cfg.sweep.xi, 'sweep.xi')
        configurations = [c for c in cfg.sweep.configurations if c != 'n1']
        records = detuning_sweep(spec, xis, cfg.sweep.kappa_fixed, configurations, cfg.branch_policy, **common)
        _write_rows(cfg, 'detuning', [r.to_row(2) for r in records])
        for label, monotone in detuning_monotonicity(records).items():
            print(f'{label}: efficiency non-decreasing in xi = {monotone}')
    elif kind == 'global':
        kappas = grid_values(cfg.sweep.kappa, 'sweep.kappa')
        pairs = local_vs_global(spec, kappas, cfg.sweep.configuration, cfg.branch_policy, **common)
        _write_rows(cfg, 'global', [p.to_row() for p in pairs])
        margin = min(p.local.metrics.work_extracted - p.global_.metrics.work_extracted for p in pairs)
        print(f'min (W_local - W_global) over {len(pairs)} points = {margin:.3e}')
    elif kind == 'robustness':
        detectors = detectors_from_cfg(cfg, spec.n_sites)
        branches = measure(thermal_state(spec), detectors, check=cfg.runtime.validate)
        label = cfg.sweep.branch or plus_branch(detectors)
        branch = next((b for b in branches if b.label == label), None)
        if branch is None:
            raise ValidationError('sweep.branch', f'no branch labelled {label!r}')
        if branch.is_null:
            raise NullBranch(f'Branch {label!r} has probability {branch.probability:.3e} and no state')
        best = optimal_feedback(branch.state, spec, search_cfg, cfg.search.method)
        records = robustness_sweep(spec, branch, best.theta, grid_values(cfg.sweep.errors, 'sweep.errors'),
                                   cfg.sweep.error_unit, cfg.sweep.random_directions, cfg.seed)
        _write_rows(cfg, 'robustness', [r.to_row() for r in records])
        ratios = [r.worst_ratio for r in records if r.worst_ratio is not None]
        print(f'theta*={_theta_str(best.theta)}, worst work ratio over grid = {_fmt(min(ratios, default=None))}')
    elif kind == 'beta':
        betas = grid_values(cfg.sweep.beta, 'sweep.beta')
        target = None
        if cfg.sweep.target.work is not None and cfg.sweep.target.efficiency is not None:
            target = (float(cfg.sweep.target.work), float(cfg.sweep.target.efficiency))
        records, fit = beta_scan(spec, betas, cfg.sweep.configuration, cfg.sweep.kappa_fixed, target, **common)
        _write_rows(cfg, 'beta', [r.to_row(2) for r in records])
        if fit is not None:
            write_json(fit.to_dict(), os.path.join(cfg.output.path, f'{cfg.exp_name}_beta_fit.json'))
            print(f'best fit: beta={fit.beta:g}, branch {fit.branch}, residual={fit.residual:.4g}')
    elif kind == 'surface':
        detectors = detectors_from_cfg(cfg, spec.n_sites)
        points = energy_surface(spec, detectors, cfg.sweep.branch or None, cfg.sweep.surface_size)
        _write_rows(cfg, 'surface', [p.to_row() for p in points])
        lowest = min(points, key=lambda p: p.feedback_energy)
        print(f'lattice minimum E_F={lowest.feedback_energy:.6g} at theta={_theta_str(lowest.theta)}')


def run_identities_command(cfg):
    checks = run_identities(seed=cfg.seed)
    for check in checks:
        print(f'{"PASS" if check.passed else "FAIL"}  {check.name:<32} max error {check.max_error:.3e}')
    write_json([c.to_dict() for c in checks], os.path.join(cfg.output.path, f'{cfg.exp_name}_identities.json'))
    return 0 if all(c.passed for c in checks) else 1


def run(cfg, command):
    """ Dispatch one subcommand; returns the process exit status """
    safe_state(seed=cfg.seed)
    sink = None
    try:
        sink = get_logger(cfg)
        logger.info(f'Overrides of the defaults: {find_cfg_diff(_base_config(), cfg) or "none"}')
        if command == 'spectrum':
            run_spectrum(cfg)
        elif command == 'cycle':
            run_cycle(cfg)
        elif command == 'optimize':
            run_optimize(cfg)
        elif command == 'sweep':
            run_sweep(cfg)
        elif command == 'identities':
            return run_identities_command(cfg)
        else:
            raise ValueError(f'Unknown command {command!r}')
    except (QMEError, OSError) as exc:
        logger.error(f'{type(exc).__name__}: {exc}')
        return 1
    finally:
        if sink is not None:
            logger.remove(sink)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='qme', description='Measurement-based quantum engine simulator')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', '--cfg_file', dest='config', default=None, help='path to the JSON config file')
    parser.add_argument('--method', choices=METHODS, default=None)
    parser.add_argument('--output', default=None, help='output directory')
    parser.add_argument('--branch', choices=sorted(BRANCH_FLAGS), default=None)
    parser.add_argument('--kind', choices=SWEEP_KINDS, default=None)
    parser.add_argument('--cfg_id', type=int, default=-1, help='id of the expanded grid config to run')
    return parser


def main(argv=None):
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)

    flags = {}
    if args.method:
        flags['search'] = {'method': args.method}
    if args.output:
        flags['output'] = {'path': args.output}
    if args.branch:
        flags['branch_policy'] = BRANCH_FLAGS[args.branch]
    if args.kind:
        flags['sweep'] = {'kind': args.kind}

    try:
        text = '{}'
        if args.config:
            with open(args.config, encoding='utf-8') as f:
                text = f.read()
        cfg = parse_config(text, [OmegaConf.from_cli(extras), flags])
        cfg.cfg_file = args.config or ''
        list_of_cfgs, search_keys = get_cfg_items(cfg)
        list_of_cfgs = [finalize_config(item) for item in list_of_cfgs]
        logger.info(f'Running {len(list_of_cfgs)} experiments')
        if args.cfg_id >= len(list_of_cfgs):
            raise ValidationError('cfg_id', f'expected an id below {len(list_of_cfgs)}, got {args.cfg_id}')
        if args.cfg_id >= 0:
            list_of_cfgs = [list_of_cfgs[args.cfg_id]]
    except (QMEError, OSError) as exc:
        logger.error(f'{type(exc).__name__}: {exc}')
        return 1

    status = 0
    for cfg_item in list_of_cfgs:
        logger.info(f'Running experiment {cfg_item.exp_name}')
        status = max(status, run(cfg_item, args.command))
    return status
