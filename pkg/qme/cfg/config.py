#
# For licensing see accompanying LICENSE file.
#

import numpy as np
from omegaconf import OmegaConf

# general configuration
cfg = OmegaConf.create()
cfg.seed = 0
cfg.exp_name = 'qme'
cfg.cfg_file = ''
cfg.branch_policy = 'all' # 'plus_only' or 'expected'

# working medium: H_S = 1/2 + sum eps_j/2 sz_j + sum_{j<k} delta_jk sz_j sz_k
cfg.system = OmegaConf.create()
cfg.system.n_sites = 1
cfg.system.epsilon = [0.5]
cfg.system.coupling = [] # [j, k, value] triples, 1 <= j < k <= n_sites
cfg.system.beta = 1.0

# generalized sigma_x measurements, applied in list order
cfg.detectors = []

# feedback angle search
cfg.search = OmegaConf.create()
cfg.search.method = 'hybrid' # 'grid' or 'both'
cfg.search.grid_spacing = 0.1
cfg.search.grid_range = [-float(np.pi), float(np.pi)]
cfg.search.k_max = 200
cfg.search.convergence_tol = 1e-10
cfg.search.cluster_tol = 1e-3
cfg.search.gradient_tol = 1e-8
cfg.search.grid_size = 361
cfg.search.batch_size = 65_536

# single cycle evaluation
cfg.cycle = OmegaConf.create()
cfg.cycle.theta = [] # empty means optimal angles
cfg.cycle.mode = 'local' # 'global' (two sites only)

# parameter sweeps
cfg.sweep = OmegaConf.create()
cfg.sweep.kind = 'kappa' # coupling, detuning, global, robustness, beta, surface
cfg.sweep.configurations = ['n1', 'n2_D1', 'n2_D1D2']
cfg.sweep.kappa = OmegaConf.create({'start': 0.01, 'stop': 0.99, 'step': 0.01, 'values': None})
cfg.sweep.delta = OmegaConf.create({'start': -0.6, 'stop': 0.6, 'step': 0.01, 'values': None})
cfg.sweep.xi = OmegaConf.create({'start': 0.0, 'stop': 0.5, 'step': 0.02, 'values': None})
cfg.sweep.beta = OmegaConf.create({'start': None, 'stop': None, 'step': None,
                                   'values': [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]})
cfg.sweep.kappa_fixed = 0.1
cfg.sweep.configuration = 'n2_D1D2'
cfg.sweep.branch = '' # empty means the all-plus branch
cfg.sweep.errors = OmegaConf.create({'start': 0.0, 'stop': 10.0, 'step': 1.0, 'values': None})
cfg.sweep.error_unit = 'degrees' # or 'radians'
cfg.sweep.random_directions = 32
cfg.sweep.target = OmegaConf.create({'work': None, 'efficiency': None})
cfg.sweep.surface_size = 121

# outputs
cfg.output = OmegaConf.create()
cfg.output.path = 'output'
cfg.output.format = 'csv' # 'json'

# runtime
cfg.runtime = OmegaConf.create()
cfg.runtime.threads = 0 # 0 reads QME_THREADS, then falls back to all cores
cfg.runtime.progress = True
cfg.runtime.validate = True

# experiment grid, 'section/key' -> list of values
cfg.grid = OmegaConf.create()
