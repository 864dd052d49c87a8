#
# For licensing see accompanying LICENSE file.
#

from .records import SweepRecord, GapRecord, LocalGlobalPair, RobustnessRecord, BetaFit, SurfacePoint
from .drivers import (
    map_points,
    configuration_setup,
    plus_branch,
    branch_records,
    kappa_sweep,
    coupling_sweep,
    detuning_sweep,
    detuning_monotonicity,
    local_vs_global,
    perturbed_work_ratio,
    robustness_sweep,
    beta_scan,
    beta_fit,
    energy_surface,
)
