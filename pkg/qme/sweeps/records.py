#
# For licensing see accompanying LICENSE file.
#

from dataclasses import asdict, dataclass
from typing import Optional

from qme.engine import CycleMetrics


def _angle_columns(theta, n_angles, prefix='theta'):
    row = {}
    for j in range(n_angles):
        row[f'{prefix}_{j + 1}'] = theta[j] if j < len(theta) else None
    return row


@dataclass(frozen=True)
class SweepRecord:
    variable: str
    value: float
    configuration: str
    branch: str
    probability: float
    theta_opt: tuple
    metrics: CycleMetrics
    expected_work: Optional[float] = None

    def to_row(self, n_angles=None):
        n_angles = len(self.theta_opt) if n_angles is None else n_angles
        row = {
            self.variable: self.value,
            'configuration': self.configuration,
            'branch': self.branch,
            'probability': self.probability,
        }
        row.update(_angle_columns(self.theta_opt, n_angles))
        row.update(self.metrics.to_dict())
        row['net_work'] = self.metrics.net_work
        row['expected_work'] = self.expected_work
        return row


@dataclass(frozen=True)
class GapRecord:
    delta_z: float
    eigenvalues: tuple
    gap: float
    gap_closed_form: float

    def to_row(self):
        row = {'delta_z': self.delta_z}
        row.update({f'e{i}': e for i, e in enumerate(self.eigenvalues)})
        row['gap'] = self.gap
        row['gap_closed_form'] = self.gap_closed_form
        return row


@dataclass(frozen=True)
class LocalGlobalPair:
    kappa: float
    branch: str
    local: SweepRecord
    global_: SweepRecord

    def to_row(self):
        return {
            'kappa': self.kappa,
            'branch': self.branch,
            'theta_local_1': self.local.theta_opt[0],
            'theta_local_2': self.local.theta_opt[1],
            'theta_global': self.global_.theta_opt[0],
            'e_feedback_local': self.local.metrics.e_feedback,
            'e_feedback_global': self.global_.metrics.e_feedback,
            'work_local': self.local.metrics.work_extracted,
            'work_global': self.global_.metrics.work_extracted,
            'efficiency_local': self.local.metrics.efficiency,
            'efficiency_global': self.global_.metrics.efficiency,
        }


@dataclass(frozen=True)
class RobustnessRecord:
    error: float
    error_radians: float
    worst_ratio: Optional[float]
    mean_ratio: Optional[float]
    worst_delta: tuple

    def to_row(self):
        row = {
            'error': self.error,
            'error_radians': self.error_radians,
            'worst_ratio': self.worst_ratio,
            'mean_ratio': self.mean_ratio,
        }
        row.update(_angle_columns(self.worst_delta, len(self.worst_delta), prefix='worst_delta'))
        return row


@dataclass(frozen=True)
class BetaFit:
    beta: float
    configuration: str
    branch: str
    residual: float
    work_extracted: float
    efficiency: Optional[float]

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SurfacePoint:
    theta: tuple
    feedback_energy: float
    work_extracted: float

    def to_row(self):
        row = _angle_columns(self.theta, len(self.theta))
        row['e_feedback'] = self.feedback_energy
        row['work_extracted'] = self.work_extracted
        return row
