#
# For licensing see accompanying LICENSE file.
#

from .system import (
    SystemSpec,
    build_hamiltonian,
    thermal_state,
    spectrum_and_gap,
    energy_levels,
    exchange_classes,
    two_qubit_gap,
)
from .measurement import DetectorSpec, MeasurementBranch, kraus_pair, measure, unconditional_state, select_branch
from .feedback import local_rotation, local_feedback_unitary, global_feedback_unitary, feedback_unitary, apply_feedback
from .thermo import (
    CycleMetrics,
    energy,
    relative_entropy,
    von_neumann_entropy,
    bloch_vector,
    cycle_metrics,
    average_metrics,
)
