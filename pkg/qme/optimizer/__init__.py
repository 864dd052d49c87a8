#
# For licensing see accompanying LICENSE file.
#

from .landscape import (
    FeedbackLandscape,
    GlobalFeedbackLandscape,
    feedback_energy,
    global_feedback_energy,
    stationarity_coeffs_analytic,
    stationarity_coeffs_numeric,
    gradient,
    hessian,
    finite_difference_hessian,
    classify,
)
from .search import (
    SearchConfig,
    StationaryPoint,
    fixed_point_refine,
    refine_batch,
    hybrid_search,
    grid_search,
    newton_polish,
    cluster_representatives,
)
from .selection import optimal_feedback, optimal_global_feedback, single_qubit_optimum, select_minimum
