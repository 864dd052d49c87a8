#
# For licensing see accompanying LICENSE file.
#

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigvalsh

from qme.cfg.constants import DRIFT_TOL, UNDEFINED_EFFICIENCY, ZERO_EIGENVALUE
from qme.errors import NullBranch, NumericalDrift, ShapeMismatch, SupportViolation, UnsupportedSize
from qme.linalg import hermitian_eig, pauli
from qme.engine.feedback import apply_feedback, feedback_unitary
from qme.engine.system import build_hamiltonian, thermal_state


@dataclass(frozen=True)
class CycleMetrics:
    e_initial: float
    e_measured: float
    e_feedback: float
    work_extracted: float
    work_erasure: float
    efficiency: Optional[float]

    @property
    def net_work(self):
        return self.work_extracted - self.work_erasure

    def to_dict(self):
        return asdict(self)


def energy(rho, h):
    if rho.shape != h.shape:
        raise ShapeMismatch(f'State {rho.shape} and observable {h.shape} differ in shape')
    value = np.einsum('ij,ji->', rho, h)
    if abs(value.imag) >= DRIFT_TOL:
        raise NumericalDrift(f'Expectation value has imaginary part {value.imag:.3e}')
    return float(value.real)


def _entropy_sum(eigenvalues):
    p = eigenvalues[eigenvalues > ZERO_EIGENVALUE]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho):
    return _entropy_sum(eigvalsh(rho))


def relative_entropy(rho, sigma):
    """ D(rho || sigma) = Tr rho (ln rho - ln sigma) in nats, with 0 log 0 = 0 """
    decomposition = hermitian_eig(sigma, check=False)
    if decomposition.eigenvalues.min() < ZERO_EIGENVALUE:
        raise SupportViolation(f'Reference state has eigenvalue {decomposition.eigenvalues.min():.3e}')
    v = decomposition.eigenvectors
    log_sigma = (v * np.log(decomposition.eigenvalues)) @ v.conj().T
    return -von_neumann_entropy(rho) - energy(rho, log_sigma)


def bloch_vector(rho):
    if rho.shape != (2, 2):
        raise UnsupportedSize(f'Bloch vector needs a single qubit, got shape {rho.shape}')
    return np.array([energy(rho, pauli(axis)) for axis in 'xyz'])


def cycle_metrics(spec, branch, theta, mode='local'):
    if branch.state is None:
        raise NullBranch(f'Branch {branch.label!r} has probability {branch.probability:.3e} and no state')
    h = build_hamiltonian(spec)
    rho_th = thermal_state(spec)

    e_initial = energy(rho_th, h)
    e_measured = energy(branch.state, h)
    rho_f = apply_feedback(branch.state, feedback_unitary(theta, mode, spec.n_sites))
    e_feedback = energy(rho_f, h)

    work_extracted = e_measured - e_feedback
    work_erasure = relative_entropy(rho_f, rho_th) / spec.beta
    efficiency = None
    if abs(e_measured) > UNDEFINED_EFFICIENCY:
        efficiency = (work_extracted - work_erasure) / e_measured
    return CycleMetrics(e_initial, e_measured, e_feedback, work_extracted, work_erasure, efficiency)


def average_metrics(metrics, probabilities):
    """ Probability-weighted cycle over branches """
    weights = np.asarray(probabilities, dtype=float)
    weights = weights / weights.sum()

    def mean(name):
        return float(np.dot(weights, [getattr(m, name) for m in metrics]))

    e_measured = mean('e_measured')
    work_extracted = mean('work_extracted')
    work_erasure = mean('work_erasure')
    efficiency = None
    if abs(e_measured) > UNDEFINED_EFFICIENCY:
        efficiency = (work_extracted - work_erasure) / e_measured
    return CycleMetrics(metrics[0].e_initial, e_measured, mean('e_feedback'),
                        work_extracted, work_erasure, efficiency)
