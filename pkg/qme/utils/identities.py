#
# For licensing see accompanying LICENSE file.
#

from dataclasses import dataclass

import numpy as np
from loguru import logger

from qme.engine import (
    DetectorSpec,
    SystemSpec,
    apply_feedback,
    bloch_vector,
    build_hamiltonian,
    energy,
    global_feedback_unitary,
    kraus_pair,
    local_feedback_unitary,
    local_rotation,
    measure,
    relative_entropy,
    thermal_state,
    von_neumann_entropy,
)
from qme.linalg import pauli
from qme.optimizer import single_qubit_optimum


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_error: float
    tol: float

    @property
    def passed(self):
        return bool(self.max_error < self.tol)

    def to_dict(self):
        return {'name': self.name, 'max_error': self.max_error, 'tol': self.tol, 'passed': self.passed}


def random_density_matrix(dim, rng, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _max_error(pairs):
    return float(max(np.max(np.abs(lhs - rhs)) for lhs, rhs in pairs))


def _conjugate(u, op):
    return u.conj().T @ op @ u


def run_identities(n_samples=100, seed=0):
    """ Pauli and feedback conjugation identities plus cycle consistency checks """
    rng = np.random.default_rng(seed)
    sx, sy, sz, eye = pauli('x'), pauli('y'), pauli('z'), pauli('identity')
    angles = rng.uniform(-np.pi, np.pi, size=(n_samples, 2))
    checks = [IdentityCheck('sy sz = i sx', _max_error([(sy @ sz, 1j * sx)]), 1e-12)]

    one_body = []
    for theta in angles[:, 0]:
        u = local_rotation(theta)
        one_body.append((_conjugate(u, sx), np.cos(theta) * sx + np.sin(theta) * sz))
        one_body.append((_conjugate(u, sz), -np.sin(theta) * sx + np.cos(theta) * sz))
    checks.append(IdentityCheck('local one-body rotation', _max_error(one_body), 1e-12))

    two_body = []
    for t1, t2 in angles:
        u = local_feedback_unitary([t1, t2])
        rz1 = np.cos(t1) * sz - np.sin(t1) * sx
        rz2 = np.cos(t2) * sz - np.sin(t2) * sx
        rx1 = np.cos(t1) * sx + np.sin(t1) * sz
        two_body.append((_conjugate(u, np.kron(sz, sz)), np.kron(rz1, rz2)))
        two_body.append((_conjugate(u, np.kron(sx, sz)), np.kron(rx1, rz2)))
    checks.append(IdentityCheck('local two-body rotation', _max_error(two_body), 1e-12))

    global_pairs = []
    for theta in angles[:, 0]:
        u = global_feedback_unitary(theta)
        c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
        global_pairs.append((_conjugate(u, np.kron(sz, eye)), c2 * np.kron(sz, eye) - s2 * np.kron(sx, sy)))
        global_pairs.append((_conjugate(u, np.kron(eye, sz)), c2 * np.kron(eye, sz) - s2 * np.kron(sy, sx)))
        global_pairs.append((_conjugate(u, np.kron(sz, sz)), np.kron(sz, sz)))
    checks.append(IdentityCheck('global sy sy rotation', _max_error(global_pairs), 1e-12))

    completeness = []
    for n_sites in (1, 2, 3):
        for kappa in np.round(np.linspace(0.0, 1.0, 11), 12):
            plus, minus = kraus_pair(DetectorSpec(1 + int(rng.integers(n_sites)), kappa), n_sites)
            completeness.append((plus.conj().T @ plus + minus.conj().T @ minus, np.eye(2 ** n_sites)))
    checks.append(IdentityCheck('Kraus completeness', _max_error(completeness), 1e-12))

    alignment, cyclicity, erasure = [], [], []
    for kappa, beta in zip(rng.uniform(0.05, 0.95, size=n_samples), rng.uniform(0.25, 4.0, size=n_samples)):
        spec = SystemSpec(1, (0.5,), (), beta)
        branch = measure(thermal_state(spec), [DetectorSpec(1, kappa)], check=False)[0]
        theta, _ = single_qubit_optimum(branch.state, spec)
        x, _, z = bloch_vector(apply_feedback(branch.state, local_feedback_unitary([theta])))
        b, _, a = bloch_vector(branch.state)
        alignment.append(max(abs(x), abs(z + np.hypot(a, b))))

    for _ in range(n_samples):
        eps = rng.uniform(-0.5, 0.5, size=2)
        spec = SystemSpec.two_qubit(eps, rng.uniform(-0.5, 0.5), rng.uniform(0.25, 4.0))
        h, rho_th = build_hamiltonian(spec), thermal_state(spec)
        rho_m = random_density_matrix(4, rng)
        u = local_feedback_unitary(rng.uniform(-np.pi, np.pi, size=2))
        rho_f = apply_feedback(rho_m, u)
        cyclicity.append(abs(energy(rho_f, h) - energy(rho_m, _conjugate(u, h))))
        lhs = relative_entropy(rho_f, rho_th)
        rhs = spec.beta * (energy(rho_f, h) - energy(rho_th, h)) + von_neumann_entropy(rho_th) - von_neumann_entropy(rho_f)
        erasure.append(abs(lhs - rhs))

    checks.append(IdentityCheck('single-qubit Bloch alignment', float(max(alignment)), 1e-8))
    checks.append(IdentityCheck('trace cyclicity', float(max(cyclicity)), 1e-10))
    checks.append(IdentityCheck('erasure work decomposition', float(max(erasure)), 1e-10))

    for check in checks:
        if not check.passed:
            logger.warning(f'Identity check failed: {check.name} (max error {check.max_error:.3e})')
    return checks
