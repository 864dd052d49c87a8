#
# For licensing see accompanying LICENSE file.
#

import numpy as np
import pytest

from qme.engine import (
    DetectorSpec,
    MeasurementBranch,
    SystemSpec,
    apply_feedback,
    average_metrics,
    bloch_vector,
    build_hamiltonian,
    cycle_metrics,
    energy,
    exchange_classes,
    global_feedback_unitary,
    kraus_pair,
    local_feedback_unitary,
    measure,
    relative_entropy,
    select_branch,
    spectrum_and_gap,
    thermal_state,
    two_qubit_gap,
    unconditional_state,
    von_neumann_entropy,
)
from qme.engine.system import thermal_populations
from qme.errors import (
    BadSite,
    BadStrength,
    NullBranch,
    NumericalDrift,
    ShapeMismatch,
    SizeLimit,
    SupportViolation,
    UnsupportedSize,
    ValidationError,
)
from qme.linalg import embed_site, is_density_matrix, is_unitary, pauli
from qme.utils.identities import random_density_matrix


def piecewise_gap(delta):
    if delta <= -0.25:
        return 1.0
    if delta <= 0.25:
        return 0.5 - 2.0 * delta
    return 2.0 * delta - 0.5


# system

def test_hamiltonian_known_values():
    np.testing.assert_allclose(build_hamiltonian(SystemSpec(1, (0.5,))), np.diag([0.75, 0.25]))
    np.testing.assert_allclose(build_hamiltonian(SystemSpec.two_qubit((0.5, 0.5), 0.3)).diagonal().real,
                               [1.3, 0.2, 0.2, 0.3], atol=1e-15)
    np.testing.assert_allclose(build_hamiltonian(SystemSpec.two_qubit((0.5, 0.5), 0.0)),
                               np.diag([1.0, 0.5, 0.5, 0.0]), atol=1e-15)


def test_hamiltonian_is_read_only():
    h = build_hamiltonian(SystemSpec(1, (0.5,)))
    with pytest.raises(ValueError):
        h[0, 0] = 1.0


def test_system_spec_validation():
    with pytest.raises(ValidationError) as info:
        SystemSpec(2, (0.1, 0.2), [(2, 1, 0.1)])
    assert info.value.field == 'system.coupling[0]'
    with pytest.raises(ValidationError) as info:
        SystemSpec(2, (0.1, 0.2), [(1, 2, 0.1), (1, 2, 0.3)])
    assert info.value.field == 'system.coupling[1]'
    with pytest.raises(ValidationError) as info:
        SystemSpec(1, (0.5,), (), beta=0.0)
    assert info.value.field == 'system.beta'
    with pytest.raises(ValidationError) as info:
        SystemSpec(2, (0.5,))
    assert info.value.field == 'system.epsilon'
    with pytest.raises(SizeLimit):
        SystemSpec(13, (0.1,) * 13)


def test_system_spec_accepts_mapping_coupling():
    spec = SystemSpec(3, (0.1, 0.2, 0.3), {(2, 3): -0.1, (1, 2): 0.2})
    assert spec.coupling == ((1, 2, 0.2), (2, 3, -0.1))
    matrix = spec.coupling_matrix()
    np.testing.assert_array_equal(matrix, matrix.T)
    assert spec.temperature == pytest.approx(1.0)


def test_thermal_state_known_values():
    flat = thermal_state(SystemSpec(2, (0.0, 0.0), (), 3.0))
    np.testing.assert_allclose(flat, np.eye(4) / 4, atol=1e-15)

    rho = thermal_state(SystemSpec(1, (0.5,), (), 2.0))
    weights = np.array([np.exp(-1.5), np.exp(-0.5)])
    np.testing.assert_allclose(rho, np.diag(weights / weights.sum()), atol=1e-15)

    spec = SystemSpec.two_qubit((0.5, 0.5), 0.3)
    levels = np.array([1.3, 0.2, 0.2, 0.3])
    gibbs = np.exp(-levels)
    expected = float(np.dot(levels, gibbs) / gibbs.sum())
    assert energy(thermal_state(spec), build_hamiltonian(spec)) == pytest.approx(expected, abs=1e-12)
    assert is_density_matrix(thermal_state(spec))


def test_two_qubit_spectrum_and_gap():
    for delta in np.round(np.linspace(-0.6, 0.6, 121), 12):
        eigenvalues, gap = spectrum_and_gap(SystemSpec.two_qubit((0.5, 0.5), delta))
        expected = sorted([1.0 + delta, 0.5 - delta, 0.5 - delta, delta])
        np.testing.assert_allclose(eigenvalues, expected, atol=1e-12)
        assert gap == pytest.approx(piecewise_gap(delta), abs=1e-12)
        assert two_qubit_gap((0.5, 0.5), delta) == pytest.approx(piecewise_gap(delta), abs=1e-12)


def test_gap_known_values():
    assert spectrum_and_gap(SystemSpec.two_qubit((0.5, 0.5), -0.5))[1] == pytest.approx(1.0)
    assert spectrum_and_gap(SystemSpec.two_qubit((0.5, 0.5), 0.0))[1] == pytest.approx(0.5)
    assert spectrum_and_gap(SystemSpec.two_qubit((0.5, 0.5), 0.25))[1] == pytest.approx(0.0, abs=1e-12)
    slope = (spectrum_and_gap(SystemSpec.two_qubit((0.5, 0.5), 0.5))[1]
             - spectrum_and_gap(SystemSpec.two_qubit((0.5, 0.5), 0.4))[1]) / 0.1
    assert slope == pytest.approx(2.0, abs=1e-10)


def test_gap_of_detuned_pair_matches_labelled_levels():
    for delta in (-0.3, -0.1, 0.0, 0.2):
        _, gap = spectrum_and_gap(SystemSpec.two_qubit((0.05, 0.10), delta))
        assert gap == pytest.approx(two_qubit_gap((0.05, 0.10), delta), abs=1e-12)


def test_exchange_classes():
    assert exchange_classes(SystemSpec.two_qubit((0.5, 0.5), 0.1)) == [[0, 1]]
    assert exchange_classes(SystemSpec.two_qubit((0.5, 0.4), 0.1)) == [[0], [1]]
    chain = SystemSpec(3, (0.2, 0.2, 0.2), [(1, 2, 0.1), (2, 3, 0.1)])
    assert exchange_classes(chain) == [[0, 2], [1]]


# measurement

def test_detector_validation():
    with pytest.raises(BadStrength):
        DetectorSpec(1, 1.5)
    with pytest.raises(BadStrength):
        DetectorSpec(1, float('nan'))
    with pytest.raises(BadSite):
        DetectorSpec(0, 0.3)


def test_kraus_pair_limits():
    plus, minus = kraus_pair(DetectorSpec(1, 0.5), 1)
    np.testing.assert_allclose(plus, np.eye(2) / np.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(minus, np.eye(2) / np.sqrt(2), atol=1e-15)

    plus, minus = kraus_pair(DetectorSpec(1, 1.0), 1)
    np.testing.assert_allclose(plus, 0.5 * (np.eye(2) + pauli('x')), atol=1e-15)
    np.testing.assert_allclose(minus, 0.5 * (np.eye(2) - pauli('x')), atol=1e-15)

    plus, minus = kraus_pair(DetectorSpec(1, 0.0), 1)
    np.testing.assert_allclose(plus, 0.5 * (np.eye(2) - pauli('x')), atol=1e-15)


def test_kraus_completeness():
    for n_sites in (1, 2, 3):
        for site in range(1, n_sites + 1):
            for kappa in np.linspace(0.0, 1.0, 11):
                plus, minus = kraus_pair(DetectorSpec(site, kappa), n_sites)
                total = plus.conj().T @ plus + minus.conj().T @ minus
                np.testing.assert_allclose(total, np.eye(2 ** n_sites), atol=1e-12)


def test_kraus_strength_reflection():
    for kappa in (0.1, 0.3, 0.45):
        plus, minus = kraus_pair(DetectorSpec(2, kappa), 2)
        plus_r, minus_r = kraus_pair(DetectorSpec(2, 1.0 - kappa), 2)
        np.testing.assert_allclose(plus_r, minus, atol=1e-12)
        np.testing.assert_allclose(minus_r, plus, atol=1e-12)


def test_measure_without_detectors():
    rho = thermal_state(SystemSpec(1, (0.5,)))
    branches = measure(rho, [])
    assert len(branches) == 1
    assert branches[0].label == ''
    assert branches[0].probability == pytest.approx(1.0)
    np.testing.assert_allclose(branches[0].state, rho, atol=1e-15)


def test_trivial_measurement_keeps_the_state():
    spec = SystemSpec.two_qubit((0.5, 0.5), 0.1)
    rho = thermal_state(spec)
    branches = measure(rho, [DetectorSpec(1, 0.5)])
    assert [b.label for b in branches] == ['+', '-']
    for branch in branches:
        assert branch.probability == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(branch.state, rho, atol=1e-12)


def test_projective_measurement_of_maximally_mixed_qubit():
    branch = select_branch(measure(np.eye(2) / 2, [DetectorSpec(1, 1.0)]), '+')
    assert branch.probability == pytest.approx(0.5)
    np.testing.assert_allclose(branch.state, 0.5 * (np.eye(2) + pauli('x')), atol=1e-12)


def test_zero_probability_branch_is_null():
    plus_state = 0.5 * (np.eye(2) + pauli('x'))
    branches = measure(plus_state, [DetectorSpec(1, 1.0)])
    minus = select_branch(branches, '-')
    assert minus.is_null
    assert minus.state is None
    assert minus.probability == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(NullBranch):
        cycle_metrics(SystemSpec(1, (0.5,)), minus, [0.0])


def test_measure_rejects_invalid_state():
    with pytest.raises(ValidationError):
        measure(np.diag([1.2, -0.2]).astype(complex), [DetectorSpec(1, 0.3)])


def test_branch_probabilities_and_states(rng):
    rho = random_density_matrix(8, rng)
    detectors = [DetectorSpec(1, 0.2), DetectorSpec(3, 0.7), DetectorSpec(1, 0.9)]
    branches = measure(rho, detectors)
    assert len(branches) == 8
    assert sum(b.probability for b in branches) == pytest.approx(1.0, abs=1e-10)
    for branch in branches:
        assert len(branch.label) == 3
        assert is_density_matrix(branch.state)

    mixture = sum(b.probability * b.state for b in branches)
    np.testing.assert_allclose(unconditional_state(rho, detectors), mixture, atol=1e-12)
    assert np.trace(mixture).real == pytest.approx(1.0, abs=1e-12)


def test_unconditional_state_known_values():
    rho = thermal_state(SystemSpec(1, (0.5,)))
    np.testing.assert_allclose(unconditional_state(rho, [DetectorSpec(1, 0.5)]), rho, atol=1e-12)
    np.testing.assert_allclose(unconditional_state(np.diag([1.0, 0.0]), [DetectorSpec(1, 1.0)]),
                               np.eye(2) / 2, atol=1e-12)


def test_detector_order_on_distinct_sites_is_irrelevant(coupled_spec):
    rho = thermal_state(coupled_spec)
    forward = {b.label: b for b in measure(rho, [DetectorSpec(1, 0.2), DetectorSpec(2, 0.35)])}
    backward = {b.label: b for b in measure(rho, [DetectorSpec(2, 0.35), DetectorSpec(1, 0.2)])}
    for label, branch in forward.items():
        swapped = backward[label[::-1]]
        assert swapped.probability == pytest.approx(branch.probability, abs=1e-14)
        np.testing.assert_allclose(swapped.state, branch.state, atol=1e-12)


# feedback

def test_local_feedback_known_values():
    np.testing.assert_allclose(local_feedback_unitary([0.0, 0.0]), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(local_feedback_unitary([np.pi]), -1j * pauli('y'), atol=1e-12)
    u = local_feedback_unitary([np.pi / 2, 0.0])
    z1, x1 = embed_site(pauli('z'), 1, 2), embed_site(pauli('x'), 1, 2)
    np.testing.assert_allclose(u.conj().T @ z1 @ u, -x1, atol=1e-12)


def test_local_feedback_is_unitary(rng):
    for theta in rng.uniform(-np.pi, np.pi, size=(10, 3)):
        assert is_unitary(local_feedback_unitary(theta))


def test_global_feedback_known_values(rng):
    np.testing.assert_allclose(global_feedback_unitary(0.0), np.eye(4), atol=1e-15)
    u = global_feedback_unitary(np.pi / 4)
    np.testing.assert_allclose(u.conj().T @ np.kron(pauli('z'), np.eye(2)) @ u,
                               -np.kron(pauli('x'), pauli('y')), atol=1e-12)
    zz = np.kron(pauli('z'), pauli('z'))
    for theta in rng.uniform(-np.pi, np.pi, size=10):
        u = global_feedback_unitary(theta)
        assert is_unitary(u)
        np.testing.assert_allclose(u.conj().T @ zz @ u, zz, atol=1e-12)
    with pytest.raises(UnsupportedSize):
        global_feedback_unitary(0.1, n_sites=3)


def test_apply_feedback_preserves_spectrum(rng):
    rho = random_density_matrix(4, rng)
    u = local_feedback_unitary(rng.uniform(-np.pi, np.pi, size=2))
    rho_f = apply_feedback(rho, u)
    np.testing.assert_allclose(np.linalg.eigvalsh(rho_f), np.linalg.eigvalsh(rho), atol=1e-12)
    assert np.trace(rho_f @ rho_f).real == pytest.approx(np.trace(rho @ rho).real, abs=1e-12)
    np.testing.assert_allclose(apply_feedback(rho, np.eye(4)), rho, atol=1e-15)
    with pytest.raises(ShapeMismatch):
        apply_feedback(rho, np.eye(2))


def test_trace_cyclicity(rng, random_instance):
    spec, rho = random_instance(2)
    h = build_hamiltonian(spec)
    u = local_feedback_unitary(rng.uniform(-np.pi, np.pi, size=2))
    assert energy(apply_feedback(rho, u), h) == pytest.approx(energy(rho, u.conj().T @ h @ u), abs=1e-10)


# thermodynamics

def test_energy_known_values():
    assert energy(np.eye(2) / 2, pauli('z')) == pytest.approx(0.0)
    assert energy(np.diag([1.0, 0.0]), np.diag([0.75, 0.25])) == pytest.approx(0.75)
    with pytest.raises(NumericalDrift):
        energy(np.array([[0.5, 1j], [0.0, 0.5]]), pauli('x'))
    with pytest.raises(ShapeMismatch):
        energy(np.eye(2) / 2, np.eye(4))


def test_energy_respects_ground_state(rng, random_instance):
    spec, rho = random_instance(3)
    h = build_hamiltonian(spec)
    assert energy(rho, h) >= h.diagonal().real.min() - 1e-12


def test_relative_entropy_known_values(rng):
    rho = random_density_matrix(4, rng)
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)
    assert relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(np.log(2.0), abs=1e-12)
    for _ in range(100):
        assert relative_entropy(random_density_matrix(2, rng), random_density_matrix(2, rng)) >= -1e-12
    with pytest.raises(SupportViolation):
        relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0]))


def test_entropy_and_bloch_vector():
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(np.log(2.0))
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(bloch_vector(0.5 * (np.eye(2) + pauli('x'))), [1.0, 0.0, 0.0], atol=1e-15)
    with pytest.raises(UnsupportedSize):
        bloch_vector(np.eye(4) / 4)


def test_erasure_work_decomposition(rng, random_instance):
    spec, rho = random_instance(2)
    rho_th = thermal_state(spec)
    h = build_hamiltonian(spec)
    lhs = relative_entropy(rho, rho_th)
    rhs = spec.beta * (energy(rho, h) - energy(rho_th, h)) + von_neumann_entropy(rho_th) - von_neumann_entropy(rho)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_cycle_metrics_vanish_for_trivial_measurement(coupled_spec):
    branches = measure(thermal_state(coupled_spec), [DetectorSpec(1, 0.5), DetectorSpec(2, 0.5)])
    for branch in branches:
        metrics = cycle_metrics(coupled_spec, branch, [0.0, 0.0])
        assert metrics.work_extracted == pytest.approx(0.0, abs=1e-12)
        assert metrics.work_erasure == pytest.approx(0.0, abs=1e-12)
        assert metrics.efficiency == pytest.approx(0.0, abs=1e-12)


def test_identity_feedback_only_pays_erasure(surface_spec, surface_branch):
    metrics = cycle_metrics(surface_spec, surface_branch, [0.0, 0.0])
    assert metrics.work_extracted == pytest.approx(0.0, abs=1e-12)
    expected = relative_entropy(surface_branch.state, thermal_state(surface_spec)) / surface_spec.beta
    assert metrics.work_erasure == pytest.approx(expected, abs=1e-12)
    assert metrics.work_erasure >= 0
    assert metrics.efficiency <= 0


def test_cycle_metrics_invariants(surface_spec, surface_branch):
    metrics = cycle_metrics(surface_spec, surface_branch, [-1.1, 0.4])
    assert metrics.work_extracted == pytest.approx(metrics.e_measured - metrics.e_feedback, abs=1e-12)
    assert metrics.work_erasure >= -1e-12
    expected = (metrics.work_extracted - metrics.work_erasure) / metrics.e_measured
    assert metrics.efficiency == pytest.approx(expected, abs=1e-12)
    assert metrics.net_work == pytest.approx(metrics.work_extracted - metrics.work_erasure)
    assert set(metrics.to_dict()) == {'e_initial', 'e_measured', 'e_feedback', 'work_extracted',
                                      'work_erasure', 'efficiency'}


def test_gibbs_fixed_point():
    spec = SystemSpec.two_qubit((0.5, 0.3), -0.1)
    branch = measure(thermal_state(spec), [])[0]
    metrics = cycle_metrics(spec, branch, [0.0, 0.0])
    assert metrics.work_extracted == pytest.approx(0.0, abs=1e-12)
    assert metrics.work_erasure == pytest.approx(0.0, abs=1e-12)
    assert metrics.efficiency == pytest.approx(0.0, abs=1e-12)
    assert metrics.e_measured == pytest.approx(metrics.e_initial, abs=1e-12)


def test_efficiency_undefined_at_zero_measured_energy():
    spec = SystemSpec(1, (1.0,))
    state = np.diag([0.0, 1.0]).astype(complex)
    branch = MeasurementBranch('+', 1.0, state, np.eye(2, dtype=complex))
    metrics = cycle_metrics(spec, branch, [0.0])
    assert metrics.e_measured == pytest.approx(0.0, abs=1e-15)
    assert metrics.efficiency is None


def test_global_mode_cycle(surface_spec, surface_branch):
    metrics = cycle_metrics(surface_spec, surface_branch, [0.3], mode='global')
    u = global_feedback_unitary(0.3)
    h = build_hamiltonian(surface_spec)
    assert metrics.e_feedback == pytest.approx(energy(apply_feedback(surface_branch.state, u), h), abs=1e-12)
    with pytest.raises(ShapeMismatch):
        cycle_metrics(surface_spec, surface_branch, [0.3])


def test_average_metrics(surface_spec):
    branches = measure(thermal_state(surface_spec), [DetectorSpec(1, 0.2), DetectorSpec(2, 0.2)])
    metrics = [cycle_metrics(surface_spec, b, [0.2, -0.3]) for b in branches]
    probabilities = [b.probability for b in branches]
    average = average_metrics(metrics, probabilities)
    expected_work = sum(p * m.work_extracted for p, m in zip(probabilities, metrics))
    assert average.work_extracted == pytest.approx(expected_work, abs=1e-12)
    assert average.efficiency == pytest.approx(
        (average.work_extracted - average.work_erasure) / average.e_measured, abs=1e-12)


def test_caches_hold_diagonals_only():
    spec = SystemSpec.two_qubit((0.05, 0.10), -0.2)
    first, second = thermal_state(spec), thermal_state(spec)
    assert first is not second
    np.testing.assert_array_equal(first, second)
    assert thermal_populations(spec) is thermal_populations(spec)
    assert thermal_populations(spec).shape == (4,)
    assert thermal_populations.cache_info().maxsize <= 64
    np.testing.assert_allclose(np.diag(thermal_state(spec)).real, thermal_populations(spec), atol=1e-15)
    with pytest.raises(ValueError):
        first[0, 0] = 1.0
