#
# For licensing see accompanying LICENSE file.
#

import numpy as np

from qme.cfg.constants import DEGENERATE_EIGENVALUE, FLAT_TOL, HESSIAN_STEP
from qme.engine import (
    build_hamiltonian,
    energy,
    global_feedback_unitary,
    local_feedback_unitary,
    local_rotation,
)
from qme.errors import ShapeMismatch, UnsupportedSize
from qme.linalg import embed_site, kron_all, n_sites_of, pauli, site_mask, z_signs


class FeedbackLandscape:
    """ E_F over local feedback angles, evaluated from the correlators of rho_M.

    Every rotated term of the Ising Hamiltonian is a product of at most two
    one-body rotations, so

        E_F = 1/2 + sum_j eps_j/2 (c_j <z_j> - s_j <x_j>)
              + sum_{j<k} D_jk (c_j c_k <z_j z_k> - c_j s_k <z_j x_k>
                                - s_j c_k <x_j z_k> + s_j s_k <x_j x_k>)

    with c_j = cos(theta_j), s_j = sin(theta_j). All methods accept angle
    arrays of shape (..., n_sites).
    """

    def __init__(self, rho_m, spec):
        n = spec.n_sites
        if n_sites_of(rho_m) != n:
            raise ShapeMismatch(f'State acts on {n_sites_of(rho_m)} sites, system has {n}')
        self.n_sites = n
        self.epsilon = np.asarray(spec.epsilon, dtype=float)
        coupling = spec.coupling_matrix()

        signs = z_signs(n).astype(float)
        index = np.arange(2 ** n)
        masks = [site_mask(j, n) for j in range(1, n + 1)]
        diagonal = rho_m.diagonal().real
        # flipped[j, b] = rho[b, b ^ m_j]
        flipped = np.stack([rho_m[index, index ^ m].real for m in masks])

        self.z = signs @ diagonal
        self.x = flipped.sum(axis=1)
        zz = (signs * diagonal) @ signs.T
        xz = flipped @ signs.T
        xx = np.array([[rho_m[index, index ^ mj ^ mk].real.sum() for mk in masks] for mj in masks])
        for corr in (zz, xz, xx):
            np.fill_diagonal(corr, 0.0)

        self.zz, self.xz, self.zx, self.xx = zz, xz, xz.T.copy(), xx
        self._dzz = coupling * zz
        self._dzx = coupling * self.zx
        self._dxz = coupling * xz
        self._dxx = coupling * xx
        self._one_z = 0.5 * self.epsilon * self.z
        self._one_x = 0.5 * self.epsilon * self.x

    @property
    def is_flat(self):
        terms = (self._one_z, self._one_x, self._dzz, self._dzx, self._dxz, self._dxx)
        return all(np.max(np.abs(t), initial=0.0) < FLAT_TOL for t in terms)

    def _angles(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.n_sites:
            raise ShapeMismatch(f'Expected {self.n_sites} angles, got shape {theta.shape}')
        return np.cos(theta), np.sin(theta)

    def energy(self, theta):
        c, s = self._angles(theta)
        one = np.sum(self._one_z * c - self._one_x * s, axis=-1)
        two = (np.einsum('...j,jk,...k->...', c, self._dzz, c)
               - np.einsum('...j,jk,...k->...', c, self._dzx, s)
               - np.einsum('...j,jk,...k->...', s, self._dxz, c)
               + np.einsum('...j,jk,...k->...', s, self._dxx, s))
        return 0.5 + one + 0.5 * two

    @property
    def measured_energy(self):
        return float(self.energy(np.zeros(self.n_sites)))

    def coefficients(self, theta):
        """ (A, B) with E_F(theta_j) = C_j + A_j cos(theta_j) - B_j sin(theta_j) """
        c, s = self._angles(theta)
        a = self._one_z + c @ self._dzz.T - s @ self._dzx.T
        b = self._one_x + c @ self._dxz.T - s @ self._dxx.T
        return a, b

    def coordinate_coefficients(self, theta, j):
        """ (A_j, B_j) for a batch of angle vectors, j counted from 0 """
        c, s = np.cos(theta), np.sin(theta)
        a = self._one_z[j] + c @ self._dzz[j] - s @ self._dzx[j]
        b = self._one_x[j] + c @ self._dxz[j] - s @ self._dxx[j]
        return a, b

    def gradient(self, theta):
        c, s = self._angles(theta)
        a, b = self.coefficients(theta)
        return -(a * s + b * c)

    def hessian(self, theta):
        c, s = self._angles(theta)
        a, b = self.coefficients(theta)
        off = (np.einsum('...j,...k,jk->...jk', s, s, self._dzz)
               + np.einsum('...j,...k,jk->...jk', s, c, self._dzx)
               + np.einsum('...j,...k,jk->...jk', c, s, self._dxz)
               + np.einsum('...j,...k,jk->...jk', c, c, self._dxx))
        diagonal = -(a * c - b * s)
        return off + np.einsum('...j,jk->...jk', diagonal, np.eye(self.n_sites))


class GlobalFeedbackLandscape:
    """ Two-site energy under cos(t) I - i sin(t) sy sy:
    E(t) = 1/2 + D <zz> + K cos 2t - L sin 2t.
    """

    def __init__(self, rho_m, spec):
        if spec.n_sites != 2:
            raise UnsupportedSize(f'Global feedback is defined for two sites, got {spec.n_sites}')
        if n_sites_of(rho_m) != 2:
            raise ShapeMismatch('Global feedback needs a two-site state')
        eps1, eps2 = spec.epsilon
        delta = spec.coupling_matrix()[0, 1]
        sx, sy, sz = pauli('x'), pauli('y'), pauli('z')
        self.a = np.array([energy(rho_m, np.kron(sz, np.eye(2))), energy(rho_m, np.kron(np.eye(2), sz))])
        self.c_xy = energy(rho_m, np.kron(sx, sy))
        self.c_yx = energy(rho_m, np.kron(sy, sx))
        self.c_zz = energy(rho_m, np.kron(sz, sz))
        self.constant = 0.5 + delta * self.c_zz
        self.k = 0.5 * (eps1 * self.a[0] + eps2 * self.a[1])
        self.l = 0.5 * (eps1 * self.c_xy + eps2 * self.c_yx)

    def energy(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.constant + self.k * np.cos(2 * theta) - self.l * np.sin(2 * theta)

    def derivative(self, theta):
        return -2.0 * (self.k * np.sin(2 * theta) + self.l * np.cos(2 * theta))

    def curvature(self, theta):
        return -4.0 * (self.k * np.cos(2 * theta) - self.l * np.sin(2 * theta))

    @property
    def is_flat(self):
        return np.hypot(self.k, self.l) < FLAT_TOL

    def optimum(self):
        if self.is_flat:
            return 0.0
        return 0.5 * float(np.arctan2(self.l, -self.k))


def _full_angles(theta, site, n_sites):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.size == n_sites - 1:
        theta = np.insert(theta, site - 1, 0.0)
    if theta.size != n_sites:
        raise ShapeMismatch(f'Expected {n_sites} or {n_sites - 1} angles, got {theta.size}')
    return theta


def feedback_energy(rho_m, spec, theta):
    """ E_F = Tr(rho_M U^dagger H_S U) """
    u = local_feedback_unitary(theta)
    h_f = u.conj().T @ build_hamiltonian(spec) @ u
    return energy(rho_m, h_f)


def global_feedback_energy(rho_m, spec, theta):
    u = global_feedback_unitary(theta, spec.n_sites)
    h_f = u.conj().T @ build_hamiltonian(spec) @ u
    return energy(rho_m, h_f)


def stationarity_coeffs_analytic(rho_m, spec, site, theta):
    """ (A_j, B_j) from expectations in rho_M with every other site rotated by its angle.

    ``theta`` is either the full angle vector (entry ``site`` ignored) or the
    N-1 angles of the other sites.
    """
    n = spec.n_sites
    theta = _full_angles(theta, site, n)
    rotations = [np.eye(2, dtype=complex) if k == site - 1 else local_rotation(t) for k, t in enumerate(theta)]
    v = kron_all(rotations)
    rho_t = v @ rho_m @ v.conj().T

    coupling = spec.coupling_matrix()
    sz_j = embed_site(pauli('z'), site, n)
    sx_j = embed_site(pauli('x'), site, n)
    a = 0.5 * spec.epsilon[site - 1] * energy(rho_t, sz_j)
    b = 0.5 * spec.epsilon[site - 1] * energy(rho_t, sx_j)
    for k in range(1, n + 1):
        if k == site or coupling[site - 1, k - 1] == 0.0:
            continue
        sz_k = embed_site(pauli('z'), k, n)
        a += coupling[site - 1, k - 1] * energy(rho_t, sz_j @ sz_k)
        b += coupling[site - 1, k - 1] * energy(rho_t, sx_j @ sz_k)
    return a, b


def stationarity_coeffs_numeric(rho_m, spec, site, theta):
    """ (A_j, B_j) read off four evaluations of E_F along coordinate ``site`` """
    theta = _full_angles(theta, site, spec.n_sites)

    def at(value):
        probe = theta.copy()
        probe[site - 1] = value
        return feedback_energy(rho_m, spec, probe)

    a = 0.5 * (at(0.0) - at(np.pi))
    b = 0.5 * (at(1.5 * np.pi) - at(0.5 * np.pi))
    return a, b


def gradient(rho_m, spec, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    grad = np.empty(spec.n_sites)
    for j in range(spec.n_sites):
        a, b = stationarity_coeffs_analytic(rho_m, spec, j + 1, theta)
        grad[j] = -(a * np.sin(theta[j]) + b * np.cos(theta[j]))
    return grad


def finite_difference_hessian(energy_fn, theta, step=HESSIAN_STEP):
    """ Central second differences of a batched energy function """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    eye = np.eye(n) * step
    probes = [theta]
    for j in range(n):
        probes += [theta + eye[j], theta - eye[j]]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    for j, k in pairs:
        probes += [theta + eye[j] + eye[k], theta + eye[j] - eye[k],
                   theta - eye[j] + eye[k], theta - eye[j] - eye[k]]
    values = np.asarray(energy_fn(np.stack(probes)), dtype=float)

    center = values[0]
    result = np.empty((n, n))
    for j in range(n):
        result[j, j] = (values[1 + 2 * j] - 2.0 * center + values[2 + 2 * j]) / step ** 2
    offset = 1 + 2 * n
    for p, (j, k) in enumerate(pairs):
        pp, pm, mp, mm = values[offset + 4 * p: offset + 4 * p + 4]
        result[j, k] = result[k, j] = (pp - pm - mp + mm) / (4.0 * step ** 2)
    return result


def hessian(rho_m, spec, theta, step=HESSIAN_STEP):
    return finite_difference_hessian(FeedbackLandscape(rho_m, spec).energy, theta, step)


def classify(hessian_matrix, tol=DEGENERATE_EIGENVALUE):
    eigenvalues = np.linalg.eigvalsh(hessian_matrix)
    if np.any(np.abs(eigenvalues) < tol):
        return 'degenerate'
    if np.all(eigenvalues > 0):
        return 'minimum'
    if np.all(eigenvalues < 0):
        return 'maximum'
    return 'saddle'
