"""Quadratic bosonic Hamiltonians and their Gaussian ground states.

A form represents

    H = sum_ij A_ij a_i^dag a_j
      + (1/2) sum_ij (B_ij a_i^dag a_j^dag + B_ij^* a_j a_i)
      + offset

with A Hermitian (particle conserving) and B symmetric (anomalous).

Conventions: quadratures x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2),
vacuum covariance diag(1/2, ..., 1/2), covariances stored in the interleaved
ordering (x_1, p_1, ..., x_n, p_n), entropies in bits (log base 2).

Diagonalization goes through the 2n x 2n real Hamiltonian matrix M in the
quadrature representation, H = (1/2) xi^T M xi - (1/2) tr A + offset, which is
robust in the presence of zero modes: a form is stable exactly when M is
positive semidefinite, and a zero Williamson value of M signals a Goldstone
mode rather than a crash.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadPartition, Unstable

HERMITICITY_TOL = 1e-12
STABILITY_TOL = 1e-9
VACUUM_NU_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticBosonForm:
    conserving: np.ndarray
    anomalous: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.conserving, dtype=complex))
        b = np.atleast_2d(np.asarray(self.anomalous, dtype=complex))
        if a.shape != b.shape or a.shape[0] != a.shape[1]:
            raise ValueError(f"block shapes must match and be square, got {a.shape} and {b.shape}")
        scale = max(1.0, np.abs(a).max(), np.abs(b).max())
        if np.abs(a - a.conj().T).max() > HERMITICITY_TOL * scale:
            raise ValueError("conserving block is not Hermitian")
        if np.abs(b - b.T).max() > HERMITICITY_TOL * scale:
            raise ValueError("anomalous block is not symmetric")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "conserving", a)
        object.__setattr__(self, "anomalous", b)

    @property
    def n_modes(self) -> int:
        return self.conserving.shape[0]


@dataclass(frozen=True)
class SymplecticSpectrum:
    mode_energies: np.ndarray  # ascending; >= 0 when stable
    stable: bool


@dataclass(frozen=True)
class GaussianGround:
    covariance: np.ndarray = field(repr=False)  # (2n, 2n), interleaved quadratures
    ground_energy: float = 0.0

    @property
    def n_modes(self) -> int:
        return self.covariance.shape[0] // 2


def symplectic_form(n: int) -> np.ndarray:
    """Omega in the xxpp ordering: [x, p] blocks with [x_i, p_j] = i delta_ij."""
    omega = np.zeros((2 * n, 2 * n))
    omega[:n, n:] = np.eye(n)
    omega[n:, :n] = -np.eye(n)
    return omega


def _interleave_perm(n: int) -> np.ndarray:
    # xxpp index k -> interleaved position: x_k at 2k, p_k at 2k+1
    perm = np.empty(2 * n, dtype=int)
    perm[0::2] = np.arange(n)
    perm[1::2] = np.arange(n) + n
    return perm


def hamiltonian_matrix(form: QuadraticBosonForm) -> np.ndarray:
    """Real symmetric M with H = (1/2) xi^T M xi - (1/2) tr A + offset (xxpp order)."""
    a, b = form.conserving, form.anomalous
    m_xx = a.real + b.real
    m_pp = a.real - b.real
    m_xp = -a.imag + b.imag
    m_px = a.imag + b.imag
    m = np.block([[m_xx, m_xp], [m_px, m_pp]])
    return 0.5 * (m + m.T)  # kill rounding asymmetry


def _psd_sqrt(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Square root and eigenvalues of a (nearly) PSD symmetric matrix."""
    w, v = np.linalg.eigh(matrix)
    wc = np.clip(w, 0.0, None)
    return (v * np.sqrt(wc)) @ v.T, w


def williamson_values(matrix: np.ndarray) -> np.ndarray:
    """Williamson (symplectic) eigenvalues of a PSD matrix in xxpp ordering."""
    n = matrix.shape[0] // 2
    root, _ = _psd_sqrt(matrix)
    herm = 1j * root @ symplectic_form(n) @ root
    vals = np.linalg.eigvalsh(herm)
    return np.sort(vals[n:])  # the positive half of the +-nu pairs


def diagonalize(form: QuadraticBosonForm) -> SymplecticSpectrum:
    """Bogoliubov normal-mode energies of the form.

    Stability means the quadrature Hamiltonian matrix is positive
    semidefinite; unstable forms (a mode energy would turn negative or
    complex) are reported with ``stable=False``, never raised.  A zero mode
    inside an otherwise stable spectrum marks a Goldstone direction.
    """
    m = hamiltonian_matrix(form)
    scale = max(1.0, np.abs(m).max())
    eigs = np.linalg.eigvalsh(m)
    if eigs.min() < -STABILITY_TOL * scale:
        # report best-effort frequencies from the dynamical matrix (+-i nu pairs)
        n = form.n_modes
        dyn = np.linalg.eigvals(symplectic_form(n) @ m)
        energies = np.sort(np.abs(dyn.imag))[::2]
        return SymplecticSpectrum(energies, stable=False)
    return SymplecticSpectrum(williamson_values(m), stable=True)


def ground_state_covariance(form: QuadraticBosonForm) -> GaussianGround:
    """Covariance of the Bogoliubov vacuum and its energy.

    ground_energy = (1/2)(sum of mode energies - tr A) + offset.
    Raises :class:`Unstable` for unstable forms and for exact zero modes,
    where the vacuum covariance diverges along the Goldstone direction.
    """
    n = form.n_modes
    m = hamiltonian_matrix(form)
    scale = max(1.0, np.abs(m).max())
    root, eigs = _psd_sqrt(m)
    if eigs.min() < -STABILITY_TOL * scale:
        raise Unstable("form is unstable: quadrature Hamiltonian not positive semidefinite")
    herm = 1j * root @ symplectic_form(n) @ root
    vals, vecs = np.linalg.eigh(herm)
    energies = np.sort(vals[n:])
    if energies[0] < STABILITY_TOL * scale:
        raise Unstable("zero-frequency (Goldstone) mode: ground covariance diverges")
    root_inv = np.linalg.inv(root)
    absg = (vecs * np.abs(vals)) @ vecs.conj().T
    cov = 0.5 * (root_inv @ absg @ root_inv).real
    cov = 0.5 * (cov + cov.T)
    perm = _interleave_perm(n)
    cov = cov[np.ix_(perm, perm)]
    energy = 0.5 * (energies.sum() - form.conserving.real.trace()) + form.offset
    return GaussianGround(covariance=cov, ground_energy=float(energy))


def entropy_from_symplectic(nu) -> float:
    """Von Neumann entropy in bits from reduced symplectic eigenvalues.

    Values within VACUUM_NU_TOL of 1/2 contribute exactly zero (the x log x
    limit at the vacuum).
    """
    total = 0.0
    for v in np.atleast_1d(nu):
        if v <= 0.5 + VACUUM_NU_TOL:
            continue
        total += (v + 0.5) * np.log2(v + 0.5) - (v - 0.5) * np.log2(v - 0.5)
    return float(total)


def reduced_symplectic_eigenvalues(ground: GaussianGround, partition) -> np.ndarray:
    part = _checked_partition(ground.n_modes, partition)
    idx = np.ravel([[2 * k, 2 * k + 1] for k in part])
    sub = ground.covariance[np.ix_(idx, idx)]
    # back to xxpp ordering for the Williamson routine
    m = len(part)
    perm = _interleave_perm(m)
    inv = np.argsort(perm)
    return williamson_values(sub[np.ix_(inv, inv)])


def entanglement_entropy(ground: GaussianGround, partition) -> float:
    """Entropy in bits of the reduced state on ``partition`` (mode indices)."""
    return entropy_from_symplectic(reduced_symplectic_eigenvalues(ground, partition))


def is_particle_conserving(form: QuadraticBosonForm, tol: float = 1e-12) -> bool:
    return bool(np.abs(form.anomalous).max() < tol)


def _checked_partition(n_modes: int, partition) -> tuple[int, ...]:
    part = tuple(sorted({int(k) for k in partition}))
    if not part:
        raise BadPartition("partition is empty")
    if part[0] < 0 or part[-1] >= n_modes:
        raise BadPartition(f"mode indices must lie in [0, {n_modes}), got {part}")
    if len(part) >= n_modes:
        raise BadPartition("partition must be a proper subset of the modes")
    return part
