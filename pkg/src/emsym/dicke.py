"""Anisotropic single-mode Dicke model: mean field and quadratic fluctuations.

One boson mode couples to N spin-1/2 particles through a number-conserving
and a counter-rotating channel with independent strengths lambda+/lambda-,
quoted through the dimensionless pair g± = 2 lambda± / sqrt(omega0 Omega):

    H = omega0 a^dag a + Omega J_z
        - (2 lambda+ / sqrt(N)) (a^dag + a) J_x
        + i (2 lambda- / sqrt(N)) (a^dag - a) J_y

The sign of both coupling terms is fixed so that the symmetry-broken minimum
sits at x_bar > 0 with spin azimuth phi = 0.  The opposite-sign convention is
unitarily equivalent under a -> -a; spectra, entropies and phase boundaries
are identical.

Mean-field reduction: a -> sqrt(N Omega / omega0)(X + iP), spins to the polar
angles (theta, phi), which after eliminating the angles reproduces the Landau
potential of :mod:`emsym.landau`.  The quadratic fluctuation expansion around
any displaced/rotated reference (Holstein-Primakoff to quadratic order) is
assembled in :func:`quadratic_expansion`; at the normal/superradiant mean
fields it reduces to the closed forms of :func:`effective_hamiltonian`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NotStationary, OnBoundary
from .landau import CouplingPair, SymmetryClass, classify_symmetry, minimize_mf
from .quadratic import (
    QuadraticBosonForm,
    entanglement_entropy,
    ground_state_covariance,
)

BOUNDARY_TOL = 1e-12
STATIONARY_TOL = 1e-8


class DickePhase(str, Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"


@dataclass(frozen=True)
class DickeParams:
    """Boson frequency omega0, spin splitting, coupling energies, optional N."""

    omega0: float
    omega_spin: float
    lambda_plus: float
    lambda_minus: float
    n_atoms: int | None = None

    def __post_init__(self):
        if self.omega0 <= 0 or self.omega_spin <= 0:
            raise ValueError("omega0 and omega_spin must be positive")

    @classmethod
    def from_couplings(cls, omega0, omega_spin, g_plus, g_minus, n_atoms=None):
        s = math.sqrt(omega0 * omega_spin) / 2.0
        return cls(omega0, omega_spin, g_plus * s, g_minus * s, n_atoms)

    @property
    def g_plus(self) -> float:
        return 2.0 * self.lambda_plus / math.sqrt(self.omega0 * self.omega_spin)

    @property
    def g_minus(self) -> float:
        return 2.0 * self.lambda_minus / math.sqrt(self.omega0 * self.omega_spin)

    def couplings(self) -> CouplingPair:
        return CouplingPair(self.g_plus, self.g_minus)


@dataclass(frozen=True)
class SpinBosonMf:
    """Mean-field solution: boson displacement, spin angles, energy, phase."""

    x_bar: float
    p_bar: float
    theta: float
    phi: float
    energy_per_spin: float
    phase: DickePhase


def spin_boson_energy(c: CouplingPair, x_bar, p_bar, theta, phi) -> float:
    """Dimensionless mean-field energy surface over (x, p, theta, phi).

    Minimizing over the angles reproduces :func:`emsym.landau.mf_energy`.
    """
    s, co = math.sin(theta), math.cos(theta)
    return (
        x_bar * x_bar + p_bar * p_bar
        - c.g_plus * x_bar * s * math.cos(phi)
        + c.g_minus * p_bar * s * math.sin(phi)
        + 0.5 * co
    )


def _spin_angles(c: CouplingPair, x_bar: float, p_bar: float) -> tuple[float, float]:
    k = math.hypot(c.g_plus * x_bar, c.g_minus * p_bar)
    theta = math.pi - math.atan(2.0 * k)
    phi = -math.atan2(c.g_minus * p_bar, c.g_plus * x_bar) % (2.0 * math.pi)
    return theta, phi


def mean_field(params: DickeParams) -> SpinBosonMf:
    """Mean-field solution; normal phase has theta = pi, zero displacement."""
    c = params.couplings()
    sol = minimize_mf(c)
    if c.g_max <= 1.0:
        return SpinBosonMf(0.0, 0.0, math.pi, 0.0,
                           params.omega_spin * sol.energy, DickePhase.NORMAL)
    x, p = sol.minimum.x_bar, sol.minimum.p_bar
    theta, phi = _spin_angles(c, x, p)
    return SpinBosonMf(x, p, theta, phi,
                       params.omega_spin * sol.energy, DickePhase.SUPERRADIANT)


def _expansion_blocks(params: DickeParams, x_bar, p_bar, theta, phi):
    """Second-order blocks around an arbitrary displaced/rotated reference.

    Returns (A, B, lin_a, lin_b, e_mf): the 2x2 conserving and anomalous
    blocks for the modes (a, b), the boson- and spin-linear coefficients per
    sqrt(N) (both vanish at a stationary point), and the dimensionless
    mean-field energy of the reference.
    """
    w0, om = params.omega0, params.omega_spin
    lp, lm = params.lambda_plus, params.lambda_minus
    gp, gm = params.g_plus, params.g_minus
    c, s = math.cos(theta), math.sin(theta)
    cf, sf = math.cos(phi), math.sin(phi)

    # rows w in (x, y, z): R^dag J_w R = sum_v rot[w, v] J_v
    rot = np.array([
        [cf * c, -sf, cf * s],
        [sf * c, cf, sf * s],
        [-s, 0.0, c],
    ])
    # boson-side factors F_w = (scalar, a^dag coeff, a coeff), coeffs * sqrt(N)
    factors = np.array([
        [-2.0 * gp * om * x_bar, -2.0 * lp, -2.0 * lp],
        [+2.0 * gm * om * p_bar, +2.0j * lm, -2.0j * lm],
        [om, 0.0, 0.0],
    ], dtype=complex)
    g_ops = rot.T @ factors  # rows v in (x, y, z): G_v = sum_w rot[w, v] F_w

    a_blk = np.zeros((2, 2), dtype=complex)
    b_blk = np.zeros((2, 2), dtype=complex)
    a_blk[0, 0] = w0
    a_blk[1, 1] = -g_ops[2, 0]  # J_z carries N/2 - b^dag b
    # J_x -> (1/2)(b + b^dag), J_y -> (1/2)(i b^dag - i b); sqrt(N) already in F
    for v, (r, t) in ((0, (1.0, 1.0)), (1, (1j, -1j))):
        _, fp, fm = g_ops[v]
        a_blk[0, 1] += 0.5 * fp * t
        a_blk[1, 0] += 0.5 * fm * r
        b_blk[0, 1] += 0.5 * fp * r
        b_blk[1, 0] += 0.5 * fp * r

    lin_a = math.sqrt(w0 * om) * (x_bar + 1j * p_bar) + 0.5 * g_ops[2, 1]
    lin_b = 0.5 * (g_ops[0, 0] + 1j * g_ops[1, 0])
    e_mf = (x_bar * x_bar + p_bar * p_bar) + 0.5 * g_ops[2, 0].real / om
    return a_blk, b_blk, complex(lin_a), complex(lin_b), float(e_mf)


def quadratic_expansion(params: DickeParams, mf: SpinBosonMf) -> QuadraticBosonForm:
    """Quadratic fluctuation Hamiltonian around a stationary mean field.

    Raises :class:`NotStationary` when the boson or spin linear terms do not
    vanish at the reference point.
    """
    a_blk, b_blk, lin_a, lin_b, _ = _expansion_blocks(
        params, mf.x_bar, mf.p_bar, mf.theta, mf.phi
    )
    scale = max(1.0, math.sqrt(params.omega0 * params.omega_spin))
    defect = max(abs(lin_a), abs(lin_b))
    if defect > STATIONARY_TOL * scale:
        raise NotStationary(f"linear terms do not vanish: |l| = {defect:.3e}")
    return QuadraticBosonForm(a_blk, b_blk, offset=0.0)


def effective_hamiltonian(params: DickeParams,
                          boundary_tol: float = BOUNDARY_TOL) -> QuadraticBosonForm:
    """Two-mode fluctuation Hamiltonian (boson a, Holstein-Primakoff spin b).

    Normal phase: conserving diag(omega0, Omega) with rotating coupling
    lambda+ + lambda- and anomalous coupling lambda+ - lambda-.  Broken
    phase with |g+| >= |g-|: the spin gap renormalizes to g+^2 Omega and the
    conserving channel to sqrt(omega0 Omega)/(2 g+); the |g-| > |g+| branch
    follows by the coupling swap (the boson mode then being the pi/2 phase
    rotated one, with identical spectrum and entropies).

    Raises :class:`OnBoundary` at the critical surface, where the gap closes
    and the Gaussian ground state is undefined.
    """
    c = params.couplings()
    w0, om = params.omega0, params.omega_spin
    if abs(c.g_max - 1.0) < boundary_tol:
        raise OnBoundary(f"max(|g+|, |g-|) = {c.g_max}: on the critical surface")
    if c.g_max < 1.0:
        rot, anom = params.lambda_plus + params.lambda_minus, params.lambda_plus - params.lambda_minus
        spin_gap = om
    elif abs(c.g_plus) >= abs(c.g_minus):
        # sign(g+) tracks the spin azimuth (0 or pi) of the x_bar > 0 branch,
        # keeping the closed form identical to the expansion at that branch
        lam_t = math.sqrt(w0 * om) / (2.0 * c.g_plus)
        sign = math.copysign(1.0, c.g_plus)
        rot = sign * (lam_t + params.lambda_minus)
        anom = sign * (lam_t - params.lambda_minus)
        spin_gap = c.g_plus**2 * om
    else:
        lam_t = math.sqrt(w0 * om) / (2.0 * c.g_minus)
        sign = math.copysign(1.0, c.g_minus)
        rot = sign * (lam_t + params.lambda_plus)
        anom = sign * (lam_t - params.lambda_plus)
        spin_gap = c.g_minus**2 * om
    conserving = np.array([[w0, rot], [rot, spin_gap]])
    anomalous = np.array([[0.0, anom], [anom, 0.0]])
    return QuadraticBosonForm(conserving, anomalous, offset=0.0)


def ground_state_entropy(params: DickeParams, partition=(0,)) -> float:
    """Entanglement entropy in bits of the Gaussian ground state.

    Default partition is the boson mode against the spin mode.  Propagates
    :class:`OnBoundary` / :class:`Unstable` at boundaries and Goldstone lines.
    """
    form = effective_hamiltonian(params)
    ground = ground_state_covariance(form)
    return entanglement_entropy(ground, partition)


def classify_lines(params: DickeParams, tol: float = 1e-9) -> SymmetryClass:
    """Emergent-symmetry classification of the couplings.

    Broken phase: delegates to :func:`emsym.landau.classify_symmetry`.
    Normal phase: the conserving line g+ = g- and its counter-rotating
    mirror g+ = -g-.
    """
    c = params.couplings()
    if c.g_max > 1.0:
        return classify_symmetry(c, tol)
    if abs(c.g_plus - c.g_minus) < tol:
        return SymmetryClass.EMERGENT_TC
    if abs(c.g_plus + c.g_minus) < tol:
        return SymmetryClass.EMERGENT_ANTI_TC
    return SymmetryClass.NONE
