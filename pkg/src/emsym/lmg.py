"""Collective spin model with competing XY interactions in a transverse field.

    H = -h J_z - (gamma_x / 2j) J_x^2 - (gamma_y / 2j) J_y^2,      h > 0

for N = 2j spin-1/2 particles.  On the Bloch sphere (X = sin t cos f,
Y = sin t sin f) the mean-field energy per spin (units of j h) is

    E(X, Y) = -(gamma_x / 2h) X^2 - (gamma_y / 2h) Y^2 - sqrt(1 - X^2 - Y^2)

with a polarized minimum at the north pole for max(gamma_x, gamma_y) <= h and
a Z2-broken pair of minima beyond it.  The fluctuation curvatures become
proportional to the spherical line element exactly on gamma_x gamma_y = h^2,
where the two-block Holstein-Primakoff form loses its anomalous coupling and
the ground state factorizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import NotBroken, OnBoundary
from .quadratic import (
    QuadraticBosonForm,
    diagonalize,
    entanglement_entropy,
    ground_state_covariance,
)

BOUNDARY_TOL = 1e-12
GOLDSTONE_TOL = 1e-9


class LmgPhase(str, Enum):
    POLARIZED = "polarized"
    BROKEN_X = "broken_x"
    BROKEN_Y = "broken_y"


@dataclass(frozen=True)
class LmgParams:
    field_h: float
    gamma_x: float
    gamma_y: float
    n_spins: int | None = None

    def __post_init__(self):
        if self.field_h <= 0:
            raise ValueError("transverse field h must be positive")

    def swapped(self) -> "LmgParams":
        return LmgParams(self.field_h, self.gamma_y, self.gamma_x, self.n_spins)


@dataclass(frozen=True)
class BlochMf:
    big_x: float
    big_y: float
    theta0: float
    phi0: float
    energy: float
    phase: LmgPhase


def bloch_energy(params: LmgParams, big_x: float, big_y: float) -> float:
    """Dimensionless mean-field energy on the Bloch disk X^2 + Y^2 <= 1."""
    r2 = big_x * big_x + big_y * big_y
    if r2 > 1.0:
        raise ValueError("point outside the Bloch disk")
    h = params.field_h
    return (
        -params.gamma_x / (2.0 * h) * big_x**2
        - params.gamma_y / (2.0 * h) * big_y**2
        - math.sqrt(1.0 - r2)
    )


def mean_field(params: LmgParams) -> BlochMf:
    h, gx, gy = params.field_h, params.gamma_x, params.gamma_y
    if max(gx, gy) <= h:
        return BlochMf(0.0, 0.0, 0.0, 0.0, -1.0, LmgPhase.POLARIZED)
    if gx >= gy:
        x0 = math.sqrt(1.0 - (h / gx) ** 2)
        energy = -(gx * gx + h * h) / (2.0 * h * gx)
        return BlochMf(x0, 0.0, math.acos(h / gx), 0.0, energy, LmgPhase.BROKEN_X)
    y0 = math.sqrt(1.0 - (h / gy) ** 2)
    energy = -(gy * gy + h * h) / (2.0 * h * gy)
    return BlochMf(0.0, y0, math.acos(h / gy), math.pi / 2.0, energy, LmgPhase.BROKEN_Y)


def curvatures(params: LmgParams) -> tuple[float, float]:
    """Fluctuation curvatures (kappa_x, kappa_y) on the broken-x branch.

    kappa_x = gamma_x (gamma_x^2/h^2 - 1), kappa_y = gamma_x - gamma_y.
    The broken-y branch is obtained from ``params.swapped()``.
    """
    h, gx, gy = params.field_h, params.gamma_x, params.gamma_y
    if not (gx >= gy and gx > h):
        raise NotBroken("broken-x branch needs gamma_x >= gamma_y and gamma_x > h "
                        "(swap the couplings for the broken-y branch)")
    return gx * (gx**2 / h**2 - 1.0), gx - gy


def symmetry_residual(params: LmgParams) -> float:
    """gamma_x gamma_y - h^2; zero exactly on the emergent-symmetry line.

    In the broken phase the equivalent statement kappa_x cos^2(theta0) =
    kappa_y is asserted against the closed forms.
    """
    h, gx, gy = params.field_h, params.gamma_x, params.gamma_y
    residual = gx * gy - h * h
    p = params if gx >= gy else params.swapped()
    if max(gx, gy) > h:
        kx, ky = curvatures(p)
        cos0 = p.field_h / p.gamma_x
        line_form = kx * cos0**2 - ky
        if abs(line_form - residual / p.gamma_x) > 1e-12 * max(1.0, abs(residual)):
            raise AssertionError("curvature identity violated")
    return residual


@dataclass(frozen=True)
class RotatedLmg:
    """Coefficients of the frame-rotated Hamiltonian on the broken-x branch.

    linear_z multiplies J_z; the quad_* coefficients multiply J_z^2, J_x^2
    and J_y^2 with an extra symbolic 1/(2j).  ``rotation_angle`` is the polar
    rotation that maps the north pole onto the mean-field direction.  The
    rotation also generates terms at most linear in (j - J_z) that carry no
    weight at quadratic Holstein-Primakoff order; :func:`residual_matrix`
    reconstructs them exactly for finite-size checks.
    """

    linear_z: float
    quad_z: float
    quad_x: float
    quad_y: float
    rotation_angle: float

    def matrix(self, n_spins: int) -> np.ndarray:
        from .ed import collective_spin_matrices

        jx, jy, jz = collective_spin_matrices(n_spins)
        j = n_spins / 2.0
        return (self.linear_z * jz
                + (self.quad_z * (jz @ jz) + self.quad_x * (jx @ jx)
                   + self.quad_y * (jy @ jy)) / (2.0 * j)).real

    def residual_matrix(self, n_spins: int) -> np.ndarray:
        from .ed import collective_spin_matrices

        jx, jy, jz = collective_spin_matrices(n_spins)
        j = n_spins / 2.0
        s0 = math.sin(self.rotation_angle)
        h = -self.linear_z / math.cos(self.rotation_angle)  # h = -c_z / cos(theta0)
        dep = j * np.eye(n_spins + 1) - jz
        return (h * s0 / (2.0 * j) * (dep @ jx + jx @ dep)).real


def rotated_hamiltonian(params: LmgParams) -> RotatedLmg:
    h, gx, gy = params.field_h, params.gamma_x, params.gamma_y
    if not (gx >= gy and gx > h):
        raise NotBroken("broken-x branch needs gamma_x >= gamma_y and gamma_x > h")
    return RotatedLmg(
        linear_z=-h * h / gx,
        quad_z=-(gx - h * h / gx),
        quad_x=-h * h / gx,
        quad_y=-gy,
        rotation_angle=math.acos(h / gx),
    )


def two_block_form(params: LmgParams,
                   boundary_tol: float = BOUNDARY_TOL) -> QuadraticBosonForm:
    """Two-mode quadratic form from splitting the spin into equal halves.

    Each half carries its own Holstein-Primakoff boson; coefficients are the
    thermodynamic-limit ones (the symbolic 1/(2j) factors cancel).  The
    anomalous entries are all proportional to gamma_y - h^2/gamma_x on the
    broken-x branch (gamma_y - gamma_x in the polarized phase) and vanish on
    the factorization lines.  The isotropic broken case gamma_x = gamma_y > h
    yields a zero-frequency Goldstone mode, reported through ``diagonalize``
    rather than raised here.
    """
    h = params.field_h
    gx, gy = params.gamma_x, params.gamma_y
    if abs(max(gx, gy) / h - 1.0) < boundary_tol:
        raise OnBoundary(f"max(gamma) = {max(gx, gy)}: on the critical surface")
    if max(gx, gy) < h:
        diag = h - (gx + gy) / 4.0
        off = -(gx + gy) / 4.0
        an = (gy - gx) / 4.0
        conserving = np.array([[diag, off], [off, diag]])
        anomalous = np.array([[an, an], [an, an]])
        return QuadraticBosonForm(conserving, anomalous, offset=-(gx + gy) / 4.0)
    p = params if gx >= gy else params.swapped()
    gx, gy = p.gamma_x, p.gamma_y
    diag = gx - (h * h / gx + gy) / 4.0
    off = -(h * h / gx + gy) / 4.0
    an = (gy - h * h / gx) / 4.0
    conserving = np.array([[diag, off], [off, diag]])
    anomalous = np.array([[an, an], [an, an]])
    return QuadraticBosonForm(conserving, anomalous, offset=-(h * h / gx + gy) / 4.0)


def block_entropy(params: LmgParams) -> float:
    """Entropy in bits between the two half-spin blocks of the ground state."""
    ground = ground_state_covariance(two_block_form(params))
    return entanglement_entropy(ground, (0,))


@dataclass(frozen=True)
class CurvePoint:
    gamma_x: float
    gamma_y: float
    entropy_bits: float | None
    flag: str  # "ok", "polarized", "boundary", "goldstone"


def entanglement_curve(field_h: float, slope: float, gamma_x_values) -> list[CurvePoint]:
    """Block entropy along the ray gamma_y = slope * gamma_x.

    Points outside the broken phase or on degenerate lines are flagged
    instead of evaluated.  gamma_x is quoted in units of the field when
    field_h = 1 (the recommended normalization).
    """
    points = []
    for gx in gamma_x_values:
        gy = slope * gx
        p = LmgParams(field_h, float(gx), float(gy))
        if max(gx, gy) <= field_h:
            points.append(CurvePoint(gx, gy, None, "polarized"))
            continue
        try:
            form = two_block_form(p)
        except OnBoundary:
            points.append(CurvePoint(gx, gy, None, "boundary"))
            continue
        spec = diagonalize(form)
        if not spec.stable or spec.mode_energies[0] < GOLDSTONE_TOL:
            points.append(CurvePoint(gx, gy, None, "goldstone"))
            continue
        points.append(CurvePoint(gx, gy, block_entropy(p), "ok"))
    return points


def locate_factorization_crossing(field_h: float, slope: float,
                                  gamma_x_lo: float, gamma_x_hi: float) -> float | None:
    """Zero of the anomalous coupling along gamma_y = slope * gamma_x.

    Root-found on the signed anomalous entry of the two-block form, which
    changes sign exactly where the entropy dips to zero.  Returns None when
    the crossing does not lie inside the bracket (or is not in the broken
    phase there).
    """
    def anomalous(gx):
        p = LmgParams(field_h, float(gx), float(slope * gx))
        return float(two_block_form(p).anomalous[0, 1].real)

    lo, hi = float(gamma_x_lo), float(gamma_x_hi)
    for g in (lo, hi):
        if max(g, slope * g) <= field_h:
            return None
    try:
        a, b = anomalous(lo), anomalous(hi)
    except OnBoundary:
        return None
    if a * b > 0:
        return None
    return float(brentq(anomalous, lo, hi, xtol=1e-12))
