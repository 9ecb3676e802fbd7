"""Landau mean-field analysis of the anisotropic phase-space potential.

The dimensionless potential

    E(x, p) = x^2 + p^2 - (1/2) sqrt(1 + (2 g+ x)^2 + (2 g- p)^2)

is the exact mean-field energy of a family of fully connected spin-boson and
collective-spin models.  Its Z2 symmetry (x -> -x and p -> -p independently)
breaks spontaneously once max(|g+|, |g-|) exceeds 1, and the quadratic
fluctuation potential around the broken minimum acquires a continuous U(1)
symmetry on the hyperbolas |g+ g-| = 1 even though the potential itself keeps
only the discrete symmetry.  Everything here is closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NotBroken


class LandauPhase(str, Enum):
    NORMAL = "normal"
    BROKEN_X = "broken_x"
    BROKEN_P = "broken_p"
    GOLDSTONE_DEGENERATE = "goldstone_degenerate"


class SymmetryClass(str, Enum):
    NONE = "none"
    EMERGENT_TC = "tc"
    EMERGENT_ANTI_TC = "anti_tc"
    GOLDSTONE_U1 = "goldstone"


@dataclass(frozen=True)
class CouplingPair:
    """Dimensionless couplings (g+, g-) of the two quadrature channels."""

    g_plus: float
    g_minus: float

    def __post_init__(self):
        if not (math.isfinite(self.g_plus) and math.isfinite(self.g_minus)):
            raise ValueError("couplings must be finite")

    @property
    def g_max(self) -> float:
        return max(abs(self.g_plus), abs(self.g_minus))

    def swapped(self) -> "CouplingPair":
        return CouplingPair(self.g_minus, self.g_plus)


@dataclass(frozen=True)
class MfPoint:
    x_bar: float
    p_bar: float


@dataclass(frozen=True)
class MfSolution:
    """Global minimum of the mean-field potential and its local curvatures.

    ``curvature_x``/``curvature_p`` are the coefficients of the squared
    fluctuations in the second-order expansion around the minimum, i.e. half
    the Hessian diagonal of :func:`mf_energy` there.
    """

    minimum: MfPoint
    energy: float
    phase: LandauPhase
    curvature_x: float
    curvature_p: float


def _xy(point) -> tuple[float, float]:
    if isinstance(point, MfPoint):
        return point.x_bar, point.p_bar
    x, p = point
    return float(x), float(p)


def mf_energy(point, c: CouplingPair) -> float:
    """Dimensionless mean-field energy at ``point`` = (x_bar, p_bar)."""
    x, p = _xy(point)
    root = math.sqrt(1.0 + (2.0 * c.g_plus * x) ** 2 + (2.0 * c.g_minus * p) ** 2)
    return x * x + p * p - 0.5 * root


def mf_gradient(point, c: CouplingPair) -> tuple[float, float]:
    """Analytic gradient of :func:`mf_energy`."""
    x, p = _xy(point)
    root = math.sqrt(1.0 + (2.0 * c.g_plus * x) ** 2 + (2.0 * c.g_minus * p) ** 2)
    return (
        2.0 * x * (1.0 - c.g_plus**2 / root),
        2.0 * p * (1.0 - c.g_minus**2 / root),
    )


def minimize_mf(c: CouplingPair) -> MfSolution:
    """Global minimum of the mean-field potential, closed form.

    Among the degenerate Z2 partners the positive branch is returned
    (x_bar > 0 on the broken-x branch, p_bar > 0 on the broken-p branch).
    For |g+| = |g-| > 1 the minima form a full circle; the broken-x
    representative is returned with the phase flagged as Goldstone
    degenerate.
    """
    gp, gm = c.g_plus, c.g_minus
    if c.g_max <= 1.0:
        return MfSolution(
            MfPoint(0.0, 0.0), -0.5, LandauPhase.NORMAL, 1.0 - gp * gp, 1.0 - gm * gm
        )
    if abs(gp) == abs(gm):
        x0 = math.sqrt(gp**4 - 1.0) / (2.0 * abs(gp))
        energy = -(gp**4 + 1.0) / (4.0 * gp * gp)
        return MfSolution(
            MfPoint(x0, 0.0), energy, LandauPhase.GOLDSTONE_DEGENERATE,
            1.0 - 1.0 / gp**4, 1.0 - (gm / gp) ** 2,
        )
    if abs(gp) > abs(gm):
        x0 = math.sqrt(gp**4 - 1.0) / (2.0 * abs(gp))
        energy = -(gp**4 + 1.0) / (4.0 * gp * gp)
        return MfSolution(
            MfPoint(x0, 0.0), energy, LandauPhase.BROKEN_X,
            1.0 - 1.0 / gp**4, 1.0 - (gm / gp) ** 2,
        )
    p0 = math.sqrt(gm**4 - 1.0) / (2.0 * abs(gm))
    energy = -(gm**4 + 1.0) / (4.0 * gm * gm)
    return MfSolution(
        MfPoint(0.0, p0), energy, LandauPhase.BROKEN_P,
        1.0 - (gp / gm) ** 2, 1.0 - 1.0 / gm**4,
    )


def fluctuation_curvatures(c: CouplingPair) -> tuple[float, float]:
    """Closed-form curvatures of the fluctuation potential in the broken phase.

    On the broken-x branch these are (1 - 1/g+^4, 1 - g-^2/g+^2); the
    broken-p branch follows from the x <-> p duality.  Raises
    :class:`NotBroken` below threshold.
    """
    if c.g_max <= 1.0:
        raise NotBroken(f"max(|g+|, |g-|) = {c.g_max} <= 1: no broken minimum")
    gp, gm = c.g_plus, c.g_minus
    if abs(gp) >= abs(gm):
        return 1.0 - 1.0 / gp**4, 1.0 - (gm / gp) ** 2
    return 1.0 - (gp / gm) ** 2, 1.0 - 1.0 / gm**4


def classify_symmetry(c: CouplingPair, tol: float = 1e-9) -> SymmetryClass:
    """Classify the emergent symmetry of the fluctuations in the broken phase.

    The default ``tol`` of 1e-9 separates floating-point noise from physical
    detuning off the symmetric lines.
    """
    if c.g_max <= 1.0:
        raise NotBroken(f"max(|g+|, |g-|) = {c.g_max} <= 1: no broken phase")
    product = c.g_plus * c.g_minus
    if abs(product - 1.0) < tol:
        return SymmetryClass.EMERGENT_TC
    if abs(product + 1.0) < tol:
        return SymmetryClass.EMERGENT_ANTI_TC
    if abs(abs(c.g_plus) - abs(c.g_minus)) < tol:
        return SymmetryClass.GOLDSTONE_U1
    return SymmetryClass.NONE
