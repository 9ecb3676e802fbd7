"""Dicke lattice: local spin-boson sites coupled by photon hopping.

    H = sum_j H_j + J sum_{edges (j,k)} (a_j^dag a_k + a_k^dag a_j)

on a z-regular periodic graph, with J <= 0 (positive hopping gives frustrated
superradiance, which is out of scope and rejected at construction).  Each
unordered edge contributes J (a_j^dag a_k + h.c.), so the uniform boson mode
sees the renormalized frequency omega0 + z J and the critical coupling shifts
to g_c = sqrt(1 + J z / omega0).

The uniform mean field minimizes

    (1 + J z / omega0)(x^2 + p^2) - (1/2) sqrt(1 + (2 g+ x)^2 + (2 g- p)^2)

and a desk-scale multi-start search over all per-site displacements is
provided to confirm that spatial modulation only raises the energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .dicke import DickeParams, _expansion_blocks, _spin_angles
from .errors import OnBoundary
from .landau import CouplingPair, LandauPhase, MfPoint, MfSolution
from .quadratic import QuadraticBosonForm

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class LatticeGeometry:
    """z-regular connected simple graph with periodic boundaries."""

    n_sites: int
    edges: tuple
    coordination: int

    @classmethod
    def from_edges(cls, n_sites: int, edges) -> "LatticeGeometry":
        canon = []
        seen = set()
        for j, k in edges:
            j, k = int(j), int(k)
            if j == k:
                raise ValueError(f"self-loop at site {j}")
            if not (0 <= j < n_sites and 0 <= k < n_sites):
                raise ValueError(f"edge ({j}, {k}) outside of {n_sites} sites")
            key = (min(j, k), max(j, k))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canon.append(key)
        degree = np.zeros(n_sites, dtype=int)
        for j, k in canon:
            degree[j] += 1
            degree[k] += 1
        if len(set(degree.tolist())) != 1:
            raise ValueError(f"graph is not regular: degrees {degree.tolist()}")
        # connectivity by breadth-first search
        adj = [[] for _ in range(n_sites)]
        for j, k in canon:
            adj[j].append(k)
            adj[k].append(j)
        seen_sites = {0}
        frontier = [0]
        while frontier:
            frontier = [k for s in frontier for k in adj[s] if k not in seen_sites]
            seen_sites.update(frontier)
        if len(seen_sites) != n_sites:
            raise ValueError("graph is not connected")
        return cls(n_sites, tuple(sorted(canon)), int(degree[0]))

    @classmethod
    def chain(cls, n_sites: int) -> "LatticeGeometry":
        """Periodic chain; n=3 is the triangular ring."""
        if n_sites < 3:
            raise ValueError("periodic chain needs at least 3 sites")
        return cls.from_edges(n_sites, [(j, (j + 1) % n_sites) for j in range(n_sites)])

    @classmethod
    def torus(cls, lx: int, ly: int) -> "LatticeGeometry":
        if lx < 3 or ly < 3:
            raise ValueError("torus sides must be >= 3 to stay a simple graph")
        def site(x, y):
            return (x % lx) * ly + (y % ly)
        edges = []
        for x in range(lx):
            for y in range(ly):
                edges.append((site(x, y), site(x + 1, y)))
                edges.append((site(x, y), site(x, y + 1)))
        return cls.from_edges(lx * ly, edges)

    @classmethod
    def hypercubic(cls, length: int, dim: int) -> "LatticeGeometry":
        if not 1 <= dim <= 3:
            raise ValueError("dim must be 1, 2 or 3")
        if length < 3:
            raise ValueError("side length must be >= 3 to stay a simple graph")
        if dim == 1:
            return cls.chain(length)
        if dim == 2:
            return cls.torus(length, length)
        n = length**3
        def site(x, y, z):
            return ((x % length) * length + (y % length)) * length + (z % length)
        edges = []
        for x in range(length):
            for y in range(length):
                for z in range(length):
                    edges.append((site(x, y, z), site(x + 1, y, z)))
                    edges.append((site(x, y, z), site(x, y + 1, z)))
                    edges.append((site(x, y, z), site(x, y, z + 1)))
        return cls.from_edges(n, edges)


@dataclass(frozen=True)
class LatticeParams:
    dicke: DickeParams
    hop_j: float
    geometry: LatticeGeometry

    def __post_init__(self):
        if self.hop_j > 0:
            raise ValueError("J > 0 (frustrated superradiance) is out of scope")
        if 1.0 + self.geometry.coordination * self.hop_j / self.dicke.omega0 <= 0:
            raise ValueError("1 + z J / omega0 must stay positive for boson stability")


def critical_coupling(params: LatticeParams) -> float:
    """Shifted critical coupling g_c = sqrt(1 + J z / omega0)."""
    z = params.geometry.coordination
    return math.sqrt(1.0 + params.hop_j * z / params.dicke.omega0)


def factorization_residual(params: LatticeParams) -> float:
    """|g+ g-| - g_c^2; zero exactly on the emergent-symmetry line."""
    c = params.dicke.couplings()
    return abs(c.g_plus * c.g_minus) - critical_coupling(params) ** 2


def mean_field_uniform(params: LatticeParams) -> MfSolution:
    """Uniform mean field of the hopping-renormalized Landau potential."""
    c = params.dicke.couplings()
    gp, gm = c.g_plus, c.g_minus
    gc2 = critical_coupling(params) ** 2
    if c.g_max <= math.sqrt(gc2):
        return MfSolution(MfPoint(0.0, 0.0), -0.5, LandauPhase.NORMAL,
                          gc2 - gp * gp, gc2 - gm * gm)
    if abs(gp) == abs(gm):
        phase = LandauPhase.GOLDSTONE_DEGENERATE
    elif abs(gp) > abs(gm):
        phase = LandauPhase.BROKEN_X
    else:
        phase = LandauPhase.BROKEN_P
    if phase is LandauPhase.BROKEN_P:
        p0 = math.sqrt(gm**4 / gc2**2 - 1.0) / (2.0 * abs(gm))
        energy = -(gm**4 + gc2**2) / (4.0 * gm * gm * gc2)
        return MfSolution(MfPoint(0.0, p0), energy, phase,
                          gc2 * (1.0 - (gp / gm) ** 2),
                          gc2 * (1.0 - gc2**2 / gm**4))
    x0 = math.sqrt(gp**4 / gc2**2 - 1.0) / (2.0 * abs(gp))
    energy = -(gp**4 + gc2**2) / (4.0 * gp * gp * gc2)
    return MfSolution(MfPoint(x0, 0.0), energy, phase,
                      gc2 * (1.0 - gc2**2 / gp**4),
                      gc2 * (1.0 - (gm / gp) ** 2))


def lattice_mf_energy(params: LatticeParams, xs, ps) -> float:
    """Per-site mean-field energy of an arbitrary per-site configuration."""
    c = params.dicke.couplings()
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    onsite = xs**2 + ps**2 - 0.5 * np.sqrt(
        1.0 + (2.0 * c.g_plus * xs) ** 2 + (2.0 * c.g_minus * ps) ** 2
    )
    hop = 0.0
    for j, k in params.geometry.edges:
        hop += xs[j] * xs[k] + ps[j] * ps[k]
    hop *= 2.0 * params.hop_j / params.dicke.omega0
    return float((onsite.sum() + hop) / params.geometry.n_sites)


def _lattice_mf_grad(params: LatticeParams, flat: np.ndarray) -> np.ndarray:
    c = params.dicke.couplings()
    n = params.geometry.n_sites
    xs, ps = flat[:n], flat[n:]
    root = np.sqrt(1.0 + (2.0 * c.g_plus * xs) ** 2 + (2.0 * c.g_minus * ps) ** 2)
    gx = 2.0 * xs * (1.0 - c.g_plus**2 / root)
    gp_ = 2.0 * ps * (1.0 - c.g_minus**2 / root)
    coup = 2.0 * params.hop_j / params.dicke.omega0
    for j, k in params.geometry.edges:
        gx[j] += coup * xs[k]
        gx[k] += coup * xs[j]
        gp_[j] += coup * ps[k]
        gp_[k] += coup * ps[j]
    return np.concatenate([gx, gp_]) / n


@dataclass(frozen=True)
class UniformCheck:
    uniform_energy: float
    best_nonuniform_energy: float
    max_site_spread: float
    n_starts: int


def verify_uniform_minimum(params: LatticeParams, n_starts: int = 64,
                           seed: int = 0) -> UniformCheck:
    """Multi-start search over per-site displacements; desk scale (n <= 16).

    Confirms (or would report a counterexample to) the claim that the uniform
    configuration saturates the mean-field minimum.  For J = 0 the sites
    decouple and per-site sign flips are exactly degenerate, so the spread
    figure is not meaningful there.
    """
    n = params.geometry.n_sites
    if n > 16:
        raise ValueError("desk-scale check: n_sites <= 16")
    uni = mean_field_uniform(params)
    x0, p0 = uni.minimum.x_bar, uni.minimum.p_bar
    uniform_energy = lattice_mf_energy(params, np.full(n, x0), np.full(n, p0))
    span = max(1.0, params.dicke.couplings().g_max ** 2)
    rng = np.random.default_rng(seed)

    def objective(flat):
        return lattice_mf_energy(params, flat[:n], flat[n:])

    best_e = uniform_energy
    best_flat = np.concatenate([np.full(n, x0), np.full(n, p0)])
    starts = [best_flat + 1e-3 * rng.standard_normal(2 * n)]
    starts += [rng.uniform(-span, span, size=2 * n) for _ in range(n_starts - 1)]
    for start in starts:
        res = _scipy_minimize(objective, start, jac=lambda f: _lattice_mf_grad(params, f),
                              method="L-BFGS-B",
                              options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-12})
        if res.fun < best_e:
            best_e = res.fun
            best_flat = res.x
    spread = max(np.ptp(np.abs(best_flat[:n])), np.ptp(np.abs(best_flat[n:])))
    return UniformCheck(uniform_energy, float(best_e), float(spread), n_starts)


def effective_lattice_hamiltonian(params: LatticeParams,
                                  boundary_tol: float = BOUNDARY_TOL) -> QuadraticBosonForm:
    """2N-mode fluctuation Hamiltonian, mode order a_1..a_N, b_1..b_N.

    On-site blocks come from the single-site quadratic expansion evaluated at
    the lattice-uniform mean field; hopping enters the conserving block only,
    J per unordered edge.  On the line |g+ g-| = g_c^2 the anomalous block
    vanishes identically and the ground state is the global vacuum.
    """
    gc = critical_coupling(params)
    c = params.dicke.couplings()
    if abs(c.g_max / gc - 1.0) < boundary_tol:
        raise OnBoundary(f"max(|g+|, |g-|) = {c.g_max}: on the lattice critical surface")
    uni = mean_field_uniform(params)
    return _lattice_form_at(params, uni.minimum.x_bar, uni.minimum.p_bar)


def _lattice_form_at(params: LatticeParams, x_bar: float, p_bar: float) -> QuadraticBosonForm:
    """Lattice form at a given uniform displacement (spin angles re-derived)."""
    if x_bar == 0.0 and p_bar == 0.0:
        theta, phi = math.pi, 0.0
    else:
        theta, phi = _spin_angles(params.dicke.couplings(), x_bar, p_bar)
    a_site, b_site, lin_a, lin_b, _ = _expansion_blocks(
        params.dicke, x_bar, p_bar, theta, phi
    )
    # lattice stationarity: hopping shifts the boson linear term by z J mu alpha
    zj = params.geometry.coordination * params.hop_j
    om = params.dicke.omega_spin
    w0 = params.dicke.omega0
    lin_a_lat = lin_a + zj * math.sqrt(om / w0) * (x_bar + 1j * p_bar)
    scale = max(1.0, math.sqrt(w0 * om))
    if max(abs(lin_a_lat), abs(lin_b)) > 1e-8 * scale:
        raise AssertionError("uniform mean field is not stationary for the lattice energy")
    n = params.geometry.n_sites
    conserving = np.zeros((2 * n, 2 * n), dtype=complex)
    anomalous = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        aj, bj = j, n + j
        conserving[aj, aj] = a_site[0, 0]
        conserving[bj, bj] = a_site[1, 1]
        conserving[aj, bj] = a_site[0, 1]
        conserving[bj, aj] = a_site[1, 0]
        anomalous[aj, bj] = b_site[0, 1]
        anomalous[bj, aj] = b_site[1, 0]
    for j, k in params.geometry.edges:
        conserving[j, k] += params.hop_j
        conserving[k, j] += params.hop_j
    return QuadraticBosonForm(conserving, anomalous, offset=0.0)


def half_sites_partition(geometry: LatticeGeometry) -> list[int]:
    """Mode indices of the first half of the sites (boson and spin grouped)."""
    n = geometry.n_sites
    half = n // 2
    return list(range(half)) + [n + j for j in range(half)]


def site_partition(geometry: LatticeGeometry, sites) -> list[int]:
    """Mode indices covering the a and b modes of the given sites."""
    n = geometry.n_sites
    sites = sorted(set(int(s) for s in sites))
    return sites + [n + s for s in sites]
