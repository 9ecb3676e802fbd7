"""Finite-size exact diagonalization used as ground truth.

Three backends: truncated-Fock x collective-spin diagonalization of the
anisotropic spin-boson model, symmetric-sector diagonalization of the
collective XY spin model with a Clebsch-Gordan half/half bipartition, and
truncated-Fock diagonalization of small quadratic forms for validating the
Gaussian engine.

Both spin models conserve a Z2 parity, and in the broken phase the two lowest
eigenstates form a quasi-degenerate doublet of parity cats.  Entanglement
entropies and product fidelities are physically meaningful for the
symmetry-broken member of the doublet, so whenever the doublet splitting is
small against the excitation gap the reported entropy/fidelity refer to the
branch state (psi_even + c psi_odd)/sqrt(2) with a deterministically fixed
relative phase c; the thermodynamic-limit Gaussian results are recovered this
way.  Ground energies always refer to the true lowest state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize as _scipy_minimize
from scipy.special import gammaln

from .dicke import DickeParams, mean_field
from .errors import OutOfMemoryBudget, Unstable
from .lmg import LmgParams, mean_field as lmg_mean_field
from .quadratic import QuadraticBosonForm, diagonalize

DENSE_DIM_LIMIT = 600
DOUBLET_RATIO = 0.05
ENTROPY_CONV_TOL = 1e-6
MAX_FOCK_CUTOFF = 512
MAX_ATOMS = 64
MAX_SPINS = 128


@dataclass(frozen=True)
class EdResult:
    ground_energy: float
    entropy_bits: float
    product_fidelity: float
    converged: bool
    cutoff_used: int
    model: str = "generic"
    state: np.ndarray = field(default=None, repr=False)
    dims: tuple = ()
    parity_gap: float = float("nan")
    excitation_gap: float = float("nan")
    branch_used: bool = False
    meta: dict = field(default_factory=dict, repr=False)


# ---------------------------------------------------------------- operators

def boson_operators(cutoff: int):
    """(number, a, a_dag) on a Fock space truncated at ``cutoff`` quanta."""
    n = sp.diags(np.arange(cutoff + 1, dtype=float))
    adag = sp.diags(np.sqrt(np.arange(1.0, cutoff + 1)), -1)
    return n.tocsr(), adag.T.tocsr(), adag.tocsr()


def collective_spin_operators(n_spins: int):
    """Sparse (Jx, Jy, Jz) in the maximal-spin sector, m ascending."""
    j = n_spins / 2.0
    m = np.arange(-j, j + 1)
    jz = sp.diags(m)
    raising = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = sp.diags(raising, -1)
    jm = jp.T
    return (0.5 * (jp + jm)).tocsr(), (-0.5j * (jp - jm)).tocsr(), jz.tocsr()


def collective_spin_matrices(n_spins: int):
    jx, jy, jz = collective_spin_operators(n_spins)
    return jx.toarray(), jy.toarray(), jz.toarray()


def clebsch_top_table(j1: float, j2: float) -> np.ndarray:
    """<j1 m1; j2 m2 | j1+j2, m1+m2> over all (m1, m2).

    Stretched-multiplet coefficients by the downward lowering-operator
    recursion starting from the top state (all terms positive, so the
    recursion is stable; no factorials are evaluated).
    """
    n1, n2 = int(round(2 * j1)) + 1, int(round(2 * j2)) + 1
    j = j1 + j2
    table = np.zeros((n1, n2))
    table[n1 - 1, n2 - 1] = 1.0
    # march anti-diagonals m = j-1 ... -j; entries per m live on i1 + i2 = m + j1 + j2
    cur = {(n1 - 1, n2 - 1): 1.0}
    m = j
    while m > -j:
        nxt = {}
        norm = math.sqrt((j + m) * (j - m + 1.0))
        for (i1, i2), val in cur.items():
            m1 = i1 - j1
            m2 = i2 - j2
            if i1 > 0:
                amp = math.sqrt((j1 + m1) * (j1 - m1 + 1.0)) * val / norm
                nxt[(i1 - 1, i2)] = nxt.get((i1 - 1, i2), 0.0) + amp
            if i2 > 0:
                amp = math.sqrt((j2 + m2) * (j2 - m2 + 1.0)) * val / norm
                nxt[(i1, i2 - 1)] = nxt.get((i1, i2 - 1), 0.0) + amp
        for (i1, i2), val in nxt.items():
            table[i1, i2] = val
        cur = nxt
        m -= 1
    return table


def spin_coherent(n_spins: int, theta: float, phi: float) -> np.ndarray:
    """Amplitudes of e^{-i phi Jz} e^{-i theta Jy} |j, j> in |j, m>, m ascending."""
    j = n_spins / 2.0
    m = np.arange(-j, j + 1)
    logbin = gammaln(n_spins + 1) - gammaln(j + m + 1) - gammaln(j - m + 1)
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    with np.errstate(divide="ignore"):
        mag = np.exp(0.5 * logbin
                     + (j + m) * np.log(np.abs(c) + 1e-300)
                     + (j - m) * np.log(np.abs(s) + 1e-300))
    sign = np.where(c < 0, (-1.0) ** np.round(j + m), 1.0) * np.where(
        s < 0, (-1.0) ** np.round(j - m), 1.0)
    amp = mag * sign * np.exp(-1j * m * phi)
    return amp / np.linalg.norm(amp)


def coherent_vector(cutoff: int, alpha: complex) -> np.ndarray:
    """Truncated coherent state, renormalized after truncation."""
    n = np.arange(cutoff + 1)
    if alpha == 0:
        vec = np.zeros(cutoff + 1, dtype=complex)
        vec[0] = 1.0
        return vec
    log_amp = n * np.log(complex(alpha)) - 0.5 * gammaln(n + 1)
    vec = np.exp(log_amp - 0.5 * abs(alpha) ** 2)
    return vec / np.linalg.norm(vec)


# ------------------------------------------------------------ linear algebra

def _lowest_pair(h, k: int = 2):
    """Two lowest eigenpairs; dense below DENSE_DIM_LIMIT, else Lanczos."""
    dim = h.shape[0]
    if dim <= DENSE_DIM_LIMIT:
        dense = h.toarray() if sp.issparse(h) else np.asarray(h)
        w, v = np.linalg.eigh(dense)
        return w[:k], v[:, :k]
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(dim)
    w, v = spla.eigsh(h, k=k, which="SA", v0=v0)
    order = np.argsort(w)
    return w[order], v[:, order]


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    k = np.argmax(np.abs(psi))
    return -psi if psi[k].real < 0 else psi


def _branch_state(psi_e, psi_o, metric):
    """Symmetry-broken combination of a parity doublet.

    The relative phase is picked from {1, -1, i, -i} to maximize the order
    parameter reported by ``metric``; ties resolve to the earliest candidate.
    """
    best, best_m = None, -1.0
    for c in (1.0, -1.0, 1j, -1j):
        cand = (psi_e + c * psi_o) / math.sqrt(2.0)
        m = metric(cand)
        if m > best_m + 1e-12:
            best, best_m = cand, m
    return best


def _entropy_from_matrix(mat: np.ndarray) -> float:
    s = np.linalg.svd(mat, compute_uv=False)
    p = s**2
    p = p[p > 1e-300]
    return float(-(p * np.log2(p)).sum())


# -------------------------------------------------------------------- Dicke

def dicke_hamiltonian(params: DickeParams, n_atoms: int, cutoff: int) -> sp.csr_matrix:
    """Sparse real H in the product basis |n> x |j, m>, j = N/2."""
    nb = cutoff + 1
    num, a, adag = boson_operators(cutoff)
    jx, jy, jz = collective_spin_operators(n_atoms)
    ib = sp.identity(nb, format="csr")
    isp = sp.identity(n_atoms + 1, format="csr")
    root_n = math.sqrt(n_atoms)
    h = (params.omega0 * sp.kron(num, isp)
         + params.omega_spin * sp.kron(ib, jz)
         - (2.0 * params.lambda_plus / root_n) * sp.kron(adag + a, jx)
         + (2.0 * params.lambda_minus / root_n) * sp.kron(1j * (adag - a), jy))
    h = h.tocsr()
    if abs(h.imag).max() > 1e-14 * max(1.0, abs(h.real).max()):
        raise AssertionError("spin-boson Hamiltonian should be real")
    return h.real.tocsr()


def _dicke_parity_masks(nb: int, ns: int) -> tuple[np.ndarray, np.ndarray]:
    n_idx, m_idx = np.meshgrid(np.arange(nb), np.arange(ns), indexing="ij")
    par = ((n_idx + m_idx) % 2).ravel()
    return np.where(par == 0)[0], np.where(par == 1)[0]


def _dicke_solve(params: DickeParams, n_atoms: int, cutoff: int):
    nb, ns = cutoff + 1, n_atoms + 1
    h = dicke_hamiltonian(params, n_atoms, cutoff)
    idx_e, idx_o = _dicke_parity_masks(nb, ns)
    levels, vecs = [], []
    for idx in (idx_e, idx_o):
        w, v = _lowest_pair(h[idx][:, idx])
        psi = np.zeros(nb * ns)
        psi[idx] = v[:, 0]
        levels.append(w)
        vecs.append(_fix_sign(psi))
    (we, wo) = levels
    e0 = min(we[0], wo[0])
    parity_gap = abs(we[0] - wo[0])
    excitation_gap = min(we[1], wo[1]) - e0
    doublet = parity_gap < DOUBLET_RATIO * excitation_gap
    if doublet:
        num, a, adag = boson_operators(cutoff)
        isp = sp.identity(ns, format="csr")
        xop = sp.kron(adag + a, isp).tocsr()
        pop = sp.kron(1j * (adag - a), isp).tocsr()

        def metric(v):
            return math.hypot(abs(np.vdot(v, xop @ v)), abs(np.vdot(v, pop @ v)))

        psi = _branch_state(vecs[0], vecs[1], metric)
    else:
        psi = vecs[0] if we[0] <= wo[0] else vecs[1]
    entropy = _entropy_from_matrix(psi.reshape(nb, ns))
    return e0, entropy, psi, parity_gap, excitation_gap, doublet


def default_dicke_cutoff(params: DickeParams, n_atoms: int) -> int:
    c = params.couplings()
    base = 4.0 * max(1.0, c.g_plus**2, c.g_minus**2) * n_atoms
    return int(min(MAX_FOCK_CUTOFF, max(8, math.ceil(base))))


def dicke_ed(params: DickeParams, n_atoms: int, fock_cutoff: int | None = None,
             compute_fidelity: bool = True) -> EdResult:
    """Ground state of the spin-boson model at finite N.

    ``converged`` reports whether doubling the Fock cutoff moves the entropy
    by less than 1e-6; with an automatic cutoff the truncation grows until
    that criterion passes or the budget (512) is hit.  Never raises on
    non-convergence.
    """
    if n_atoms % 2 or n_atoms <= 0:
        raise ValueError("n_atoms must be positive and even")
    if n_atoms > MAX_ATOMS:
        raise OutOfMemoryBudget(f"n_atoms = {n_atoms} exceeds the budget of {MAX_ATOMS}")
    grow = fock_cutoff is None
    cutoff = default_dicke_cutoff(params, n_atoms) if grow else int(fock_cutoff)
    if cutoff > MAX_FOCK_CUTOFF:
        raise OutOfMemoryBudget(f"fock_cutoff = {cutoff} exceeds the budget of {MAX_FOCK_CUTOFF}")
    prev_entropy = _dicke_solve(params, n_atoms, max(4, cutoff // 2))[1]
    while True:
        e0, entropy, psi, pgap, egap, doublet = _dicke_solve(params, n_atoms, cutoff)
        converged = abs(entropy - prev_entropy) < ENTROPY_CONV_TOL
        if converged or not grow or cutoff >= MAX_FOCK_CUTOFF:
            break
        prev_entropy = entropy
        cutoff = min(2 * cutoff, MAX_FOCK_CUTOFF)
    result = EdResult(
        ground_energy=float(e0), entropy_bits=entropy, product_fidelity=float("nan"),
        converged=bool(converged), cutoff_used=cutoff, model="dicke", state=psi,
        dims=(cutoff + 1, n_atoms + 1), parity_gap=float(pgap),
        excitation_gap=float(egap), branch_used=bool(doublet),
        meta={"params": params, "n_atoms": n_atoms},
    )
    if compute_fidelity:
        result = replace(result, product_fidelity=product_fidelity(result))
    return result


def dicke_product_state(n_atoms: int, cutoff: int, alpha: complex,
                        theta: float, phi: float) -> np.ndarray:
    """Coherent x spin-coherent product vector in the truncated basis."""
    return np.kron(coherent_vector(cutoff, alpha), spin_coherent(n_atoms, theta, phi))


# ---------------------------------------------------------------------- LMG

def lmg_hamiltonian(params: LmgParams, n_spins: int) -> np.ndarray:
    jx, jy, jz = collective_spin_matrices(n_spins)
    j = n_spins / 2.0
    h = (-params.field_h * jz
         - params.gamma_x / (2.0 * j) * (jx @ jx)
         - params.gamma_y / (2.0 * j) * (jy @ jy))
    return h.real


def lmg_ed(params: LmgParams, n_spins: int, compute_fidelity: bool = True) -> EdResult:
    """Symmetric-sector ground state with the half/half Schmidt bipartition.

    The two halves carry spin n_spins/4 each; the Schmidt matrix is the
    symmetric-sector amplitude vector dressed with the stretched
    Clebsch-Gordan table.
    """
    if n_spins % 4 or n_spins <= 0:
        raise ValueError("n_spins must be positive and divisible by 4")
    if n_spins > MAX_SPINS:
        raise OutOfMemoryBudget(f"n_spins = {n_spins} exceeds the budget of {MAX_SPINS}")
    h = lmg_hamiltonian(params, n_spins)
    j = n_spins / 2.0
    m = np.arange(-j, j + 1)
    idx_e = np.where(((m + j) % 2) == 0)[0]
    idx_o = np.where(((m + j) % 2) == 1)[0]
    levels, vecs = [], []
    for idx in (idx_e, idx_o):
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        psi = np.zeros(n_spins + 1)
        psi[idx] = v[:, 0]
        levels.append(w[:2])
        vecs.append(_fix_sign(psi))
    (we, wo) = levels
    e0 = min(we[0], wo[0])
    parity_gap = abs(we[0] - wo[0])
    excitation_gap = min(we[1], wo[1]) - e0
    doublet = parity_gap < DOUBLET_RATIO * excitation_gap
    if doublet:
        jx, jy, _ = collective_spin_matrices(n_spins)

        def metric(v):
            return math.hypot(abs(np.vdot(v, jx @ v)), abs(np.vdot(v, jy @ v)))

        psi = _branch_state(vecs[0].astype(complex), vecs[1].astype(complex), metric)
    else:
        psi = (vecs[0] if we[0] <= wo[0] else vecs[1]).astype(complex)
    entropy = _entropy_from_matrix(_lmg_schmidt_matrix(psi, n_spins))
    result = EdResult(
        ground_energy=float(e0), entropy_bits=entropy, product_fidelity=float("nan"),
        converged=True, cutoff_used=n_spins + 1, model="lmg", state=psi,
        dims=(n_spins + 1,), parity_gap=float(parity_gap),
        excitation_gap=float(excitation_gap), branch_used=bool(doublet),
        meta={"params": params, "n_spins": n_spins},
    )
    if compute_fidelity:
        result = replace(result, product_fidelity=product_fidelity(result))
    return result


def _lmg_schmidt_matrix(psi: np.ndarray, n_spins: int) -> np.ndarray:
    jh = n_spins / 4.0
    table = clebsch_top_table(jh, jh)
    n1 = table.shape[0]
    mat = np.zeros((n1, n1), dtype=complex)
    for i1 in range(n1):
        for i2 in range(n1):
            mat[i1, i2] = psi[i1 + i2] * table[i1, i2]
    return mat


# ---------------------------------------------------------- quadratic forms

def quadratic_ed(form: QuadraticBosonForm, fock_cutoff: int,
                 partition=(0,)) -> EdResult:
    """Numerically exact ground state of a small quadratic form.

    Validates the Gaussian engine; up to 4 modes at desk-scale cutoffs.
    Unstable forms are rejected.  ``product_fidelity`` is the vacuum weight,
    which reaches 1 exactly for particle-conserving forms.
    """
    n_modes = form.n_modes
    if n_modes > 4:
        raise OutOfMemoryBudget("quadratic_ed supports at most 4 modes")
    dim = (fock_cutoff + 1) ** n_modes
    if dim > 250_000:
        raise OutOfMemoryBudget(f"truncated dimension {dim} exceeds the budget")
    if not diagonalize(form).stable:
        raise Unstable("quadratic form is unstable; no ground state to diagonalize")

    def solve(cutoff):
        h = _quadratic_fock_hamiltonian(form, cutoff)
        w, v = _lowest_pair(h, k=1)
        psi = v[:, 0]
        nb = cutoff + 1
        keep = sorted(set(int(k) for k in partition))
        shape = [nb] * n_modes
        tensor = psi.reshape(shape)
        axes = keep + [k for k in range(n_modes) if k not in keep]
        mat = np.transpose(tensor, axes).reshape(nb ** len(keep), -1)
        return float(w[0]), _entropy_from_matrix(mat), psi

    e_half = solve(max(4, fock_cutoff // 2))
    e0, entropy, psi = solve(fock_cutoff)
    converged = abs(entropy - e_half[1]) < ENTROPY_CONV_TOL
    return EdResult(
        ground_energy=e0, entropy_bits=entropy,
        product_fidelity=float(abs(psi[0]) ** 2), converged=bool(converged),
        cutoff_used=fock_cutoff, model="quadratic", state=psi,
        dims=tuple([fock_cutoff + 1] * n_modes),
    )


def _quadratic_fock_hamiltonian(form: QuadraticBosonForm, cutoff: int):
    n_modes = form.n_modes
    nb = cutoff + 1
    _, a1, ad1 = boson_operators(cutoff)
    ident = sp.identity(nb, format="csr")

    def embed(op, mode):
        mats = [ident] * n_modes
        mats[mode] = op
        out = mats[0]
        for m in mats[1:]:
            out = sp.kron(out, m, format="csr")
        return out

    a_ops = [embed(a1, k) for k in range(n_modes)]
    ad_ops = [embed(ad1, k) for k in range(n_modes)]
    dim = nb**n_modes
    h = sp.csr_matrix((dim, dim), dtype=complex)
    conserving, anomalous = form.conserving, form.anomalous
    for i in range(n_modes):
        for k in range(n_modes):
            if conserving[i, k] != 0:
                h = h + conserving[i, k] * (ad_ops[i] @ a_ops[k])
            if anomalous[i, k] != 0:
                h = h + 0.5 * anomalous[i, k] * (ad_ops[i] @ ad_ops[k])
                h = h + 0.5 * np.conj(anomalous[i, k]) * (a_ops[k] @ a_ops[i])
    h = h + form.offset * sp.identity(dim, format="csr")
    if abs(h.imag).max() < 1e-14 * max(1.0, abs(h.real).max()):
        h = h.real
    return h.tocsr()


# ----------------------------------------------------------------- fidelity

def product_fidelity(result: EdResult, model: str | None = None) -> float:
    """Best squared overlap with the model's product-state family.

    Local search (Nelder-Mead) from the mean-field prediction and its Z2
    partner.  For the spin-boson model the family is coherent x
    spin-coherent; for the collective XY model, two independent
    spin-coherent halves projected on the symmetric sector.
    """
    kind = model or result.model
    if kind == "dicke":
        return _dicke_fidelity(result)
    if kind == "lmg":
        return _lmg_fidelity(result)
    raise ValueError(f"no product-state family for model {kind!r}")


def _dicke_fidelity(result: EdResult) -> float:
    params: DickeParams = result.meta["params"]
    n_atoms = result.meta["n_atoms"]
    cutoff = result.dims[0] - 1
    psi = result.state
    mf = mean_field(params)
    mu = math.sqrt(n_atoms * params.omega_spin / params.omega0)
    alpha0 = mu * (mf.x_bar + 1j * mf.p_bar)

    def neg_overlap(x):
        alpha = complex(x[0], x[1])
        vec = dicke_product_state(n_atoms, cutoff, alpha, x[2], x[3])
        return -abs(np.vdot(vec, psi)) ** 2

    seeds = [
        np.array([alpha0.real, alpha0.imag, mf.theta, mf.phi]),
        np.array([-alpha0.real, -alpha0.imag, mf.theta, mf.phi + math.pi]),
    ]
    best = 0.0
    for seed in seeds:
        res = _scipy_minimize(neg_overlap, seed, method="Nelder-Mead",
                              options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, -res.fun)
    return float(min(best, 1.0))


def _lmg_fidelity(result: EdResult) -> float:
    params: LmgParams = result.meta["params"]
    n_spins = result.meta["n_spins"]
    psi = result.state
    table = clebsch_top_table(n_spins / 4.0, n_spins / 4.0)
    mf = lmg_mean_field(params)

    def neg_overlap(x):
        chi1 = spin_coherent(n_spins // 2, x[0], x[1])
        chi2 = spin_coherent(n_spins // 2, x[2], x[3])
        weights = table * np.outer(chi1, chi2)
        n1 = table.shape[0]
        proj = np.zeros(n_spins + 1, dtype=complex)
        for i1 in range(n1):
            proj[i1:i1 + n1] += weights[i1]
        return -abs(np.vdot(psi, proj)) ** 2

    seeds = [
        np.array([mf.theta0, mf.phi0, mf.theta0, mf.phi0]),
        np.array([mf.theta0, mf.phi0 + math.pi, mf.theta0, mf.phi0 + math.pi]),
    ]
    best = 0.0
    for seed in seeds:
        res = _scipy_minimize(neg_overlap, seed, method="Nelder-Mead",
                              options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, -res.fun)
    return float(min(best, 1.0))
