import math

import numpy as np
import pytest
from scipy.special import gammaln

from emsym.dicke import DickeParams, ground_state_entropy, mean_field
from emsym.ed import (
    EdResult,
    boson_operators,
    clebsch_top_table,
    coherent_vector,
    collective_spin_matrices,
    dicke_ed,
    dicke_hamiltonian,
    dicke_product_state,
    lmg_ed,
    lmg_hamiltonian,
    product_fidelity,
    quadratic_ed,
    spin_coherent,
)
from emsym.errors import OutOfMemoryBudget, Unstable
from emsym.lmg import LmgParams, block_entropy
from emsym.quadratic import QuadraticBosonForm


def cg_top_closed_form(j1, j2):
    """Test oracle: stretched coefficients from log-factorials."""
    n1, n2 = int(2 * j1) + 1, int(2 * j2) + 1
    j = j1 + j2
    out = np.zeros((n1, n2))
    lg = lambda x: gammaln(x + 1.0)
    for i1 in range(n1):
        for i2 in range(n2):
            m1, m2 = i1 - j1, i2 - j2
            m = m1 + m2
            out[i1, i2] = math.exp(0.5 * (
                lg(2 * j1) + lg(2 * j2) + lg(j + m) + lg(j - m)
                - lg(2 * j) - lg(j1 + m1) - lg(j1 - m1) - lg(j2 + m2) - lg(j2 - m2)))
    return out


class TestOperators:
    def test_boson_commutator(self):
        n, a, adag = boson_operators(12)
        comm = (a @ adag - adag @ a).toarray()
        assert np.allclose(comm[:-1, :-1], np.eye(12))
        assert np.allclose((adag @ a).toarray(), n.toarray())

    def test_spin_algebra(self):
        jx, jy, jz = collective_spin_matrices(6)
        assert np.allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-13)
        j = 3.0
        casimir = jx @ jx + jy @ jy + jz @ jz
        assert np.allclose(casimir, j * (j + 1) * np.eye(7), atol=1e-12)

    def test_spin_coherent_directions(self):
        jx, jy, jz = collective_spin_matrices(8)
        j = 4.0
        for theta, phi in ((0.7, 0.0), (2.2, 1.3), (1.1, 4.9)):
            v = spin_coherent(8, theta, phi)
            direction = [float(np.vdot(v, op @ v).real) for op in (jx, jy, jz)]
            target = [j * math.sin(theta) * math.cos(phi),
                      j * math.sin(theta) * math.sin(phi),
                      j * math.cos(theta)]
            assert direction == pytest.approx(target, abs=1e-12)

    def test_coherent_vector_moments(self):
        n, a, adag = boson_operators(60)
        for alpha in (0.8, -1.2 + 0.5j):
            v = coherent_vector(60, alpha)
            assert np.vdot(v, a @ v) == pytest.approx(alpha, abs=1e-10)
            assert np.vdot(v, n @ v).real == pytest.approx(abs(alpha) ** 2, abs=1e-10)


class TestClebschGordan:
    def test_against_closed_form(self):
        for j1 in (0.5, 1.0, 2.5, 8.0, 16.0):
            got = clebsch_top_table(j1, j1)
            want = cg_top_closed_form(j1, j1)
            assert np.abs(got - want).max() < 1e-12

    def test_spin_half_pair_values(self):
        table = clebsch_top_table(0.5, 0.5)
        # |1,0> = (|ud> + |du>)/sqrt(2)
        assert table[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert table[1, 0] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert table[1, 1] == 1.0
        assert table[0, 0] == pytest.approx(1.0, abs=1e-15)

    def test_completeness_per_total_m(self):
        j1 = 8.0
        table = clebsch_top_table(j1, j1)
        n1 = table.shape[0]
        for m_idx in range(2 * n1 - 1):
            total = sum(table[i1, m_idx - i1] ** 2
                        for i1 in range(n1) if 0 <= m_idx - i1 < n1)
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_stability_at_budget_size(self):
        table = clebsch_top_table(32.0, 32.0)  # half-splitting 128 spins
        assert np.isfinite(table).all()
        assert table.max() <= 1.0 + 1e-12


class TestDickeEd:
    def test_hermitian(self):
        h = dicke_hamiltonian(DickeParams.from_couplings(1, 1, 1.3, -0.4), 8, 24)
        assert abs(h - h.T).max() < 1e-12

    def test_normal_tc_exact_product(self):
        params = DickeParams.from_couplings(1.0, 1.0, 0.5, 0.5)
        res = dicke_ed(params, 8, 16)
        assert res.ground_energy == pytest.approx(-4.0, abs=1e-12)  # Omega * (-N/2)
        assert res.entropy_bits < 1e-12
        assert res.product_fidelity == pytest.approx(1.0, abs=1e-9)

    def test_excitation_number_conserved_on_isotropic_coupling(self):
        # lambda+ = lambda-: total excitation number commutes with H
        for gp in (0.5, 1.6):
            params = DickeParams.from_couplings(1.0, 1.0, gp, gp)
            res = dicke_ed(params, 8, 64, compute_fidelity=False)
            nb, ns = res.dims
            n_exc = (np.add.outer(np.arange(nb), np.arange(ns))).ravel()
            psi2 = np.abs(res.state) ** 2
            mean = float(psi2 @ n_exc)
            var = float(psi2 @ (n_exc - mean) ** 2)
            assert var < 1e-10

    def test_tc_line_entropy_small_and_decreasing(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        entropies = [dicke_ed(params, n, compute_fidelity=False).entropy_bits
                     for n in (8, 16)]
        assert all(s < 1e-8 for s in entropies)

    def test_anti_tc_entropy_bounded_away_from_zero(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, -0.5)
        res = dicke_ed(params, 16, compute_fidelity=False)
        assert res.entropy_bits > 0.01

    def test_entropy_trend_toward_gaussian_limit(self):
        params = DickeParams.from_couplings(1.0, 1.0, 1.5, 0.0)
        target = ground_state_entropy(params)
        diffs = [abs(dicke_ed(params, n, compute_fidelity=False).entropy_bits - target)
                 for n in (8, 16, 32)]
        assert diffs[0] > diffs[1] > diffs[2]
        assert diffs[-1] < 1e-2

    def test_variational_bound(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        n_atoms, cutoff = 8, 96
        res = dicke_ed(params, n_atoms, cutoff, compute_fidelity=False)
        h = dicke_hamiltonian(params, n_atoms, cutoff)
        mf = mean_field(params)
        mu = math.sqrt(n_atoms * params.omega_spin / params.omega0)
        prod = dicke_product_state(n_atoms, cutoff, mu * (mf.x_bar + 1j * mf.p_bar),
                                   mf.theta, mf.phi)
        e_prod = float(np.vdot(prod, h @ prod).real)
        assert res.ground_energy <= e_prod + 1e-10

    def test_cutoff_monotonicity(self):
        params = DickeParams.from_couplings(1.0, 1.0, 1.8, 0.3)
        energies = [dicke_ed(params, 8, c, compute_fidelity=False).ground_energy
                    for c in (16, 32, 64)]
        assert energies[0] >= energies[1] >= energies[2] - 1e-13

    def test_product_fidelity_trends(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        fids = [dicke_ed(params, n, 8 * n).product_fidelity for n in (8, 16)]
        assert fids[1] > 0.99
        anti = DickeParams.from_couplings(1.0, 1.0, 2.0, -0.5)
        f_anti = dicke_ed(anti, 16, 128).product_fidelity
        assert 0.5 < f_anti < 0.999

    def test_budget_errors(self):
        params = DickeParams.from_couplings(1, 1, 1.2, 0.1)
        with pytest.raises(OutOfMemoryBudget):
            dicke_ed(params, 66, 16)
        with pytest.raises(OutOfMemoryBudget):
            dicke_ed(params, 8, 1024)
        with pytest.raises(ValueError):
            dicke_ed(params, 7, 16)

    def test_convergence_flag(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        assert dicke_ed(params, 8, compute_fidelity=False).converged
        starved = dicke_ed(params, 8, 6, compute_fidelity=False)
        assert starved.cutoff_used == 6


class TestLmgEd:
    def test_noninteracting_product(self):
        res = lmg_ed(LmgParams(1.0, 0.0, 0.0), 16)
        assert res.entropy_bits < 1e-12
        assert res.ground_energy == pytest.approx(-8.0, abs=1e-12)
        assert res.product_fidelity == pytest.approx(1.0, abs=1e-9)

    def test_factorization_point_trend(self):
        params = LmgParams(1.0, 2.0, 0.5)
        entropies = [lmg_ed(params, n, compute_fidelity=False).entropy_bits
                     for n in (8, 16, 32, 64)]
        assert all(b < a for a, b in zip(entropies, entropies[1:]))
        assert entropies[-1] < 0.02

    def test_off_line_reference_point(self):
        # converges to the two-block Gaussian limit, not to zero
        params = LmgParams(1.0, 2.0, 1.0)
        target = block_entropy(params)
        res = lmg_ed(params, 64, compute_fidelity=False)
        assert res.entropy_bits > 0.02
        assert res.entropy_bits == pytest.approx(target, abs=5e-3)

    def test_entropy_trend_toward_gaussian_limit(self):
        params = LmgParams(1.0, 2.0, 0.45)
        target = block_entropy(params)
        diffs = [abs(lmg_ed(params, n, compute_fidelity=False).entropy_bits - target)
                 for n in (16, 32, 64)]
        assert diffs[0] > diffs[1] > diffs[2]

    def test_schmidt_coefficients_normalized(self):
        res = lmg_ed(LmgParams(1.0, 2.0, 0.5), 32, compute_fidelity=False)
        from emsym.ed import _lmg_schmidt_matrix

        mat = _lmg_schmidt_matrix(res.state, 32)
        s = np.linalg.svd(mat, compute_uv=False)
        assert (s**2).sum() == pytest.approx(1.0, abs=1e-12)

    def test_fidelity_factorization_vs_generic(self):
        f_factor = lmg_ed(LmgParams(1.0, 2.0, 0.5), 32).product_fidelity
        f_generic = lmg_ed(LmgParams(1.0, 2.0, 1.2), 32).product_fidelity
        assert f_factor > 0.999
        assert f_generic < f_factor

    def test_size_validation(self):
        with pytest.raises(ValueError):
            lmg_ed(LmgParams(1.0, 2.0, 0.5), 30)
        with pytest.raises(OutOfMemoryBudget):
            lmg_ed(LmgParams(1.0, 2.0, 0.5), 132)


class TestQuadraticEd:
    def test_diagonal_form_vacuum(self):
        res = quadratic_ed(QuadraticBosonForm(np.diag([1.0, 1.5]), np.zeros((2, 2))), 12)
        assert res.ground_energy == pytest.approx(0.0, abs=1e-12)
        assert res.entropy_bits < 1e-12
        assert res.product_fidelity == pytest.approx(1.0, abs=1e-12)

    def test_two_mode_squeezing_reference(self):
        form = QuadraticBosonForm(np.eye(2), [[0.0, 0.6], [0.6, 0.0]])
        res = quadratic_ed(form, 40)
        assert res.converged
        assert res.entropy_bits == pytest.approx(0.56617, abs=1e-4)

    def test_offset_enters_energy(self):
        form = QuadraticBosonForm([[1.0]], [[0.0]], offset=0.25)
        res = quadratic_ed(form, 8)
        assert res.ground_energy == pytest.approx(0.25, abs=1e-12)

    def test_unstable_rejected(self):
        form = QuadraticBosonForm(np.eye(2), [[0.0, 1.5], [1.5, 0.0]])
        with pytest.raises(Unstable):
            quadratic_ed(form, 10)

    def test_budget(self):
        with pytest.raises(OutOfMemoryBudget):
            quadratic_ed(QuadraticBosonForm(np.eye(2), np.zeros((2, 2))), 512)


def test_product_fidelity_requires_known_model():
    res = EdResult(0.0, 0.0, 0.0, True, 1, model="generic")
    with pytest.raises(ValueError):
        product_fidelity(res)
