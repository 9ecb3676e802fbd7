import math

import numpy as np
import pytest
from scipy.optimize import minimize as scipy_minimize

from emsym.errors import NotBroken, OnBoundary
from emsym.lmg import (
    BlochMf,
    LmgParams,
    LmgPhase,
    bloch_energy,
    block_entropy,
    curvatures,
    entanglement_curve,
    locate_factorization_crossing,
    mean_field,
    rotated_hamiltonian,
    symmetry_residual,
    two_block_form,
)
from emsym.quadratic import (
    diagonalize,
    entanglement_entropy,
    ground_state_covariance,
    is_particle_conserving,
)


def fd_hessian_diag(params, x0, y0, step=1e-5):
    def f(x, y):
        return bloch_energy(params, x, y)

    fxx = (f(x0 + step, y0) - 2 * f(x0, y0) + f(x0 - step, y0)) / step**2
    fyy = (f(x0, y0 + step) - 2 * f(x0, y0) + f(x0, y0 - step)) / step**2
    return fxx, fyy


class TestMeanField:
    def test_polarized(self):
        mf = mean_field(LmgParams(1.0, 0.5, 0.5))
        assert mf.phase is LmgPhase.POLARIZED
        assert (mf.big_x, mf.big_y) == (0.0, 0.0)
        assert mf.energy == -1.0

    def test_broken_x_closed_form(self):
        mf = mean_field(LmgParams(1.0, 2.0, 0.5))
        assert mf.phase is LmgPhase.BROKEN_X
        assert mf.big_x == pytest.approx(math.sqrt(3) / 2, abs=1e-14)
        assert math.cos(mf.theta0) == pytest.approx(0.5, abs=1e-14)
        assert mf.phi0 == 0.0

    def test_broken_y_mirror(self):
        mf = mean_field(LmgParams(1.0, 0.5, 2.0))
        assert mf.phase is LmgPhase.BROKEN_Y
        assert mf.big_y == pytest.approx(math.sqrt(3) / 2, abs=1e-14)
        assert mf.phi0 == pytest.approx(math.pi / 2, abs=1e-14)

    def test_against_numeric_minimizer(self):
        params = LmgParams(1.0, 2.0, 0.5)
        res = scipy_minimize(lambda v: bloch_energy(params, v[0], v[1]),
                             [0.7, 0.1], method="Nelder-Mead",
                             options={"xatol": 1e-12, "fatol": 1e-14})
        mf = mean_field(params)
        assert abs(res.x[0]) == pytest.approx(mf.big_x, abs=1e-8)
        assert res.fun == pytest.approx(mf.energy, abs=1e-12)

    def test_bloch_disk_constraint(self):
        mf = mean_field(LmgParams(1.0, 5.0, 0.3))
        assert mf.big_x**2 + mf.big_y**2 <= 1.0
        with pytest.raises(ValueError):
            bloch_energy(LmgParams(1.0, 1.0, 1.0), 0.9, 0.9)

    def test_field_must_be_positive(self):
        with pytest.raises(ValueError):
            LmgParams(0.0, 1.0, 1.0)


class TestCurvatures:
    def test_reference_point(self):
        assert curvatures(LmgParams(1.0, 2.0, 0.5)) == (6.0, 1.5)

    def test_goldstone(self):
        kx, ky = curvatures(LmgParams(1.0, 2.0, 2.0))
        assert ky == 0.0

    def test_line_element_identity_point(self):
        params = LmgParams(1.0, 1.5, 2.0 / 3.0)
        kx, ky = curvatures(params)
        cos0 = 1.0 / 1.5
        assert kx * cos0**2 == pytest.approx(ky, abs=1e-14)
        assert symmetry_residual(params) == pytest.approx(0.0, abs=1e-15)

    def test_matches_fd_hessian_scaled_by_field(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            h = rng.uniform(0.5, 2.0)
            gx = rng.uniform(1.05, 3.5) * h
            gy = rng.uniform(-1.0, 1.0) * gx
            params = LmgParams(h, gx, gy)
            mf = mean_field(params)
            fxx, fyy = fd_hessian_diag(params, mf.big_x, mf.big_y)
            kx, ky = curvatures(params)
            assert h * fxx == pytest.approx(kx, abs=1e-5 * max(1, kx))
            assert h * fyy == pytest.approx(ky, abs=1e-5 * max(1, abs(ky) + 1))

    def test_not_broken(self):
        with pytest.raises(NotBroken):
            curvatures(LmgParams(1.0, 0.9, 0.2))
        with pytest.raises(NotBroken):
            curvatures(LmgParams(1.0, 0.5, 2.0))  # broken-y needs the swap


class TestSymmetryResidual:
    def test_examples(self):
        assert symmetry_residual(LmgParams(1.0, 2.0, 0.5)) == 0.0
        assert symmetry_residual(LmgParams(1.0, 2.0, 0.6)) == pytest.approx(0.2, abs=1e-15)
        assert symmetry_residual(LmgParams(2.0, 8.0, 0.5)) == 0.0


class TestRotatedHamiltonian:
    def test_coefficients(self):
        rot = rotated_hamiltonian(LmgParams(1.0, 2.0, 0.5))
        assert rot.linear_z == -0.5
        assert rot.quad_x == -0.5
        assert rot.quad_y == -0.5  # equal x/y weights signal the symmetric line
        assert rot.quad_z == -1.5

    def test_continuity_toward_boundary(self):
        rot = rotated_hamiltonian(LmgParams(1.0, 1.0 + 1e-9, 0.0))
        assert math.cos(rot.rotation_angle) == pytest.approx(1.0, abs=1e-8)

    def test_passthrough_coefficient(self):
        assert rotated_hamiltonian(LmgParams(1.0, 2.0, 0.3)).quad_y == -0.3

    def test_isospectral_reconstruction(self):
        from emsym.ed import lmg_hamiltonian

        for n in (4, 8):
            for gx, gy in ((2.0, 0.5), (1.8, 1.1), (3.0, -0.4)):
                params = LmgParams(1.0, gx, gy)
                rot = rotated_hamiltonian(params)
                full = rot.matrix(n) + rot.residual_matrix(n)
                ref = lmg_hamiltonian(params, n)
                diff = np.abs(np.sort(np.linalg.eigvalsh(full))
                              - np.sort(np.linalg.eigvalsh(ref))).max()
                assert diff < 1e-10


class TestTwoBlockForm:
    def test_factorization_point(self):
        form = two_block_form(LmgParams(1.0, 2.0, 0.5))
        assert is_particle_conserving(form, tol=1e-12)
        assert block_entropy(LmgParams(1.0, 2.0, 0.5)) == 0.0

    def test_factorization_line_sampled(self):
        for gx in np.linspace(1.1, 4.0, 20):
            p = LmgParams(1.0, float(gx), 1.0 / float(gx))
            assert block_entropy(p) < 1e-8

    def test_off_line_entangled(self):
        s = block_entropy(LmgParams(1.0, 2.0, 0.45))
        assert s > 1e-5
        # frozen; the finite-size trend toward this value is in test_ed.py
        assert s == pytest.approx(0.000290699963550, abs=1e-9)

    def test_goldstone_zero_mode(self):
        spec = diagonalize(two_block_form(LmgParams(1.0, 2.0, 2.0)))
        assert spec.stable
        assert spec.mode_energies[0] == pytest.approx(0.0, abs=1e-12)

    def test_polarized_phase_isotropic_factorized(self):
        form = two_block_form(LmgParams(1.0, 0.6, 0.6))
        assert is_particle_conserving(form, tol=1e-15)
        assert block_entropy(LmgParams(1.0, 0.6, 0.6)) == 0.0
        assert block_entropy(LmgParams(1.0, 0.8, 0.3)) > 1e-6

    def test_gap_closes_at_boundary(self):
        gaps = [diagonalize(two_block_form(LmgParams(1.0, g, 0.2))).mode_energies[0]
                for g in (0.9, 0.99, 0.999)]
        assert gaps[0] > gaps[1] > gaps[2]
        with pytest.raises(OnBoundary):
            two_block_form(LmgParams(1.0, 1.0, 0.2))

    def test_duality_swap_invariance(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            gx = rng.uniform(1.1, 3.0)
            gy = rng.uniform(0.0, 0.95) * gx
            a = block_entropy(LmgParams(1.0, gx, gy))
            b = block_entropy(LmgParams(1.0, gy, gx))
            assert a == pytest.approx(b, abs=1e-12)

    def test_symmetric_mode_gap_closed_form(self):
        # symmetric/antisymmetric normal modes have closed-form energies
        h, gx, gy = 1.0, 2.2, 0.7
        spec = diagonalize(two_block_form(LmgParams(h, gx, gy)))
        nu_s = math.sqrt((gx - h * h / gx) * (gx - gy))
        assert spec.mode_energies == pytest.approx(sorted([nu_s, gx]), abs=1e-12)


class TestEntanglementCurve:
    def test_crossing_location(self):
        got = locate_factorization_crossing(1.0, 1.05, 0.96, 1.6)
        assert got == pytest.approx(1.0 / math.sqrt(1.05), abs=1e-4)

    def test_curve_dips_at_crossing(self):
        xs = np.linspace(0.96, 1.4, 45)
        pts = entanglement_curve(1.0, 1.05, xs)
        ok = [p for p in pts if p.flag == "ok"]
        assert ok
        dip = min(ok, key=lambda p: p.entropy_bits)
        assert abs(dip.gamma_x - 1.0 / math.sqrt(1.05)) < (xs[1] - xs[0]) + 1e-9

    def test_no_crossing_outside_bracket(self):
        # slope 0.1 crosses at gamma_x = sqrt(10), outside this bracket
        assert locate_factorization_crossing(1.0, 0.1, 1.2, 2.0) is None

    def test_goldstone_line_flagged(self):
        pts = entanglement_curve(1.0, 1.0, [1.5, 2.0, 2.5])
        assert all(p.flag == "goldstone" for p in pts)

    def test_polarized_points_flagged(self):
        pts = entanglement_curve(1.0, 1.05, [0.5, 0.9])
        assert all(p.flag == "polarized" for p in pts)
