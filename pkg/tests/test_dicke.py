import math

import numpy as np
import pytest
from scipy.optimize import minimize as scipy_minimize

from emsym.dicke import (
    DickeParams,
    DickePhase,
    classify_lines,
    effective_hamiltonian,
    ground_state_entropy,
    mean_field,
    quadratic_expansion,
    spin_boson_energy,
)
from emsym.errors import NotStationary, OnBoundary, Unstable
from emsym.landau import CouplingPair, SymmetryClass, mf_energy, minimize_mf
from emsym.quadratic import (
    diagonalize,
    entanglement_entropy,
    ground_state_covariance,
    is_particle_conserving,
)


def numeric_joint_minimum(c):
    """Oracle: minimize the 4-variable surface over (x, p, theta, phi) directly."""
    best = None
    for seed in ([0.5, 0.0, 2.0, 0.0], [0.0, 0.5, 2.0, -1.5], [1.0, 1.0, 2.5, 3.0]):
        res = scipy_minimize(
            lambda v: spin_boson_energy(c, v[0], v[1], v[2], v[3]), seed,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 8000})
        if best is None or res.fun < best.fun:
            best = res
    return best


class TestMeanField:
    def test_normal_phase(self):
        mf = mean_field(DickeParams.from_couplings(1.0, 1.0, 0.3, 0.2))
        assert mf.phase is DickePhase.NORMAL
        assert mf.theta == math.pi
        assert (mf.x_bar, mf.p_bar) == (0.0, 0.0)

    def test_superradiant_angles(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        mf = mean_field(params)
        assert mf.x_bar == pytest.approx(math.sqrt(15) / 4, abs=1e-14)
        assert mf.theta == pytest.approx(math.pi - math.atan(math.sqrt(15)), abs=1e-14)
        assert math.cos(mf.theta) == pytest.approx(-0.25, abs=1e-14)
        assert mf.phi == 0.0

    def test_energy_consistency_with_landau(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            gp, gm = rng.uniform(-3, 3, size=2)
            params = DickeParams.from_couplings(1.0, 1.0, gp, gm)
            c = params.couplings()
            mf = mean_field(params)
            e_surface = spin_boson_energy(c, mf.x_bar, mf.p_bar, mf.theta, mf.phi)
            e_landau = minimize_mf(c).energy
            assert e_surface == pytest.approx(e_landau, abs=1e-12)

    def test_against_four_variable_minimizer(self):
        c = CouplingPair(2.0, 0.5)
        res = numeric_joint_minimum(c)
        assert res.fun == pytest.approx(minimize_mf(c).energy, abs=1e-9)
        # cos(theta) = -1/g+^2 at the joint minimum
        assert math.cos(res.x[2]) == pytest.approx(-0.25, abs=1e-6)

    def test_broken_p_azimuth(self):
        mf = mean_field(DickeParams.from_couplings(1.0, 1.0, 0.2, 3.0))
        assert mf.x_bar == 0.0
        assert mf.p_bar > 0
        assert mf.phi == pytest.approx(1.5 * math.pi, abs=1e-12)


class TestEffectiveHamiltonian:
    def test_superradiant_tc_point(self):
        form = effective_hamiltonian(DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5))
        assert form.conserving[1, 1].real == pytest.approx(4.0, abs=1e-14)
        assert form.conserving[0, 1].real == pytest.approx(0.5, abs=1e-14)  # 0.25 + 0.25
        assert np.abs(form.anomalous).max() == 0.0

    def test_anti_tc_point(self):
        form = effective_hamiltonian(DickeParams.from_couplings(1.0, 1.0, 2.0, -0.5))
        assert form.conserving[0, 1].real == pytest.approx(0.0, abs=1e-15)
        assert form.anomalous[0, 1].real == pytest.approx(0.5, abs=1e-15)

    def test_normal_isotropic_conserving(self):
        form = effective_hamiltonian(DickeParams.from_couplings(1.0, 1.0, 0.4, 0.4))
        assert np.abs(form.anomalous).max() == 0.0
        assert form.conserving[0, 0].real == 1.0
        assert form.conserving[1, 1].real == 1.0

    def test_on_boundary_raises(self):
        with pytest.raises(OnBoundary):
            effective_hamiltonian(DickeParams.from_couplings(1.0, 1.0, 1.0, 0.2))

    def test_gap_closes_toward_boundary(self):
        gaps = []
        for g in (0.9, 0.99, 0.999):
            spec = diagonalize(effective_hamiltonian(
                DickeParams.from_couplings(1.0, 1.0, g, 0.0)))
            gaps.append(spec.mode_energies[0])
        assert gaps[0] > gaps[1] > gaps[2]


class TestGroundStateEntropy:
    def test_tc_line_factorized(self):
        for gp in np.linspace(1.05, 4.0, 20):
            params = DickeParams.from_couplings(1.0, 1.0, float(gp), 1.0 / float(gp))
            assert is_particle_conserving(effective_hamiltonian(params))
            assert ground_state_entropy(params) < 1e-10

    def test_anti_tc_line_entangled(self):
        s = ground_state_entropy(DickeParams.from_couplings(1.0, 1.0, 2.0, -0.5))
        assert s == pytest.approx(0.08299706200714, abs=1e-10)
        assert s > 0.01

    def test_frozen_reference_point(self):
        # frozen from this implementation; cross-checked against the
        # truncated-Fock oracle in test_ed.py and by the finite-size trend
        s = ground_state_entropy(DickeParams.from_couplings(1.0, 1.0, 1.5, 0.0))
        assert s == pytest.approx(0.09488669936982, abs=1e-10)

    def test_goldstone_line_raises(self):
        with pytest.raises(Unstable):
            ground_state_entropy(DickeParams.from_couplings(1.0, 1.0, 2.0, 2.0))

    def test_duality_entropy_equal(self):
        rng = np.random.default_rng(22)
        for _ in range(20):
            gm = rng.uniform(1.1, 3.0)
            gp = rng.uniform(-0.95, 0.95) * gm
            s_direct = ground_state_entropy(DickeParams.from_couplings(1.0, 1.3, gp, gm))
            s_swapped = ground_state_entropy(DickeParams.from_couplings(1.0, 1.3, gm, gp))
            assert s_direct == pytest.approx(s_swapped, abs=1e-12)


class TestQuadraticExpansion:
    def test_normal_phase_blocks(self):
        params = DickeParams.from_couplings(1.3, 0.7, 0.6, 0.3)
        form = quadratic_expansion(params, mean_field(params))
        closed = effective_hamiltonian(params)
        assert np.abs(form.conserving - closed.conserving).max() < 1e-14
        assert np.abs(form.anomalous - closed.anomalous).max() < 1e-14

    def test_superradiant_matches_closed_form(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        form = quadratic_expansion(params, mean_field(params))
        closed = effective_hamiltonian(params)
        assert np.abs(form.conserving - closed.conserving).max() < 1e-12
        assert np.abs(form.anomalous - closed.anomalous).max() < 1e-12

    def test_random_draws_match_closed_form(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            w0, om = rng.uniform(0.5, 2.0, size=2)
            gp = float(rng.uniform(1.1, 3.5) * rng.choice([-1.0, 1.0]))
            gm = float(rng.uniform(-0.95, 0.95) * abs(gp))
            params = DickeParams.from_couplings(w0, om, gp, gm)
            form = quadratic_expansion(params, mean_field(params))
            closed = effective_hamiltonian(params)
            scale = max(1.0, np.abs(closed.conserving).max())
            assert np.abs(form.conserving - closed.conserving).max() < 1e-12 * scale
            assert np.abs(form.anomalous - closed.anomalous).max() < 1e-12 * scale

    def test_perturbed_angle_raises(self):
        params = DickeParams.from_couplings(1.0, 1.0, 2.0, 0.5)
        mf = mean_field(params)
        bad = type(mf)(mf.x_bar, mf.p_bar, mf.theta + 0.1, mf.phi,
                       mf.energy_per_spin, mf.phase)
        with pytest.raises(NotStationary):
            quadratic_expansion(params, bad)


class TestClassifyLines:
    def test_examples(self):
        assert classify_lines(DickeParams.from_couplings(1, 1, 2.0, 0.5)) is SymmetryClass.EMERGENT_TC
        assert classify_lines(DickeParams.from_couplings(1, 1, 2.0, -0.5)) is SymmetryClass.EMERGENT_ANTI_TC
        assert classify_lines(DickeParams.from_couplings(1, 1, 2.0, 2.0)) is SymmetryClass.GOLDSTONE_U1
        assert classify_lines(DickeParams.from_couplings(1, 1, 0.4, 0.4)) is SymmetryClass.EMERGENT_TC
        assert classify_lines(DickeParams.from_couplings(1, 1, 2.0, 0.7)) is SymmetryClass.NONE

    def test_params_validation(self):
        with pytest.raises(ValueError):
            DickeParams(0.0, 1.0, 0.1, 0.1)
        with pytest.raises(ValueError):
            DickeParams(1.0, -1.0, 0.1, 0.1)


def test_mf_energy_reduction_to_landau_surface():
    # minimizing the angles by hand reproduces the phase-space potential
    rng = np.random.default_rng(24)
    for _ in range(20):
        gp, gm = rng.uniform(-2, 2, size=2)
        c = CouplingPair(gp, gm)
        x, p = rng.uniform(-1.5, 1.5, size=2)
        thetas = np.linspace(0, math.pi, 721)
        phis = np.linspace(0, 2 * math.pi, 1441)
        tt, ff = np.meshgrid(thetas, phis, indexing="ij")
        surf = (x * x + p * p - gp * x * np.sin(tt) * np.cos(ff)
                + gm * p * np.sin(tt) * np.sin(ff) + 0.5 * np.cos(tt))
        assert surf.min() == pytest.approx(mf_energy((x, p), c), abs=5e-6)
