import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradflux import EnergyParams, PhaseBias, build_hamiltonian, convert_units, eigenlevels, phase_grid_oracle
from gradflux.circuit import batch_levels
from gradflux.exceptions import GridTooSmall, InvalidDimension, InvalidParameters, InvalidValue, NoConvergence

from .conftest import table1_params

# f01 from the Richardson-extrapolated phase-grid oracle (20001 points, automatic phi_max).
GOLDEN_F01 = {
    ("a", 0.0): 14.832386985111496,
    ("a", 0.5): 2.517130466716295,
    ("d", 0.5): 2.464063527752498,
}

energies = st.tuples(
    st.floats(0.5, 15.0), st.floats(0.5, 6.0), st.floats(0.3, 3.0)
).map(lambda t: EnergyParams(*t))


class TestEnergyParams:
    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, math.inf), (1, 1, math.nan)])
    def test_rejects_nonpositive_or_nonfinite(self, bad):
        with pytest.raises(InvalidParameters):
            EnergyParams(*bad)

    def test_json_round_trip(self):
        p = EnergyParams(9.21, 3.97, 1.95)
        assert EnergyParams.from_dict(p.to_dict()) == p


class TestBuildHamiltonian:
    def test_symmetric(self, sample_a):
        h = build_hamiltonian(sample_a, 0.37, 50)
        assert h.shape == (50, 50)
        assert np.max(np.abs(h - h.T)) <= 1e-12

    def test_harmonic_limit_equal_gaps(self):
        # E_J must be positive; 1e-300 is numerically zero
        for phi in (0.0, 0.3):
            w = np.linalg.eigvalsh(build_hamiltonian((1e-300, 4.0, 2.0), phi, 40))
            assert np.allclose(np.diff(w[:5]), 8.0, rtol=1e-9)

    def test_sample_a_at_pi_matches_grid_oracle(self, sample_a):
        w = np.linalg.eigvalsh(build_hamiltonian(sample_a, PhaseBias(0.5), 60))
        assert (w[1] - w[0]) == pytest.approx(GOLDEN_F01[("a", 0.5)], rel=1e-6)

    def test_period_one_flux_quantum(self, sample_a):
        a = np.linalg.eigvalsh(build_hamiltonian(sample_a, 0.2, 400))[:4]
        b = np.linalg.eigvalsh(build_hamiltonian(sample_a, 1.2, 400))[:4]
        assert np.max(np.abs(a - b)) < 1e-9

    def test_offset_only_in_quadratic_term(self):
        p = EnergyParams(3.0, 2.0, 1.5)
        diff = build_hamiltonian(p, 0.25, 10) - build_hamiltonian(p, 0.0, 10)
        delta = 2 * math.pi * 0.25
        k = np.arange(1, 10)
        expected = np.diag(p.phi_zpf * np.sqrt(k / 2), 1)
        expected = p.e_l * delta * (expected + expected.T) + 0.5 * p.e_l * delta**2 * np.eye(10)
        assert np.allclose(diff, expected, atol=1e-12)

    @pytest.mark.parametrize("dim", [3, 0, 10.5])
    def test_invalid_dimension(self, sample_a, dim):
        with pytest.raises(InvalidDimension):
            build_hamiltonian(sample_a, 0.0, dim)


class TestEigenlevels:
    def test_harmonic_ladder(self):
        r = eigenlevels((1e-300, 4.0, 2.0), 0.0, tol=1e-9)
        assert r.converged
        assert r.levels[1] == pytest.approx(8.0, rel=1e-12)
        assert r.levels[2] == pytest.approx(16.0, rel=1e-12)

    def test_sample_d_half_flux_against_oracle(self):
        r = eigenlevels(table1_params("d"), 0.5)
        assert r.f01 == pytest.approx(GOLDEN_F01[("d", 0.5)], rel=1e-6)

    def test_parity_random_flux(self, sample_a):
        rng = np.random.default_rng(7)
        x = rng.uniform(-1.5, 1.5, 20)
        lp, *_ = batch_levels(sample_a, x, n_levels=2)
        lm, *_ = batch_levels(sample_a, -x, n_levels=2)
        assert np.max(np.abs(lp[:, 1] - lm[:, 1])) < 1e-9

    def test_levels_sorted_and_relative(self, sample_a):
        r = eigenlevels(sample_a, 0.13, n_levels=6)
        assert r.levels[0] == 0.0
        assert np.all(np.diff(r.levels) > 0)
        absolute = eigenlevels(sample_a, 0.13, n_levels=6, relative=False)
        assert np.allclose(absolute.levels - absolute.levels[0], r.levels, atol=1e-12)

    def test_residual_below_tol_when_converged(self, sample_a):
        r = eigenlevels(sample_a, 0.3, tol=1e-11)
        assert r.converged and r.residual < 1e-11

    def test_no_convergence_carries_best(self, sample_a):
        with pytest.raises(NoConvergence) as info:
            eigenlevels(sample_a, 0.3, tol=1e-300, dim_cap=80)
        assert info.value.best is not None
        assert info.value.best.dim_used == 80
        assert not info.value.best.converged

    @pytest.mark.parametrize("kw", [{"tol": 0.0}, {"n_levels": 1}])
    def test_bad_arguments(self, sample_a, kw):
        with pytest.raises(InvalidValue):
            eigenlevels(sample_a, 0.0, **kw)

    def test_harmonic_limit_linear_in_ej(self):
        err = [abs(eigenlevels((ej, 4.0, 2.0), 0.0).f01 - 8.0) for ej in (1e-3, 2e-3, 4e-3)]
        assert err[1] / err[0] == pytest.approx(2.0, rel=1e-2)
        assert err[2] / err[1] == pytest.approx(2.0, rel=1e-2)

    @settings(max_examples=15, deadline=None)
    @given(energies, st.floats(-1.0, 1.0))
    def test_periodicity_property(self, p, x):
        a = eigenlevels(p, x, tol=1e-11, reduce_period=False)
        b = eigenlevels(p, x + 1.0, tol=1e-11, reduce_period=False)
        assert np.max(np.abs(a.levels - b.levels)) < 1e-9

    @settings(max_examples=15, deadline=None)
    @given(energies, st.floats(-1.0, 1.0))
    def test_parity_property(self, p, x):
        a = eigenlevels(p, x, tol=1e-11)
        b = eigenlevels(p, -x, tol=1e-11)
        assert np.max(np.abs(a.levels - b.levels)) < 1e-9


class TestPhaseGridOracle:
    def test_harmonic(self):
        w = phase_grid_oracle((1e-300, 4.0, 2.0), 0.0, n_points=2001)
        assert w[1] == pytest.approx(8.0, rel=1e-6)

    def test_sample_a_golden_and_refinement(self, sample_a):
        coarse = phase_grid_oracle(sample_a, 0.0, n_points=1001)[1]
        fine = phase_grid_oracle(sample_a, 0.0, n_points=2001)[1]
        assert abs(coarse / fine - 1) < 1e-7
        assert fine == pytest.approx(GOLDEN_F01[("a", 0.0)], rel=1e-7)
        assert eigenlevels(sample_a, 0.0).f01 == pytest.approx(GOLDEN_F01[("a", 0.0)], rel=1e-6)

    def test_doubling_phi_max_at_fixed_spacing(self, sample_a):
        phi_max, n = 14.0, 14001
        a = phase_grid_oracle(sample_a, 0.2, n_levels=3, phi_max=phi_max, n_points=n, relative=False)
        b = phase_grid_oracle(sample_a, 0.2, n_levels=3, phi_max=2 * phi_max, n_points=2 * n - 1, relative=False)
        assert np.allclose(a, b, rtol=1e-8, atol=0)

    def test_grid_too_small(self, sample_a):
        with pytest.raises(GridTooSmall):
            phase_grid_oracle(sample_a, 0.0, phi_max=3.0)

    def test_boundary_mass_detected(self):
        # wall high enough for the static check but the states are wide
        p = EnergyParams(1e-300, 40.0, 0.05)
        with pytest.raises(GridTooSmall):
            phase_grid_oracle(p, 0.0, phi_max=math.sqrt(2 * (2.5 * p.plasma_ghz + 20 * p.e_l) / p.e_l) + 0.5)

    @pytest.mark.parametrize("n", [500, 1000])
    def test_rejects_bad_point_count(self, sample_a, n):
        with pytest.raises(InvalidValue):
            phase_grid_oracle(sample_a, 0.0, n_points=n)


class TestConvertUnits:
    def test_mean_capacitance(self):
        assert convert_units("capacitance->e_c", 4.7) == pytest.approx(4.09, rel=0.02)

    def test_mean_inductance(self):
        assert convert_units("inductance->e_l", 88.0) == pytest.approx(1.856, rel=0.01)

    def test_squares(self):
        assert convert_units("inductance->squares", 88.0, 0.22) == pytest.approx(400.0, rel=1e-12)

    @pytest.mark.parametrize(
        "fwd,inv,aux",
        [("capacitance->e_c", "e_c->capacitance", None), ("inductance->e_l", "e_l->inductance", None),
         ("inductance->squares", "squares->inductance", 0.22)],
    )
    def test_round_trip(self, fwd, inv, aux):
        for v in (0.1, 4.7, 88.0, 1234.5):
            assert convert_units(inv, convert_units(fwd, v, aux), aux) == pytest.approx(v, rel=1e-12)

    @pytest.mark.parametrize("v", [0.0, -1.0, math.nan])
    def test_invalid_value(self, v):
        with pytest.raises(InvalidValue):
            convert_units("capacitance->e_c", v)

    def test_unknown_kind(self):
        with pytest.raises(InvalidValue):
            convert_units("farads->joules", 1.0)
