import math

import numpy as np
import pytest

from mixlab.flows import (
    FlowSpec,
    FlowSpecError,
    FlowTerm,
    ShearSpec,
    ShearTerm,
    flow_from_json,
    flow_to_json,
    mean_zero_reduce,
    phase_integral,
    preset_flow,
    preset_shear,
    time_average,
)

TWO_PI = 2 * math.pi
Y = np.linspace(0.0, TWO_PI, 256, endpoint=False)


class TestMeanZeroReduce:
    def test_constant_shear(self):
        sh = ShearSpec((ShearTerm(1.0, 0),))
        reduced, drift = mean_zero_reduce(sh)
        assert reduced.is_zero()
        assert drift(1.0) == pytest.approx(1.0)
        assert drift(7.5) == pytest.approx(7.5)

    def test_already_mean_zero(self):
        sh = preset_shear("couette")
        reduced, drift = mean_zero_reduce(sh)
        assert len(reduced.terms) == 1
        assert drift(3.0) == 0.0

    def test_offset_plus_cos(self):
        sh = ShearSpec((ShearTerm(2.0, 0), ShearTerm(1.0, 1, "cos")))
        reduced, drift = mean_zero_reduce(sh)
        assert drift(3.0) == pytest.approx(6.0)
        assert np.allclose(reduced.sample(0.0, Y), np.cos(Y), atol=1e-14)

    def test_reduced_mean_vanishes_at_sampled_times(self):
        sh = ShearSpec((ShearTerm(1.5, 0, time_mode="cos"), ShearTerm(1.0, 2, "sin", "sin")))
        reduced, _ = mean_zero_reduce(sh)
        for t in np.linspace(0.0, sh.period, 17):
            assert abs(np.mean(reduced.sample(t, Y))) <= 1e-12


class TestPhaseIntegral:
    def test_steady_is_t_times_u(self):
        sh = preset_shear("couette")
        phi = phase_integral(sh, 2.0)
        # sin y -> coefficients -i/2, +i/2 at l = +-1, scaled by t
        assert phi[2] == pytest.approx(-1j, abs=0)
        assert phi[0] == pytest.approx(1j, abs=0)

    def test_zero_time(self):
        assert np.all(phase_integral(preset_shear("couette"), 0.0) == 0.0)

    def test_cos_t_sin_y_at_pi(self):
        # time integral of cos over [0, pi] vanishes
        sh = ShearSpec((ShearTerm(1.0, 1, "sin", "cos"),), period=TWO_PI)
        phi = phase_integral(sh, math.pi)
        assert np.max(np.abs(phi)) <= 1e-12

    def test_w11_linear_growth(self):
        sh = ShearSpec((ShearTerm(1.0, 1, "sin", "cos"),), period=TWO_PI)
        reduced, _ = mean_zero_reduce(sh)
        for t in (0.5, 2.0, 10.0):
            phi = phase_integral(reduced, t)
            lmax = (len(phi) - 1) // 2
            ls = np.arange(-lmax, lmax + 1)
            dphi = np.exp(1j * np.outer(Y, ls)) @ (1j * ls * phi)
            l1 = float(np.mean(np.abs(dphi)))
            assert l1 <= sh.w11 * t + 1e-6


class TestTimeAverage:
    def test_phase_independent_flow(self):
        flow = preset_flow("cellular")
        ubar = time_average(flow)
        now = flow.velocity_coeffs(0.3, ubar.lattice)
        assert np.allclose(ubar.u, now.u, atol=1e-13)
        assert np.allclose(ubar.v, now.v, atol=1e-13)

    def test_zero_mean_oscillation(self):
        flow = FlowSpec((FlowTerm(1.0, 1, 1, "cos", "cos"),), period=1.0)
        ubar = time_average(flow)
        assert np.max(np.abs(ubar.u)) <= 1e-12
        assert np.max(np.abs(ubar.v)) <= 1e-12

    def test_one_plus_half_cos(self):
        steady = FlowTerm(1.0, 1, 1, "cos", "const")
        osc = FlowTerm(0.5, 1, 1, "cos", "cos")
        flow = FlowSpec((steady, osc), period=2.0)
        ubar = time_average(flow)
        ref = FlowSpec((steady,), period=2.0).velocity_coeffs(0.0, ubar.lattice)
        assert np.max(np.abs(ubar.u - ref.u)) <= 1e-12
        assert np.max(np.abs(ubar.v - ref.v)) <= 1e-12

    def test_average_divergence_free(self):
        flow = FlowSpec(
            (FlowTerm(1.0, 2, 1, "sin", "const"), FlowTerm(0.7, 1, 2, "cos", "sin")),
            period=3.0,
        )
        assert time_average(flow).divergence_max() <= 1e-12


class TestDeclaredBounds:
    def test_declared_bounds_must_dominate(self):
        with pytest.raises(FlowSpecError):
            ShearSpec((ShearTerm(1.0, 1, "sin"),), M=0.5)
        with pytest.raises(FlowSpecError):
            ShearSpec((ShearTerm(1.0, 1, "sin"),), w11=0.1)
        with pytest.raises(FlowSpecError):
            FlowSpec((FlowTerm(1.0, 0, 1, "cos"),), lip=0.2)

    def test_sampled_bounds_autofilled(self):
        sh = ShearSpec((ShearTerm(1.0, 1, "sin"),))
        assert sh.M == pytest.approx(1.0, abs=1e-9)
        assert sh.w11 == pytest.approx(2 / math.pi, abs=1e-4)

    def test_couette_preset_is_periodic_analogue(self):
        sh = preset_shear("couette")
        assert np.allclose(sh.sample(0.0, Y), np.sin(Y), atol=1e-14)


class TestJson:
    def test_shear_round_trip(self):
        sh = ShearSpec((ShearTerm(0.5, 2, "sin", "cos"),), period=4.0, M=0.5, w11=2 / math.pi)
        back = flow_from_json(flow_to_json(sh))
        assert isinstance(back, ShearSpec)
        assert back.terms == sh.terms
        assert back.period == sh.period
        assert back.M == sh.M

    def test_flow_round_trip(self):
        flow = FlowSpec((FlowTerm(1.0, 1, 1, "cos", "sin"),), period=1.0, lip=2.0)
        back = flow_from_json(flow_to_json(flow))
        assert isinstance(back, FlowSpec)
        assert back.terms == flow.terms
        assert back.lip == flow.lip

    def test_preset_names(self):
        assert flow_from_json("zero").is_zero()
        assert isinstance(flow_from_json("cellular"), FlowSpec)

    def test_shear_terms_must_have_zero_kx(self):
        with pytest.raises(FlowSpecError):
            flow_from_json(
                {"kind": "shear", "terms": [{"ampl": 1.0, "kx": 1, "ky": 1}], "bounds": {}}
            )
