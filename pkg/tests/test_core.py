import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bathtub.core import (
    ConstantInflow,
    ConstantVelocity,
    GaussianBump,
    GaussianDistribution,
    Greenshields,
    Scenario,
    SinusoidalInflow,
    TabulatedDensity,
    TabulatedDistribution,
    TabulatedInflow,
    TabulatedVelocity,
    UniformDistribution,
    ZeroDensity,
    eval_velocity,
    initial_mass,
    phi_normalization_error,
    validate,
)
from bathtub.errors import ConfigurationError, DomainError
from bathtub.experiments import EXAMPLES


class TestVelocity:
    def test_greenshields_free_flow(self):
        assert eval_velocity(Greenshields(1.0, 1.0), 0.0) == 1.0

    def test_greenshields_jam(self):
        assert eval_velocity(Greenshields(1.0, 1.0), 1.0) == 0.0

    def test_constant(self):
        assert eval_velocity(ConstantVelocity(0.5), 0.37) == 0.5

    def test_negative_density_is_a_domain_error(self):
        with pytest.raises(DomainError):
            eval_velocity(Greenshields(), -0.1)

    def test_tabulated_clamps_outside_breakpoints(self):
        v = TabulatedVelocity((0.0, 0.5, 1.0), (1.0, 0.8, 0.1))
        assert eval_velocity(v, 2.0) == pytest.approx(0.1)
        assert eval_velocity(v, 0.25) == pytest.approx(0.9)
        assert v.v_max == 1.0
        assert v.lipschitz == pytest.approx(1.4)

    @given(st.lists(st.floats(0, 5), min_size=2, max_size=20))
    def test_greenshields_monotone_nonincreasing(self, ks):
        ks = np.sort(ks)
        v = eval_velocity(Greenshields(1.0, 2.0), ks)
        assert np.all(np.diff(v) <= 0)
        assert np.all(v >= 0)

    @given(st.floats(0, 10))
    def test_tabulated_within_bounds(self, k):
        v = TabulatedVelocity((0.0, 1.0, 3.0), (0.9, 0.4, 0.2))
        assert 0.2 <= eval_velocity(v, k) <= 0.9


class TestInflow:
    def test_sinusoidal_default_amplitude(self):
        f = SinusoidalInflow(0.2)
        assert f(0.25) == pytest.approx(0.4)
        assert f.integral(0.0, 8.0) == pytest.approx(1.6)

    def test_sinusoidal_interval_mean_closed_form(self):
        f = SinusoidalInflow(0.2)
        a, b = 0.3, 0.31
        expected = 0.2 + 0.2 / (2 * math.pi * (b - a)) * (math.cos(2 * math.pi * a) - math.cos(2 * math.pi * b))
        assert f.integral(a, b) / (b - a) == pytest.approx(expected, rel=1e-12)

    def test_tabulated_integral(self):
        f = TabulatedInflow((0.0, 1.0, 2.0), (0.0, 1.0, 1.0))
        assert f.integral(0.0, 2.0) == pytest.approx(1.5, rel=1e-4)

    def test_negative_sinusoid_rejected(self):
        with pytest.raises(ConfigurationError):
            SinusoidalInflow(0.1, 0.2)


class TestDistribution:
    @pytest.mark.parametrize(
        "phi",
        [
            UniformDistribution(10.0),
            GaussianDistribution(0.4, 3.0, 0.5),
            TabulatedDistribution((0.0, 10.0), ((0.2, 0.0),), (0.0,)),
        ],
    )
    def test_normalized_at_sampled_times(self, phi):
        rng = np.random.default_rng(0)
        assert phi_normalization_error(phi, rng.uniform(0, 8, 100), 8.0) <= 1e-6

    def test_gaussian_derivatives_match_finite_differences(self):
        phi = GaussianDistribution(0.4, 3.0, 0.5)
        rng = np.random.default_rng(1)
        t = rng.uniform(0, 8, 100)
        x = 3.0 + 0.5 * t + rng.uniform(-1, 1, 100)
        h = 1e-5
        checks = [
            (phi.dx, lambda tt, xx: (phi(tt, xx + h) - phi(tt, xx - h)) / (2 * h)),
            (phi.dt, lambda tt, xx: (phi(tt + h, xx) - phi(tt - h, xx)) / (2 * h)),
            (phi.dxx, lambda tt, xx: (phi.dx(tt, xx + h) - phi.dx(tt, xx - h)) / (2 * h)),
            (phi.dtx, lambda tt, xx: (phi.dx(tt + h, xx) - phi.dx(tt - h, xx)) / (2 * h)),
        ]
        for exact, fd in checks:
            e, d = exact(t, x), fd(t, x)
            scale = np.abs(e).max()
            assert np.abs(e - d).max() <= 1e-6 * scale

    def test_uniform_closed_indicator(self):
        phi = UniformDistribution(10.0)
        assert phi(0.0, 10.0) == 0.1
        assert phi(0.0, 10.0 + 1e-9) == 0.0
        assert not phi.smooth

    def test_gaussian_tail_mass(self):
        phi = GaussianDistribution(0.4, 3.0, 0.5)
        assert phi.tail_mass(0.0, 10.0) < 1e-8


class TestInitial:
    def test_zero_mass(self):
        assert initial_mass(ZeroDensity(), 10.0) == 0.0

    def test_bump_mass(self):
        assert initial_mass(GaussianBump(0.1, 10.0, 5.0), 10.0) == pytest.approx(0.1 * math.sqrt(math.pi / 10), abs=1e-6)
        assert initial_mass(GaussianBump(0.1, 10.0, 5.0), 10.0) == pytest.approx(0.056050, abs=1e-6)

    def test_tabulated_rectangle(self):
        assert initial_mass(TabulatedDensity((0.0, 10.0), (0.2, 0.2)), 10.0) == pytest.approx(2.0, rel=1e-12)

    def test_bump_derivative(self):
        k = GaussianBump(0.1, 10.0, 5.0)
        rng = np.random.default_rng(2)
        x = rng.uniform(4, 6, 100)
        h = 1e-5
        fd = (k(x + h) - k(x - h)) / (2 * h)
        assert np.abs(k.derivative(x) - fd).max() <= 1e-6 * np.abs(k.derivative(x)).max()


class TestScenario:
    def test_rejects_nonpositive_length(self):
        with pytest.raises(ConfigurationError):
            Scenario(Greenshields(), 0.0, ConstantInflow(0.1), UniformDistribution(1.0))

    def test_kernel(self):
        s = EXAMPLES["5.1a"].scenario
        assert s.kernel(5.0) == 0.1
        assert s.kernel(10.5) == 0.0


class TestValidate:
    def test_example_51_only_smoothness_flagged(self):
        report = validate(EXAMPLES["5.1a"].scenario)
        failed = [c.name for c in report.checks if not c.passed]
        assert failed == ["phi_c2"]
        assert report.ok

    def test_gaussian_is_c2(self):
        assert validate(EXAMPLES["5.2c"].scenario)["phi_c2"].passed

    def test_example_52c_flags_conditioning(self):
        report = validate(EXAMPLES["5.2c"].scenario)
        assert not report["phi_exit_conditioning"].passed
        assert report.ok

    def test_zero_inflow_fails_start_positivity(self):
        s = EXAMPLES["5.1a"].scenario.replace(inflow=ConstantInflow(0.0))
        report = validate(s)
        assert not report["inflow_positive_at_start"].passed
        assert not report.ok

    def test_normalization_check(self):
        s = EXAMPLES["5.1a"].scenario.replace(distribution=UniformDistribution(5.0))
        assert validate(s)["phi_normalized"].passed
        s = EXAMPLES["5.1a"].scenario.replace(distribution=GaussianDistribution(4.0, 0.0, 0.0))
        assert not validate(s)["phi_normalized"].passed

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.05, 2.0))
    def test_velocity_floor_detected(self, jam):
        s = Scenario(Greenshields(1.0, jam), 1.0, ConstantInflow(1.0), UniformDistribution(1.0), horizon=1.0)
        report = validate(s)
        # density bound = F(T) / L = 1
        assert report["velocity_min_positive"].passed == (jam > 1.0)
