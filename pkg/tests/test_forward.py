import numpy as np
import pytest

from bathtub.core import (
    ConstantInflow,
    GaussianBump,
    Greenshields,
    Scenario,
    UniformDistribution,
)
from bathtub.errors import ConfigurationError, MeshMismatchError
from bathtub.experiments import EXAMPLES
from bathtub.forward import (
    BoundaryTrace,
    SpaceTimeGrid,
    mass_balance_residual,
    mesh_steps,
    solve_characteristics,
    solve_upwind,
)


def test_mesh_steps_rejects_non_divisor():
    assert mesh_steps(8.0, 0.01) == 800
    with pytest.raises(ConfigurationError):
        mesh_steps(8.0, 0.03)


def test_cfl_violation_rejected(small_51):
    with pytest.raises(ConfigurationError, match="CFL"):
        solve_upwind(small_51, SpaceTimeGrid.for_scenario(small_51, 0.02, 0.01))


class TestZeroScenario:
    def setup_method(self):
        self.s = Scenario(Greenshields(), 10.0, ConstantInflow(0.0), UniformDistribution(10.0), horizon=1.0)

    def test_upwind_stays_zero(self):
        fld = solve_upwind(self.s, SpaceTimeGrid.for_scenario(self.s, 0.01))
        assert np.all(fld.values == 0.0)
        assert np.all(mass_balance_residual(fld, self.s) == 0.0)

    def test_characteristics_stays_zero(self):
        mass, trace = solve_characteristics(self.s, 0.01)
        assert np.all(mass.delta == 0.0)
        assert np.all(trace.values == 0.0)
        np.testing.assert_allclose(mass.xi, mass.times, rtol=0, atol=1e-12)


class TestConstantVelocity:
    def test_upwind_trace(self, constant_v):
        fld = solve_upwind(constant_v, SpaceTimeGrid.for_scenario(constant_v, 1e-3))
        assert abs(fld.trace[-1] - 0.015 * 8) <= 1e-3

    def test_characteristics_mass_at_horizon(self, constant_v):
        mass, trace = solve_characteristics(constant_v, 1e-3)
        assert mass.delta[-1] == pytest.approx(0.96, abs=1e-3)
        np.testing.assert_allclose(trace.values, 0.015 * trace.times, rtol=0, atol=1e-12)


class TestExample51a:
    @pytest.fixture(scope="class")
    @staticmethod
    def field():
        s = EXAMPLES["5.1a"].scenario
        return s, solve_upwind(s, SpaceTimeGrid.for_scenario(s, 1e-3))

    def test_trace_increasing_below_cumulative_bound(self, field):
        _, fld = field
        assert np.all(np.diff(fld.trace) > 0)
        assert fld.trace[-1] <= 0.15 * 8 / 10 + 1e-12

    def test_nonnegative(self, field):
        _, fld = field
        assert fld.row_min.min() >= -1e-12

    def test_mass_balance_residual(self, field):
        s, fld = field
        assert np.abs(mass_balance_residual(fld, s)).max() <= 1e-2

    def test_xi_monotone_and_bounded_increments(self):
        s = EXAMPLES["5.1a"].scenario
        mass, _ = solve_characteristics(s, 1e-2)
        steps = np.diff(mass.xi)
        assert np.all(steps >= 0)
        assert np.all(steps <= s.velocity.v_max * 1e-2 + 1e-15)
        assert mass.delta[0] == s.initial_mass


def test_residual_with_initial_bump_first_order():
    s = EXAMPLES["5.2b"].scenario.replace(horizon=2.0)
    res = []
    for dt in (2e-3, 1e-3):
        fld = solve_upwind(s, SpaceTimeGrid.for_scenario(s, dt))
        res.append(np.abs(mass_balance_residual(fld, s)).max())
    # The row-sum update telescopes, so the residual sits at roundoff.
    assert max(res) <= 1e-12 or res[1] <= 0.6 * res[0]


def test_field_support_within_domain():
    s = EXAMPLES["5.1a"].scenario
    fld = solve_upwind(s, SpaceTimeGrid.for_scenario(s, 1e-2))
    assert fld.values.shape[1] == fld.grid.n_x
    assert fld.grid.nodes[-1] < s.length


def test_initial_perturbation_bounded_ratio():
    s = EXAMPLES["5.2b"].scenario.replace(horizon=4.0)
    base = solve_characteristics(s, 1e-2)[1].values
    ratios = []
    for eps in (1e-3, 1e-4, 1e-5):
        bump = s.initial
        pert = s.replace(initial=GaussianBump(bump.amplitude + eps, bump.width, bump.center))
        other = solve_characteristics(pert, 1e-2)[1].values
        ratios.append(np.abs(other - base).max() / eps)
    assert max(ratios) < 10
    assert max(ratios) / min(ratios) < 1.5


class TestBoundaryTrace:
    def test_resample_requires_integer_ratio(self):
        tr = BoundaryTrace(np.linspace(0, 1, 11), np.zeros(11))
        assert len(tr.resample(0.2)) == 6
        with pytest.raises(MeshMismatchError):
            tr.resample(0.15)

    def test_rejects_nonuniform_mesh(self):
        with pytest.raises(ConfigurationError):
            BoundaryTrace(np.array([0.0, 0.1, 0.3]), np.zeros(3))

    def test_rejects_nan(self):
        with pytest.raises(ConfigurationError):
            BoundaryTrace(np.array([0.0, 0.1]), np.array([0.0, np.nan]))

    def test_csv_round_trip(self, tmp_path):
        t = np.linspace(0, 1, 101)
        tr = BoundaryTrace(t, np.sin(t))
        tr.to_csv(tmp_path / "trace.csv")
        back = BoundaryTrace.from_csv(tmp_path / "trace.csv")
        np.testing.assert_allclose(back.values, tr.values, rtol=1e-11)
        assert (tmp_path / "trace.csv").read_bytes().startswith(b"t,k0\n")

    def test_field_csv(self, tmp_path, small_51):
        fld = solve_upwind(small_51, SpaceTimeGrid.for_scenario(small_51, 0.05))
        rows = fld.to_csv(tmp_path / "field.csv")
        assert rows == len(fld.stored_steps) * fld.grid.n_x
