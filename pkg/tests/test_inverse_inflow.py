import numpy as np
import pytest

from bathtub.core import ConstantInflow, GaussianDistribution, TabulatedDistribution, TabulatedVelocity
from bathtub.errors import AssumptionViolation, MeshMismatchError, NonConvergenceError
from bathtub.experiments import EXAMPLES, forward_trace
from bathtub.forward import BoundaryTrace, MassCurve
from bathtub.inverse_inflow import (
    cumulative_inflow,
    reconstruct,
    reconstruct_explicit,
    recover_f,
    solve_uniform_recursion_full,
    solve_volterra_successive,
)


@pytest.fixture(scope="module")
def trace_51a():
    return forward_trace(EXAMPLES["5.1a"].scenario, 1e-3).resample(1e-2)


@pytest.fixture(scope="module")
def trace_51b():
    return forward_trace(EXAMPLES["5.1b"].scenario, 1e-3).resample(1e-2)


def zero_trace(s, dt=0.01):
    t = np.linspace(0.0, s.horizon, int(round(s.horizon / dt)) + 1)
    return BoundaryTrace(t, np.zeros_like(t))


class TestZeroData:
    def test_successive_returns_zero_quickly(self, small_51):
        curve, iterates = solve_volterra_successive(zero_trace(small_51), small_51)
        assert len(iterates) <= 2
        assert np.all(curve.delta == 0.0)

    def test_explicit_returns_zero(self, small_51):
        rec = reconstruct_explicit(zero_trace(small_51), small_51)
        assert np.all(rec.f_hat == 0.0)


def test_recover_f_matches_explicit_bit_for_bit(trace_51a):
    s = EXAMPLES["5.1a"].scenario
    rec = reconstruct_explicit(trace_51a, s)
    again = recover_f(MassCurve(rec.times, rec.delta, rec.xi), trace_51a, s)
    assert np.array_equal(again.f_hat, rec.f_hat)


def test_recover_f_identity():
    s = EXAMPLES["5.1a"].scenario
    t = np.linspace(0, 8, 81)
    trace = BoundaryTrace(t, 0.01 * t)
    delta = 0.1 * t
    rec = recover_f(MassCurve(t, delta), trace, s)
    v = s.velocity(delta[:-1] / s.length)
    np.testing.assert_allclose(rec.f_hat, 0.1 + v * 0.01 * t[:-1], rtol=1e-13)


@pytest.mark.parametrize("name", ["5.1a", "5.2a"])
def test_cumulative_inflow(name):
    s = EXAMPLES[name].scenario
    rec = reconstruct_explicit(forward_trace(s, 1e-3).resample(1e-2), s)
    assert abs(cumulative_inflow(rec)[-1] - s.inflow.integral(0.0, s.horizon)) <= 1e-2


def test_mesh_mismatch(trace_51a):
    s = EXAMPLES["5.1a"].scenario.replace(horizon=4.0)
    with pytest.raises(MeshMismatchError):
        reconstruct_explicit(trace_51a, s)
    with pytest.raises(MeshMismatchError):
        recover_f(MassCurve(trace_51a.times[:10], np.zeros(10)), trace_51a, EXAMPLES["5.1a"].scenario)


def test_recursion_delay_bound(trace_51b):
    s = EXAMPLES["5.1b"].scenario
    res = solve_uniform_recursion_full(trace_51b, s)
    late = res.curve.xi > s.length
    assert late.any()
    assert np.all(res.eta[late] <= trace_51b.times[late] - s.length / s.velocity.v_max + 1e-12)
    assert np.all(res.eta[late] >= 0)


def test_recursion_matches_successive_before_full_shift(trace_51a):
    s = EXAMPLES["5.1a"].scenario
    a, _ = solve_volterra_successive(trace_51a, s)
    b = solve_uniform_recursion_full(trace_51a, s).curve
    assert np.abs(a.delta - b.delta).max() <= 1e-10


def test_successive_updates_decay(trace_51a):
    rec = reconstruct(trace_51a, EXAMPLES["5.1a"].scenario, "successive")
    norms = rec.diagnostics["update_norms"]
    assert norms[-1] <= 1e-10
    assert all(b < a for a, b in zip(norms[1:], norms[2:]))


class TestAssumptions:
    def test_vanishing_exit_density(self, small_51):
        s = small_51.replace(distribution=TabulatedDistribution((0.0, 5.0, 10.0), ((0.0, 0.2, 0.0),), (0.0,)))
        with pytest.raises(AssumptionViolation):
            reconstruct_explicit(zero_trace(s), s)

    def test_recursion_needs_uniform(self, small_51):
        s = small_51.replace(distribution=GaussianDistribution(4.0, 0.0, 0.0))
        with pytest.raises(AssumptionViolation):
            solve_uniform_recursion_full(zero_trace(s), s)

    def test_successive_rejects_jump_in_data(self, trace_51b):
        with pytest.raises(AssumptionViolation):
            solve_volterra_successive(trace_51b, EXAMPLES["5.1b"].scenario)

    def test_zero_speed(self, small_51):
        s = small_51.replace(velocity=TabulatedVelocity((0.0, 1.0), (0.0, 0.0)))
        with pytest.raises(AssumptionViolation):
            solve_uniform_recursion_full(zero_trace(s), s)

    def test_ill_conditioned_successive_stops(self):
        s = EXAMPLES["5.2c"].scenario.replace(horizon=2.0, inflow=ConstantInflow(0.1))
        trace = forward_trace(s, 1e-2)
        with pytest.raises(NonConvergenceError) as err:
            solve_volterra_successive(trace, s, max_iter=50)
        assert err.value.history


def test_unknown_method(trace_51a):
    with pytest.raises(ValueError):
        reconstruct(trace_51a, EXAMPLES["5.1a"].scenario, "magic")


def test_reconstruction_csv(tmp_path, trace_51a):
    rec = reconstruct_explicit(trace_51a, EXAMPLES["5.1a"].scenario)
    rows = rec.to_csv(tmp_path / "r.csv")
    assert rows == len(rec.times)
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "t,xi,delta,f_hat"
