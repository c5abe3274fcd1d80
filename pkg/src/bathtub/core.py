"""Scenario building blocks for the generalized bathtub model.

A scenario bundles the network speed law ``V``, the kernel length ``L``
(total lane-miles; the nonlocal kernel is always ``w = 1_[0,L] / L``), the
inflow rate ``f(t)``, the inflow distribution ``phi(t, x)`` over remaining
trip distance, the initial density ``kbar(x)`` and the time horizon ``T``.

All quantities are dimensionless. Every type here is an immutable
dataclass; functions evaluate elementwise on numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np
from scipy import special

from bathtub.errors import ConfigurationError, DomainError

# Quadrature resolution used by normalization and mass checks.
QUAD_POINTS = 10_000
NORMALIZATION_TOL = 1e-6
TAIL_MASS_TOL = 1e-8
SUPPORT_TOL = 1e-12
# Below this, 1/phi(t,0) amplifies roundoff past any useful accuracy.
EXIT_CONDITIONING_TOL = 1e-6


def _as_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


def _check_ascending(name: str, grid: tuple[float, ...]) -> None:
    if len(grid) < 2:
        raise ConfigurationError(f"{name} needs at least two breakpoints")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError(f"{name} breakpoints must be strictly ascending")


# ---------------------------------------------------------------------------
# Velocity laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Greenshields:
    """``V(k) = v0 (1 - k / k_jam)``, floored at zero beyond jam density."""

    kind: ClassVar[str] = "greenshields"
    free_flow_speed: float = 1.0
    jam_density: float = 1.0

    def __post_init__(self):
        if self.free_flow_speed < 0 or self.jam_density <= 0:
            raise ConfigurationError("greenshields needs free_flow_speed >= 0 and jam_density > 0")

    def __call__(self, k):
        k = np.maximum(np.asarray(k, dtype=float), 0.0)
        return self.free_flow_speed * np.maximum(1.0 - k / self.jam_density, 0.0)

    @property
    def v_max(self) -> float:
        return self.free_flow_speed

    @property
    def lipschitz(self) -> float:
        return self.free_flow_speed / self.jam_density

    def minimum(self, k_max: float) -> float:
        return float(self(k_max))

    def params(self) -> dict:
        return {"free_flow_speed": self.free_flow_speed, "jam_density": self.jam_density}


@dataclass(frozen=True)
class ConstantVelocity:
    kind: ClassVar[str] = "constant"
    speed: float = 1.0

    def __post_init__(self):
        if self.speed < 0:
            raise ConfigurationError("constant velocity must be nonnegative")

    def __call__(self, k):
        return np.full(np.shape(k), self.speed, dtype=float) if np.ndim(k) else np.float64(self.speed)

    @property
    def v_max(self) -> float:
        return self.speed

    @property
    def lipschitz(self) -> float:
        return 0.0

    def minimum(self, k_max: float) -> float:
        return self.speed

    def params(self) -> dict:
        return {"speed": self.speed}


@dataclass(frozen=True)
class TabulatedVelocity:
    """Piecewise-linear speed law with constant extrapolation."""

    kind: ClassVar[str] = "tabulated"
    breakpoints: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (1.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", _as_tuple(self.breakpoints))
        object.__setattr__(self, "values", _as_tuple(self.values))
        _check_ascending("velocity", self.breakpoints)
        if len(self.values) != len(self.breakpoints):
            raise ConfigurationError("velocity table: breakpoints and values differ in length")
        if min(self.values) < 0:
            raise ConfigurationError("velocity table has negative speeds")

    def __call__(self, k):
        k = np.maximum(np.asarray(k, dtype=float), 0.0)
        return np.interp(k, self.breakpoints, self.values)

    @property
    def v_max(self) -> float:
        return max(self.values)

    @property
    def lipschitz(self) -> float:
        slopes = np.diff(self.values) / np.diff(self.breakpoints)
        return float(np.max(np.abs(slopes)))

    def minimum(self, k_max: float) -> float:
        inner = [v for b, v in zip(self.breakpoints, self.values) if b <= k_max]
        return float(min(inner + [float(self(0.0)), float(self(k_max))]))

    def params(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}


VelocityFunction = Union[Greenshields, ConstantVelocity, TabulatedVelocity]


def eval_velocity(v: VelocityFunction, k):
    """Evaluate the speed law, rejecting negative densities.

    Solvers call ``v(k)`` directly, which extends ``V`` to ``k < 0`` by
    its value at zero; noisy reconstructions can dip below zero.
    """
    arr = np.asarray(k, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"density must be nonnegative, got min {np.nanmin(arr) if arr.size else arr}")
    return v(arr)


# ---------------------------------------------------------------------------
# Inflow rates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantInflow:
    kind: ClassVar[str] = "constant"
    rate: float = 0.0

    def __post_init__(self):
        if self.rate < 0:
            raise ConfigurationError("inflow rate must be nonnegative")

    def __call__(self, t):
        return np.full(np.shape(t), self.rate, dtype=float) if np.ndim(t) else np.float64(self.rate)

    def integral(self, a, b):
        return self.rate * (np.asarray(b, dtype=float) - np.asarray(a, dtype=float))

    def sup(self, horizon: float) -> float:
        return self.rate

    def params(self) -> dict:
        return {"rate": self.rate}


@dataclass(frozen=True)
class SinusoidalInflow:
    """``f(t) = base + amplitude * sin(omega t)``.

    The default ``amplitude = base`` gives ``base (1 + sin(omega t))``.
    """

    kind: ClassVar[str] = "sinusoidal"
    base: float = 0.2
    amplitude: float | None = None
    omega: float = 2 * math.pi

    def __post_init__(self):
        if self.amplitude is None:
            object.__setattr__(self, "amplitude", float(self.base))
        if self.base - abs(self.amplitude) < -1e-15:
            raise ConfigurationError("sinusoidal inflow would become negative")

    def __call__(self, t):
        return self.base + self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float))

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.omega == 0:
            return self.base * t
        return self.base * t + self.amplitude * (1.0 - np.cos(self.omega * t)) / self.omega

    def integral(self, a, b):
        return self.antiderivative(b) - self.antiderivative(a)

    def sup(self, horizon: float) -> float:
        return self.base + abs(self.amplitude)

    def params(self) -> dict:
        return {"base": self.base, "amplitude": self.amplitude, "omega": self.omega}


@dataclass(frozen=True)
class TabulatedInflow:
    kind: ClassVar[str] = "tabulated"
    times: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (0.0, 0.0)
    quadrature_points: ClassVar[int] = 100

    def __post_init__(self):
        object.__setattr__(self, "times", _as_tuple(self.times))
        object.__setattr__(self, "values", _as_tuple(self.values))
        _check_ascending("inflow", self.times)
        if len(self.values) != len(self.times):
            raise ConfigurationError("inflow table: times and values differ in length")
        if min(self.values) < 0:
            raise ConfigurationError("inflow table has negative rates")

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)

    def integral(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        s = np.linspace(0.0, 1.0, self.quadrature_points + 1)
        nodes = a[..., None] + (b - a)[..., None] * s
        return np.trapezoid(self(nodes), nodes, axis=-1)

    def sup(self, horizon: float) -> float:
        return max(self.values)

    def params(self) -> dict:
        return {"times": list(self.times), "values": list(self.values)}


InflowRate = Union[ConstantInflow, SinusoidalInflow, TabulatedInflow]


# ---------------------------------------------------------------------------
# Inflow distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformDistribution:
    """``phi(x) = 1_[0, length](x) / length``; discontinuous at ``length``."""

    kind: ClassVar[str] = "uniform"
    smooth: ClassVar[bool] = False
    time_dependent: ClassVar[bool] = False
    length: float = 1.0

    def __post_init__(self):
        if self.length <= 0:
            raise ConfigurationError("uniform distribution length must be positive")

    def __call__(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        return np.where((x >= 0) & (x <= self.length), 1.0 / self.length, 0.0)

    def _zero(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        return np.zeros(x.shape)

    # Pointwise (almost everywhere) derivatives; the jump at ``length`` is
    # invisible here and is handled by the recursive solver instead.
    dx = dt = dxx = dtx = _zero

    def support_upper(self, horizon: float) -> float:
        return self.length

    def tail_mass(self, t, length: float) -> float:
        return 0.0 if self.length <= length else 1.0 - length / self.length

    def params(self) -> dict:
        return {"length": self.length}


@dataclass(frozen=True)
class GaussianDistribution:
    """Normal density of width ``a`` whose center moves as ``b(t) = center + drift t``."""

    kind: ClassVar[str] = "gaussian"
    smooth: ClassVar[bool] = True
    width: float = 1.0
    center: float = 0.0
    drift: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigurationError("gaussian width must be positive")

    @property
    def time_dependent(self) -> bool:
        return self.drift != 0.0

    def _parts(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        z = (x - (self.center + self.drift * t)) / self.width
        g = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.width)
        return z, g

    def __call__(self, t, x):
        return self._parts(t, x)[1]

    def dx(self, t, x):
        z, g = self._parts(t, x)
        return -z / self.width * g

    def dxx(self, t, x):
        z, g = self._parts(t, x)
        return (z * z - 1.0) / self.width**2 * g

    def dt(self, t, x):
        return -self.drift * self.dx(t, x)

    def dtx(self, t, x):
        return -self.drift * self.dxx(t, x)

    def support_upper(self, horizon: float) -> float:
        return max(self.center, self.center + self.drift * horizon) + 12.0 * self.width

    def tail_mass(self, t, length: float) -> float:
        b = self.center + self.drift * float(t)
        below = 0.5 * special.erfc(b / (self.width * math.sqrt(2)))
        above = 0.5 * special.erfc((length - b) / (self.width * math.sqrt(2)))
        return float(below + above)

    def params(self) -> dict:
        return {"width": self.width, "center": self.center, "drift": self.drift}


def _interp_zero(grid: np.ndarray, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.interp(x, grid, values, left=0.0, right=0.0)


def _segment_slope(grid: np.ndarray, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    slopes = np.diff(values) / np.diff(grid)
    idx = np.clip(np.searchsorted(grid, x, side="right") - 1, 0, len(slopes) - 1)
    inside = (x >= grid[0]) & (x <= grid[-1])
    return np.where(inside, slopes[idx], 0.0)


@dataclass(frozen=True)
class TabulatedDistribution:
    """Piecewise-linear ``phi`` on ``grid``, zero outside it.

    ``values`` has one row per entry of ``times``; between rows the table is
    linearly interpolated in time and held constant outside ``times``.
    """

    kind: ClassVar[str] = "tabulated"
    smooth: ClassVar[bool] = False
    grid: tuple[float, ...] = (0.0, 1.0)
    values: tuple[tuple[float, ...], ...] = ((1.0, 1.0),)
    times: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        grid = _as_tuple(self.grid)
        rows = np.atleast_2d(np.asarray(self.values, dtype=float))
        times = _as_tuple(self.times)
        if rows.shape[1] != len(grid):
            raise ConfigurationError("distribution table rows must match grid length")
        if rows.shape[0] != len(times):
            raise ConfigurationError("distribution table needs one row per time sample")
        if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("distribution grid must be strictly ascending")
        if len(times) > 1 and any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("distribution times must be strictly ascending")
        if np.any(rows < 0):
            raise ConfigurationError("distribution table has negative values")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", tuple(tuple(float(v) for v in r) for r in rows))
        object.__setattr__(self, "times", times)

    @property
    def time_dependent(self) -> bool:
        return len(self.times) > 1

    def _blend(self, t, x, evaluate):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        grid = np.asarray(self.grid)
        rows = np.asarray(self.values)
        if len(self.times) == 1:
            return evaluate(grid, rows[0], x)
        times = np.asarray(self.times)
        tc = np.clip(t, times[0], times[-1])
        i = np.clip(np.searchsorted(times, tc, side="right") - 1, 0, len(times) - 2)
        w = (tc - times[i]) / (times[i + 1] - times[i])
        out = np.zeros(x.shape)
        for r in range(len(times) - 1):
            mask = i == r
            if np.any(mask):
                lo = evaluate(grid, rows[r], x[mask])
                hi = evaluate(grid, rows[r + 1], x[mask])
                out[mask] = (1 - w[mask]) * lo + w[mask] * hi
        return out

    def _time_slope(self, t, x, evaluate):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        if len(self.times) == 1:
            return np.zeros(x.shape)
        grid = np.asarray(self.grid)
        rows = np.asarray(self.values)
        times = np.asarray(self.times)
        i = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2)
        inside = (t >= times[0]) & (t < times[-1])
        out = np.zeros(x.shape)
        for r in range(len(times) - 1):
            mask = (i == r) & inside
            if np.any(mask):
                out[mask] = (evaluate(grid, rows[r + 1], x[mask]) - evaluate(grid, rows[r], x[mask])) / (
                    times[r + 1] - times[r]
                )
        return out

    def __call__(self, t, x):
        return self._blend(t, x, _interp_zero)

    def dx(self, t, x):
        return self._blend(t, x, _segment_slope)

    def dxx(self, t, x):
        t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        return np.zeros(x.shape)

    def dt(self, t, x):
        return self._time_slope(t, x, _interp_zero)

    def dtx(self, t, x):
        return self._time_slope(t, x, _segment_slope)

    def support_upper(self, horizon: float) -> float:
        return self.grid[-1]

    def tail_mass(self, t, length: float) -> float:
        xs = np.linspace(min(length, self.grid[-1]), self.grid[-1], QUAD_POINTS)
        return float(np.trapezoid(self(t, xs), xs)) if self.grid[-1] > length else 0.0

    def params(self) -> dict:
        return {"grid": list(self.grid), "values": [list(r) for r in self.values], "times": list(self.times)}


InflowDistribution = Union[UniformDistribution, GaussianDistribution, TabulatedDistribution]


# ---------------------------------------------------------------------------
# Initial densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroDensity:
    kind: ClassVar[str] = "zero"

    def __call__(self, x):
        return np.zeros(np.shape(x)) if np.ndim(x) else np.float64(0.0)

    derivative = __call__

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class GaussianBump:
    """``kbar(x) = amplitude * exp(-width (x - center)^2)``."""

    kind: ClassVar[str] = "gaussian_bump"
    amplitude: float = 0.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0 or self.width <= 0:
            raise ConfigurationError("gaussian bump needs amplitude >= 0 and width > 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-self.width * (x - self.center) ** 2)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return -2.0 * self.width * (x - self.center) * self(x)

    def params(self) -> dict:
        return {"amplitude": self.amplitude, "width": self.width, "center": self.center}


@dataclass(frozen=True)
class TabulatedDensity:
    """Piecewise-linear initial density, zero outside the grid."""

    kind: ClassVar[str] = "tabulated"
    grid: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "grid", _as_tuple(self.grid))
        object.__setattr__(self, "values", _as_tuple(self.values))
        _check_ascending("initial density", self.grid)
        if len(self.values) != len(self.grid):
            raise ConfigurationError("initial density table: grid and values differ in length")
        if min(self.values) < 0:
            raise ConfigurationError("initial density table has negative values")

    def __call__(self, x):
        return _interp_zero(np.asarray(self.grid), np.asarray(self.values), np.asarray(x, dtype=float))

    def derivative(self, x):
        return _segment_slope(np.asarray(self.grid), np.asarray(self.values), np.asarray(x, dtype=float))

    def params(self) -> dict:
        return {"grid": list(self.grid), "values": list(self.values)}


InitialDensity = Union[ZeroDensity, GaussianBump, TabulatedDensity]


def initial_mass(kbar: InitialDensity, length: float) -> float:
    """Total initial trip count ``int_0^inf kbar``.

    Closed forms for the zero and Gaussian-bump densities; tabulated data
    use composite trapezoid on a mesh no coarser than ``1e-4 * length``
    refined to contain every breakpoint, which is exact for linear pieces.
    """
    if isinstance(kbar, ZeroDensity):
        return 0.0
    if isinstance(kbar, GaussianBump):
        root = math.sqrt(kbar.width)
        return kbar.amplitude * math.sqrt(math.pi) / (2 * root) * (1.0 + math.erf(kbar.center * root))
    lo = max(kbar.grid[0], 0.0)
    hi = kbar.grid[-1]
    if hi <= lo:
        return 0.0
    n = max(int(math.ceil((hi - lo) / (1e-4 * length))), 1)
    xs = np.union1d(np.linspace(lo, hi, n + 1), [g for g in kbar.grid if lo <= g <= hi])
    return float(np.trapezoid(kbar(xs), xs))


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    velocity: VelocityFunction
    length: float
    inflow: InflowRate
    distribution: InflowDistribution
    initial: InitialDensity = field(default_factory=ZeroDensity)
    horizon: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigurationError("kernel length L must be positive")
        if not self.horizon > 0:
            raise ConfigurationError("horizon T must be positive")

    @property
    def initial_mass(self) -> float:
        return initial_mass(self.initial, self.length)

    def kernel(self, y):
        """The nonlocal weight ``w(y) = 1_[0,L](y) / L``."""
        y = np.asarray(y, dtype=float)
        return np.where((y >= 0) & (y <= self.length), 1.0 / self.length, 0.0)

    def density_bound(self) -> float:
        """A-priori bound on the network-average density ``delta / L`` over ``[0, T]``."""
        return (self.initial_mass + float(self.inflow.integral(0.0, self.horizon))) / self.length

    def replace(self, **changes) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    # "required" failures make a scenario unusable; "assumption" failures
    # disable particular solvers; "info" and "warning" never fail a run.
    severity: str = "required"


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed and c.severity in ("required", "assumption")]

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} [{c.severity}] {c.name}: {c.detail}" for c in self.checks]


def _sample_times(horizon: float, count: int = 100) -> np.ndarray:
    # Deterministic: endpoints plus a seeded spread of interior times.
    rng = np.random.default_rng(12345)
    return np.concatenate([[0.0, horizon], np.sort(rng.uniform(0.0, horizon, count - 2))])


def phi_normalization_error(phi: InflowDistribution, times, horizon: float) -> float:
    upper = phi.support_upper(horizon)
    xs = np.linspace(0.0, upper, QUAD_POINTS)
    worst = 0.0
    for t in np.atleast_1d(times):
        worst = max(worst, abs(float(np.trapezoid(phi(t, xs), xs)) - 1.0))
    return worst


def validate(s: Scenario) -> ValidationReport:
    """Report which standing assumptions hold for ``s``.

    Never raises; downstream code inspects the report to pick code paths.
    """
    T, L = s.horizon, s.length
    times = _sample_times(T)
    checks: list[Check] = []

    err = phi_normalization_error(s.distribution, times, T)
    checks.append(Check("phi_normalized", err <= NORMALIZATION_TOL, f"max |int phi - 1| = {err:.3e}"))

    phi_exit = np.asarray(s.distribution(times, np.zeros_like(times)))
    checks.append(
        Check(
            "phi_positive_at_exit",
            bool(np.all(phi_exit > 0)),
            f"min_t phi(t,0) = {phi_exit.min():.3e}",
            "assumption",
        )
    )
    checks.append(
        Check(
            "phi_exit_conditioning",
            bool(phi_exit.min() >= EXIT_CONDITIONING_TOL),
            f"inverse solvers divide by phi(t,0); amplification up to {1.0 / max(phi_exit.min(), 1e-300):.1e}",
            "warning",
        )
    )
    checks.append(
        Check(
            "phi_c2",
            bool(s.distribution.smooth),
            f"{s.distribution.kind} distribution {'is' if s.distribution.smooth else 'is not'} C2",
            "info",
        )
    )
    tail = max(s.distribution.tail_mass(t, L) for t in times)
    checks.append(Check("phi_supported", tail < TAIL_MASS_TOL, f"mass outside [0,L] = {tail:.3e}", "warning"))

    xs = np.linspace(0.0, max(L, 2 * L), QUAD_POINTS)
    kb = np.asarray(s.initial(xs))
    beyond = np.abs(kb[xs > L]).max() if np.any(xs > L) else 0.0
    checks.append(Check("initial_nonnegative", bool(kb.min() >= 0), f"min kbar = {kb.min():.3e}"))
    checks.append(Check("initial_supported", beyond < SUPPORT_TOL, f"max kbar beyond L = {beyond:.3e}", "warning"))

    ts = np.linspace(0.0, T, QUAD_POINTS)
    f_min = float(np.min(s.inflow(ts)))
    checks.append(Check("inflow_nonnegative", f_min >= 0, f"min f = {f_min:.3e}"))
    f0 = float(s.inflow(0.0))
    checks.append(Check("inflow_positive_at_start", f0 > 0, f"f(0) = {f0:.3e}", "assumption"))

    rho = s.density_bound()
    v_min = s.velocity.minimum(rho)
    checks.append(Check("velocity_nonnegative", v_min >= 0, f"min V on [0, {rho:.3g}] = {v_min:.3e}"))
    checks.append(Check("velocity_min_positive", v_min > 0, f"V_min = {v_min:.3e}", "assumption"))
    return ValidationReport(tuple(checks))


VELOCITY_KINDS = {c.kind: c for c in (Greenshields, ConstantVelocity, TabulatedVelocity)}
INFLOW_KINDS = {c.kind: c for c in (ConstantInflow, SinusoidalInflow, TabulatedInflow)}
DISTRIBUTION_KINDS = {c.kind: c for c in (UniformDistribution, GaussianDistribution, TabulatedDistribution)}
INITIAL_KINDS = {c.kind: c for c in (ZeroDensity, GaussianBump, TabulatedDensity)}
