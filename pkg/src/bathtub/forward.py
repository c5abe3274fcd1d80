"""Forward solvers for the bathtub model.

Two independent first-order routes to the same boundary trace ``k(t, 0)``:

* ``solve_upwind`` marches the density on a space-time grid. Transport
  runs toward ``x = 0`` with speed ``V(delta / L)``, so the difference is
  taken toward the right neighbour with a zero ghost cell at ``x = X_max``.
* ``solve_characteristics`` never builds the field. It marches the shift
  ``xi(t) = int_0^t V(delta / L)`` and the mass ``delta`` and evaluates the
  trace from the characteristics representation with left-point sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from bathtub import io
from bathtub.core import Scenario
from bathtub.errors import ConfigurationError, InstabilityError, MeshMismatchError

NEGATIVITY_TOL = 1e-12


def mesh_steps(total: float, step: float, what: str = "mesh") -> int:
    if not step > 0:
        raise ConfigurationError(f"{what} step must be positive, got {step}")
    n = int(round(total / step))
    if n < 1 or abs(n * step - total) > 1e-9 * max(total, 1.0):
        raise ConfigurationError(f"{what} step {step} does not divide {total}")
    return n


@dataclass(frozen=True)
class SpaceTimeGrid:
    dt: float
    dx: float
    horizon: float
    x_max: float

    def __post_init__(self):
        mesh_steps(self.horizon, self.dt, "time")
        mesh_steps(self.x_max, self.dx, "space")

    @classmethod
    def for_scenario(cls, s: Scenario, dt: float, dx: Optional[float] = None, x_max: Optional[float] = None):
        return cls(dt=dt, dx=dt if dx is None else dx, horizon=s.horizon, x_max=s.length if x_max is None else x_max)

    @property
    def n_t(self) -> int:
        return mesh_steps(self.horizon, self.dt)

    @property
    def n_x(self) -> int:
        return mesh_steps(self.x_max, self.dx)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_t + 1) * self.dt

    @property
    def nodes(self) -> np.ndarray:
        # Node N_x (x = X_max) is the zero ghost cell and is not stored.
        return np.arange(self.n_x) * self.dx

    def cfl(self, v_max: float) -> float:
        return v_max * self.dt / self.dx


@dataclass(frozen=True)
class BoundaryTrace:
    """Samples of the exit density ``k(t_n, 0)`` on a uniform time mesh."""

    times: np.ndarray
    values: np.ndarray
    sigma: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or len(t) < 2:
            raise ConfigurationError("trace needs matching 1-D times and values with at least two samples")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("trace contains non-finite values")
        steps = np.diff(t)
        if abs(t[0]) > 1e-12 or np.ptp(steps) > 1e-9 * max(steps.mean(), 1e-300) + 1e-12:
            raise ConfigurationError("trace must start at t=0 on a uniform mesh")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def dt(self) -> float:
        return (self.times[-1] - self.times[0]) / (len(self.times) - 1)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.values)

    def resample(self, dt: float) -> "BoundaryTrace":
        """Subsample onto a coarser mesh whose step is a multiple of ours."""
        ratio = int(round(dt / self.dt))
        if ratio < 1 or abs(ratio * self.dt - dt) > 1e-9 * dt:
            raise MeshMismatchError(f"step {dt} is not a multiple of the trace step {self.dt}")
        n = len(self.times) - 1
        if n % ratio:
            raise MeshMismatchError(f"step {dt} does not divide the trace horizon {self.horizon}")
        idx = np.arange(0, n + 1, ratio)
        return BoundaryTrace(idx * self.dt, self.values[idx], self.sigma, self.seed)

    def at(self, t) -> np.ndarray:
        """Linear interpolation between samples."""
        return np.interp(t, self.times, self.values)

    def to_csv(self, path) -> int:
        return io.write_csv(path, ("t", "k0"), (self.times, self.values))

    @classmethod
    def from_csv(cls, path, sigma: float = 0.0, seed: Optional[int] = None) -> "BoundaryTrace":
        header, cols = io.read_csv(path)
        if tuple(header) != ("t", "k0"):
            raise ConfigurationError(f"{path}: trace CSV must have header t,k0, got {','.join(header)}")
        if any(v is None for c in cols for v in c):
            raise ConfigurationError(f"{path}: trace CSV has empty cells")
        return cls(np.array(cols[0]), np.array(cols[1]), sigma, seed)


@dataclass(frozen=True)
class MassCurve:
    """Total trip count ``delta(t_n)`` and, when known, the shift ``xi(t_n)``."""

    times: np.ndarray
    delta: np.ndarray
    xi: Optional[np.ndarray] = None

    @property
    def dt(self) -> float:
        return (self.times[-1] - self.times[0]) / (len(self.times) - 1)

    def to_csv(self, path) -> int:
        xi = self.xi if self.xi is not None else np.full_like(self.delta, np.nan)
        return io.write_csv(path, ("t", "delta", "xi"), (self.times, self.delta, xi))


@dataclass(frozen=True)
class DensityField:
    """Upwind solution.

    Full rows are kept only every ``store_every`` steps (``values`` rows
    correspond to ``stored_steps``); per-step diagnostics are kept for all
    steps: the exit density ``trace``, the mass ``Δx Σ_j k``, and the
    row maximum and minimum.
    """

    grid: SpaceTimeGrid
    values: np.ndarray
    stored_steps: np.ndarray
    trace: np.ndarray
    mass: np.ndarray
    row_max: np.ndarray
    row_min: np.ndarray
    velocity: np.ndarray = field(repr=False, default=None)

    def boundary_trace(self) -> BoundaryTrace:
        return BoundaryTrace(self.grid.times, self.trace)

    def mass_curve(self) -> MassCurve:
        return MassCurve(self.grid.times, self.mass)

    def to_csv(self, path, x_stride: int = 1, t_stride: int = 1) -> int:
        steps = self.stored_steps[::t_stride]
        rows = self.values[::t_stride, ::x_stride]
        x = self.grid.nodes[::x_stride]
        t_col = np.repeat(steps * self.grid.dt, len(x))
        x_col = np.tile(x, len(steps))
        return io.write_csv(path, ("t", "x", "k"), (t_col, x_col, rows.ravel()))


def solve_upwind(s: Scenario, grid: SpaceTimeGrid, store_every: Optional[int] = None) -> DensityField:
    """First-order upwind march of the density.

    ``k[n+1,j] = k[n,j] + (dt/dx) v_n (k[n,j+1] - k[n,j]) + dt f(t_n) phi(t_n, x_j)``
    with ``v_n = V((dx/L) sum_{x_j <= L} k[n,j])`` and ``k[n, N_x] = 0``.
    """
    v_max = s.velocity.v_max
    if grid.cfl(v_max) > 1.0 + 1e-12:
        raise ConfigurationError(f"CFL violated: v_max dt/dx = {grid.cfl(v_max):.4g} > 1")
    n_t, n_x = grid.n_t, grid.n_x
    if store_every is None:
        store_every = max(1, n_t // 100)
    x = grid.nodes
    times = grid.times
    lam = grid.dt / grid.dx
    inside = x <= s.length * (1 + 1e-12)
    f = np.asarray(s.inflow(times), dtype=float)
    static_phi = None if s.distribution.time_dependent else np.asarray(s.distribution(0.0, x), dtype=float)

    k = np.zeros(n_x + 1)
    k[:n_x] = s.initial(x)
    stored_steps = np.unique(np.append(np.arange(0, n_t + 1, store_every), n_t))
    values = np.empty((len(stored_steps), n_x))
    trace = np.empty(n_t + 1)
    mass = np.empty(n_t + 1)
    row_max = np.empty(n_t + 1)
    row_min = np.empty(n_t + 1)
    velocity = np.empty(n_t + 1)
    slot = 0
    for n in range(n_t + 1):
        body = k[:n_x]
        total = grid.dx * body.sum()
        if not np.isfinite(total):
            raise InstabilityError(f"non-finite density at step {n} (t = {times[n]:.6g})")
        trace[n] = body[0]
        mass[n] = total
        row_max[n] = body.max()
        row_min[n] = body.min()
        if slot < len(stored_steps) and stored_steps[slot] == n:
            values[slot] = body
            slot += 1
        v = float(s.velocity(grid.dx * body[inside].sum() / s.length))
        velocity[n] = v
        if n == n_t:
            break
        phi = static_phi if static_phi is not None else s.distribution(times[n], x)
        k[:n_x] += lam * v * (k[1:] - body) + grid.dt * f[n] * phi
    return DensityField(grid, values, stored_steps, trace, mass, row_max, row_min, velocity)


def solve_characteristics(s: Scenario, dt: float) -> tuple[MassCurve, BoundaryTrace]:
    """March ``xi`` and ``delta`` and evaluate the exit density directly.

    ``k(t_n, 0) = kbar(xi_n) + dt sum_{m<n} f(t_m) phi(t_m, xi_n - xi_m)``,
    ``delta_{n+1} = delta_n + dt (f(t_n) - V(delta_n / L) k(t_n, 0))`` and
    ``xi_{n+1} = xi_n + dt V(delta_n / L)``. Cost is O(N^2).
    """
    n_t = mesh_steps(s.horizon, dt, "time")
    times = np.arange(n_t + 1) * dt
    f = np.asarray(s.inflow(times), dtype=float)
    xi = np.zeros(n_t + 1)
    delta = np.zeros(n_t + 1)
    trace = np.zeros(n_t + 1)
    delta[0] = s.initial_mass
    for n in range(n_t + 1):
        k0 = float(s.initial(xi[n]))
        if n:
            k0 += dt * float(np.dot(f[:n], s.distribution(times[:n], xi[n] - xi[:n])))
        trace[n] = k0
        if n == n_t:
            break
        v = float(s.velocity(delta[n] / s.length))
        delta[n + 1] = delta[n] + dt * (f[n] - v * k0)
        xi[n + 1] = xi[n] + dt * v
        if delta[n + 1] < -NEGATIVITY_TOL or not np.isfinite(delta[n + 1]):
            raise InstabilityError(f"mass became {delta[n + 1]:.3e} at t = {times[n + 1]:.6g}")
    return MassCurve(times, delta, xi), BoundaryTrace(times, trace)


def mass_balance_residual(field: DensityField, s: Scenario) -> np.ndarray:
    """Per-step defect ``delta_{n+1} - delta_n - dt (f(t_n) - V(delta_n / L) k_n(0))``.

    ``delta`` is the row sum ``dx sum_j k[n, j]``. Any leakage through the
    right boundary or quadrature error in ``phi`` shows up here.
    """
    dt = field.grid.dt
    times = field.grid.times
    delta = field.mass
    f = np.asarray(s.inflow(times[:-1]), dtype=float)
    v = np.asarray(s.velocity(delta[:-1] / s.length), dtype=float)
    return delta[1:] - delta[:-1] - dt * (f - v * field.trace[:-1])
