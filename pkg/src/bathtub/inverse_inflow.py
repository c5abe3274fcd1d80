"""Recover the inflow rate ``f(t)`` from the exit density ``k(t, 0)``.

Three routes to the trip count ``delta``, all on the trace mesh with
left-point quadrature:

* ``reconstruct_explicit``: one sequential sweep of the discretized
  second-kind Volterra equation, with the ``d phi / d tau`` integral
  telescoped into point differences of ``phi``.
* ``solve_volterra_successive``: Picard iteration of the same equation
  written with the analytic derivatives of ``phi``; needs a C2 ``phi``.
* ``solve_uniform_recursion``: Picard iteration of the delayed recursion
  that holds for the uniform distribution, whose jump at ``x = L`` turns
  into a point evaluation ``delta(eta(t))``.

``recover_f`` turns any of them into rates by a difference quotient of the
mass balance ``delta' = f - V(delta / L) k(t, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from bathtub import io
from bathtub.core import Scenario, UniformDistribution
from bathtub.errors import AssumptionViolation, MeshMismatchError, NonConvergenceError
from bathtub.forward import BoundaryTrace, MassCurve, mesh_steps

# Rows of the (n, m) kernel evaluated per vectorized block.
BLOCK_ROWS = 256
# Update norms above this are treated as divergence rather than slow burn-in.
DIVERGENCE_LIMIT = 1e150


@dataclass(frozen=True)
class Reconstruction:
    """Recovered sequences on the trace mesh.

    ``f_hat[n]`` approximates the mean inflow over ``[t_n, t_{n+1})``, so it
    has one entry fewer than ``times``, ``xi`` and ``delta``.
    """

    times: np.ndarray
    xi: np.ndarray
    delta: np.ndarray
    f_hat: np.ndarray
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return (self.times[-1] - self.times[0]) / (len(self.times) - 1)

    def to_csv(self, path, truth_mean: Optional[np.ndarray] = None) -> int:
        header = ["t", "xi", "delta", "f_hat"]
        cols = [self.times, self.xi, self.delta, self.f_hat]
        if truth_mean is not None:
            header.append("f_true_mean")
            cols.append(truth_mean)
        return io.write_csv(path, header, cols)


@dataclass(frozen=True)
class VolterraIterate:
    index: int
    delta: np.ndarray
    update_norm: float


def _check_trace(trace: BoundaryTrace, s: Scenario) -> int:
    n = len(trace) - 1
    if abs(trace.horizon - s.horizon) > 1e-9 * s.horizon:
        raise MeshMismatchError(f"trace horizon {trace.horizon} differs from scenario horizon {s.horizon}")
    return n


def _phi_exit(trace: BoundaryTrace, s: Scenario) -> np.ndarray:
    phi0 = np.asarray(s.distribution(trace.times, np.zeros_like(trace.times)), dtype=float)
    if np.any(phi0 <= 0):
        bad = trace.times[np.argmax(phi0 <= 0)]
        raise AssumptionViolation(f"phi(t,0) <= 0 at t = {bad:.6g}", "phi(t,0) > 0 on [0,T]")
    return phi0


def reconstruct_explicit(trace: BoundaryTrace, s: Scenario) -> Reconstruction:
    """Explicit sequential scheme for ``xi_n``, ``delta_n`` and ``f_n``.

    ``xi_n = sum_{m<n} V(delta_m / L) dt`` and::

        delta_n = [k_n - kbar(xi_n) + delta_bar phi(0, xi_n)
                   - sum_{m<n} V(delta_m / L) k_m phi(t_m, xi_n - xi_m) dt
                   + sum_{m<n} delta_m (phi(t_{m+1}, xi_n - xi_{m+1}) - phi(t_m, xi_n - xi_m))]
                  / phi(t_n, 0)

    starting from ``xi_0 = 0`` and ``delta_0 = delta_bar``.
    """
    n_steps = _check_trace(trace, s)
    phi0 = _phi_exit(trace, s)
    dt = trace.dt
    t = trace.times
    k = trace.values
    L = s.length
    phi = s.distribution
    delta_bar = s.initial_mass

    xi = np.zeros(n_steps + 1)
    delta = np.zeros(n_steps + 1)
    v = np.zeros(n_steps + 1)
    delta[0] = delta_bar
    v[0] = s.velocity(delta_bar / L)
    for n in range(1, n_steps + 1):
        xi[n] = xi[n - 1] + v[n - 1] * dt
        # g[m] = phi(t_m, xi_n - xi_m) for m = 0..n; g[n] = phi(t_n, 0).
        g = np.asarray(phi(t[: n + 1], xi[n] - xi[: n + 1]), dtype=float)
        head = k[n] - float(s.initial(xi[n])) + delta_bar * float(phi(0.0, xi[n]))
        transport = dt * np.dot(v[:n] * k[:n], g[:n])
        telescoped = np.dot(delta[:n], g[1:] - g[:n])
        delta[n] = (head - transport + telescoped) / phi0[n]
        v[n] = s.velocity(delta[n] / L)
    curve = MassCurve(t, delta, xi)
    rec = recover_f(curve, trace, s)
    return Reconstruction(t, xi, delta, rec.f_hat, "explicit", {"phi_min_exit": float(phi0.min())})


def _gamma(delta_old: np.ndarray, trace: BoundaryTrace, s: Scenario, phi0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One application of the successive-approximation map.

    Uses ``d phi / d tau = phi_t - v phi_x`` along characteristics, evaluated
    analytically, with every integral by left-point quadrature.
    """
    dt = trace.dt
    t = trace.times
    k = trace.values
    L = s.length
    phi = s.distribution
    n_all = len(t)
    v = np.asarray(s.velocity(delta_old / L), dtype=float)
    xi = np.concatenate([[0.0], np.cumsum(v[:-1]) * dt])

    head = k - np.asarray(s.initial(xi), dtype=float) + s.initial_mass * np.asarray(phi(0.0, xi), dtype=float)
    integral = np.zeros(n_all)
    a = v * k  # multiplies phi
    b = v * delta_old  # multiplies phi_x
    c = delta_old  # multiplies phi_t
    for start in range(1, n_all, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n_all)
        rows = np.arange(start, stop)
        cols = np.arange(stop - 1)
        lower = cols[None, :] < rows[:, None]
        gap = np.where(lower, xi[rows, None] - xi[None, cols], 0.0)
        tm = np.broadcast_to(t[None, cols], gap.shape)
        val = phi(tm, gap)
        px = phi.dx(tm, gap)
        pt = phi.dt(tm, gap)
        kernel = (-a[None, cols] * val - b[None, cols] * px + c[None, cols] * pt) * lower
        integral[rows] = dt * kernel.sum(axis=1)
    return (head + integral) / phi0, xi


def solve_volterra_successive(
    trace: BoundaryTrace,
    s: Scenario,
    tol: float = 1e-10,
    max_iter: int = 200,
    allow_nonsmooth: bool = False,
) -> tuple[MassCurve, list[VolterraIterate]]:
    """Picard iteration ``delta^(i+1) = Gamma[delta^(i)]`` from ``delta^(0) = 0``.

    Stops once the sup-norm update drops to ``tol``. A non-smooth ``phi``
    is rejected unless ``allow_nonsmooth``; the uniform distribution is
    accepted when the converged shift stays below ``L``, where it is
    smooth on the domain of dependence.
    """
    _check_trace(trace, s)
    phi0 = _phi_exit(trace, s)
    uniform = isinstance(s.distribution, UniformDistribution)
    if not (s.distribution.smooth or uniform or allow_nonsmooth):
        raise AssumptionViolation(f"{s.distribution.kind} distribution is not C2", "phi in C2")
    delta = np.zeros(len(trace))
    history: list[float] = []
    iterates: list[VolterraIterate] = []
    for i in range(1, max_iter + 1):
        new, xi = _gamma(delta, trace, s, phi0)
        if not np.all(np.isfinite(new)):
            history.append(float("inf"))
            raise NonConvergenceError(f"iterate {i} is not finite", history)
        update = float(np.max(np.abs(new - delta)))
        history.append(update)
        if update > DIVERGENCE_LIMIT:
            raise NonConvergenceError(f"iterate {i} diverged (update {update:.3e})", history)
        iterates.append(VolterraIterate(i, new, update))
        delta = new
        if update <= tol:
            break
    else:
        raise NonConvergenceError(f"no convergence to {tol:g} in {max_iter} iterations (last {history[-1]:.3e})", history)
    v = np.asarray(s.velocity(delta / s.length), dtype=float)
    xi = np.concatenate([[0.0], np.cumsum(v[:-1]) * trace.dt])
    if uniform and not allow_nonsmooth and xi[-1] >= s.distribution.length:
        raise AssumptionViolation(
            f"shift reaches {xi[-1]:.4g} >= {s.distribution.length:g}; the jump of phi enters the data",
            "phi in C2 on the domain of dependence",
        )
    return MassCurve(trace.times, delta, xi), iterates


@dataclass(frozen=True)
class UniformRecursionResult:
    curve: MassCurve
    eta: np.ndarray
    history: list[float]


def _eta(xi: np.ndarray, t: np.ndarray, L: float, n: int) -> tuple[float, int, float]:
    """Delayed time with ``xi(t_n) - xi(eta) = L``, linear inside the bracketing cell.

    Returns ``(eta, m, theta)`` with ``eta = t_m + theta dt``.
    """
    target = xi[n] - L
    m = int(np.searchsorted(xi[: n + 1], target, side="right")) - 1
    theta = (target - xi[m]) / (xi[m + 1] - xi[m])
    return t[m] + theta * (t[m + 1] - t[m]), m, theta


def solve_uniform_recursion(
    trace: BoundaryTrace, s: Scenario, tol: float = 1e-10, max_iter: int = 200
) -> MassCurve:
    """Successive approximations for ``phi = 1_[0,L] / L``.

    For ``xi(t) <= L``:  ``delta(t) = delta_bar - int_0^t v k + L (k(t,0) - kbar(xi(t)))``;
    afterwards ``delta(t) = delta(eta(t)) - int_eta^t v k + L (k(t,0) - kbar(xi(t)))``
    where ``delta(eta)`` is read from the iterate being built.
    ``solve_uniform_recursion_full`` also returns ``eta`` and the update history.
    """
    return solve_uniform_recursion_full(trace, s, tol, max_iter).curve


def solve_uniform_recursion_full(
    trace: BoundaryTrace, s: Scenario, tol: float = 1e-10, max_iter: int = 200
) -> UniformRecursionResult:
    _check_trace(trace, s)
    if not isinstance(s.distribution, UniformDistribution):
        raise AssumptionViolation(f"got a {s.distribution.kind} distribution", "uniform phi")
    L = s.length
    if abs(s.distribution.length - L) > 1e-12 * L:
        raise AssumptionViolation("uniform distribution length must equal the kernel length L", "uniform phi on [0,L]")
    dt = trace.dt
    t = trace.times
    k = trace.values
    n_all = len(t)
    delta_bar = s.initial_mass
    v_cap = s.velocity.v_max
    if v_cap <= 0:
        raise AssumptionViolation("speed law is identically zero", "V >= V_min > 0")

    delta = np.zeros(n_all)
    eta = np.zeros(n_all)
    history: list[float] = []
    for _ in range(max_iter):
        v = np.asarray(s.velocity(delta / L), dtype=float)
        if np.min(v) <= 0:
            raise AssumptionViolation(f"speed reached {np.min(v):.3e}", "V >= V_min > 0")
        xi = np.concatenate([[0.0], np.cumsum(v[:-1]) * dt])
        flux = v * k
        cum = np.concatenate([[0.0], np.cumsum(flux[:-1]) * dt])  # int_0^{t_n} v k
        local = L * (k - np.asarray(s.initial(xi), dtype=float))
        new = np.empty(n_all)
        eta = np.zeros(n_all)
        for n in range(n_all):
            if xi[n] <= L:
                new[n] = delta_bar - cum[n] + local[n]
                continue
            eta_n, m, theta = _eta(xi, t, L, n)
            eta[n] = eta_n
            delta_eta = (1 - theta) * new[m] + theta * new[m + 1]
            tail = cum[n] - cum[m + 1] + flux[m] * (t[m + 1] - eta_n)
            new[n] = delta_eta - tail + local[n]
        update = float(np.max(np.abs(new - delta)))
        history.append(update)
        delta = new
        if update <= tol:
            break
    else:
        raise NonConvergenceError(f"no convergence to {tol:g} in {max_iter} iterations", history)
    v = np.asarray(s.velocity(delta / L), dtype=float)
    xi = np.concatenate([[0.0], np.cumsum(v[:-1]) * dt])
    return UniformRecursionResult(MassCurve(t, delta, xi), eta, history)


def recover_f(curve: MassCurve, trace: BoundaryTrace, s: Scenario) -> Reconstruction:
    """``f_n = (delta_{n+1} - delta_n) / dt + V(delta_n / L) k(t_n, 0)``.

    ``f_n`` stands for the mean of ``f`` over ``[t_n, t_{n+1})``.
    """
    if len(curve.delta) != len(trace) or not np.allclose(curve.times, trace.times, rtol=0, atol=1e-9 * trace.horizon):
        raise MeshMismatchError("mass curve and trace live on different meshes")
    dt = trace.dt
    delta = np.asarray(curve.delta, dtype=float)
    v = np.asarray(s.velocity(delta[:-1] / s.length), dtype=float)
    f_hat = np.diff(delta) / dt + v * trace.values[:-1]
    xi = curve.xi
    if xi is None:
        vv = np.asarray(s.velocity(delta / s.length), dtype=float)
        xi = np.concatenate([[0.0], np.cumsum(vv[:-1]) * dt])
    return Reconstruction(trace.times, np.asarray(xi), delta, f_hat, "difference-quotient")


def cumulative_inflow(rec: Reconstruction) -> np.ndarray:
    """``F(t_n) = dt sum_{m<n} f_m``; one entry per mesh time."""
    return np.concatenate([[0.0], np.cumsum(rec.f_hat) * rec.dt])


def reconstruct(trace: BoundaryTrace, s: Scenario, method: str = "explicit", **kwargs) -> Reconstruction:
    """Dispatch by method name: ``explicit``, ``successive`` or ``uniform-recursion``."""
    if method == "explicit":
        return reconstruct_explicit(trace, s)
    if method == "successive":
        curve, iterates = solve_volterra_successive(trace, s, **kwargs)
        rec = recover_f(curve, trace, s)
        diag = {"iterations": len(iterates), "update_norms": [it.update_norm for it in iterates]}
        return Reconstruction(rec.times, rec.xi, rec.delta, rec.f_hat, "successive", diag)
    if method == "uniform-recursion":
        res = solve_uniform_recursion_full(trace, s, **kwargs)
        rec = recover_f(res.curve, trace, s)
        diag = {"iterations": len(res.history), "update_norms": res.history}
        return Reconstruction(rec.times, rec.xi, rec.delta, rec.f_hat, "uniform-recursion", diag)
    raise ValueError(f"unknown method {method!r}")


__all__ = [
    "Reconstruction",
    "VolterraIterate",
    "UniformRecursionResult",
    "reconstruct_explicit",
    "solve_volterra_successive",
    "solve_uniform_recursion",
    "solve_uniform_recursion_full",
    "recover_f",
    "cumulative_inflow",
    "reconstruct",
    "mesh_steps",
]
