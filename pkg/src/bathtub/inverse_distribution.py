"""Recover a time-independent inflow distribution ``phi(x)`` from ``k(t, 0)`` and a known ``f``.

With ``z = xi(t)`` the characteristics representation becomes a first-kind
Volterra equation in ``phi``::

    k(xi^{-1}(z), 0) = kbar(z) + int_0^z f(xi^{-1}(z - y)) / V(delta(xi^{-1}(z - y)) / L) phi(y) dy

Discretizing on ``x_j = j dx`` with right-endpoint weights gives a lower
triangular Toeplitz-like system that is solved by forward substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from bathtub import io
from bathtub.core import Scenario
from bathtub.errors import AssumptionViolation, ConfigurationError
from bathtub.forward import BoundaryTrace, MassCurve


@dataclass(frozen=True)
class NodeData:
    """Spatial nodes mapped back to time through the shift ``xi``.

    ``x[0] = 0`` carries ``tau = 0``, ``f(0)`` and ``V(delta_bar / L)``.
    ``excluded`` counts mesh nodes beyond ``xi(T)`` that were dropped.
    """

    x: np.ndarray
    tau: np.ndarray
    f: np.ndarray
    v: np.ndarray
    dx: float
    excluded: int

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class DistributionRecovery:
    x: np.ndarray
    phi_hat: np.ndarray
    nodes: NodeData

    @property
    def dx(self) -> float:
        return self.nodes.dx

    @property
    def excluded(self) -> int:
        return self.nodes.excluded

    def mass(self) -> float:
        """``dx sum_l phi_hat_l`` over the recovered interval."""
        return float(self.dx * self.phi_hat.sum())

    def interior(self, margin: float = 0.1) -> np.ndarray:
        """Mask dropping a fraction ``margin`` of the recovered interval at each end."""
        span = self.x[-1] - self.x[0]
        lo, hi = self.x[0] + margin * span, self.x[-1] - margin * span
        return (self.x >= lo) & (self.x <= hi)

    def to_csv(self, path, truth: Optional[np.ndarray] = None) -> int:
        if truth is None:
            return io.write_csv(path, ("x", "phi_hat"), (self.x, self.phi_hat))
        return io.write_csv(path, ("x", "phi_hat", "phi_true"), (self.x, self.phi_hat, truth))


def integrate_delta_xi(trace: BoundaryTrace, s: Scenario) -> MassCurve:
    """Forward Euler for ``delta`` and left sums for ``xi`` on the trace mesh."""
    dt = trace.dt
    t = trace.times
    k = trace.values
    f = np.asarray(s.inflow(t), dtype=float)
    L = s.length
    delta = np.empty(len(t))
    xi = np.empty(len(t))
    delta[0] = s.initial_mass
    xi[0] = 0.0
    for n in range(len(t) - 1):
        v = float(s.velocity(delta[n] / L))
        delta[n + 1] = delta[n] + dt * (f[n] - v * k[n])
        xi[n + 1] = xi[n] + dt * v
    return MassCurve(t, delta, xi)


def interpolate_nodes(curve: MassCurve, s: Scenario, n_x: Optional[int] = None) -> NodeData:
    """Map ``x_j = j dx`` to ``(tau_j, f_j, v_j)`` by convex interpolation on ``(xi_n, xi_{n+1}]``.

    ``dx = v_max T / n_x``; by default ``n_x`` equals the number of time
    steps, so ``dx = v_max dt``. Nodes beyond ``xi(T)`` are excluded.
    """
    xi = np.asarray(curve.xi, dtype=float)
    t = np.asarray(curve.times, dtype=float)
    if np.any(np.diff(xi) <= 0):
        raise AssumptionViolation("xi is not strictly increasing", "V >= V_min > 0")
    n_steps = len(t) - 1
    n_x = n_steps if n_x is None else int(n_x)
    if n_x < 1:
        raise ConfigurationError(f"node count must be positive, got {n_x}")
    x_end = s.velocity.v_max * s.horizon
    dx = x_end / n_x
    x_all = np.arange(n_x + 1) * dx
    # Tolerate roundoff at xi(T) so the last reachable node is kept.
    keep = x_all <= xi[-1] * (1 + 1e-12)
    x = x_all[keep]
    n = np.clip(np.searchsorted(xi, x, side="left") - 1, 0, n_steps - 1)
    w = (x - xi[n]) / (xi[n + 1] - xi[n])
    f_t = np.asarray(s.inflow(t), dtype=float)
    v_t = np.asarray(s.velocity(np.asarray(curve.delta) / s.length), dtype=float)
    tau = (1 - w) * t[n] + w * t[n + 1]
    f = (1 - w) * f_t[n] + w * f_t[n + 1]
    v = (1 - w) * v_t[n] + w * v_t[n + 1]
    return NodeData(x, tau, f, v, dx, int((~keep).sum()))


def solve_triangular(trace: BoundaryTrace, nodes: NodeData, s: Scenario) -> DistributionRecovery:
    """Forward substitution for ``phi_l``, returned as ``phi_hat(x_l) = phi_l / dx``.

    ``phi_l = (k(tau_l, 0) - kbar(x_l) - sum_{m<l} (f_{l-m} / v_{l-m}) phi_m) v_0 / f_0``
    for ``l = 1..J``, with ``k(tau_l, 0)`` linearly interpolated from the trace.
    """
    if len(nodes) < 2:
        raise ConfigurationError("need at least one node beyond x = 0")
    if np.any(np.diff(nodes.tau) <= 0):
        raise ConfigurationError("node times tau_j must be strictly increasing")
    if not nodes.f[0] > 0:
        raise AssumptionViolation(f"f(0) = {nodes.f[0]:.3g}; the diagonal is singular", "f(0) > 0")
    if not nodes.v[0] > 0:
        raise AssumptionViolation(f"V(delta_bar / L) = {nodes.v[0]:.3g}", "V >= V_min > 0")
    g = nodes.f / nodes.v
    rhs = trace.at(nodes.tau) - np.asarray(s.initial(nodes.x), dtype=float)
    J = len(nodes) - 1
    phi = np.zeros(J + 1)  # phi[0] unused; unknowns live at l = 1..J
    for l in range(1, J + 1):
        # sum_{m=1}^{l-1} g[l-m] phi[m]
        acc = np.dot(g[l - 1 : 0 : -1], phi[1:l]) if l > 1 else 0.0
        phi[l] = (rhs[l] - acc) / g[0]
    return DistributionRecovery(nodes.x[1:], phi[1:] / nodes.dx, nodes)


def recover_distribution(trace: BoundaryTrace, s: Scenario, n_x: Optional[int] = None) -> DistributionRecovery:
    curve = integrate_delta_xi(trace, s)
    return solve_triangular(trace, interpolate_nodes(curve, s, n_x), s)


__all__ = [
    "NodeData",
    "DistributionRecovery",
    "integrate_delta_xi",
    "interpolate_nodes",
    "solve_triangular",
    "recover_distribution",
]
