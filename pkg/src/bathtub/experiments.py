"""Noise, error metrics, rate studies and the scripted examples.

Every pipeline is a pure function of ``(scenario, meshes, sigma, seed)``:
noise comes from a Philox counter-based generator and the emitted report
holds no wall-clock data, so reruns produce byte-identical files.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import yaml

from bathtub import io
from bathtub.config import RunOptions, config_data
from bathtub.core import (
    ConstantInflow,
    GaussianBump,
    GaussianDistribution,
    Greenshields,
    Scenario,
    SinusoidalInflow,
    UniformDistribution,
)
from bathtub.errors import BathtubError, ConfigurationError
from bathtub.forward import BoundaryTrace, mesh_steps, solve_characteristics
from bathtub.inverse_distribution import recover_distribution
from bathtub.inverse_inflow import Reconstruction, cumulative_inflow, reconstruct

RNG_ALGORITHM = "numpy.random.Philox"


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. uniform perturbations on ``[-sigma, sigma]``."""

    sigma: float = 0.0
    seed: int = 0
    law: str = "uniform"

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ConfigurationError(f"noise level must be nonnegative, got {self.sigma}")
        if self.law != "uniform":
            raise ConfigurationError(f"unsupported noise law {self.law!r}")

    def draw(self, size: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(self.seed))
        return rng.uniform(-self.sigma, self.sigma, size)

    def describe(self) -> dict:
        return {
            "sigma": self.sigma,
            "seed": self.seed,
            "law": self.law,
            "rng": RNG_ALGORITHM,
            "numpy": np.__version__,
        }


def add_noise(trace: BoundaryTrace, spec: NoiseSpec) -> BoundaryTrace:
    if spec.sigma == 0:
        return BoundaryTrace(trace.times, trace.values.copy(), 0.0, spec.seed)
    return BoundaryTrace(trace.times, trace.values + spec.draw(len(trace)), spec.sigma, spec.seed)


# ---------------------------------------------------------------------------
# Metrics and fits
# ---------------------------------------------------------------------------


def interval_means(inflow, times: np.ndarray) -> np.ndarray:
    """``(1/dt) int_{t_n}^{t_{n+1}} f`` for each mesh interval."""
    times = np.asarray(times, dtype=float)
    a, b = times[:-1], times[1:]
    return np.asarray([float(inflow.integral(x, y)) for x, y in zip(a, b)]) / (b - a)


@dataclass(frozen=True)
class FError:
    sup: float
    rel_l2: float
    std: float
    truth_mean: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {"sup": self.sup, "rel_l2": self.rel_l2, "std": self.std}


def f_error(rec: Reconstruction, truth) -> FError:
    """Sup, relative L2 and standard deviation of ``f_n`` against interval means of ``truth``."""
    mean = interval_means(truth, rec.times)
    diff = rec.f_hat - mean
    norm = float(np.linalg.norm(mean))
    if not np.all(np.isfinite(diff)):
        return FError(math.inf, math.inf, math.inf, mean)
    rel = float(np.linalg.norm(diff)) / norm if norm > 0 else float(np.linalg.norm(diff))
    return FError(float(np.abs(diff).max()), rel, float(np.std(diff)), mean)


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through ``(log x, log error)``."""

    abscissae: tuple[float, ...]
    errors: tuple[float, ...]
    slope: float
    intercept: float
    residual: float

    def as_dict(self) -> dict:
        return {
            "abscissae": list(self.abscissae),
            "errors": list(self.errors),
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }

    def to_csv(self, path) -> int:
        return io.write_csv(path, ("abscissa", "error"), (self.abscissae, self.errors))


def fit_rate(abscissae: Sequence[float], errors: Sequence[float]) -> RateFit:
    x = np.asarray(abscissae, dtype=float)
    e = np.asarray(errors, dtype=float)
    if x.shape != e.shape or len(x) < 3:
        raise ConfigurationError("a rate fit needs at least three (abscissa, error) pairs")
    if len(np.unique(x)) != len(x):
        raise ConfigurationError("duplicate abscissae in rate fit")
    if np.any(x <= 0) or np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ConfigurationError("rate fit needs positive abscissae and positive finite errors")
    order = np.argsort(x)
    x, e = x[order], e[order]
    lx, le = np.log(x), np.log(e)
    slope, intercept = np.polyfit(lx, le, 1)
    residual = float(np.sqrt(np.mean((le - (slope * lx + intercept)) ** 2)))
    return RateFit(tuple(x.tolist()), tuple(e.tolist()), float(slope), float(intercept), residual)


# ---------------------------------------------------------------------------
# Studies
# ---------------------------------------------------------------------------


def forward_trace(s: Scenario, dt: float) -> BoundaryTrace:
    """Synthetic data from the characteristics solver."""
    return solve_characteristics(s, dt)[1]


def richardson_estimate(s: Scenario, dt: float) -> float:
    """Sup difference between traces at ``dt`` and ``2 dt`` on the common mesh.

    For a first-order solver this estimates the error of the ``dt`` trace.
    """
    fine = forward_trace(s, dt)
    coarse = forward_trace(s, 2 * dt)
    return float(np.abs(fine.resample(2 * dt).values - coarse.values).max())


def _study_point(args):
    s, trace, dt, method = args
    rec = reconstruct(trace.resample(dt), s, method)
    return f_error(rec, s.inflow).sup


def _run_points(jobs, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_study_point, jobs))
    return [_study_point(j) for j in jobs]


def convergence_study(
    s: Scenario,
    dts: Sequence[float],
    forward_dt: float = 1e-3,
    reference: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    method: str = "explicit",
    workers: int = 1,
) -> RateFit:
    """Exact-data sup error of ``f_n`` against interval means, fitted over ``dts``.

    Data come from the forward solver at ``forward_dt`` or, when given, from
    the closed-form ``reference(t) = k(t, 0)`` sampled at ``forward_dt``.
    """
    dts = [float(d) for d in dts]
    if len(dts) < 3:
        raise ConfigurationError("a convergence study needs at least three mesh sizes")
    if len(set(dts)) != len(dts):
        raise ConfigurationError("duplicate mesh sizes in convergence study")
    if forward_dt > min(dts) * (1 + 1e-12):
        raise ConfigurationError(f"forward mesh {forward_dt} is coarser than the finest inverse mesh {min(dts)}")
    if reference is None:
        trace = forward_trace(s, forward_dt)
    else:
        t = np.arange(mesh_steps(s.horizon, forward_dt) + 1) * forward_dt
        trace = BoundaryTrace(t, np.asarray(reference(t), dtype=float))
    errors = _run_points([(s, trace, dt, method) for dt in sorted(dts)], workers)
    return fit_rate(sorted(dts), errors)


def noise_mesh(sigma: float, horizon: float, forward_dt: float) -> float:
    """The step nearest ``sigma^(1/2)`` (in log scale) that divides ``T`` and is a multiple of ``forward_dt``."""
    n_fwd = mesh_steps(horizon, forward_dt)
    ratios = [r for r in range(1, n_fwd + 1) if n_fwd % r == 0]
    target = math.sqrt(sigma) / forward_dt
    best = min(ratios, key=lambda r: (abs(math.log(r / target)), r))
    return best * forward_dt


def noise_scaling_study(
    s: Scenario,
    sigmas: Sequence[float],
    seed: int = 0,
    forward_dt: float = 1e-3,
    method: str = "explicit",
    workers: int = 1,
) -> RateFit:
    """Sup error with ``dt = sigma^(1/2)`` for each noise level, fitted against ``sigma``."""
    kept = [float(x) for x in sigmas if x > 0]
    if len(kept) < len(sigmas):
        warnings.warn("noise levels equal to zero are excluded from the noise-scaling fit", stacklevel=2)
    if len(kept) >= 2 and max(kept) / min(kept) < 100:
        raise ConfigurationError("noise levels must span at least two decades")
    exact = forward_trace(s, forward_dt)
    jobs = []
    for sigma in sorted(kept):
        noisy = add_noise(exact, NoiseSpec(sigma, seed))
        jobs.append((s, noisy, noise_mesh(sigma, s.horizon, forward_dt), method))
    errors = _run_points(jobs, workers)
    return fit_rate(sorted(kept), errors)


# ---------------------------------------------------------------------------
# Scripted examples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExampleSpec:
    """A built-in scenario plus its desk-scale pipeline settings.

    ``task`` is ``inflow`` (recover ``f``) or ``distribution`` (recover
    ``phi``). ``noisy_dt`` is the inverse step used on noisy data; for
    distribution recovery ``noisy_dx`` sets the spatial step instead.
    """

    name: str
    scenario: Scenario
    task: str
    sigma: float
    dt: float = 0.01
    noisy_dt: float = 0.2
    noisy_dx: Optional[float] = None
    forward_dt: float = 1e-3

    def run_options(self, seed: int = 0) -> RunOptions:
        return RunOptions(dt=self.dt, dx=self.noisy_dx, forward_dt=self.forward_dt, sigma=self.sigma, seed=seed)


def _greenshields_uniform(horizon: float, inflow, initial=None) -> Scenario:
    kw = {} if initial is None else {"initial": initial}
    return Scenario(Greenshields(1.0, 1.0), 10.0, inflow, UniformDistribution(10.0), horizon=horizon, **kw)


def _example_52(case: str) -> Scenario:
    base = _greenshields_uniform(8.0, SinusoidalInflow(0.2, 0.2, 2 * math.pi))
    if case == "b":
        return base.replace(initial=GaussianBump(0.1, 10.0, 5.0))
    if case == "c":
        # b(t) = L/2 + (2t - T)/4 with L = 10, T = 8.
        return base.replace(distribution=GaussianDistribution(0.4, 3.0, 0.5))
    return base


EXAMPLES: dict[str, ExampleSpec] = {
    "5.1a": ExampleSpec("5.1a", _greenshields_uniform(8.0, ConstantInflow(0.15)), "inflow", 1e-4),
    "5.1b": ExampleSpec("5.1b", _greenshields_uniform(16.0, ConstantInflow(0.15)), "inflow", 1e-4),
    "5.2a": ExampleSpec("5.2a", _example_52("a"), "inflow", 1e-5, noisy_dt=0.05),
    "5.2b": ExampleSpec("5.2b", _example_52("b"), "inflow", 1e-5, noisy_dt=0.05),
    "5.2c": ExampleSpec("5.2c", _example_52("c"), "inflow", 1e-5, noisy_dt=0.05),
    "5.4a": ExampleSpec("5.4a", _greenshields_uniform(8.0, ConstantInflow(0.15)), "distribution", 1e-4, noisy_dt=0.1, noisy_dx=0.1),
    "5.4b": ExampleSpec("5.4b", _greenshields_uniform(16.0, ConstantInflow(0.15)), "distribution", 1e-4, noisy_dt=0.1, noisy_dx=0.1),
}


def example(name: str) -> ExampleSpec:
    if name not in EXAMPLES:
        raise ConfigurationError(f"unknown example {name!r}; valid names: {', '.join(EXAMPLES)}")
    return EXAMPLES[name]


@dataclass
class ExperimentReport:
    """Summary of one pipeline run.

    ``runtime`` is kept on the object but never written, so emitted files
    depend only on the inputs.
    """

    scenario_id: str
    config: dict
    forward: dict
    inverse: dict
    noise: dict
    metrics: dict
    artifacts: list = field(default_factory=list)
    runtime: float = 0.0

    def as_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "config": self.config,
            "forward": self.forward,
            "inverse": self.inverse,
            "noise": self.noise,
            "metrics": self.metrics,
            "artifacts": sorted(self.artifacts),
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(_plain(self.as_dict()), sort_keys=False, default_flow_style=None)

    def write(self, path) -> None:
        Path(path).write_text(self.to_yaml())


def _plain(value):
    """Convert numpy scalars and non-finite floats into YAML-safe values."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(f"{float(value):.12g}") if math.isfinite(value) else str(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def _inflow_pipeline(
    s: Scenario, trace: BoundaryTrace, dt: float, method: str, strict: bool
) -> tuple[Optional[Reconstruction], dict]:
    try:
        rec = reconstruct(trace.resample(dt), s, method)
    except BathtubError as exc:
        if strict:
            raise
        return None, {"status": exc.category, "message": str(exc)}
    err = f_error(rec, s.inflow)
    F = cumulative_inflow(rec)
    out = {"status": "ok", "dt": dt, "method": method, **err.as_dict()}
    out["cumulative_error_T"] = abs(float(F[-1]) - float(s.inflow.integral(0.0, s.horizon)))
    out["finite"] = bool(np.all(np.isfinite(rec.f_hat)))
    return rec, out


def run_inflow(
    s: Scenario, trace: BoundaryTrace, dt: float, out_path, method: str = "explicit", strict: bool = False
) -> dict:
    """Reconstruct ``f`` from ``trace`` at step ``dt`` and write the reconstruction CSV.

    Solver failures are returned as a ``status`` entry unless ``strict``.
    """
    rec, metrics = _inflow_pipeline(s, trace, dt, method, strict)
    if rec is not None:
        rec.to_csv(out_path, interval_means(s.inflow, rec.times))
    return metrics


def run_distribution(s: Scenario, trace: BoundaryTrace, dt: float, dx: Optional[float], out_path) -> dict:
    """Recover ``phi`` from ``trace`` at step ``dt`` (and ``dx``) and write the recovery CSV."""
    coarse = trace.resample(dt)
    n_x = None if dx is None else mesh_steps(s.velocity.v_max * s.horizon, dx, "space")
    rec = recover_distribution(coarse, s, n_x)
    truth = np.asarray(s.distribution(0.0, rec.x), dtype=float)
    rec.to_csv(out_path, truth)
    m = rec.interior()
    within = rec.x <= s.distribution.support_upper(s.horizon)
    return {
        "status": "ok",
        "dt": dt,
        "dx": rec.dx,
        "nodes": len(rec.x),
        "excluded_nodes": rec.excluded,
        "interior_sup": float(np.abs(rec.phi_hat - truth)[m].max()),
        "sup": float(np.abs(rec.phi_hat - truth).max()),
        "sup_within_support": float(np.abs(rec.phi_hat - truth)[within].max()),
        "mass": rec.mass(),
    }


def run_example(name: str, out_dir, seed: int = 0, forward_dt: Optional[float] = None) -> ExperimentReport:
    """Forward solve, add noise, reconstruct on exact and noisy data, emit CSVs, report and manifest.

    Traces are written first and read back, so a CLI chain that starts
    from the emitted trace files reproduces the reconstructions exactly.
    """
    start = time.perf_counter()
    spec = example(name)
    s = spec.scenario
    fdt = spec.forward_dt if forward_dt is None else forward_dt
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    noise = NoiseSpec(spec.sigma, seed)

    exact = forward_trace(s, fdt)
    exact.to_csv(out / "trace.csv")
    add_noise(exact, noise).to_csv(out / "trace_noisy.csv")
    exact = BoundaryTrace.from_csv(out / "trace.csv")
    noisy = BoundaryTrace.from_csv(out / "trace_noisy.csv", noise.sigma, noise.seed)
    artifacts = ["trace.csv", "trace_noisy.csv"]

    if spec.task == "inflow":
        exact_m = run_inflow(s, exact, spec.dt, out / "reconstruction.csv")
        noisy_m = run_inflow(s, noisy, spec.noisy_dt, out / "reconstruction_noisy.csv")
        inverse = {"task": "inflow", "dt": spec.dt, "noisy_dt": spec.noisy_dt, "method": "explicit"}
        for fname, m in (("reconstruction.csv", exact_m), ("reconstruction_noisy.csv", noisy_m)):
            if m["status"] == "ok":
                artifacts.append(fname)
    else:
        exact_m = run_distribution(s, exact, spec.dt, None, out / "recovery.csv")
        noisy_m = run_distribution(s, noisy, spec.noisy_dt, spec.noisy_dx, out / "recovery_noisy.csv")
        inverse = {"task": "distribution", "dt": spec.dt, "noisy_dt": spec.noisy_dt, "noisy_dx": spec.noisy_dx}
        artifacts += ["recovery.csv", "recovery_noisy.csv"]

    report = ExperimentReport(
        scenario_id=name,
        config=config_data(s, spec.run_options(seed), f"example-{name}"),
        forward={
            "solver": "characteristics",
            "dt": fdt,
            "richardson_sup": richardson_estimate(s, fdt),
        },
        inverse=inverse,
        noise=noise.describe(),
        metrics={"exact": exact_m, "noisy": noisy_m, "thresholds": "derived from round-trip runs"},
        artifacts=artifacts + ["report.yaml"],
    )
    report.write(out / "report.yaml")
    io.write_manifest(out, report.artifacts)
    report.runtime = time.perf_counter() - start
    return report


__all__ = [
    "RNG_ALGORITHM",
    "NoiseSpec",
    "add_noise",
    "interval_means",
    "FError",
    "f_error",
    "RateFit",
    "fit_rate",
    "forward_trace",
    "richardson_estimate",
    "convergence_study",
    "noise_mesh",
    "noise_scaling_study",
    "ExampleSpec",
    "EXAMPLES",
    "example",
    "ExperimentReport",
    "run_inflow",
    "run_distribution",
    "run_example",
]
