"""Parameter sweeps and figure presets that write CSV (and optionally SVG) bundles."""

from __future__ import annotations

import dataclasses
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import engine, meanfield, netgen, spectral
from .estimator import EstimationConfig, eradication_probability, estimate_threshold
from .netgen import Backbone
from .params import ModelParams, covid_params, fig1_params, fig3_params, round_half_up, validate
from .trajectory import mean_trajectory

log = logging.getLogger(__name__)

METRICS = ("threshold_analytic", "threshold_estimated", "final_infected_fraction",
           "eradication_probability")
STOCHASTIC = METRICS[1:]
FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")
_FIELDS = {f.name for f in dataclasses.fields(ModelParams)}
_ALIASES = {"lambda": "lam"}


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    x_name: str
    x_values: Sequence[float]
    metric: str
    y_name: str | None = None
    y_values: Sequence[float] = ()
    backbone: str = "complete"
    horizon: float = 200.0
    replicates: int = 10
    initial_infected: int = 10
    master_seed: int = 0
    jobs: int = 1
    estimation: EstimationConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "x_name", _ALIASES.get(self.x_name, self.x_name))
        if self.y_name is not None:
            object.__setattr__(self, "y_name", _ALIASES.get(self.y_name, self.y_name))
        for name in (self.x_name, self.y_name):
            if name is not None and (name not in _FIELDS or name == "n"):
                raise ValueError(f"cannot sweep {name!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if len(self.x_values) == 0 or (self.y_name is not None and len(self.y_values) == 0):
            raise ValueError("sweep grids must be non-empty")
        if self.metric in STOCHASTIC and (self.horizon <= 0 or self.replicates < 1):
            raise ValueError(f"{self.metric} needs a positive horizon and replicates >= 1")

    def points(self) -> list[tuple[float, float | None]]:
        ys = list(self.y_values) if self.y_name is not None else [None]
        return [(float(x), None if y is None else float(y)) for x in self.x_values for y in ys]

    def params_at(self, x: float, y: float | None) -> ModelParams:
        changes = {self.x_name: x}
        if self.y_name is not None:
            changes[self.y_name] = y
        return self.base.replace(**changes)


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[tuple[float, float | None, float | None]]

    def to_csv(self, path: str | Path | None = None, comment: str | None = None) -> str:
        buf = io.StringIO()
        for line in (comment or describe_sweep(self.spec)).splitlines():
            buf.write(f"# {line}\n")
        buf.write("x,y,value\n")
        for x, y, val in self.rows:
            ys = "" if y is None else f"{y:.12g}"
            vs = "" if val is None else f"{val:.12g}"
            buf.write(f"{x:.12g},{ys},{vs}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def value(self, x: float, y: float | None = None) -> float | None:
        for rx, ry, val in self.rows:
            if math.isclose(rx, x) and (y is None or math.isclose(ry, y)):
                return val
        raise KeyError((x, y))


def describe_sweep(spec: SweepSpec) -> str:
    axes = f"x={spec.x_name}" + (f" y={spec.y_name}" if spec.y_name else "")
    return (f"{spec.base.describe()}\n"
            f"metric={spec.metric} {axes} backbone={spec.backbone} horizon={spec.horizon:g} "
            f"replicates={spec.replicates} initial_infected={spec.initial_infected} "
            f"seed={spec.master_seed}")


def _point_seed(master: int, x: float, y: float | None) -> np.random.SeedSequence:
    ykey = -1 if y is None else int(round(y * 1e9))
    return np.random.SeedSequence([int(master), int(round(x * 1e9)), ykey & 0xFFFFFFFFFFFF])


def _evaluate(spec: SweepSpec, p: ModelParams, backbone: Backbone | None, seed) -> float:
    if spec.metric == "threshold_analytic":
        return float(spectral.analytic_threshold(p))
    point_master = int(seed.generate_state(1)[0])
    if spec.metric == "final_infected_fraction":
        children = seed.spawn(spec.replicates)
        finals = [engine.simulate(p, backbone, horizon=spec.horizon, sample_interval=spec.horizon,
                                  initial_infected=spec.initial_infected, seed=s).infected[-1]
                  for s in children]
        return float(np.mean(finals))
    cfg = spec.estimation or EstimationConfig()
    cfg = dataclasses.replace(cfg, horizon=spec.horizon, replicates=spec.replicates,
                              initial_infected=spec.initial_infected, master_seed=point_master,
                              jobs=1)
    if spec.metric == "eradication_probability":
        return eradication_probability(p, backbone, float(p.tau), cfg)
    return estimate_threshold(p, backbone, cfg).tau_hat


def run_sweep(spec: SweepSpec, backbone: Backbone | None = None) -> SweepResult:
    """Evaluate ``spec.metric`` on every grid point.

    A failing point yields an empty cell and a log line; the grid continues.
    """
    if backbone is None and spec.metric in STOCHASTIC and spec.backbone not in ("complete", ""):
        backbone = netgen.parse_spec(spec.backbone, spec.base.n, spec.master_seed)
    pts = spec.points()

    def one(pt):
        x, y = pt
        try:
            p = validate(spec.params_at(x, y))
            return x, y, _evaluate(spec, p, backbone, _point_seed(spec.master_seed, x, y))
        except Exception as exc:  # noqa: BLE001 - recorded per cell by contract
            log.warning("sweep point x=%g y=%s failed: %s: %s", x, y, type(exc).__name__, exc)
            return x, y, None

    if spec.jobs > 1:
        with ThreadPoolExecutor(spec.jobs) as pool:
            rows = list(pool.map(one, pts))
    else:
        rows = [one(pt) for pt in pts]
    return SweepResult(spec, rows)


# ---------------------------------------------------------------------------
# figure presets

FIG2_COMMON = dict(lam=0.2, sigma_v=0.5, p_q=0.2, beta=0.02, gamma_t=0.5, gamma_q=0.9, tau=0.05)


def fig3_axis(points: int = 11) -> np.ndarray:
    """0.02, 0.116, ..., 0.98 for the default 11 points."""
    return np.round(np.linspace(0.02, 0.98, points), 12)


def fig5_axis(points: int = 11) -> np.ndarray:
    """0.01, 0.108, ..., 0.99 for the default 11 points."""
    return np.round(np.linspace(0.01, 0.99, points), 12)


def unit_axis(points: int = 11) -> np.ndarray:
    return np.round(np.linspace(0.0, 1.0, points), 12)


def _scaled_n(n: int, scale: float) -> int:
    return max(20, round_half_up(n * scale))


def _scaled_count(count: int, scale: float, floor: int = 1) -> int:
    return max(floor, round_half_up(count * scale))


def fig3_panels(scale: float = 1.0):
    """(name, base params, y field, y axis) for the four endemic-prevalence panels."""
    n = _scaled_n(10_000, scale)
    k = _scaled_count(11, scale, 2)
    return [
        ("fig3a", fig3_params(n=n), "gamma_t", fig3_axis(k)),
        ("fig3b", fig3_params(n=n), "gamma_q", fig3_axis(k)),
        ("fig3c", fig3_params(n=n), "theta", fig3_axis(k)),
        ("fig3d", fig3_params(n=n), "sigma_n", unit_axis(k)),
    ]


@dataclass
class Bundle:
    """Files written by ``reproduce``, keyed by short name."""

    out: Path
    files: dict[str, Path]


def _comment(p: ModelParams, seed: int, extra: str = "") -> str:
    text = f"{p.describe()}\nseed={seed}"
    return text + (f"\n{extra}" if extra else "")


def _fig1(out: Path, scale: float, seed: int, jobs: int) -> dict[str, Path]:
    p = fig1_params(n=_scaled_n(20_000, scale))
    reps = _scaled_count(10, scale)
    infected = round_half_up(0.01 * p.n)
    seeds = np.random.SeedSequence(seed).spawn(reps)

    def one(s):
        return engine.simulate(p, None, horizon=200.0, sample_interval=1.0,
                               initial_infected=infected, seed=s)

    trajs = _map(one, seeds, jobs)
    mean = mean_trajectory(trajs)
    mf = meanfield.integrate("macro", meanfield.seeded_state(p, infected / p.n), p,
                             horizon=200.0, dt=0.01, sample_interval=1.0)
    extra = f"replicates={reps} initial_infected={infected}"
    files = {"engine": out / "fig1_engine_mean.csv", "meanfield": out / "fig1_meanfield.csv"}
    mean.to_csv(files["engine"], _comment(p, seed, extra))
    mf.to_csv(files["meanfield"], _comment(p.replace(n=None), seed, "RK4 dt=0.01"))
    return files


def _fig2(out: Path, scale: float, seed: int, jobs: int) -> dict[str, Path]:
    k = _scaled_count(101, scale, 2)
    axis = unit_axis(k)
    theta = axis[axis < 1.0]
    cov = axis[(axis > 0.0) & (axis < 1.0)]
    files = {}
    panels = [
        ("fig2a", ModelParams(v=0.5, theta=0.0, sigma_n=0.0, **FIG2_COMMON), "theta", theta, "sigma_n", axis),
        ("fig2b", ModelParams(v=0.5, theta=0.0, sigma_n=0.2, **FIG2_COMMON), "v", cov, "theta", theta),
    ]
    for name, base, xn, xs, yn, ys in panels:
        spec = SweepSpec(base, xn, xs, "threshold_analytic", y_name=yn, y_values=ys, master_seed=seed)
        files[name] = out / f"{name}.csv"
        run_sweep(spec).to_csv(files[name])
    return files


def _fig3(out: Path, scale: float, seed: int, jobs: int) -> dict[str, Path]:
    reps = _scaled_count(10, scale)
    files = {}
    for name, base, yn, ys in fig3_panels(scale):
        spec = SweepSpec(base, "v", fig3_axis(len(ys)), "final_infected_fraction", y_name=yn,
                         y_values=ys, replicates=reps, initial_infected=round_half_up(0.01 * base.n),
                         master_seed=seed, jobs=jobs)
        files[name] = out / f"{name}.csv"
        run_sweep(spec).to_csv(files[name])
    return files


def fig4_backbones(n: int, seed: int) -> list[tuple[str, Backbone | None]]:
    return [
        ("ba:50", netgen.barabasi_albert(n, 50, seed)),
        ("er:0.01", netgen.erdos_renyi(n, 0.01, seed)),
        ("complete", None),
    ]


def _fig4(out: Path, scale: float, seed: int, jobs: int) -> dict[str, Path]:
    p = covid_params(n=_scaled_n(10_000, scale))
    reps = _scaled_count(10, scale)
    infected = round_half_up(0.01 * p.n)
    taus = np.round(np.arange(0, 21) * 0.01, 12)
    files = {}
    for label, bb in fig4_backbones(p.n, seed):
        name = "fig4_" + label.split(":")[0]
        spec = SweepSpec(p, "tau", taus, "eradication_probability", replicates=reps,
                         initial_infected=infected, master_seed=seed, jobs=jobs, backbone=label)
        files[name] = out / f"{name}.csv"
        run_sweep(spec, bb).to_csv(files[name])
    files["fig4_analytic"] = out / "fig4_analytic.csv"
    tau_bar = spectral.analytic_threshold(p)
    files["fig4_analytic"].write_text(f"# {p.describe()}\n# seed={seed}\ntau_bar\n{tau_bar:.12g}\n")
    return files


def _fig5(out: Path, scale: float, seed: int, jobs: int) -> dict[str, Path]:
    n = _scaled_n(10_000, scale)
    reps = _scaled_count(10, scale)
    k = _scaled_count(11, scale, 2)
    bb = netgen.erdos_renyi(n, 0.01, seed)
    infected = round_half_up(0.01 * n)
    files = {}
    for sigma_v, (est_name, prev_name) in ((0.3, ("fig5a", "fig5c")), (0.7, ("fig5b", "fig5d"))):
        base = covid_params(n=n, sigma_v=sigma_v, tau=0.05)
        for name, metric in ((est_name, "threshold_estimated"), (prev_name, "final_infected_fraction")):
            spec = SweepSpec(base, "theta", fig5_axis(k), metric, y_name="sigma_n",
                             y_values=unit_axis(k), backbone="er:0.01", replicates=reps,
                             initial_infected=infected, master_seed=seed, jobs=jobs)
            files[name] = out / f"{name}.csv"
            run_sweep(spec, bb).to_csv(files[name])
    return files


_BUILDERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def _map(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def reproduce(figure: str, out: str | Path, scale: float = 1.0, seed: int = 0, jobs: int = 1,
              svg: bool = False) -> Bundle:
    """Run a figure preset and write its CSV bundle (and SVGs when asked).

    ``scale`` shrinks population size, replicate count and grid resolution
    proportionally for smoke runs.
    """
    if figure not in _BUILDERS:
        raise ValueError(f"figure must be one of {FIGURES}")
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = _BUILDERS[figure](out, scale, seed, jobs)
    if svg:
        from . import plotting

        files.update(plotting.render(figure, files, out))
    return Bundle(out, files)
