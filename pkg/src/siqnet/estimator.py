"""Monte Carlo eradication probability and the coarse-to-fine threshold scan."""

from __future__ import annotations

import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import engine
from .errors import NotBracketed
from .netgen import Backbone
from .params import ModelParams, validate

log = logging.getLogger(__name__)

TAU_KEY_SCALE = 1e9


@dataclass(frozen=True)
class EstimationConfig:
    horizon: float = 200.0
    replicates: int = 10
    initial_infected: int = 10
    tau_lo: float = 0.0
    tau_hi: float = 0.2
    step: float = 0.02
    fine_step: float = 0.005
    master_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.tau_lo < 0 or self.tau_hi < self.tau_lo:
            raise ValueError("need 0 <= tau_lo <= tau_hi")
        if not 0 < self.fine_step < self.step:
            raise ValueError("need 0 < fine_step < step")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


def replicate_seed(master_seed: int, tau: float, replicate: int) -> np.random.SeedSequence:
    """Seed keyed by the tau value itself, so extra grid points leave others untouched."""
    key = int(round(tau * TAU_KEY_SCALE))
    return np.random.SeedSequence([int(master_seed), key, int(replicate)])


def eradication_outcomes(params: ModelParams, backbone: Backbone | None, tau: float,
                         cfg: EstimationConfig) -> np.ndarray:
    """Boolean per replicate: did I + Q hit zero by the horizon?"""
    p = validate(params).replace(tau=float(tau))

    def one(r):
        state = engine.init(p, backbone, cfg.initial_infected, seed=replicate_seed(cfg.master_seed, tau, r))
        return engine.run(state, cfg.horizon, cfg.horizon).eradicated

    reps = range(cfg.replicates)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(cfg.jobs) as pool:
            return np.array(list(pool.map(one, reps)), dtype=bool)
    return np.array([one(r) for r in reps], dtype=bool)


def eradication_probability(params: ModelParams, backbone: Backbone | None, tau: float,
                            cfg: EstimationConfig) -> float:
    return float(eradication_outcomes(params, backbone, tau, cfg).mean())


@dataclass
class ThresholdEstimate:
    tau_hat: float
    tau_tilde: float
    table: dict[float, int] = field(repr=False)  # tau -> number of eradicated runs
    replicates: int = 10
    fine_taus: tuple[float, ...] = ()

    def probability(self, tau: float) -> float:
        return self.table[_key(tau)] / self.replicates

    @property
    def tau_max_std(self) -> float:
        return self.tau_hat

    @property
    def runs(self) -> int:
        return self.replicates * len(self.table)

    def rows(self) -> list[tuple[float, float, float]]:
        out = []
        for tau in sorted(self.table):
            pr = self.table[tau] / self.replicates
            out.append((tau, pr, float(np.sqrt(pr * (1 - pr)))))
        return out

    def to_csv(self, path: str | Path | None = None, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            for line in comment.splitlines():
                buf.write(f"# {line}\n")
        buf.write("tau,eradication_probability,std_dev\n")
        for tau, pr, sd in self.rows():
            buf.write(f"{tau:.12g},{pr:.12g},{sd:.12g}\n")
        buf.write(f"tau_hat={self.tau_hat:.12g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _key(tau: float) -> float:
    return round(float(tau), 12)


def _grid(start: float, stop: float, step: float) -> list[float]:
    """Points from ``start`` to ``stop`` inclusive, snapped to 12 decimals."""
    count = int(np.floor((stop - start) / step + 1e-9))
    return [_key(start + k * step) for k in range(count + 1)]


def estimate_threshold(params: ModelParams, backbone: Backbone | None,
                       cfg: EstimationConfig = EstimationConfig()) -> ThresholdEstimate:
    """Scan tau downward until eradication falls below 1/2, then refine.

    The refined estimate maximizes p(1 - p) over the fine grid, ties going
    to the smaller tau.
    """
    table: dict[float, int] = {}

    def count(tau: float) -> int:
        tau = _key(tau)
        if tau not in table:
            table[tau] = int(eradication_outcomes(params, backbone, tau, cfg).sum())
            log.info("tau=%g eradicated %d/%d", tau, table[tau], cfg.replicates)
        return table[tau]

    half = cfg.replicates / 2
    tau_tilde = None
    for tau in reversed(_grid(cfg.tau_lo, cfg.tau_hi, cfg.step)):
        if count(tau) < half:
            tau_tilde = tau
            break
    if tau_tilde is None:
        raise NotBracketed(
            f"eradication probability >= 0.5 everywhere on [{cfg.tau_lo:g}, {cfg.tau_hi:g}]"
        )

    lo = max(cfg.tau_lo, tau_tilde - cfg.step)
    fine = _grid(lo, tau_tilde + cfg.step, cfg.fine_step)
    r = cfg.replicates
    best = max(fine, key=lambda t: (count(t) * (r - count(t)), -t))
    return ThresholdEstimate(best, tau_tilde, table, r, tuple(fine))
