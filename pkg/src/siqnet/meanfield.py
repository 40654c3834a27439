"""Mean-field ODEs: per-individual probabilities and the six macroscopic fractions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateCoverage, NonFiniteState
from .params import ModelParams, PopulationSplit, population_split, validate
from .trajectory import Trajectory

BOUND_EPS = 1e-9


@dataclass(frozen=True)
class MacroState:
    """Average probabilities of being in each (group, health) cell."""

    y_ns: float
    y_ni: float
    y_nq: float
    y_vs: float
    y_vi: float
    y_vq: float

    def to_array(self) -> np.ndarray:
        return np.array([self.y_ns, self.y_ni, self.y_nq, self.y_vs, self.y_vi, self.y_vq])

    @classmethod
    def from_array(cls, y) -> "MacroState":
        return cls(*(float(x) for x in np.asarray(y, dtype=float).ravel()))

    def check(self, v: float, tol: float = 1e-9) -> None:
        y = self.to_array()
        if np.any(y < -tol):
            raise ValueError(f"negative component in {y}")
        if abs(y[:3].sum() - (1 - v)) > tol or abs(y[3:].sum() - v) > tol:
            raise ValueError("group totals do not match the coverage")


@dataclass
class MicroState:
    """Per-individual (s, i, q) for the individual's own group, shape (n, 3).

    Entries for the group an individual does not belong to are implicitly 0.
    """

    probs: np.ndarray
    split: PopulationSplit

    def aggregate(self) -> np.ndarray:
        """The six macroscopic averages."""
        n = self.split.n
        out = np.empty(6)
        out[3:] = self.probs[:self.split.n_v].sum(axis=0) / n
        out[:3] = self.probs[self.split.n_v:].sum(axis=0) / n
        return out

    @classmethod
    def homogeneous(cls, split: PopulationSplit, non_vaccinated, vaccinated) -> "MicroState":
        probs = np.empty((split.n, 3))
        probs[:split.n_v] = vaccinated
        probs[split.n_v:] = non_vaccinated
        return cls(probs, split)

    @classmethod
    def seeded(cls, split: PopulationSplit, infected_fraction: float) -> "MicroState":
        f = infected_fraction
        return cls.homogeneous(split, (1 - f, f, 0.0), (1 - f, f, 0.0))


def _rates(p: ModelParams):
    lam_v = p.lam * (1 - p.gamma_t)
    pq_v = p.p_q * (1 - p.gamma_q)
    return lam_v, pq_v


def _macro(y: np.ndarray, p: ModelParams) -> np.ndarray:
    ns, ni, nq, vs, vi, vq = y
    th, v = p.theta, p.v
    lam_v, pq_v = _rates(p)
    w_n = th / (1 - v) + 1 - th if th > 0 else 1.0
    w_v = th / v + 1 - th if th > 0 else 1.0
    force_n = 2 * p.lam * ns * (w_n * (1 - p.sigma_n) * ni + (1 - th) * (1 - p.sigma_v) * vi)
    force_v = 2 * lam_v * vs * ((1 - th) * (1 - p.sigma_n) * ni + w_v * (1 - p.sigma_v) * vi)
    b, tau = p.beta, p.tau
    return np.array([
        -force_n + b * ni + b * nq,
        (1 - p.p_q) * force_n - (b + tau) * ni,
        p.p_q * force_n + tau * ni - b * nq,
        -force_v + b * vi + b * vq,
        (1 - pq_v) * force_v - (b + tau) * vi,
        pq_v * force_v + tau * vi - b * vq,
    ])


def _check_coverage(p: ModelParams) -> None:
    if p.theta > 0 and p.v in (0.0, 1.0):
        raise DegenerateCoverage("v must lie strictly inside (0, 1) when theta > 0")


def macro_rhs(y, params: ModelParams, strict: bool = True) -> np.ndarray:
    """Time derivatives of the six fractions (S_n, I_n, Q_n, S_v, I_v, Q_v).

    ``strict=False`` skips the sign check on ``y`` so the field can be
    probed by finite differences around the DFE.
    """
    p = validate(params)
    _check_coverage(p)
    if isinstance(y, MacroState):
        y = y.to_array()
    y = np.asarray(y, dtype=float)
    if strict and np.any(y < -BOUND_EPS):
        raise ValueError("macro state has a negative component")
    return _macro(y, p)


def _micro(probs: np.ndarray, split: PopulationSplit, p: ModelParams) -> np.ndarray:
    n, n_v, n_n = split.n, split.n_v, split.n_n
    th = p.theta
    lam_v, pq_v = _rates(p)
    i = probs[:, 1]
    vacc = np.zeros(n, dtype=bool)
    vacc[:n_v] = True
    total_i_n = i[~vacc].sum()
    total_i_v = i[vacc].sum()
    # sums over k != j drop j's own term only within j's group
    others_n = total_i_n - np.where(vacc, 0.0, i)
    others_v = total_i_v - np.where(vacc, i, 0.0)
    mixed = (1 - th) / (n - 1)
    within_n = th / (n_n - 1) if th > 0 else 0.0
    within_v = th / (n_v - 1) if th > 0 else 0.0
    alpha_n = 2 * (1 - p.sigma_n) * (within_n + mixed) * others_n + 2 * (1 - p.sigma_v) * mixed * others_v
    alpha_v = 2 * (1 - p.sigma_n) * mixed * others_n + 2 * (1 - p.sigma_v) * (within_v + mixed) * others_v

    s, q = probs[:, 0], probs[:, 2]
    infect = np.where(vacc, lam_v * alpha_v, p.lam * alpha_n) * s
    severe = np.where(vacc, pq_v, p.p_q)
    out = np.empty_like(probs)
    out[:, 0] = -infect + p.beta * (i + q)
    out[:, 1] = (1 - severe) * infect - (p.beta + p.tau) * i
    out[:, 2] = severe * infect + p.tau * i - p.beta * q
    return out


def micro_rhs(m: MicroState, params: ModelParams) -> np.ndarray:
    """Per-individual derivatives with the exact finite-population denominators."""
    p = validate(params)
    if p.n is None:
        raise ValueError("the per-individual system needs a finite n")
    split = population_split(p)
    if split != m.split:
        raise ValueError("micro state split does not match the parameters")
    return _micro(np.asarray(m.probs, dtype=float), split, p)


def dfe(params: ModelParams) -> MacroState:
    """Disease-free equilibrium."""
    v = float(validate(params).v)
    return MacroState(1 - v, 0.0, 0.0, v, 0.0, 0.0)


def rk4(f: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, horizon: float, dt: float,
        every: int, check: Callable[[np.ndarray, float], None] | None = None):
    """Classical fixed-step Runge-Kutta; returns states every ``every`` steps."""
    steps = int(round(horizon / dt))
    if abs(steps * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError("horizon must be a whole number of steps")
    y = np.array(y0, dtype=float)
    times, states = [0.0], [y.copy()]
    for k in range(1, steps + 1):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if check is not None:
            check(y, k * dt)
        if k % every == 0 or k == steps:
            times.append(k * dt)
            states.append(y.copy())
    return np.array(times), states


def _bounds_check(y: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(y)) or np.any(y < -BOUND_EPS) or np.any(y > 1 + BOUND_EPS):
        raise NonFiniteState(f"state left [0, 1] at t={t:g}; reduce dt")


def integrate(system: str, initial, params: ModelParams, horizon: float = 200.0,
              dt: float = 0.01, sample_interval: float = 1.0) -> Trajectory:
    """Integrate the ``"macro"`` or ``"micro"`` system with RK4.

    ``initial`` is a ``MacroState`` (or 6-vector) for the macro system and a
    ``MicroState`` for the micro system; micro output is aggregated to the six
    fractions.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = validate(params)
    every = max(1, int(round(sample_interval / dt)))
    if system == "macro":
        _check_coverage(p)
        y0 = initial.to_array() if isinstance(initial, MacroState) else np.asarray(initial, float)
        times, states = rk4(lambda y: _macro(y, p), y0, horizon, dt, every, _bounds_check)
        return Trajectory(times, np.array(states))
    if system == "micro":
        split = population_split(p)
        shape = initial.probs.shape

        def f(flat):
            return _micro(flat.reshape(shape), split, p).ravel()

        times, states = rk4(f, initial.probs.ravel(), horizon, dt, every, _bounds_check)
        values = [MicroState(s.reshape(shape), split).aggregate() for s in states]
        return Trajectory(times, np.array(values), n=split.n)
    raise ValueError(f"system must be 'macro' or 'micro', got {system!r}")


def seeded_state(params: ModelParams, infected_fraction: float) -> MacroState:
    """A fraction of each group infectious, matching a uniform random seeding."""
    v = float(validate(params).v)
    f = infected_fraction
    return MacroState((1 - v) * (1 - f), (1 - v) * f, 0.0, v * (1 - f), v * f, 0.0)
