"""Exact event-driven simulation of the SIQ contact process.

All clocks are merged into one Gillespie race with total rate
``n + beta * #(I or Q) + tau * #I``: activations fire at rate ``n`` and pick
a uniformly random individual (a quarantined pick does nothing), recoveries
pick uniformly in I or Q, and tests pick uniformly in I.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .errors import BackbonePresent, CountExceedsPopulation, DeadState
from .netgen import Backbone
from .params import ModelParams, PopulationSplit, population_split, round_half_up, validate
from .trajectory import Trajectory, sample_grid

HEALTH_LABELS = ("S", "I", "Q")
EVENT_KINDS = ("activation", "recovery", "testing")

RNG_BUFFER = 1 << 17


@dataclass
class Population:
    health: np.ndarray  # int8, 0=S 1=I 2=Q
    split: PopulationSplit
    counts: np.ndarray  # int64[6]: S_n, I_n, Q_n, S_v, I_v, Q_v

    @classmethod
    def from_health(cls, health, split: PopulationSplit) -> "Population":
        health = np.asarray(health, dtype=np.int8).copy()
        return cls(health, split, tally(health, split))

    def copy(self) -> "Population":
        return Population(self.health.copy(), self.split, self.counts.copy())

    @property
    def n_infectious(self) -> int:
        return int(self.counts[1] + self.counts[4])

    @property
    def n_infected(self) -> int:
        return int(self.counts[[1, 2, 4, 5]].sum())


def tally(health: np.ndarray, split: PopulationSplit) -> np.ndarray:
    out = np.empty(6, dtype=np.int64)
    out[3:] = np.bincount(health[:split.n_v], minlength=3)[:3]
    out[:3] = np.bincount(health[split.n_v:], minlength=3)[:3]
    return out


class EventRecord(NamedTuple):
    time: float
    kind: str
    initiator: int
    partner: int  # -1 when no partner was drawn
    target: int  # -1 when nobody changed state
    old_state: str | None
    new_state: str | None


@dataclass
class EngineState:
    params: ModelParams
    backbone: Backbone | None
    population: Population
    clock: float
    rng: np.random.Generator
    _prm: np.ndarray = field(repr=False)
    _lists: tuple = field(repr=False)
    _sizes: np.ndarray = field(repr=False)
    _graph: tuple = field(repr=False)
    _buf: np.ndarray = field(repr=False)
    _k: int = field(default=RNG_BUFFER, repr=False)

    @property
    def total_rate(self) -> float:
        p = self.params
        return self.population.split.n + p.beta * self._sizes[1] + p.tau * self._sizes[0]

    @property
    def rate_masses(self) -> tuple[float, float, float]:
        """(activation, recovery, testing) shares of the total event rate."""
        p = self.params
        return float(self.population.split.n), p.beta * float(self._sizes[1]), p.tau * float(self._sizes[0])

    @property
    def absorbed(self) -> bool:
        return self._sizes[1] == 0

    def _refill(self) -> None:
        self._buf[:] = self.rng.random(self._buf.shape[0])
        self._k = 0


def _param_vector(p: ModelParams) -> np.ndarray:
    return np.array([
        p.lam,
        p.lam * (1.0 - p.gamma_t),
        p.p_q,
        p.p_q * (1.0 - p.gamma_q),
        p.sigma_n,
        p.sigma_v,
        p.theta,
        p.beta,
        p.tau,
    ], dtype=np.float64)


def _graph_arrays(backbone: Backbone | None, n_v: int):
    if backbone is None or backbone.is_complete:
        dummy = np.zeros(1, dtype=np.int64)
        return K.BB_COMPLETE, dummy, dummy, dummy
    return K.BB_CSR, backbone.indptr, backbone.indices, backbone.group_boundary(n_v)


def init(params: ModelParams, backbone: Backbone | None = None, initial_infected: int = 10,
         severe_fraction: float = 0.0, seed=0) -> EngineState:
    """Fresh state with ``initial_infected`` individuals drawn uniformly at random.

    A share ``severe_fraction`` of them (rounded half-up) starts quarantined.
    ``seed`` may be an int or a ``numpy.random.SeedSequence``.
    """
    p = validate(params)
    if not p.is_scalar:
        raise TypeError("the simulator needs scalar parameters")
    split = population_split(p)
    n = split.n
    if backbone is not None and backbone.n != n:
        raise ValueError(f"backbone has {backbone.n} nodes, population has {n}")
    if not 0 <= initial_infected <= n:
        raise CountExceedsPopulation(f"initial_infected={initial_infected} with n={n}")
    if not 0.0 <= severe_fraction <= 1.0:
        raise ValueError("severe_fraction must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    health = np.zeros(n, dtype=np.int8)
    chosen = rng.choice(n, size=initial_infected, replace=False)
    n_severe = round_half_up(severe_fraction * initial_infected)
    health[chosen[:n_severe]] = K.Q
    health[chosen[n_severe:]] = K.I

    inf_list = np.zeros(n, dtype=np.int64)
    inf_pos = np.full(n, -1, dtype=np.int64)
    sick_list = np.zeros(n, dtype=np.int64)
    sick_pos = np.full(n, -1, dtype=np.int64)
    sizes = np.zeros(2, dtype=np.int64)
    for j in np.flatnonzero(health):
        if health[j] == K.I:
            inf_pos[j] = sizes[0]
            inf_list[sizes[0]] = j
            sizes[0] += 1
        sick_pos[j] = sizes[1]
        sick_list[sizes[1]] = j
        sizes[1] += 1

    return EngineState(
        params=p,
        backbone=backbone,
        population=Population(health, split, tally(health, split)),
        clock=0.0,
        rng=rng,
        _prm=_param_vector(p),
        _lists=(inf_list, inf_pos, sick_list, sick_pos),
        _sizes=sizes,
        _graph=_graph_arrays(backbone, split.n_v),
        _buf=np.empty(RNG_BUFFER, dtype=np.float64),
    )


_NO_SAMPLES = np.zeros(0, dtype=np.float64)
_NO_SAMPLE_ROWS = np.zeros((0, 6), dtype=np.int64)


def _advance(state: EngineState, t_end: float, max_events: int, stop_on_extinction: bool,
             sample_times=_NO_SAMPLES, samples=_NO_SAMPLE_ROWS, last=None):
    pop = state.population
    inf_list, inf_pos, sick_list, sick_pos = state._lists
    bb_mode, indptr, indices, bound = state._graph
    if last is None:
        last = np.zeros(7, dtype=np.float64)
    si = 0
    t = state.clock
    while True:
        if state._buf.shape[0] - state._k < K.RESERVE:
            state._refill()
        status, t, k, si = K.advance(
            state._buf, state._k, t, t_end, max_events, stop_on_extinction,
            pop.split.n, pop.split.n_v, pop.health, pop.counts, state._prm, state._sizes,
            inf_list, inf_pos, sick_list, sick_pos,
            bb_mode, indptr, indices, bound, sample_times, samples, si, last)
        state._k = k
        state.clock = t
        # the kernel checks the buffer before each draw, so no event is ever split
        if status != K.NEED_RNG:
            return status, si, last


def step(state: EngineState) -> EventRecord:
    """Advance by exactly one event of the merged race."""
    if state.population.split.n < 1:
        raise DeadState("no clock has positive rate")
    last = np.full(7, -1.0)
    while True:
        status, _, last = _advance(state, np.inf, 1, False, last=last)
        if status == K.MAX_EVENTS:
            break
    kind = EVENT_KINDS[int(last[1])]
    target = int(last[4])
    return EventRecord(
        time=float(last[0]),
        kind=kind,
        initiator=int(last[2]),
        partner=int(last[3]),
        target=target,
        old_state=HEALTH_LABELS[int(last[5])] if target >= 0 else None,
        new_state=HEALTH_LABELS[int(last[6])] if target >= 0 else None,
    )


def run(state: EngineState, horizon: float, sample_interval: float = 1.0) -> Trajectory:
    """Simulate up to absolute time ``horizon`` or until nobody is infected.

    Samples sit on the grid ``0, dt, 2dt, ...`` (plus ``horizon``); grid
    points before the current clock are skipped. After extinction the state
    is absorbing, so the remaining samples repeat it.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    grid = sample_grid(horizon, sample_interval)
    grid = grid[grid >= state.clock - 1e-12]
    samples = np.zeros((len(grid), 6), dtype=np.int64)
    if state.clock >= horizon:
        samples[:] = state.population.counts
        return _trajectory(state, grid, samples, None)

    status, si, _ = _advance(state, float(horizon), np.iinfo(np.int64).max, True, grid, samples)
    samples[si:] = state.population.counts
    eradication = state.clock if status == K.EXTINCT else None
    return _trajectory(state, grid, samples, eradication)


def _trajectory(state, grid, samples, eradication):
    n = state.population.split.n
    return Trajectory(grid, samples / n, eradication_time=eradication, n=n, counts=samples)


def simulate(params: ModelParams, backbone: Backbone | None = None, *, horizon: float = 200.0,
             sample_interval: float = 1.0, initial_infected: int = 10,
             severe_fraction: float = 0.0, seed=0) -> Trajectory:
    """``init`` followed by ``run``."""
    state = init(params, backbone, initial_infected, severe_fraction, seed)
    return run(state, horizon, sample_interval)


class ContagionRates(NamedTuple):
    kappa_n: float
    nu_n: float
    kappa_v: float
    nu_v: float


def _require_complete(backbone):
    if backbone is not None and not backbone.is_complete:
        raise BackbonePresent("closed-form contact rates hold only without a backbone")


def _snapshot(params: ModelParams, snapshot) -> tuple[ModelParams, Population]:
    p = validate(params)
    if isinstance(snapshot, EngineState):
        return p, snapshot.population
    if isinstance(snapshot, Population):
        return p, snapshot
    return p, Population.from_health(snapshot, population_split(p))


def empirical_rates(params: ModelParams, snapshot, j: int, backbone: Backbone | None = None) -> ContagionRates:
    """Rates at which individual ``j`` would become I or Q given everyone else's state.

    ``snapshot`` is an ``EngineState``, a ``Population`` or a raw health array.
    Rates of the group ``j`` does not belong to are reported as 0.
    """
    if isinstance(snapshot, EngineState) and backbone is None:
        backbone = snapshot.backbone
    _require_complete(backbone)
    p, pop = _snapshot(params, snapshot)
    split = pop.split
    n, n_v, n_n = split.n, split.n_v, split.n_n
    inf_n = int(np.count_nonzero(pop.health[n_v:] == K.I))
    inf_v = int(np.count_nonzero(pop.health[:n_v] == K.I))
    # the sums run over k != j
    if pop.health[j] == K.I:
        if split.is_vaccinated(j):
            inf_v -= 1
        else:
            inf_n -= 1
    th = p.theta
    mixed = (1.0 - th) / (n - 1)
    # theta > 0 guarantees both groups have at least two members
    within_n = th / (n_n - 1) if th > 0 else 0.0
    within_v = th / (n_v - 1) if th > 0 else 0.0

    if split.is_vaccinated(j):
        contact = 2.0 * ((1 - p.sigma_n) * mixed * inf_n + (1 - p.sigma_v) * (within_v + mixed) * inf_v)
        base = p.lam * (1 - p.gamma_t)
        severe = p.p_q * (1 - p.gamma_q)
        return ContagionRates(0.0, 0.0, base * (1 - severe) * contact, base * severe * contact)
    contact = 2.0 * ((1 - p.sigma_n) * (within_n + mixed) * inf_n + (1 - p.sigma_v) * mixed * inf_v)
    return ContagionRates(p.lam * (1 - p.p_q) * contact, p.lam * p.p_q * contact, 0.0, 0.0)


def transition_rate_matrix(params: ModelParams, snapshot, j: int, backbone: Backbone | None = None) -> np.ndarray:
    """Generator of individual ``j``'s health chain, rows and columns ordered S, I, Q."""
    r = empirical_rates(params, snapshot, j, backbone)
    p = validate(params)
    vacc = _snapshot(params, snapshot)[1].split.is_vaccinated(j)
    kappa, nu = (r.kappa_v, r.nu_v) if vacc else (r.kappa_n, r.nu_n)
    return np.array([
        [-kappa - nu, kappa, nu],
        [p.beta, -p.beta - p.tau, p.tau],
        [p.beta, 0.0, -p.beta],
    ])


@dataclass
class FrozenSample:
    """Outcome tallies of many independent next-events drawn from one state."""

    n_trials: int
    total_rate: float
    to_i: np.ndarray
    to_q: np.ndarray
    partner_groups: np.ndarray  # [initiator group, partner group], 0 = non-vaccinated

    def probability(self, j: int) -> tuple[float, float]:
        return self.to_i[j] / self.n_trials, self.to_q[j] / self.n_trials


def sample_transitions(state: EngineState, n_trials: int) -> FrozenSample:
    """Draw ``n_trials`` next events from the current state without applying any.

    The chance that a single event turns susceptible ``j`` into I equals
    ``kappa_j / total_rate``, which gives an exact per-event check of the
    contact rates.
    """
    pop = state.population
    inf_list, _, sick_list, _ = state._lists
    bb_mode, indptr, indices, bound = state._graph
    to_i = np.zeros(pop.split.n, dtype=np.int64)
    to_q = np.zeros(pop.split.n, dtype=np.int64)
    groups = np.zeros((2, 2), dtype=np.int64)
    done = 0
    while done < n_trials:
        if state._buf.shape[0] - state._k < K.RESERVE:
            state._refill()
        got, state._k = K.sample_frozen(
            state._buf, state._k, n_trials - done, pop.split.n, pop.split.n_v, pop.health,
            state._prm, state._sizes, inf_list, sick_list, bb_mode, indptr, indices, bound,
            to_i, to_q, groups)
        done += got
    return FrozenSample(n_trials, state.total_rate, to_i, to_q, groups)
