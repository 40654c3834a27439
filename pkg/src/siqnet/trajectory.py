"""Time series of the six compartment fractions, shared by both engines."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMNS = ("S_n", "I_n", "Q_n", "S_v", "I_v", "Q_v")
HEADER = "t," + ",".join(COLUMNS)


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # shape (len(times), 6), columns as COLUMNS
    eradication_time: float | None = None
    n: int | None = None
    counts: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float).reshape(-1, 6)
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")

    def __len__(self):
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, COLUMNS.index(name)]

    @property
    def infected(self) -> np.ndarray:
        """I + Q over both groups."""
        return self.values[:, [1, 2, 4, 5]].sum(axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    @property
    def eradicated(self) -> bool:
        return self.eradication_time is not None

    def to_csv(self, path: str | Path | None = None, comment: str | None = None) -> str:
        buf = io.StringIO()
        if comment:
            for line in comment.splitlines():
                buf.write(f"# {line}\n")
        buf.write(HEADER + "\n")
        for t, row in zip(self.times, self.values):
            buf.write(f"{t:.12g}," + ",".join(f"{x:.12g}" for x in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path) -> "Trajectory":
        lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
        if lines[0].strip() != HEADER:
            raise ValueError(f"unexpected header {lines[0]!r}")
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]]).reshape(-1, 7)
        return cls(data[:, 0], data[:, 1:])


def mean_trajectory(trajs: list[Trajectory]) -> Trajectory:
    """Pointwise average of trajectories sampled on a common grid."""
    times = trajs[0].times
    for tr in trajs[1:]:
        if len(tr.times) != len(times) or not np.allclose(tr.times, times):
            raise ValueError("trajectories are not on a common time grid")
    return Trajectory(times, np.mean([tr.values for tr in trajs], axis=0), n=trajs[0].n)


def sample_grid(horizon: float, interval: float) -> np.ndarray:
    """``0, dt, 2dt, ...`` up to the horizon, plus the horizon itself."""
    if horizon <= 0 or interval <= 0:
        raise ValueError("horizon and sample interval must be positive")
    k = int(np.floor(horizon / interval + 1e-9))
    grid = np.arange(k + 1) * interval
    if horizon - grid[-1] > 1e-9 * max(1.0, horizon):
        grid = np.append(grid, horizon)
    else:
        grid[-1] = min(grid[-1], horizon)
    return grid
