"""Model parameters, their admissible ranges, and the population split.

Scalar fields may also be numpy arrays of a common broadcastable shape; the
closed-form threshold functions evaluate such batches elementwise. The
stochastic engine and the per-individual ODEs require scalars.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import RangeError, SubpopulationTooSmall

# config-file key -> dataclass field; ``lambda`` is reserved in Python
CONFIG_KEYS = {
    "n": "n",
    "v": "v",
    "lambda": "lam",
    "p_q": "p_q",
    "beta": "beta",
    "gamma_t": "gamma_t",
    "gamma_q": "gamma_q",
    "tau": "tau",
    "theta": "theta",
    "sigma_v": "sigma_v",
    "sigma_n": "sigma_n",
    "eta": "eta",
}

_UNIT = (0.0, 1.0, "[0, 1]")
_RANGES = {
    "v": _UNIT,
    "lam": _UNIT,
    "p_q": _UNIT,
    "gamma_t": _UNIT,
    "gamma_q": _UNIT,
    "sigma_v": _UNIT,
    "sigma_n": _UNIT,
    "eta": _UNIT,
}


@dataclass(frozen=True, kw_only=True)
class ModelParams:
    """All model symbols.

    ``n=None`` denotes the large-population limit used by the macroscopic
    ODEs and the threshold formulas.
    """

    v: Any
    lam: Any
    p_q: Any
    beta: Any
    gamma_t: Any
    gamma_q: Any
    tau: Any
    theta: Any
    sigma_v: Any
    sigma_n: Any
    n: int | None = None
    eta: Any = 0.0

    @property
    def is_scalar(self) -> bool:
        return all(_is_scalar(getattr(self, f)) for f in _float_fields())

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_mapping(self) -> dict[str, Any]:
        """Config-file spelling of every field (``lam`` becomes ``lambda``)."""
        return {key: getattr(self, attr) for key, attr in CONFIG_KEYS.items()}

    def describe(self) -> str:
        return " ".join(f"{k}={_fmt(v)}" for k, v in self.to_mapping().items())


_FLOAT_FIELDS = tuple(f.name for f in dataclasses.fields(ModelParams) if f.name != "n")


@dataclass(frozen=True)
class PopulationSplit:
    """Vaccinated individuals occupy indices ``0 .. n_v-1``."""

    n_v: int
    n_n: int

    @property
    def n(self) -> int:
        return self.n_v + self.n_n

    def is_vaccinated(self, j: int) -> bool:
        return j < self.n_v

    def group_slice(self, vaccinated: bool) -> slice:
        return slice(0, self.n_v) if vaccinated else slice(self.n_v, self.n)


_SCALAR_TYPES = (float, int, np.floating, np.integer)


def _float_fields():
    return _FLOAT_FIELDS


def _is_scalar(x) -> bool:
    return isinstance(x, _SCALAR_TYPES) or np.ndim(x) == 0


def _fmt(x) -> str:
    if x is None:
        return "inf"
    if np.ndim(x):
        return "array"
    return repr(x) if isinstance(x, int) else f"{float(x):.12g}"


def _check(name, x, lo, hi, label, *, lo_open=False, hi_open=False):
    if _is_scalar(x):
        f = float(x)
        bad = not math.isfinite(f) or (f <= lo if lo_open else f < lo)
        if hi is not None:
            bad = bad or (f >= hi if hi_open else f > hi)
        if bad:
            raise RangeError(name, x, label)
        return
    arr = np.asarray(x, dtype=float)
    bad = ~np.isfinite(arr)
    bad |= (arr <= lo) if lo_open else (arr < lo)
    if hi is not None:
        bad |= (arr >= hi) if hi_open else (arr > hi)
    if np.any(bad):
        raise RangeError(name, x if arr.ndim == 0 else arr[bad].ravel()[0], label)


def _coerce(x):
    if _is_scalar(x):
        return float(x)
    return np.asarray(x, dtype=float)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def validate(params: ModelParams) -> ModelParams:
    """Check every range and fold the NPI factor into the infection probability.

    The returned record carries ``lam = (1 - eta) * lam`` and ``eta = 0``, so
    applying ``validate`` twice is the same as applying it once.
    """
    for name, (lo, hi, label) in _RANGES.items():
        _check(name, getattr(params, name), lo, hi, label)
    # beta = 0 is kept legal: it is the degenerate no-recovery limit
    _check("beta", params.beta, 0.0, None, "[0, inf)")
    _check("tau", params.tau, 0.0, None, "[0, inf)")
    _check("theta", params.theta, 0.0, 1.0, "[0, 1)", hi_open=True)

    n = params.n
    if n is not None:
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise RangeError("n", n, "positive integer")
        n = int(n)

    fields = {f: _coerce(getattr(params, f)) for f in _float_fields()}
    fields["lam"] = (1.0 - fields["eta"]) * fields["lam"]
    if _is_scalar(fields["lam"]):
        fields["lam"] = float(fields["lam"])
    fields["eta"] = 0.0 if _is_scalar(fields["eta"]) else np.zeros_like(fields["eta"])
    out = ModelParams(n=n, **fields)

    if n is not None:
        n_v = np.floor(np.asarray(out.v) * n + 0.5)
        small = (n_v < 2) | (n - n_v < 2)
        if np.any(small & (np.asarray(out.theta) > 0)):
            raise SubpopulationTooSmall(
                f"theta > 0 needs at least 2 members per group (n={n}, v={out.v})"
            )
    return out


def population_split(params: ModelParams) -> PopulationSplit:
    """Integer group sizes, ``n_v = round(v * n)`` with ties rounding up."""
    if params.n is None:
        raise RangeError("n", None, "finite population size")
    if not params.is_scalar:
        raise TypeError("population_split needs scalar parameters")
    n_v = round_half_up(float(params.v) * params.n)
    split = PopulationSplit(n_v=n_v, n_n=params.n - n_v)
    if split.n_v < 1 or split.n_n < 1:
        raise SubpopulationTooSmall(
            f"both groups must be non-empty (n_v={split.n_v}, n_n={split.n_n})"
        )
    return split


def params_from_mapping(data: Mapping[str, Any], base: ModelParams | None = None) -> ModelParams:
    """Build parameters from config-file spelled keys; unknown keys raise."""
    fields = dataclasses.asdict(base) if base is not None else {}
    for key, value in data.items():
        if key not in CONFIG_KEYS:
            raise KeyError(f"unknown parameter key {key!r}")
        attr = CONFIG_KEYS[key]
        if attr == "n":
            fields[attr] = None if value in (None, "inf", "None") else int(value)
        else:
            fields[attr] = float(value)
    missing = [f.name for f in dataclasses.fields(ModelParams)
               if f.name not in fields and f.default is dataclasses.MISSING]
    if missing:
        raise KeyError(f"missing parameter keys: {', '.join(missing)}")
    return ModelParams(**fields)


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file. ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def write_config(params: ModelParams, path: str | Path, extra: Mapping[str, Any] | None = None) -> None:
    lines = [f"{k} = {_fmt(v)}" for k, v in params.to_mapping().items()]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


# Presets used by the figure reproductions in the harness.
COVID_BASE = dict(n=10_000, lam=0.36, beta=0.1, v=0.821, p_q=0.19, gamma_t=0.65, gamma_q=0.92)


def covid_params(**overrides) -> ModelParams:
    """COVID-like parameters with sigma_n = theta = 0.5,
    sigma_v = 0.3 and tau = 0 unless overridden."""
    base = dict(COVID_BASE, sigma_n=0.5, theta=0.5, sigma_v=0.3, tau=0.0)
    base.update(overrides)
    return ModelParams(**base)


def fig1_params(**overrides) -> ModelParams:
    base = dict(n=20_000, v=0.8, lam=0.2, sigma_v=0.7, sigma_n=0.2, p_q=0.2, beta=0.02,
                gamma_t=0.5, gamma_q=0.9, tau=0.05, theta=0.5)
    base.update(overrides)
    return ModelParams(**base)


def fig3_params(**overrides) -> ModelParams:
    """Shared values of the endemic-prevalence heatmaps (panel d defaults)."""
    base = dict(n=10_000, lam=0.2, beta=0.02, sigma_v=0.5, p_q=0.2, tau=0.05,
                gamma_t=0.5, theta=0.5, gamma_q=0.9, sigma_n=0.5, v=0.5)
    base.update(overrides)
    return ModelParams(**base)
