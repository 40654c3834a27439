"""Closed-form threshold and local stability analysis at the disease-free equilibrium.

Every function accepts scalar parameters or numpy arrays in the fields, in
which case results are computed elementwise. Only the Jacobian needs scalars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MonotonicityViolated, NegativeDiscriminant
from .params import ModelParams, validate

INCREASING = ("lam", "gamma_q")
DECREASING = ("beta", "gamma_t", "sigma_v", "sigma_n", "p_q")
_ALIASES = {"lambda": "lam"}


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


def _phi_rho(p: ModelParams):
    phi = (1 - p.gamma_t) * (1 - p.p_q * (1 - p.gamma_q)) * (1 - p.sigma_v)
    rho = (1 - p.p_q) * (1 - p.sigma_n)
    return phi, rho


def phi_rho(params: ModelParams):
    """Effective transmissibility factors (phi, rho) of the vaccinated and non-vaccinated."""
    phi, rho = _phi_rho(validate(params))
    return _scalarize(phi), _scalarize(rho)


def _mixing(p: ModelParams):
    a = p.theta + (1 - p.theta) * (1 - p.v)
    b = p.theta + (1 - p.theta) * p.v
    return a, b


def _xi(p: ModelParams):
    phi, rho = _phi_rho(p)
    a, b = _mixing(p)
    return rho * a + phi * b


def xi(params: ModelParams):
    return _scalarize(_xi(validate(params)))


def discriminant(params: ModelParams):
    """``xi**2 - 4 theta phi rho``, evaluated without subtraction.

    The identity ``xi^2 - 4 theta phi rho = (rho A - phi B)^2
    + 4 rho phi (1 - theta)^2 v (1 - v)`` turns the expression into a sum
    of non-negative terms, so it stays accurate when the two sides of the
    plain form nearly cancel.
    """
    return _scalarize(_disc(validate(params)))


def _disc(p: ModelParams):
    phi, rho = _phi_rho(p)
    a, b = _mixing(p)
    return (rho * a - phi * b) ** 2 + 4 * rho * phi * (1 - p.theta) ** 2 * p.v * (1 - p.v)


def discriminant_polynomial(params: ModelParams):
    """The same quantity expanded as a quadratic in theta (for cross-checks)."""
    p = validate(params)
    phi, rho = _phi_rho(p)
    v, th = p.v, p.theta
    c2 = (v * rho + (1 - v) * phi) ** 2
    c1 = 2 * (v * (1 - v) * (phi - rho) ** 2 - phi * rho)
    c0 = ((1 - v) * rho + v * phi) ** 2
    return _scalarize(c2 * th**2 + c1 * th + c0)


def _sqrt_disc(p: ModelParams):
    d = discriminant(p)
    if np.ndim(d) == 0:
        if d < 0:
            raise NegativeDiscriminant(f"discriminant {d!r} < 0")
        return math.sqrt(d)
    if np.any(d < 0):
        raise NegativeDiscriminant(f"discriminant {d.min()!r} < 0")
    return np.sqrt(d)


def _tau_bar(p: ModelParams):
    return p.lam * _xi(p) - p.beta + p.lam * _sqrt_disc(p)


def analytic_threshold(params: ModelParams):
    """Critical testing rate above which the disease-free equilibrium is stable."""
    return _scalarize(_tau_bar(validate(params)))


def threshold_no_homophily(params: ModelParams):
    """Threshold for random mixing (``theta`` is ignored)."""
    p = validate(params)
    phi, rho = _phi_rho(p)
    return _scalarize(2 * p.lam * rho * (1 - p.v) + 2 * p.lam * phi * p.v - p.beta)


def no_control_needed(params: ModelParams):
    """True when recovery alone outpaces spreading, so any tau >= 0 suffices."""
    return _no_control(validate(params))


def _no_control(p: ModelParams):
    out = p.beta > p.lam * _xi(p) + p.lam * _sqrt_disc(p)
    return bool(out) if np.ndim(out) == 0 else out


def iblock_eigenvalues(params: ModelParams):
    """Eigenvalues (larger, smaller) of the infectious block of the linearization."""
    return _eigs(validate(params))


def _eigs(p: ModelParams):
    centre = p.lam * _xi(p) - p.beta - p.tau
    half = p.lam * _sqrt_disc(p)
    return _scalarize(centre + half), _scalarize(centre - half)


def dfe_jacobian(params: ModelParams) -> np.ndarray:
    """Linearization at the DFE over ``(y_nq, y_vq, y_ni, y_vi)``."""
    p = validate(params)
    if not p.is_scalar:
        raise TypeError("dfe_jacobian needs scalar parameters")
    lam, v, th, b, tau = p.lam, p.v, p.theta, p.beta, p.tau
    a_mix, b_mix = _mixing(p)
    sn, sv = 1 - p.sigma_n, 1 - p.sigma_v
    lam_v = lam * (1 - p.gamma_t)
    pq_v = p.p_q * (1 - p.gamma_q)
    cross_n = 2 * (1 - th) * (1 - v) * sv  # vaccinated infectious -> non-vaccinated
    cross_v = 2 * (1 - th) * v * sn
    own_n = 2 * a_mix * sn
    own_v = 2 * b_mix * sv
    return np.array([
        [-b, 0.0, lam * p.p_q * own_n + tau, lam * p.p_q * cross_n],
        [0.0, -b, lam_v * pq_v * cross_v, lam_v * pq_v * own_v + tau],
        [0.0, 0.0, lam * (1 - p.p_q) * own_n - b - tau, lam * (1 - p.p_q) * cross_n],
        [0.0, 0.0, lam_v * (1 - pq_v) * cross_v, lam_v * (1 - pq_v) * own_v - b - tau],
    ])


def coverage_sensitivity(params: ModelParams):
    """Sign of the derivative of the threshold in v: -1, 0 or +1."""
    return _sign(validate(params))


def _sign(p: ModelParams):
    phi, rho = _phi_rho(p)
    s = np.sign(np.asarray(phi) - np.asarray(rho)).astype(int)
    return int(s) if s.ndim == 0 else s


@dataclass(frozen=True)
class MonotonicityReport:
    name: str
    step: float
    before: float
    after: float
    expected: str  # "increasing" or "decreasing"

    @property
    def delta(self) -> float:
        return self.after - self.before

    @property
    def ok(self) -> bool:
        return self.delta >= 0 if self.expected == "increasing" else self.delta <= 0


def monotonicity_check(params: ModelParams, name: str, step: float) -> MonotonicityReport:
    """Compare the threshold at ``params`` and with ``name`` raised by ``step``.

    Raises ``MonotonicityViolated`` if the change goes the wrong way.
    """
    name = _ALIASES.get(name, name)
    if name in INCREASING:
        expected = "increasing"
    elif name in DECREASING:
        expected = "decreasing"
    else:
        raise ValueError(f"no monotonicity statement for {name!r}")
    if step <= 0:
        raise ValueError("step must be positive")
    p = validate(params)
    q = validate(p.replace(**{name: getattr(p, name) + step}))
    rep = MonotonicityReport(name, step, float(analytic_threshold(p)),
                             float(analytic_threshold(q)), expected)
    if not rep.ok:
        raise MonotonicityViolated(
            f"threshold {expected} in {name} expected, got {rep.before!r} -> {rep.after!r}"
        )
    return rep


@dataclass(frozen=True)
class ThresholdReport:
    xi: float
    tau_bar: float
    phi: float
    rho: float
    discriminant: float
    eigenvalues: tuple[float, float]
    dfe_stable: bool
    no_control_needed: bool
    coverage_derivative_sign: int

    def lines(self) -> list[str]:
        return [
            f"xi={self.xi:.12g}",
            f"tau_bar={self.tau_bar:.12g}",
            f"phi={self.phi:.12g}",
            f"rho={self.rho:.12g}",
            f"discriminant={self.discriminant:.12g}",
            f"eigenvalue_max={self.eigenvalues[0]:.12g}",
            f"eigenvalue_min={self.eigenvalues[1]:.12g}",
            f"dfe_stable={str(self.dfe_stable).lower()}",
            f"no_control_needed={str(self.no_control_needed).lower()}",
            f"coverage_derivative_sign={self.coverage_derivative_sign}",
        ]


def threshold_report(params: ModelParams) -> ThresholdReport:
    p = validate(params)
    if not p.is_scalar:
        raise TypeError("threshold_report needs scalar parameters")
    phi, rho = _phi_rho(p)
    tau_bar = _tau_bar(p)
    return ThresholdReport(
        xi=_xi(p),
        tau_bar=tau_bar,
        phi=phi,
        rho=rho,
        discriminant=_disc(p),
        eigenvalues=_eigs(p),
        dfe_stable=bool(p.tau > tau_bar),
        no_control_needed=_no_control(p),
        coverage_derivative_sign=_sign(p),
    )
