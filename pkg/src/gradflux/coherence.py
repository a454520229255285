"""Relaxation and Hahn-echo decay fits and the combined echo dephasing time.

Times are in µs and rates in 1/µs. Traces are normalized populations; the
readout calibration that produces them is upstream of this module.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ._validation import check_1d, check_finite, check_increasing
from .exceptions import InvalidValue, NoDecay, SchemaError, UndefinedT2E

_NO_DECAY_SPAN = 100.0


@dataclass
class DecayTrace:
    time_us: np.ndarray
    population: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        self.time_us = check_1d(self.time_us, "time_us", min_len=8)
        self.population = check_1d(self.population, "population", min_len=8)
        if self.time_us.size != self.population.size:
            raise InvalidValue("time and population lengths differ")
        check_increasing(self.time_us, "time_us")
        if np.any(self.population < -0.1) or np.any(self.population > 1.1):
            raise InvalidValue("population outside [-0.1, 1.1]")
        if self.sigma is not None:
            self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), self.time_us.shape).copy()
            if np.any(self.sigma <= 0):
                raise InvalidValue("sigma must be positive")

    @property
    def span(self) -> float:
        return float(self.time_us[-1] - self.time_us[0])

    @classmethod
    def read_csv(cls, path):
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or tuple(h.strip() for h in rows[0]) != ("time_us", "population"):
            raise SchemaError("trace header must be time_us,population")
        try:
            data = np.array([[float(a), float(b)] for a, b in (r for r in rows[1:] if r)])
        except ValueError as exc:
            raise SchemaError(f"bad trace row: {exc}") from None
        if data.size == 0:
            raise SchemaError("trace has no samples")
        return cls(data[:, 0], data[:, 1])

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("time_us", "population"))
        for t, p in zip(self.time_us, self.population):
            w.writerow((repr(float(t)), repr(float(p))))


@dataclass
class DecayRates:
    gamma0: float
    gamma_phi: float = 0.0
    amplitude: float = 1.0
    offset: float = 0.0
    sigmas: dict | None = None
    covariance: np.ndarray | None = None
    reduced_chi2: float = math.nan
    model_mismatch: bool = False

    def __post_init__(self):
        if self.gamma0 < 0 or self.gamma_phi < 0:
            raise InvalidValue("decay rates must be non-negative")

    @property
    def t2e(self) -> float:
        return t2e_combined(self)


@dataclass
class T1Result:
    t1: float
    t1_sigma: float
    amplitude: float
    offset: float
    reduced_chi2: float


def _noise_estimate(y):
    # second differences cancel smooth trends
    d2 = y[2:] - 2 * y[1:-1] + y[:-2]
    return max(float(np.std(d2) / math.sqrt(6.0)), 1e-12)


def _decay_fit(trace: DecayTrace, gaussian: bool):
    t, y = trace.time_us, trace.population
    t0 = t[0]
    sigma = trace.sigma if trace.sigma is not None else np.full(t.size, _noise_estimate(y))
    if np.ptp(y) == 0:
        raise NoDecay("constant trace")

    c0 = float(y[-1])
    a0 = float(y[0] - c0)
    if a0 == 0:
        a0 = float(np.ptp(y))
    # rate guess from the 1/e crossing
    target = c0 + a0 / math.e
    below = np.flatnonzero((y - target) * np.sign(a0) <= 0)
    t_e = float(t[below[0]] - t0) if below.size and t[below[0]] > t0 else 0.5 * trace.span
    g0 = 1.0 / max(t_e, 1e-12)

    if gaussian:
        x0 = np.array([a0, 0.5 * g0, 0.5 * g0, c0])
        lower = [-np.inf, 0.0, 0.0, -np.inf]
    else:
        x0 = np.array([a0, g0, c0])
        lower = [-np.inf, 0.0, -np.inf]

    def model(p, tt):
        s = tt - t0
        if gaussian:
            return p[0] * np.exp(-p[1] * s - (p[2] * s) ** 2) + p[3]
        return p[0] * np.exp(-p[1] * s) + p[2]

    sol = least_squares(
        lambda p: (model(p, t) - y) / sigma,
        x0,
        bounds=(lower, np.inf),
        x_scale="jac",
        ftol=1e-15,
        xtol=1e-15,
        gtol=1e-15,
        max_nfev=5000,
    )
    p = sol.x
    dof = max(t.size - p.size, 1)
    chi2 = float(sol.fun @ sol.fun)
    red = chi2 / dof
    J = sol.jac
    try:
        cov = np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError:
        cov = np.full((p.size, p.size), np.inf)
    if trace.sigma is None:
        # sigma was only estimated: let the residual scatter set the scale
        cov = cov * red
    # amplitude multiplies the rate in the model; fitted amplitude must not vanish
    if abs(p[0]) < 1e-12:
        raise NoDecay("fitted amplitude vanishes")
    return p, cov, red, t0


def fit_t1(trace: DecayTrace) -> T1Result:
    """Fit a exp(-t/T1) + c. Raises NoDecay if T1 exceeds 100x the trace span."""
    p, cov, red, t0 = _decay_fit(trace, gaussian=False)
    g, g_sig = p[1], math.sqrt(max(cov[1, 1], 0.0))
    if g <= 0 or 1.0 / g > _NO_DECAY_SPAN * trace.span:
        raise NoDecay(f"fitted T1 exceeds {_NO_DECAY_SPAN:g}x the trace span")
    amp = p[0] * math.exp(g * t0)
    return T1Result(1.0 / g, g_sig / g**2, amp, p[2], red)


def fit_echo(trace: DecayTrace, at_sweet_spot: bool = True) -> DecayRates:
    """Fit a Hahn-echo trace.

    At the sweet spot the decay is a single exponential (the Gaussian rate is
    pinned to zero); away from it an exponential times a Gaussian. Reduced
    chi-square above 2 sets ``model_mismatch``.
    """
    p, cov, red, t0 = _decay_fit(trace, gaussian=not at_sweet_spot)
    if at_sweet_spot:
        g0, gphi, amp, off = p[1], 0.0, p[0] * math.exp(p[1] * t0), p[2]
        sig = {"gamma0": math.sqrt(max(cov[1, 1], 0.0)), "gamma_phi": 0.0}
        full = np.zeros((2, 2))
        full[0, 0] = cov[1, 1]
    else:
        g0, gphi, off = p[1], p[2], p[3]
        amp = p[0] * math.exp(g0 * t0 + (gphi * t0) ** 2)
        sig = {"gamma0": math.sqrt(max(cov[1, 1], 0.0)), "gamma_phi": math.sqrt(max(cov[2, 2], 0.0))}
        full = cov[1:3, 1:3].copy()
    if g0 + gphi <= 0 or 1.0 / max(g0, gphi) > _NO_DECAY_SPAN * trace.span:
        raise NoDecay(f"fitted decay time exceeds {_NO_DECAY_SPAN:g}x the trace span")
    rates = DecayRates(float(g0), float(gphi), float(amp), float(off), sig, full, red, red > 2.0)
    rates.sigmas["t2e"] = t2e_sigma(rates)
    return rates


def t2e_combined(rates) -> float:
    """1/e time of exp(-g0 t - (gphi t)^2).

    Evaluated as 2 / (sqrt(g0^2 + 4 gphi^2) + g0), the conjugate form of
    (sqrt(g0^2 + 4 gphi^2) - g0) / (2 gphi^2), which stays exact in both
    limits: 1/g0 for gphi -> 0 and 1/gphi for g0 -> 0.
    """
    if isinstance(rates, DecayRates):
        g0, gphi = rates.gamma0, rates.gamma_phi
    else:
        g0, gphi = rates
    g0 = check_finite(g0, "gamma0")
    gphi = check_finite(gphi, "gamma_phi")
    if g0 < 0 or gphi < 0:
        raise InvalidValue("decay rates must be non-negative")
    if g0 == 0 and gphi == 0:
        raise UndefinedT2E("both decay rates are zero")
    return 2.0 / (math.hypot(g0, 2.0 * gphi) + g0)


def t2e_sigma(rates: DecayRates) -> float:
    """Propagated 1-sigma uncertainty of the combined T2E."""
    g0, gphi = rates.gamma0, rates.gamma_phi
    root = math.hypot(g0, 2.0 * gphi)
    if root == 0:
        return math.inf
    denom = (root + g0) ** 2
    grad = np.array([-2.0 * (g0 / root + 1.0) / denom, -2.0 * (4.0 * gphi / root) / denom])
    cov = rates.covariance if rates.covariance is not None else np.zeros((2, 2))
    return float(math.sqrt(max(grad @ cov @ grad, 0.0)))


def degradation(t2e_at: float, t2e_sweet: float) -> float:
    """Percent loss of T2E relative to the sweet-spot value."""
    if not t2e_sweet > 0:
        raise InvalidValue("sweet-spot T2E must be positive")
    return 100.0 * (1.0 - t2e_at / t2e_sweet)
