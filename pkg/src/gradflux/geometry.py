"""Gradiometric flux algebra: effective flux, fluxon trapping and the
empirical loop-asymmetry design models.

Units: areas in µm², fields in µT, inductances in pH, widths in µm, fluxes in
units of the flux quantum unless a name says otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from ._config import PHI0, UM2_UT, defaults
from ._validation import check_finite, check_positive_finite, require_keys
from .exceptions import AmbiguousCooldownFlux, InvalidValue, SchemaError, UnsolvableTarget

_AMBIGUITY_TOL = defaults()["lock"]["ambiguity_tol"]


@dataclass(frozen=True)
class GradiometerGeometry:
    """Two-loop gradiometer.

    Build it from loop inductances with :meth:`from_inductances`, from the
    area sum and difference with :meth:`from_area_sum`, or from a target
    effective area with :meth:`from_effective_area`.
    """

    area_left: float
    area_right: float
    alpha: float
    ring_area: float
    width_asym: float | None = None

    def __post_init__(self):
        check_positive_finite(self.area_left, "area_left")
        check_positive_finite(self.area_right, "area_right")
        check_positive_finite(self.ring_area, "ring_area")
        a = check_finite(self.alpha, "alpha")
        if abs(a) >= 1:
            raise InvalidValue(f"|alpha| must be < 1, got {a}")

    @classmethod
    def from_inductances(cls, area_left, area_right, l_left, l_right, ring_area, width_asym=None):
        l_left = check_positive_finite(l_left, "l_left")
        l_right = check_positive_finite(l_right, "l_right")
        alpha = (l_right - l_left) / (l_right + l_left)
        return cls(area_left, area_right, alpha, ring_area, width_asym)

    @classmethod
    def from_area_sum(cls, area_sum, delta_area, alpha, ring_area, width_asym=None):
        """``delta_area`` is A' - A''."""
        return cls(0.5 * (area_sum + delta_area), 0.5 * (area_sum - delta_area), alpha, ring_area, width_asym)

    @classmethod
    def from_effective_area(cls, a_eff, alpha, area_sum, ring_area=None):
        """Geometry whose effective area equals ``a_eff`` for the given alpha."""
        delta_half = a_eff - 0.5 * alpha * area_sum
        return cls.from_area_sum(area_sum, 2.0 * delta_half, alpha, ring_area or area_sum)

    @property
    def area_sum(self) -> float:
        return self.area_left + self.area_right

    @property
    def delta_area(self) -> float:
        return self.area_left - self.area_right

    @property
    def effective_area(self) -> float:
        return effective_area(self)

    @classmethod
    def from_dict(cls, d):
        require_keys(d, ("area_left_um2", "area_right_um2", "ring_area_um2"), "geometry JSON")
        x = d.get("width_asym_um")
        if "alpha" in d:
            return cls(d["area_left_um2"], d["area_right_um2"], d["alpha"], d["ring_area_um2"], x)
        if "l_left_ph" in d and "l_right_ph" in d:
            return cls.from_inductances(
                d["area_left_um2"], d["area_right_um2"], d["l_left_ph"], d["l_right_ph"], d["ring_area_um2"], x
            )
        raise SchemaError("geometry JSON: need 'alpha' or both 'l_left_ph' and 'l_right_ph'")

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        d = {
            "area_left_um2": self.area_left,
            "area_right_um2": self.area_right,
            "ring_area_um2": self.ring_area,
            "alpha": self.alpha,
        }
        if self.width_asym is not None:
            d["width_asym_um"] = self.width_asym
        return d


@dataclass(frozen=True)
class FieldBias:
    """Mean field over each loop and the optional cooldown field, all in µT."""

    b_left: float = 0.0
    b_right: float = 0.0
    b_cd: float | None = None

    @classmethod
    def uniform(cls, b, b_cd=None):
        return cls(b, b, b_cd)

    @classmethod
    def gradient(cls, b, g):
        """Fields ``b (1 + g)`` and ``b (1 - g)`` on the left and right loop."""
        return cls(b * (1 + g), b * (1 - g))


@dataclass(frozen=True)
class LockState:
    m: int

    def __post_init__(self):
        if int(self.m) != self.m:
            raise InvalidValue(f"fluxon number must be an integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def parity(self) -> str:
        return "pi" if self.m % 2 else "zero"

    def lock_offset(self, alpha: float) -> float:
        """Flux m(1 + alpha)/2 contributed by the trapped fluxons."""
        return self.m * (1.0 + alpha) / 2.0

    def to_dict(self):
        return {"m": self.m, "parity": self.parity}


def _as_lock(lock) -> LockState:
    return lock if isinstance(lock, LockState) else LockState(lock)


def effective_flux(geom: GradiometerGeometry, field: FieldBias) -> float:
    """Flux bias created by the applied field, in flux quanta.

    Half the loop flux difference plus alpha times the mean loop flux.
    """
    flux_l = field.b_left * geom.area_left * UM2_UT
    flux_r = field.b_right * geom.area_right * UM2_UT
    return (0.5 * (flux_l - flux_r) + 0.5 * geom.alpha * (flux_l + flux_r)) / PHI0


def effective_area(geom: GradiometerGeometry) -> float:
    return 0.5 * geom.delta_area + 0.5 * geom.alpha * geom.area_sum


def trapped_fluxons(field: FieldBias, geom: GradiometerGeometry, tol: float = _AMBIGUITY_TOL) -> LockState:
    """Fluxon number left in the ring after cooling down in ``field.b_cd``.

    Rounds the ring flux to the nearest integer. Within ``tol`` of a
    half-integer the outcome is stochastic and AmbiguousCooldownFlux is raised.
    """
    if field.b_cd is None:
        raise InvalidValue("cooldown field b_cd is required")
    b_cd = check_finite(field.b_cd, "b_cd")
    n = b_cd * geom.ring_area * UM2_UT / PHI0
    frac = abs(n) - math.floor(abs(n))
    if abs(frac - 0.5) < tol:
        raise AmbiguousCooldownFlux(
            f"ring flux {n:.6f} Phi0 is within {tol:g} of a half-integer", n_flux=n
        )
    m = int(math.floor(abs(n) + 0.5))
    return LockState(m if n >= 0 else -m)


def total_flux(phi_eff: float, lock, alpha: float) -> float:
    """Flux offset Phi_eff + m(1 + alpha)/2 entering the Hamiltonian."""
    return phi_eff + _as_lock(lock).lock_offset(alpha)


def residual_offset(lock, alpha: float, a_eff: float) -> float:
    """Zero-field flux offset sgn(a_eff) m alpha / 2; sgn(0) is taken as +1."""
    sign = -1.0 if a_eff < 0 else 1.0
    return sign * _as_lock(lock).m * alpha / 2.0


def multi_qubit_lock(b_cd: float, geoms: Sequence[GradiometerGeometry], tol: float = _AMBIGUITY_TOL):
    """Lock state of every device after a shared cooldown.

    Ambiguous devices do not abort the batch; their slot holds the
    AmbiguousCooldownFlux instance instead of a LockState.
    """
    out = []
    for g in geoms:
        try:
            out.append(trapped_fluxons(FieldBias(b_cd=b_cd), g, tol=tol))
        except AmbiguousCooldownFlux as exc:
            out.append(exc)
    return out


def parity_summary(states) -> dict:
    summary = {"zero": 0, "pi": 0, "ambiguous": 0}
    for s in states:
        summary[s.parity if isinstance(s, LockState) else "ambiguous"] += 1
    return summary


# --- design models -----------------------------------------------------------


@dataclass(frozen=True)
class DesignCoefficients:
    """Affine fits of the loop asymmetries against x = (w' - w'')/2 in µm."""

    alpha_slope_pct_per_um: float
    alpha_intercept_pct: float
    aeff_slope_um2_per_um: float
    aeff_intercept_um2: float
    dl_slope_ph_per_um: float
    dl_intercept_ph: float
    da_half_slope_um2_per_um: float
    da_half_intercept_um2: float

    @classmethod
    def default(cls):
        return cls(**defaults()["design_coefficients"])

    @classmethod
    def from_dict(cls, d):
        base = defaults()["design_coefficients"]
        if not isinstance(d, dict):
            raise SchemaError("design coefficients JSON: expected an object")
        unknown = set(d) - set(base)
        if unknown:
            raise SchemaError(f"design coefficients JSON: unknown keys {sorted(unknown)}")
        merged = {**base, **d}
        return cls(**{k: check_finite(v, k, exc=SchemaError) for k, v in merged.items()})

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)

    def lines(self):
        """(slope, intercept) per quantity, in natural units (alpha dimensionless)."""
        return {
            "alpha": (self.alpha_slope_pct_per_um / 100.0, self.alpha_intercept_pct / 100.0),
            "a_eff": (self.aeff_slope_um2_per_um, self.aeff_intercept_um2),
            "delta_l": (self.dl_slope_ph_per_um, self.dl_intercept_ph),
            "delta_a_half": (self.da_half_slope_um2_per_um, self.da_half_intercept_um2),
        }


def design_model(x: float, coeffs: DesignCoefficients | None = None) -> dict:
    """Evaluate alpha, A_eff (µm²), ΔL (pH) and ΔA/2 (µm²) at width asymmetry x (µm)."""
    coeffs = coeffs or DesignCoefficients.default()
    x = check_finite(x, "x")
    return {k: s * x + b for k, (s, b) in coeffs.lines().items()}


_TARGETS = {
    "alpha-zero": "alpha",
    "aeff-zero": "a_eff",
    "delta-l-zero": "delta_l",
    "delta-a-zero": "delta_a_half",
}


def design_solve(target: str, coeffs: DesignCoefficients | None = None) -> float:
    """Width asymmetry x (µm) at which the chosen affine model crosses zero."""
    coeffs = coeffs or DesignCoefficients.default()
    try:
        key = _TARGETS[target]
    except KeyError:
        raise InvalidValue(f"unknown target {target!r}; expected one of {sorted(_TARGETS)}") from None
    slope, intercept = coeffs.lines()[key]
    if slope == 0:
        raise UnsolvableTarget(f"{target}: zero slope, no crossing")
    return -intercept / slope


def design_crossings(coeffs: DesignCoefficients | None = None) -> dict:
    """All zero crossings plus the gap between the alpha and A_eff crossings."""
    out = {}
    for target in _TARGETS:
        try:
            out[target] = design_solve(target, coeffs)
        except UnsolvableTarget:
            out[target] = None
    if out["alpha-zero"] is not None and out["aeff-zero"] is not None:
        out["alpha_minus_aeff"] = out["alpha-zero"] - out["aeff-zero"]
    return out
