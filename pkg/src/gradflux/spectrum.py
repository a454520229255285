"""Transition lines of a locked gradiometric fluxonium versus applied field."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._config import PHI0, UM2_UT, defaults
from ._validation import check_1d, check_positive_finite
from .circuit import SpectralResult, _check_params, _phi_value, batch_levels
from .exceptions import InvalidValue, NoConvergence
from .geometry import GradiometerGeometry, _as_lock, effective_area

_EIG_TOL = defaults()["eigen"]["tol"]
_STEP = defaults()["dispersion_step_phi0"]

CSV_HEADER = ("b_ext_ut", "freq_ghz", "family", "transition")


@dataclass
class Curve:
    family: str
    transition: str
    b_ext_ut: np.ndarray
    freq_ghz: np.ndarray


@dataclass
class SweetSpot:
    b_ut: float
    zero_field_offset: float
    field_insensitive: bool = False


def phi_tot_grid(geom: GradiometerGeometry, lock, field_grid) -> np.ndarray:
    """Flux offset under a uniform field for each grid point.

    The fluxon contribution is folded modulo one flux quantum before the field
    term is added, so locks differing by an even number of fluxons at alpha=0
    give bit-identical offsets.
    """
    lock = _as_lock(lock)
    b = check_1d(field_grid, "field_grid")
    offset = lock.lock_offset(geom.alpha)
    offset -= math.floor(offset + 0.5)
    return effective_area(geom) * UM2_UT / PHI0 * b + offset


def _levels(params, phi, n_levels, tol):
    levels, dims, res, ok = batch_levels(params, phi, n_levels=n_levels, tol=tol)
    if not np.all(ok):
        bad = int(np.flatnonzero(~ok)[0])
        best = SpectralResult(levels[bad], int(dims[bad]), False, float(res[bad]), True, tol)
        raise NoConvergence(f"grid point {bad} not converged (residual {res[bad]:.3g})", best=best)
    return levels


def line(params, geom, lock, transition=(0, 1), field_grid=(), tol=_EIG_TOL) -> np.ndarray:
    """Transition frequency f_ij (GHz) versus field; rows are (B, f)."""
    i, j = transition
    if not 0 <= i < j:
        raise InvalidValue(f"transition needs 0 <= i < j, got {transition!r}")
    params = _check_params(params)
    b = check_1d(field_grid, "field_grid")
    lv = _levels(params, phi_tot_grid(geom, lock, b), j + 1, tol)
    return np.column_stack([b, lv[:, j] - lv[:, i]])


def line_families(
    params,
    geom: GradiometerGeometry,
    lock,
    field_grid,
    f_res: float | None = None,
    max_level: int = 3,
    photons: Sequence[int] = (2, 3),
    resonator_sums: bool = False,
    tol: float = _EIG_TOL,
) -> list[Curve]:
    """Labelled curves for plotting and fitting.

    Families:

    * ``main``: f_0j for j = 1..max_level.
    * ``multi_photon``: f_0j / n for j >= 2 and n in ``photons``.
    * ``resonator_mediated``: f_0j - f_res where positive, plus f_0j + f_res
      when ``resonator_sums`` is set. This sideband arithmetic is a modelling
      choice, not a derived formula.
    * ``resonator``: the constant readout frequency, if given.
    """
    params = _check_params(params)
    if f_res is not None:
        f_res = check_positive_finite(f_res, "f_res")
    b = check_1d(field_grid, "field_grid")
    lv = _levels(params, phi_tot_grid(geom, lock, b), max_level + 1, tol)
    curves = []
    main = {j: lv[:, j] - lv[:, 0] for j in range(1, max_level + 1)}
    for j, f in main.items():
        curves.append(Curve("main", f"0-{j}", b, f))
    for j, f in main.items():
        if j < 2:
            continue
        for n in photons:
            curves.append(Curve("multi_photon", f"0-{j}/{n}", b, f / n))
    if f_res is not None:
        for j, f in main.items():
            diff = f - f_res
            keep = diff > 0
            curves.append(Curve("resonator_mediated", f"res-0-{j}", b[keep], diff[keep]))
            if resonator_sums:
                curves.append(Curve("resonator_mediated", f"res+0-{j}", b, f + f_res))
        curves.append(Curve("resonator", "res", b, np.full_like(b, f_res)))
    return curves


def write_curves_csv(curves: Iterable[Curve], fh) -> int:
    """Write curves in the plot-ready CSV layout; returns the number of rows."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    n = 0
    for c in curves:
        for b, f in zip(c.b_ext_ut, c.freq_ghz):
            w.writerow((f"{b:.9g}", f"{f:.9f}", c.family, c.transition))
            n += 1
    return n


def _f01(params, phi):
    lv = _levels(params, np.asarray(phi, dtype=float), 2, 1e-11)
    return lv[:, 1]


def flux_dispersion(params, bias, step: float = _STEP) -> float:
    """df01/dPhi_tot in GHz per flux quantum.

    Central difference with step ``step``, Richardson-extrapolated against
    step ``2 * step``.
    """
    params = _check_params(params)
    x = _phi_value(bias)
    f = _f01(params, [x - 2 * step, x - step, x + step, x + 2 * step])
    d1 = (f[2] - f[1]) / (2 * step)
    d2 = (f[3] - f[0]) / (4 * step)
    return float((4 * d1 - d2) / 3)


def sweet_spot_field(params, geom: GradiometerGeometry, lock) -> SweetSpot:
    """Uniform field that puts the locked device exactly on its sweet spot.

    The target is the half-integer (odd m) or integer (even m) flux closest to
    the zero-field offset. Also returns the zero-field offset from that sweet
    spot. With zero effective area every field is equivalent, which is
    reported through ``field_insensitive`` rather than raised.
    """
    _check_params(params)
    lock = _as_lock(lock)
    offset = lock.lock_offset(geom.alpha)
    if lock.m % 2:
        target = math.floor(offset) + 0.5
    else:
        target = float(math.floor(offset + 0.5))
    zero_offset = offset - target
    a_eff = effective_area(geom)
    if a_eff == 0:
        return SweetSpot(math.nan, zero_offset, field_insensitive=True)
    b = -zero_offset * PHI0 / (a_eff * UM2_UT)
    return SweetSpot(b, zero_offset)
