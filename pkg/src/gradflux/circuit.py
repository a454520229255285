"""Gradiometric fluxonium Hamiltonian, its diagonalization and unit conversions.

All energies are frequency equivalents E/h in GHz and all fluxes are in units
of the flux quantum. The Hamiltonian is

    H = 4 E_C n^2 + (E_L / 2) (phi + delta)^2 - E_J cos(phi),

with ``delta = 2 pi phi_tot``. It is represented in the eigenbasis of the
quadratic part ``4 E_C n^2 + (E_L/2) phi^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants
from scipy.linalg import eigh_tridiagonal

from ._config import PHI0, defaults
from ._validation import check_positive_finite, require_keys
from .exceptions import (
    GridTooSmall,
    InvalidDimension,
    InvalidParameters,
    InvalidValue,
    NoConvergence,
)

_EIG = defaults()["eigen"]
_GRID = defaults()["grid_oracle"]


@dataclass(frozen=True)
class EnergyParams:
    """Fluxonium energies E_J/h, E_C/h, E_L/h in GHz."""

    e_j: float
    e_c: float
    e_l: float

    def __post_init__(self):
        for name in ("e_j", "e_c", "e_l"):
            v = check_positive_finite(getattr(self, name), name, exc=InvalidParameters)
            object.__setattr__(self, name, v)

    @property
    def plasma_ghz(self) -> float:
        """Oscillator frequency sqrt(8 E_C E_L) of the quadratic part."""
        return math.sqrt(8.0 * self.e_c * self.e_l)

    @property
    def phi_zpf(self) -> float:
        return (8.0 * self.e_c / self.e_l) ** 0.25

    def to_dict(self):
        return {"e_j_ghz": self.e_j, "e_c_ghz": self.e_c, "e_l_ghz": self.e_l}

    @classmethod
    def from_dict(cls, d):
        require_keys(d, ("e_j_ghz", "e_c_ghz", "e_l_ghz"), "parameter JSON")
        return cls(d["e_j_ghz"], d["e_c_ghz"], d["e_l_ghz"])

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class PhaseBias:
    """Total flux offset in units of the flux quantum."""

    phi_tot: float

    def __post_init__(self):
        v = float(self.phi_tot)
        if not math.isfinite(v):
            raise InvalidValue(f"phi_tot must be finite, got {self.phi_tot!r}")
        object.__setattr__(self, "phi_tot", v)

    @property
    def delta(self) -> float:
        return 2.0 * math.pi * self.phi_tot


@dataclass
class SpectralResult:
    levels: np.ndarray
    dim_used: int
    converged: bool
    residual: float
    relative: bool = True
    tol: float = field(default=_EIG["tol"], repr=False)

    @property
    def f01(self) -> float:
        return float(self.levels[1] - self.levels[0])

    def transition(self, i: int, j: int) -> float:
        return float(self.levels[j] - self.levels[i])


def _phi_value(bias) -> float:
    if isinstance(bias, PhaseBias):
        return bias.phi_tot
    return PhaseBias(bias).phi_tot


def _check_params(params) -> EnergyParams:
    if isinstance(params, EnergyParams):
        return params
    if isinstance(params, dict):
        return EnergyParams.from_dict(params)
    try:
        e_j, e_c, e_l = params
    except (TypeError, ValueError):
        raise InvalidParameters(f"cannot interpret {params!r} as energy parameters") from None
    return EnergyParams(e_j, e_c, e_l)


def _basis_operators(params: EnergyParams, dim: int):
    """Quadratic-part diagonal, phi matrix and cos(phi) in the oscillator basis."""
    k = np.arange(dim, dtype=float)
    diag = params.plasma_ghz * (k + 0.5)
    off = params.phi_zpf * np.sqrt(k[1:] / 2.0)
    phi = np.diag(off, 1) + np.diag(off, -1)
    # cos(phi) as a matrix function of the truncated phi operator
    w, v = eigh_tridiagonal(np.zeros(dim), off)
    cos_phi = (v * np.cos(w)) @ v.T
    return diag, phi, cos_phi


def build_hamiltonian(params, bias, dim: int) -> np.ndarray:
    """Return H/h in GHz as a ``dim x dim`` real symmetric matrix."""
    params = _check_params(params)
    delta = 2.0 * math.pi * _phi_value(bias)
    if int(dim) != dim or dim < 4:
        raise InvalidDimension(f"dim must be an integer >= 4, got {dim!r}")
    diag, phi, cos_phi = _basis_operators(params, int(dim))
    h = params.e_l * delta * phi - params.e_j * cos_phi
    h[np.diag_indices_from(h)] += diag + 0.5 * params.e_l * delta**2
    return 0.5 * (h + h.T)


def _reduce(phi_tot: np.ndarray) -> np.ndarray:
    # spectrum is exactly periodic in phi_tot with period 1
    return phi_tot - np.floor(phi_tot + 0.5)


def _batch_at_dim(params: EnergyParams, phi_tot: np.ndarray, dim: int, n_levels: int):
    diag, phi, cos_phi = _basis_operators(params, dim)
    delta = 2.0 * np.pi * phi_tot
    base = -params.e_j * cos_phi
    base[np.diag_indices_from(base)] += diag
    stack = base[None, :, :] + (params.e_l * delta)[:, None, None] * phi[None, :, :]
    evals = np.linalg.eigvalsh(stack)[:, :n_levels]
    return evals + (0.5 * params.e_l * delta**2)[:, None]


def batch_levels(
    params,
    phi_tot,
    n_levels: int = 4,
    tol: float = _EIG["tol"],
    dim_start: int = _EIG["dim_start"],
    dim_cap: int = _EIG["dim_cap"],
    relative: bool = True,
    reduce_period: bool = True,
):
    """Converged lowest levels for an array of flux offsets.

    Returns ``(levels, dims, residuals, converged)`` where ``levels`` has shape
    ``(len(phi_tot), n_levels)``. Points are refined independently: each one
    keeps doubling its basis until every requested transition frequency moves by
    less than ``tol`` (relative) between successive sizes.
    """
    params = _check_params(params)
    if not tol > 0:
        raise InvalidValue(f"tol must be positive, got {tol!r}")
    if n_levels < 2:
        raise InvalidValue(f"n_levels must be >= 2, got {n_levels!r}")
    phi = np.atleast_1d(np.asarray(phi_tot, dtype=float))
    if not np.all(np.isfinite(phi)):
        raise InvalidValue("phi_tot contains non-finite values")
    if reduce_period:
        phi = _reduce(phi)
    n = phi.size
    dim = max(int(dim_start), 4, n_levels + 1)
    levels = _batch_at_dim(params, phi, dim, n_levels)
    out = levels.copy()
    dims = np.full(n, dim)
    residuals = np.full(n, np.inf)
    done = np.zeros(n, dtype=bool)
    pending = np.arange(n)
    prev = levels
    while pending.size and 2 * dim <= dim_cap:
        dim *= 2
        cur = _batch_at_dim(params, phi[pending], dim, n_levels)
        f_prev = prev[:, 1:] - prev[:, :1]
        f_cur = cur[:, 1:] - cur[:, :1]
        res = np.max(np.abs(f_cur - f_prev) / np.abs(f_cur), axis=1)
        out[pending] = cur
        dims[pending] = dim
        residuals[pending] = res
        ok = res < tol
        done[pending[ok]] = True
        pending = pending[~ok]
        prev = cur[~ok]
    if relative:
        out = out - out[:, :1]
    return out, dims, residuals, done


def eigenlevels(
    params,
    bias,
    tol: float = _EIG["tol"],
    n_levels: int = 4,
    dim_start: int = _EIG["dim_start"],
    dim_cap: int = _EIG["dim_cap"],
    relative: bool = True,
    reduce_period: bool = True,
) -> SpectralResult:
    """Lowest ``n_levels`` eigenfrequencies with automatic basis convergence.

    Levels are relative to the ground state unless ``relative=False``. With
    ``reduce_period`` the flux offset is first folded into [-1/2, 1/2), which is
    exact because the spectrum has period one flux quantum.

    Raises
    ------
    NoConvergence
        If ``dim_cap`` is reached; the best result is attached as ``.best``.
    """
    levels, dims, res, ok = batch_levels(
        params,
        [_phi_value(bias)],
        n_levels=n_levels,
        tol=tol,
        dim_start=dim_start,
        dim_cap=dim_cap,
        relative=relative,
        reduce_period=reduce_period,
    )
    result = SpectralResult(levels[0], int(dims[0]), bool(ok[0]), float(res[0]), relative, tol)
    if not result.converged:
        raise NoConvergence(
            f"f01 not converged to {tol:g} at dim {result.dim_used} "
            f"(residual {result.residual:.3g})",
            best=result,
        )
    return result


def _grid_levels(params, delta, phi_max, n_points, n_levels):
    x, h = np.linspace(-phi_max, phi_max, n_points, retstep=True)
    kin = 4.0 * params.e_c / h**2
    d = 2.0 * kin + 0.5 * params.e_l * (x + delta) ** 2 - params.e_j * np.cos(x)
    e = np.full(n_points - 1, -kin)
    w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, n_levels - 1))
    return w, v


def phase_grid_oracle(
    params,
    bias,
    n_levels: int = 2,
    phi_max: float | None = None,
    n_points: int = _GRID["n_points"],
    richardson: bool = True,
    relative: bool = True,
) -> np.ndarray:
    """Independent check of the spectrum by finite differences in phase space.

    Phase is discretized uniformly on ``[-phi_max, phi_max]`` with hard walls,
    and ``4 E_C n^2`` becomes the three-point second derivative. When
    ``richardson`` is set the levels are extrapolated from spacings ``h`` and
    ``2h`` (``n_points`` and ``(n_points + 1) / 2`` points), cancelling the
    leading ``h^2`` discretization error.

    If ``phi_max`` is omitted it is chosen so the inductive potential at the
    walls exceeds a bound on the highest requested level by ``margin_el * E_L``.
    """
    params = _check_params(params)
    delta = 2.0 * math.pi * _phi_value(bias)
    n_points = int(n_points)
    if n_points < 501 or n_points % 2 == 0:
        raise InvalidValue(f"n_points must be odd and >= 501, got {n_points}")
    top = (n_levels + 0.5) * params.plasma_ghz + params.e_j
    margin = _GRID["margin_el"] * params.e_l
    if phi_max is None:
        phi_max = abs(delta) + math.sqrt(2.0 * (top + margin + params.e_j) / params.e_l)
    wall = 0.5 * params.e_l * (phi_max - abs(delta)) ** 2 - params.e_j
    if phi_max <= abs(delta) or wall < top + 20.0 * params.e_l:
        raise GridTooSmall(f"phi_max={phi_max:g} leaves the inductive wall below the requested levels")

    w, v = _grid_levels(params, delta, phi_max, n_points, n_levels)
    edge = max(1, n_points // 100)
    mass = np.sum(v[:edge] ** 2, axis=0) + np.sum(v[-edge:] ** 2, axis=0)
    if np.max(mass) > _GRID["boundary_mass"]:
        raise GridTooSmall(f"wavefunction weight {np.max(mass):.2e} at the walls; increase phi_max")
    if richardson:
        coarse, _ = _grid_levels(params, delta, phi_max, (n_points + 1) // 2, n_levels)
        w = (4.0 * w - coarse) / 3.0
    return w - w[0] if relative else w


# --- lumped-element conversions -------------------------------------------

_E = constants.e
_H = constants.h


def e_c_from_capacitance(c_ff: float) -> float:
    """Charging energy E_C/h in GHz for a capacitance in fF."""
    c = check_positive_finite(c_ff, "capacitance") * 1e-15
    return _E**2 / (2.0 * _H * c) / 1e9


def capacitance_from_e_c(e_c_ghz: float) -> float:
    e_c = check_positive_finite(e_c_ghz, "e_c") * 1e9
    return _E**2 / (2.0 * _H * e_c) / 1e-15


def e_l_from_inductance(l_nh: float) -> float:
    """Inductive energy E_L/h in GHz for an inductance in nH."""
    ind = check_positive_finite(l_nh, "inductance") * 1e-9
    return (PHI0 / (2.0 * math.pi)) ** 2 / (_H * ind) / 1e9


def inductance_from_e_l(e_l_ghz: float) -> float:
    e_l = check_positive_finite(e_l_ghz, "e_l") * 1e9
    return (PHI0 / (2.0 * math.pi)) ** 2 / (_H * e_l) / 1e-9


def squares_from_inductance(l_nh: float, sheet_nh: float) -> float:
    return check_positive_finite(l_nh, "inductance") / check_positive_finite(sheet_nh, "sheet inductance")


def inductance_from_squares(squares: float, sheet_nh: float) -> float:
    return check_positive_finite(squares, "squares") * check_positive_finite(sheet_nh, "sheet inductance")


_CONVERSIONS = {
    "capacitance->e_c": e_c_from_capacitance,
    "e_c->capacitance": capacitance_from_e_c,
    "inductance->e_l": e_l_from_inductance,
    "e_l->inductance": inductance_from_e_l,
    "inductance->squares": squares_from_inductance,
    "squares->inductance": inductance_from_squares,
}


def convert_units(kind: str, value: float, aux: float | None = None) -> float:
    """Convert between energy scales and lumped-element values.

    ``kind`` is one of ``capacitance->e_c``, ``e_c->capacitance``,
    ``inductance->e_l``, ``e_l->inductance``, ``inductance->squares`` and
    ``squares->inductance``. Capacitance is in fF, inductance in nH, energies in
    GHz. The square conversions need the sheet inductance (nH per square) as
    ``aux``.
    """
    try:
        fn = _CONVERSIONS[kind]
    except KeyError:
        raise InvalidValue(f"unknown conversion {kind!r}; expected one of {sorted(_CONVERSIONS)}") from None
    if kind.endswith("squares") or kind.startswith("squares"):
        if aux is None:
            raise InvalidValue(f"{kind} needs the sheet inductance as aux")
        return fn(value, aux)
    return fn(value)
