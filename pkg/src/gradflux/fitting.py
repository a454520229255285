"""Parameter extraction from spectroscopy data.

The joint spectrum fit shares (E_J, E_C, E_L, A_eff, alpha) across all lock
states; the fluxon number of each record is fixed by the data. A spectrum alone
only fixes the product sgn(A_eff) * alpha, so the sign of A_eff comes from the
seed (positive for the built-in heuristic).
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit, least_squares

from ._config import PHI0, UM2_UT, defaults
from ._validation import check_1d
from .circuit import EnergyParams, _batch_at_dim, _check_params, _reduce, batch_levels
from .exceptions import CannotSeed, FitFailed, InvalidValue, NoConvergence, NoPeak, SchemaError
from .geometry import GradiometerGeometry, LockState, effective_area

_FIT = defaults()["fit"]
_EIG = defaults()["eigen"]

PARAM_NAMES = ("e_j", "e_c", "e_l", "a_eff", "alpha")
CSV_HEADER = ("b_ext_ut", "freq_ghz", "sigma_ghz", "m", "transition", "cooldown")
_FLUX_PER_FIELD = UM2_UT / PHI0  # flux quanta per (µm² · µT)

_LABEL = re.compile(r"^(?:res(?P<res>[+-]))?(?P<i>\d+)-(?P<j>\d+)(?:/(?P<n>\d+))?$")


def parse_transition(label: str):
    """Split a label such as ``0-1``, ``0-2/2`` or ``res-0-1`` into
    ``(i, j, photons, resonator_sign)``."""
    mt = _LABEL.match(label.strip())
    if mt is None:
        raise SchemaError(f"unrecognised transition label {label!r}")
    i, j = int(mt["i"]), int(mt["j"])
    if not i < j:
        raise SchemaError(f"transition {label!r}: need i < j")
    n = int(mt["n"]) if mt["n"] else 1
    if n < 1:
        raise SchemaError(f"transition {label!r}: photon number must be >= 1")
    sign = {"+": 1, "-": -1, None: 0}[mt["res"]]
    return i, j, n, sign


@dataclass
class SpectroscopyDataset:
    b_ext_ut: np.ndarray
    freq_ghz: np.ndarray
    sigma_ghz: np.ndarray
    m: np.ndarray
    transition: tuple = ()
    cooldown: tuple = ()

    def __post_init__(self):
        self.b_ext_ut = np.asarray(self.b_ext_ut, dtype=float)
        self.freq_ghz = np.asarray(self.freq_ghz, dtype=float)
        n = self.b_ext_ut.size
        self.sigma_ghz = np.broadcast_to(np.asarray(self.sigma_ghz, dtype=float), (n,)).copy()
        m = np.broadcast_to(np.asarray(self.m), (n,))
        if not np.all(np.asarray(m, dtype=float) == np.round(np.asarray(m, dtype=float))):
            raise SchemaError("fluxon numbers must be integers")
        self.m = np.asarray(m, dtype=int).copy()
        self.transition = tuple(self.transition) if len(self.transition) else ("0-1",) * n
        self.cooldown = tuple(str(c) for c in self.cooldown) if len(self.cooldown) else ("0",) * n

    def __len__(self):
        return self.b_ext_ut.size

    def validate(self, min_per_lock: int = 3):
        n = len(self)
        for name in ("freq_ghz", "sigma_ghz", "m"):
            if getattr(self, name).shape != (n,):
                raise SchemaError(f"{name} length does not match b_ext_ut")
        if len(self.transition) != n or len(self.cooldown) != n:
            raise SchemaError("transition/cooldown length does not match b_ext_ut")
        if not (np.all(np.isfinite(self.b_ext_ut)) and np.all(np.isfinite(self.freq_ghz))):
            raise SchemaError("non-finite field or frequency")
        if not np.all((self.sigma_ghz > 0) & np.isfinite(self.sigma_ghz)):
            raise SchemaError("sigma_ghz must be positive")
        for label in set(self.transition):
            parse_transition(label)
        ms, counts = np.unique(self.m, return_counts=True)
        if n == 0 or np.any(counts < min_per_lock):
            raise SchemaError(f"need at least {min_per_lock} records per lock state, got {dict(zip(ms.tolist(), counts.tolist()))}")
        return self

    def take(self, idx):
        idx = np.asarray(idx)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return SpectroscopyDataset(
            self.b_ext_ut[idx],
            self.freq_ghz[idx],
            self.sigma_ghz[idx],
            self.m[idx],
            tuple(self.transition[k] for k in idx),
            tuple(self.cooldown[k] for k in idx),
        )

    @classmethod
    def read_csv(cls, path_or_fh, default_sigma: float = _FIT["default_sigma_ghz"]):
        if isinstance(path_or_fh, (str, bytes)) or hasattr(path_or_fh, "__fspath__"):
            with open(path_or_fh, encoding="utf-8", newline="") as fh:
                return cls.read_csv(fh, default_sigma)
        reader = csv.reader(path_or_fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty dataset file") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise SchemaError(f"dataset header must be {','.join(CSV_HEADER)}")
        cols = {k: [] for k in CSV_HEADER}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise SchemaError(f"line {lineno}: expected {len(CSV_HEADER)} fields")
            try:
                cols["b_ext_ut"].append(float(row[0]))
                cols["freq_ghz"].append(float(row[1]))
                cols["sigma_ghz"].append(float(row[2]) if row[2].strip() else default_sigma)
                cols["m"].append(int(row[3]))
            except ValueError as exc:
                raise SchemaError(f"line {lineno}: {exc}") from None
            cols["transition"].append(row[4].strip())
            cols["cooldown"].append(row[5].strip())
        return cls(
            cols["b_ext_ut"], cols["freq_ghz"], cols["sigma_ghz"], cols["m"], cols["transition"], cols["cooldown"]
        )

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for k in range(len(self)):
            w.writerow(
                (
                    repr(float(self.b_ext_ut[k])),
                    repr(float(self.freq_ghz[k])),
                    repr(float(self.sigma_ghz[k])),
                    int(self.m[k]),
                    self.transition[k],
                    self.cooldown[k],
                )
            )

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


@dataclass
class FitResult:
    estimates: dict
    sigmas: dict
    covariance: np.ndarray
    chi2: float
    n_points: int
    converged: bool
    residuals: np.ndarray
    at_bound: list = field(default_factory=list)
    seed: dict = field(default_factory=dict)
    trace: list = field(default_factory=list, repr=False)

    @property
    def params(self) -> EnergyParams:
        e = self.estimates
        return EnergyParams(e["e_j"], e["e_c"], e["e_l"])

    def to_json(self) -> dict:
        def clean(v):
            return float(v) if math.isfinite(v) else None

        return {
            "estimates": {k: clean(self.estimates[k]) for k in PARAM_NAMES},
            "sigmas": {k: clean(self.sigmas[k]) for k in PARAM_NAMES},
            "covariance": [[clean(v) for v in row] for row in self.covariance],
            "chi2": clean(self.chi2),
            "n_points": int(self.n_points),
            "converged": bool(self.converged),
            "at_bound": list(self.at_bound),
        }


@dataclass
class FitConfig:
    max_iter: int = _FIT["max_iter"]
    eigen_tol: float = _FIT["eigen_tol"]
    rel_step: float = _FIT["rel_step"]
    f_res_ghz: float | None = None


# --- forward model -----------------------------------------------------------


def _parsed(transitions):
    return [parse_transition(t) for t in transitions]


def _phi_tot(theta, b, m):
    a_eff, alpha = theta[3], theta[4]
    return _reduce(a_eff * _FLUX_PER_FIELD * b + m * (1.0 + alpha) / 2.0)


def _combine(levels, parsed, f_res):
    out = np.empty(levels.shape[0])
    for k, (i, j, n, sign) in enumerate(parsed):
        f = (levels[k, j] - levels[k, i]) / n
        if sign:
            if f_res is None:
                raise SchemaError("resonator-mediated transitions need f_res_ghz")
            f = f + sign * f_res
        out[k] = f
    return out


def model_frequencies(theta, b, m, transitions, f_res=None, tol=_EIG["tol"], dim=None):
    """Predicted frequencies for parameter vector (E_J, E_C, E_L, A_eff, alpha).

    With ``dim`` given the basis size is fixed; otherwise each point is
    converged to ``tol``.
    """
    theta = np.asarray(theta, dtype=float)
    parsed = _parsed(transitions)
    n_levels = max(p[1] for p in parsed) + 1
    params = EnergyParams(*theta[:3])
    phi = _phi_tot(theta, np.asarray(b, float), np.asarray(m))
    if dim is None:
        levels, _, res, ok = batch_levels(params, phi, n_levels=max(n_levels, 2), tol=tol, reduce_period=False)
        if not np.all(ok):
            raise NoConvergence(f"model not converged (max residual {np.max(res):.3g})")
    else:
        levels = _batch_at_dim(params, phi, dim, max(n_levels, 2))
        levels = levels - levels[:, :1]
    return _combine(levels, parsed, f_res)


def _required_dim(theta, b, m, transitions, tol):
    """Smallest basis whose levels already agree with the next doubling to ``tol``."""
    n_levels = max(max(p[1] for p in _parsed(transitions)) + 1, 2)
    params = EnergyParams(*theta[:3])
    _, dims, res, ok = batch_levels(params, _phi_tot(theta, b, m), n_levels=n_levels, tol=tol, reduce_period=False)
    if not np.all(ok):
        raise NoConvergence(f"spectrum not converged at the fit point (max residual {np.max(res):.3g})")
    return max(int(np.max(dims)) // 2, _EIG["dim_start"])


# --- Lorentzian --------------------------------------------------------------


def lorentzian(x, x0, gamma, amplitude, offset):
    """offset + A (gamma/2)^2 / ((x - x0)^2 + (gamma/2)^2); gamma is the FWHM."""
    hw2 = (0.5 * gamma) ** 2
    return offset + amplitude * hw2 / ((x - x0) ** 2 + hw2)


@dataclass
class LorentzianFit:
    center: float
    center_sigma: float
    width: float
    amplitude: float
    offset: float
    residual_rms: float


def fit_lorentzian(freq, response) -> LorentzianFit:
    """Least-squares Lorentzian line fit of a single spectroscopy trace."""
    x = check_1d(freq, "freq", min_len=6)
    y = check_1d(response, "response", min_len=6)
    if x.size != y.size:
        raise InvalidValue("freq and response lengths differ")
    if np.ptp(x) == 0:
        raise InvalidValue("degenerate frequency axis")
    order = np.argsort(x)
    x, y = x[order], y[order]
    if np.ptp(y) == 0:
        raise NoPeak("flat trace")

    offset0 = float(np.median(y))
    k = int(np.argmax(np.abs(y - offset0)))
    amp0 = float(y[k] - offset0)
    above = np.abs(y - offset0) >= 0.5 * abs(amp0)
    width0 = max(float(np.ptp(x[above])), float(np.min(np.diff(x))))
    p0 = (x[k], width0, amp0, offset0)
    scale = np.ptp(x)
    try:
        popt, pcov = curve_fit(
            lorentzian,
            x,
            y,
            p0=p0,
            bounds=([x[0], 0.0, -np.inf, -np.inf], [x[-1], 10 * scale, np.inf, np.inf]),
            x_scale=[scale, width0, abs(amp0), abs(amp0)],
            ftol=1e-15,
            xtol=1e-15,
            gtol=1e-15,
            max_nfev=2000,
        )
    except (RuntimeError, ValueError) as exc:
        raise NoPeak(f"Lorentzian fit failed: {exc}") from None
    resid = y - lorentzian(x, *popt)
    rms = float(np.sqrt(np.mean(resid**2)))
    if abs(popt[2]) < 3 * rms:
        raise NoPeak(f"amplitude {popt[2]:.3g} below 3x residual rms {rms:.3g}")
    sig = float(np.sqrt(pcov[0, 0])) if np.isfinite(pcov[0, 0]) else math.inf
    return LorentzianFit(float(popt[0]), sig, float(abs(popt[1])), float(popt[2]), float(popt[3]), rms)


# --- seeding -----------------------------------------------------------------

# Typical E_J/E_C and E_L/E_C, used when only one lock parity is available.
_TYPICAL_RATIOS = (2.2, 0.45)
_CURV_STEP = 0.01


@dataclass
class Seed:
    e_j: float
    e_c: float
    e_l: float
    a_eff: float
    alpha: float
    partial: bool = False

    def vector(self):
        return np.array([self.e_j, self.e_c, self.e_l, self.a_eff, self.alpha])

    def to_dict(self):
        return {k: float(getattr(self, k)) for k in PARAM_NAMES}


def _extremum(b, f, kind):
    order = np.argsort(b, kind="stable")
    b, f = b[order], f[order]
    k = int(np.argmin(f) if kind == "min" else np.argmax(f))
    lo, hi = max(0, k - 3), min(b.size, k + 4)
    if hi - lo < 3:
        return b[k], f[k], None
    bw, fw = b[lo:hi], f[lo:hi]
    c2, c1, c0 = np.polyfit(bw - b[k], fw, 2)
    curv = 2.0 * c2
    if (kind == "min" and curv <= 0) or (kind == "max" and curv >= 0):
        return b[k], f[k], None
    bv = -c1 / (2 * c2)
    if not bw[0] - b[k] <= bv <= bw[-1] - b[k]:
        return b[k], f[k], abs(curv)
    return b[k] + bv, c0 - c1**2 / (4 * c2), abs(curv)


def _sweet_observables(e_j, e_c, e_l):
    """f01 and |d2 f01/dPhi^2| at both sweet spots, arrays broadcast over inputs."""
    d = _CURV_STEP
    pts = np.array([0.0, d, 0.5, 0.5 + d])
    out = []
    for ej, ec, el in np.broadcast(e_j, e_c, e_l):
        lv = _batch_at_dim(EnergyParams(ej, ec, el), pts, 40, 2)
        f = lv[:, 1] - lv[:, 0]
        # even symmetry about both points: f(x - d) = f(x + d)
        out.append((f[0], 2 * abs(f[1] - f[0]) / d**2, f[2], 2 * abs(f[3] - f[2]) / d**2))
    return np.array(out)


def _ratios_from_observables(freq_ratio, curv_ratio):
    """Find (E_J/E_C, E_L/E_C) matching f01(0)/f01(1/2) and the curvature ratio."""
    u = np.geomspace(0.3, 12.0, 20)
    v = np.geomspace(0.05, 2.5, 20)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    obs = _sweet_observables(uu.ravel(), 1.0, vv.ravel())
    target = np.log([freq_ratio, curv_ratio])
    model = np.log(np.column_stack([obs[:, 0] / obs[:, 2], obs[:, 3] / obs[:, 1]]))
    k = int(np.argmin(np.sum((model - target) ** 2, axis=1)))
    x0 = np.log([uu.ravel()[k], vv.ravel()[k]])

    def resid(x):
        o = _sweet_observables(math.exp(x[0]), 1.0, math.exp(x[1]))[0]
        return np.log([o[0] / o[2], o[3] / o[1]]) - target

    sol = least_squares(resid, x0, bounds=(np.log([0.05, 0.01]), np.log([50.0, 10.0])), xtol=1e-10)
    return math.exp(sol.x[0]), math.exp(sol.x[1])


def initial_guess(data: SpectroscopyDataset) -> Seed:
    """Deterministic parameter seed from the 0-1 line.

    The odd-m (pi-locked) minimum and the even-m (0-locked) maximum, together
    with the ratio of their curvatures versus field, fix E_J/E_C and E_L/E_C;
    the absolute scale follows from the minimum frequency since the spectrum
    scales linearly with the energies. The field curvature then gives |A_eff|,
    and the field position of the minimum gives alpha. With a single parity the
    energy ratios fall back to typical values and the seed is marked partial.
    """
    if len(data) == 0:
        raise CannotSeed("empty dataset")
    main = np.array([t.strip() == "0-1" for t in data.transition])
    if main.sum() < 3:
        raise CannotSeed("need at least three 0-1 records to seed")
    b, f, m = data.b_ext_ut[main], data.freq_ghz[main], data.m[main]
    odd = m % 2 == 1
    groups = {}
    if odd.sum() >= 3:
        groups["pi"] = _extremum(b[odd], f[odd], "min")
    if (~odd).sum() >= 3:
        groups["zero"] = _extremum(b[~odd], f[~odd], "max")
    if not groups:
        raise CannotSeed("need at least three 0-1 records in one lock parity")

    partial = len(groups) < 2 or any(g[2] is None for g in groups.values())
    if not partial:
        (_, f_pi, c_pi), (_, f_0, c_0) = groups["pi"], groups["zero"]
        if f_0 <= f_pi:
            partial = True
        else:
            u, v = _ratios_from_observables(f_0 / f_pi, c_pi / c_0)
    if partial:
        u, v = _TYPICAL_RATIOS
    obs1 = _sweet_observables(u, 1.0, v)[0]
    key = "pi" if "pi" in groups else "zero"
    b_v, f_v, c_b = groups[key]
    f_unit, c_unit = (obs1[2], obs1[3]) if key == "pi" else (obs1[0], obs1[1])
    e_c = f_v / f_unit
    c_phi = c_unit * e_c

    if c_b is None:
        # no usable curvature: assume the data span about a tenth of a flux quantum
        a_eff = 0.1 / (_FLUX_PER_FIELD * max(np.ptp(b), 1e-12))
    else:
        a_eff = math.sqrt(c_b / c_phi) / _FLUX_PER_FIELD

    m_v = m[odd] if key == "pi" else m[~odd]
    m_ref = int(np.max(np.abs(m_v))) if key == "zero" else int(m_v[np.argmin(f[odd])])
    if m_ref == 0:
        alpha = 0.0
    else:
        shift = a_eff * _FLUX_PER_FIELD * b_v
        alpha = float(np.clip(-2.0 * shift / m_ref, -0.5, 0.5))
    return Seed(u * e_c, e_c, v * e_c, a_eff, alpha, partial)


# --- joint fit ---------------------------------------------------------------

_LOWER = np.array([1e-9, 1e-9, 1e-9, -np.inf, -1 + 1e-12])
_UPPER = np.array([np.inf, np.inf, np.inf, np.inf, 1 - 1e-12])
_STEP_FLOOR = np.array([1e-3, 1e-3, 1e-3, 1e-2, 1e-3])


def _covariance(jac, chi2, dof):
    p = jac.shape[1]
    norms = np.linalg.norm(jac, axis=0)
    free = norms > 1e-12 * max(np.max(norms), 1e-300)
    cov = np.zeros((p, p))
    if free.any():
        _, s, vt = np.linalg.svd(jac[:, free], full_matrices=False)
        good = s > np.finfo(float).eps * max(jac.shape) * s[0]
        inv = np.where(good, 1.0 / np.where(good, s, 1.0) ** 2, np.inf)
        sub = (vt.T * inv) @ vt if good.all() else np.full((free.sum(),) * 2, np.inf)
        cov[np.ix_(free, free)] = sub
    if dof > 0:
        with np.errstate(invalid="ignore"):
            cov = np.where(np.isinf(cov), cov, cov * (chi2 / dof))
    cov[~free, ~free] = np.inf
    return cov


def fit_spectrum(data: SpectroscopyDataset, seed=None, config: FitConfig | None = None) -> FitResult:
    """Joint weighted least-squares fit of (E_J, E_C, E_L, A_eff, alpha).

    Minimises sum(((f_model - f_data) / sigma)^2) with a bounded trust-region
    solver and a forward-difference Jacobian. Covariance is (J^T J)^-1 at the
    optimum, scaled by the reduced chi-square; parameters the data cannot
    constrain get infinite variance.
    """
    config = config or FitConfig()
    data.validate()
    if seed is None:
        seed = initial_guess(data)
    x0 = seed.vector() if isinstance(seed, Seed) else np.asarray(
        [seed[k] for k in PARAM_NAMES] if isinstance(seed, dict) else seed, dtype=float
    )
    if x0.shape != (5,) or not np.all(np.isfinite(x0)):
        raise InvalidValue("seed must hold five finite values")
    x0 = np.clip(x0, _LOWER + 1e-9, _UPPER - 1e-9)

    b, m, f, sig = data.b_ext_ut, data.m, data.freq_ghz, data.sigma_ghz
    labels = data.transition
    parsed = _parsed(labels)
    f_res = config.f_res_ghz
    if any(p[3] for p in parsed) and f_res is None:
        raise SchemaError("resonator-mediated transitions need f_res_ghz")
    n_levels = max(max(p[1] for p in parsed) + 1, 2)
    trace = []

    def model(theta, dim):
        params = EnergyParams(*theta[:3])
        lv = _batch_at_dim(params, _phi_tot(theta, b, m), dim, n_levels)
        return _combine(lv - lv[:, :1], parsed, f_res)

    def run(start, dim):
        def resid(theta):
            r = (model(theta, dim) - f) / sig
            trace.append(float(r @ r))
            return r

        def jac(theta):
            r0 = resid(theta)
            trace.pop()
            J = np.empty((r0.size, theta.size))
            for k in range(theta.size):
                h = config.rel_step * max(abs(theta[k]), _STEP_FLOOR[k])
                if theta[k] + h > _UPPER[k]:
                    h = -h
                t = theta.copy()
                t[k] += h
                J[:, k] = ((model(t, dim) - f) / sig - r0) / h
            return J

        sol = least_squares(
            resid,
            start,
            jac=jac,
            bounds=(_LOWER, _UPPER),
            method="trf",
            x_scale="jac",
            ftol=1e-15,
            xtol=1e-15,
            gtol=1e-15,
            max_nfev=config.max_iter,
        )
        return sol, jac

    dim = _required_dim(x0, b, m, labels, config.eigen_tol)
    for _ in range(4):
        sol, jac = run(x0, dim)
        need = _required_dim(sol.x, b, m, labels, config.eigen_tol)
        if need <= dim:
            break
        dim, x0 = need, sol.x
    if sol.status == 0:
        raise FitFailed(f"no convergence after {config.max_iter} evaluations", trace=trace)
    if sol.status < 0:
        raise FitFailed(f"optimizer error: {sol.message}", trace=trace)

    theta = sol.x
    r = (model(theta, dim) - f) / sig
    chi2 = float(r @ r)
    J = jac(theta)
    cov = _covariance(J, chi2, f.size - theta.size)
    sigmas = np.sqrt(np.diag(cov))
    at_bound = [
        PARAM_NAMES[k]
        for k in range(5)
        if (np.isfinite(_LOWER[k]) and theta[k] - _LOWER[k] <= 1e-8 * max(1.0, abs(_LOWER[k])))
        or (np.isfinite(_UPPER[k]) and _UPPER[k] - theta[k] <= 1e-8)
    ]
    seed_dict = {k: float(v) for k, v in zip(PARAM_NAMES, x0)}
    return FitResult(
        estimates=dict(zip(PARAM_NAMES, map(float, theta))),
        sigmas=dict(zip(PARAM_NAMES, map(float, sigmas))),
        covariance=cov,
        chi2=chi2,
        n_points=int(f.size),
        converged=True,
        residuals=r * sig,
        at_bound=at_bound,
        seed=seed_dict,
        trace=trace,
    )


def synth_dataset(
    params,
    geom: GradiometerGeometry,
    locks,
    field_grid,
    sigma: float = 0.0,
    seed: int | None = None,
    transitions=("0-1",),
    f_res: float | None = None,
    tol: float = _EIG["tol"],
) -> SpectroscopyDataset:
    """Synthetic spectroscopy records: forward model plus i.i.d. Gaussian noise.

    Records are ordered by lock, then transition, then field. The stored
    per-point uncertainty is ``sigma`` (or the 1 MHz default when noise-free).
    """
    params = _check_params(params)
    if not sigma >= 0:
        raise InvalidValue(f"sigma must be >= 0, got {sigma!r}")
    b = check_1d(field_grid, "field_grid")
    theta = np.array([params.e_j, params.e_c, params.e_l, effective_area(geom), geom.alpha])
    bb, mm, tt, cc = [], [], [], []
    for idx, lock in enumerate(locks):
        mval = lock.m if isinstance(lock, LockState) else int(lock)
        for t in transitions:
            bb.append(b)
            mm.append(np.full(b.size, mval))
            tt.extend([t] * b.size)
            cc.extend([str(idx)] * b.size)
    bb = np.concatenate(bb)
    mm = np.concatenate(mm)
    freq = model_frequencies(theta, bb, mm, tt, f_res=f_res, tol=tol)
    rng = np.random.default_rng(seed)
    if sigma > 0:
        freq = freq + rng.normal(0.0, sigma, size=freq.size)
    stored = sigma if sigma > 0 else _FIT["default_sigma_ghz"]
    return SpectroscopyDataset(bb, freq, stored, mm, tt, cc)
