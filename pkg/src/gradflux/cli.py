"""Command-line entry point: ``gradflux <command> [options]``.

Exit codes
----------
0  success
1  unexpected internal error
2  malformed input: bad flags, unreadable or invalid JSON/CSV, invalid values
3  eigen-solver did not converge
4  fit failed: no convergence, cannot seed, no decay, no peak
5  ambiguous cooldown flux, unsolvable design target or undefined T2E

Errors go to stderr as one line ``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import re
import sys

import numpy as np

from . import __version__
from .circuit import EnergyParams
from .coherence import DecayTrace, fit_echo, fit_t1
from .exceptions import (
    AmbiguousCooldownFlux,
    CannotSeed,
    FitFailed,
    GradfluxError,
    NoConvergence,
    NoDecay,
    NoPeak,
    SchemaError,
    UndefinedT2E,
    UnsolvableTarget,
)
from .fitting import PARAM_NAMES, FitConfig, Seed, SpectroscopyDataset, fit_spectrum, initial_guess, synth_dataset
from .geometry import (
    DesignCoefficients,
    FieldBias,
    GradiometerGeometry,
    LockState,
    design_crossings,
    design_solve,
    effective_area,
    multi_qubit_lock,
    parity_summary,
    trapped_fluxons,
)
from .spectrum import line_families, sweet_spot_field, write_curves_csv

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_FIT = 4
EXIT_DOMAIN = 5

_EXIT_FOR = (
    (NoConvergence, EXIT_NO_CONVERGENCE),
    ((FitFailed, CannotSeed, NoDecay, NoPeak), EXIT_FIT),
    ((AmbiguousCooldownFlux, UnsolvableTarget, UndefinedT2E), EXIT_DOMAIN),
)

_RANGE = re.compile(r"^\s*([^:]+):([^:]+):(\d+)\s*$")


class CliError(GradfluxError):
    category = "invalid-input"


def parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` -> inclusive linspace."""
    mt = _RANGE.match(text)
    if mt is None:
        raise CliError(f"field range must be start:stop:count, got {text!r}")
    try:
        start, stop = float(mt[1]), float(mt[2])
    except ValueError:
        raise CliError(f"field range must be start:stop:count, got {text!r}") from None
    count = int(mt[3])
    if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
        raise CliError(f"invalid field range {text!r}")
    return np.linspace(start, stop, count)


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{what} {path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ------------------------------------------------------------------


def cmd_simulate(args):
    params = EnergyParams.from_dict(_load_json(args.params, "params"))
    geom = GradiometerGeometry.from_dict(_load_json(args.geometry, "geometry"))
    lock = LockState(args.m)
    grid = parse_range(args.b)
    curves = line_families(params, geom, lock, grid, f_res=args.f_res_ghz, max_level=args.max_level, tol=args.tol)
    buf = io.StringIO()
    write_curves_csv(curves, buf)
    _emit(buf.getvalue(), args.out)
    if args.out:
        spot = sweet_spot_field(params, geom, lock)
        rows = {}
        for c in curves:
            key = f"{c.family}:{c.transition}"
            rows[key] = int(c.b_ext_ut.size)
        summary = {
            "m": lock.m,
            "parity": lock.parity,
            "a_eff_um2": effective_area(geom),
            "alpha": geom.alpha,
            "sweet_spot_b_ut": spot.b_ut,
            "zero_field_offset_phi0": spot.zero_field_offset,
            "field_insensitive": spot.field_insensitive,
            "rows": rows,
        }
        sys.stdout.write(_dump_json(summary))
    return EXIT_OK


def _seed_from_json(d):
    params = EnergyParams.from_dict(d)
    return Seed(params.e_j, params.e_c, params.e_l, float(d.get("a_eff_um2", 1.0)), float(d.get("alpha", 0.0)))


def cmd_fit_spectrum(args):
    data = SpectroscopyDataset.read_csv(args.data)
    data.validate()
    seed = _seed_from_json(_load_json(args.params, "params")) if args.params else initial_guess(data)
    cfg = FitConfig(f_res_ghz=args.f_res_ghz)
    if args.tol is not None:
        cfg.eigen_tol = args.tol
    result = fit_spectrum(data, seed, cfg)
    payload = result.to_json()
    payload["seed"] = {k: float(v) for k, v in zip(PARAM_NAMES, seed.vector())}
    _emit(_dump_json(payload), args.out)
    return EXIT_OK


def cmd_design(args):
    coeffs = DesignCoefficients.from_dict(_load_json(args.coeffs, "coefficients")) if args.coeffs else None
    if args.target == "all":
        payload = {"crossings_um": design_crossings(coeffs)}
    else:
        payload = {"target": args.target, "x_um": design_solve(args.target, coeffs)}
    _emit(_dump_json(payload), args.out)
    return EXIT_OK


def cmd_lock(args):
    raw = _load_json(args.geometry, "geometry")
    if isinstance(raw, list):
        geoms = [GradiometerGeometry.from_dict(g) for g in raw]
        states = multi_qubit_lock(args.b_cd_ut, geoms, tol=args.tol)
        devices = [
            s.to_dict() if isinstance(s, LockState) else {"m": None, "parity": None, "error": s.category}
            for s in states
        ]
        payload = {"devices": devices, "summary": parity_summary(states)}
    else:
        geom = GradiometerGeometry.from_dict(raw)
        payload = trapped_fluxons(FieldBias(b_cd=args.b_cd_ut), geom, tol=args.tol).to_dict()
    _emit(_dump_json(payload), args.out)
    return EXIT_OK


def cmd_fit_decay(args):
    trace = DecayTrace.read_csv(args.data)
    if args.kind == "t1":
        res = fit_t1(trace)
        payload = {"t1_us": res.t1, "sigmas": {"t1_us": res.t1_sigma}, "reduced_chi2": res.reduced_chi2}
    else:
        rates = fit_echo(trace, at_sweet_spot=args.sweet_spot)
        payload = {
            "gamma0_per_us": rates.gamma0,
            "gamma_phi_per_us": rates.gamma_phi,
            "t2e_us": rates.t2e,
            "sigmas": {
                "gamma0_per_us": rates.sigmas["gamma0"],
                "gamma_phi_per_us": rates.sigmas["gamma_phi"],
                "t2e_us": rates.sigmas["t2e"],
            },
            "reduced_chi2": rates.reduced_chi2,
            "model_mismatch": rates.model_mismatch,
        }
    _emit(_dump_json(payload), args.out)
    return EXIT_OK


def cmd_synth(args):
    params = EnergyParams.from_dict(_load_json(args.params, "params"))
    geom = GradiometerGeometry.from_dict(_load_json(args.geometry, "geometry"))
    grid = parse_range(args.b)
    locks = args.m if args.m else [0, 1]
    transitions = [t.strip() for t in args.transitions.split(",") if t.strip()]
    data = synth_dataset(
        params, geom, locks, grid, sigma=args.sigma_ghz, seed=args.seed, transitions=transitions, f_res=args.f_res_ghz
    )
    _emit(data.to_csv_string(), args.out)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gradflux", description="Gradiometric fluxonium simulation, design and fitting.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="transition line families versus applied field (CSV)")
    s.add_argument("--params", required=True, help="energy parameter JSON")
    s.add_argument("--geometry", required=True, help="geometry JSON")
    s.add_argument("--m", type=int, required=True, help="trapped fluxon number")
    s.add_argument("--b", required=True, help="field range start:stop:count in µT")
    s.add_argument("--f-res-ghz", type=float, default=None)
    s.add_argument("--max-level", type=int, default=3)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--out", help="CSV path; the summary JSON then goes to stdout")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit-spectrum", help="joint fit of spectroscopy CSV")
    s.add_argument("--data", required=True)
    s.add_argument("--params", help="optional seed JSON (may carry a_eff_um2 and alpha)")
    s.add_argument("--f-res-ghz", type=float, default=None)
    s.add_argument("--tol", type=float, default=None, help="eigen-solver tolerance during the fit")
    s.add_argument("--seed", type=int, default=None, help="accepted for uniformity; the fit is deterministic")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit_spectrum)

    s = sub.add_parser("design", help="zero crossings of the asymmetry design models")
    s.add_argument("--target", default="all", choices=["alpha-zero", "aeff-zero", "delta-l-zero", "delta-a-zero", "all"])
    s.add_argument("--coeffs", help="design-coefficient JSON; defaults are built in")
    s.add_argument("--out")
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("lock", help="trapped fluxons after a cooldown in a field")
    s.add_argument("--b-cd-ut", type=float, required=True)
    s.add_argument("--geometry", required=True, help="geometry JSON object, or a list of them")
    s.add_argument("--tol", type=float, default=1e-3, help="half-integer ambiguity window in flux quanta")
    s.add_argument("--out")
    s.set_defaults(func=cmd_lock)

    s = sub.add_parser("fit-decay", help="T1 or Hahn-echo fit of a trace CSV")
    s.add_argument("--kind", required=True, choices=["t1", "echo"])
    s.add_argument("--data", required=True)
    s.add_argument("--sweet-spot", action="store_true", help="echo: pure exponential model")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit_decay)

    s = sub.add_parser("synth", help="synthetic spectroscopy dataset (CSV)")
    s.add_argument("--params", required=True)
    s.add_argument("--geometry", required=True)
    s.add_argument("--m", type=int, action="append", help="lock state; repeat for several (default 0 and 1)")
    s.add_argument("--b", required=True, help="field range start:stop:count in µT")
    s.add_argument("--sigma-ghz", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--transitions", default="0-1", help="comma-separated labels")
    s.add_argument("--f-res-ghz", type=float, default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)
    return p


_VALUE_FLAGS = {"--b", "--b-cd-ut", "--m", "--f-res-ghz", "--tol", "--sigma-ghz", "--seed"}


def _join_negative_values(argv):
    # argparse treats "-2:2:201" as an option; glue such values to their flag
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
            else:
                out.extend([tok, nxt])
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        return args.func(args)
    except GradfluxError as exc:
        code = EXIT_INPUT
        for types, c in _EXIT_FOR:
            if isinstance(exc, types):
                code = c
                break
        sys.stderr.write(f"error: {exc.category}: {exc}\n")
        return code
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: invalid-input: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"error: internal: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
