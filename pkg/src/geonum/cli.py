"""Command-line front end.

Every subcommand accepts the common flags --n --seed --trials --output
--format --threads --config. A config file holds ``key = value`` lines using
the flag names; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__
from ._util import atomic_write_text, default_threads, fmt_float
from .enumeration import Ball, Box, QuadShell, count_region, min_height_solution
from .experiments import (dilates_experiment, error_term_ensemble, geometric_grid, records_csv,
                          sequences_experiment, small_values_ensemble)
from .forms import QuadraticForm
from .lattice import DEFAULT_Q, Lattice, LatticeSampler
from .siegel import (binomial_stderr, c_n, chebyshev_bound, minkowski_bound, sample_counts,
                     symmetrization_radius, SampleStats)
from .volume import c_q_estimate, estimate_volume


class UsageError(Exception):
    """Invalid or missing parameters (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


@dataclass(frozen=True)
class P:
    type: Callable
    default: Any = None
    required: bool = False
    choices: tuple = ()
    help: str = ""


COMMON = {
    "n": P(int, help="dimension"),
    "seed": P(int, 0, help="master seed"),
    "trials": P(int, help="number of random lattices / trials"),
    "output": P(str, help="output file or directory"),
    "format": P(str, "json", choices=("csv", "json")),
    "threads": P(int, None, help="worker threads (default: all cores)"),
}

SAMPLER = {
    "sampler": P(str, "gm", choices=("gm", "gaussian")),
    "q": P(int, DEFAULT_Q, help="prime modulus of the q-ary sampler"),
}

REGION = {
    "region": P(str, required=True, choices=("ball", "shell", "box")),
    "T": P(float, help="ball radius / shell norm bound"),
    "form_file": P(str, help="JSON quadratic form (shell regions)"),
    "a": P(float), "b": P(float),
    "side": P(_floats, help="comma-separated box side lengths"),
}

COMMANDS: dict[str, dict[str, P]] = {
    "sample-lattice": {**SAMPLER},
    "count": {"basis_file": P(str, required=True), **REGION},
    "small-values": {"form_file": P(str, required=True), "eps": P(float, required=True),
                     "mode": P(str, "two_sided", choices=("two_sided", "positive_side")),
                     "tmax": P(float, 1000.0)},
    "volume": {**REGION, "samples": P(int, 10**6)},
    "cq": {"form_file": P(str, required=True), "a": P(float, required=True), "b": P(float, required=True),
           "tgrid": P(_floats, required=True), "samples": P(int, 10**6)},
    "siegel-stats": {**SAMPLER, "volume": P(float, required=True)},
    "minkowski": {**SAMPLER, "volume": P(float, required=True)},
    "chebyshev": {**SAMPLER, "volume": P(float, required=True), "M": P(float, required=True)},
    "small-values-exp": {"forms": P(int, 10), "jmax": P(int, 10),
                         "mode": P(str, "two_sided", choices=("two_sided", "positive_side")),
                         "tmax": P(float, 2000.0)},
    "error-term-exp": {"forms": P(int, 10), "a": P(float, 0.0), "b": P(float, 1.0),
                       "tgrid": P(_floats, "10,14.142135623730951,20,28.284271247461902,40,56.568542494923804,80"),
                       "samples": P(int, 10**6)},
    "dilates-exp": {**SAMPLER, "tgrid": P(_floats, "5,7,9,11,13,15,17,19,21,23,25"), "delta": P(float, 0.5)},
    "sequences-exp": {**SAMPLER, "kmax": P(int, 40), "f_power": P(float, 1.0)},
}

NEEDS_N3 = {"siegel-stats", "minkowski", "chebyshev", "small-values-exp", "error-term-exp", "sequences-exp"}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geonum", description="Geometry-of-numbers experiments")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    for name, spec in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        for key, p in {**COMMON, **spec}.items():
            kw: dict[str, Any] = {"default": None, "help": p.help or None, "dest": key}
            if p.type is not _floats:
                kw["type"] = p.type
            if p.choices:
                kw["choices"] = p.choices
            sp.add_argument("--" + key.replace("_", "-"), **kw)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            k, v = line.split("=", 1)
            out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def resolve(ns: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults < config file < flags, then check required keys and choices."""
    spec = {**COMMON, **COMMANDS[ns.command]}
    file_cfg = read_config(ns.config) if ns.config else {}
    unknown = set(file_cfg) - set(spec)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    cfg: dict[str, Any] = {}
    for key, p in spec.items():
        val = getattr(ns, key, None)
        if val is None and key in file_cfg:
            val = file_cfg[key]
        if val is None and p.default is not None:
            val = p.default
        if val is None:
            if p.required:
                raise UsageError(f"missing required flag --{key.replace('_', '-')}")
            cfg[key] = None
            continue
        try:
            val = p.type(val) if not isinstance(val, (list, tuple)) else val
        except (TypeError, ValueError):
            raise UsageError(f"invalid value for --{key.replace('_', '-')}: {val!r}") from None
        if p.choices and val not in p.choices:
            raise UsageError(f"--{key.replace('_', '-')} must be one of {', '.join(p.choices)}")
        cfg[key] = val
    cfg["command"] = ns.command
    if cfg["threads"] is None:
        cfg["threads"] = default_threads()
    return cfg


def _require(cfg, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise UsageError(f"missing required flag --{k.replace('_', '-')}")


def _positive(cfg, *keys):
    for k in keys:
        if cfg.get(k) is not None and not cfg[k] > 0:
            raise UsageError(f"--{k.replace('_', '-')} must be positive")


def validate(cfg: dict[str, Any]) -> None:
    cmd = cfg["command"]
    if cmd in NEEDS_N3 or cmd in ("sample-lattice", "dilates-exp"):
        _require(cfg, "n")
    n = cfg.get("n")
    if cmd in NEEDS_N3 and n < 3:
        raise UsageError(f"{cmd} requires n >= 3 (got --n {n})")
    if cmd == "dilates-exp" and n < 4:
        raise UsageError(f"dilates-exp requires n >= 4 (got --n {n})")
    if cmd == "sample-lattice" and n < 2:
        raise UsageError("sample-lattice requires n >= 2")
    if n is not None and n > 10:
        raise UsageError("dimensions above 10 are not supported")
    if cmd in ("siegel-stats", "minkowski", "chebyshev", "dilates-exp", "sequences-exp"):
        _require(cfg, "trials")
    if cmd in ("siegel-stats", "chebyshev"):
        if cfg["trials"] < 2:
            raise UsageError("--trials must be >= 2")
    if cmd == "minkowski" and cfg["trials"] < 100:
        raise UsageError("minkowski requires --trials >= 100")
    _positive(cfg, "trials", "volume", "M", "eps", "tmax", "T", "samples", "forms", "kmax", "threads", "delta")
    if cfg.get("sampler") == "gm":
        try:
            LatticeSampler("gm", max(n or 2, 2), cfg["q"])
        except ValueError as e:
            raise UsageError(str(e)) from None
    if cmd in ("count", "volume"):
        region = cfg["region"]
        if region in ("ball", "shell"):
            _require(cfg, "T")
        if region == "shell":
            _require(cfg, "form_file", "a", "b")
        if region == "box":
            _require(cfg, "side")
        if cmd == "volume" and region != "shell" and cfg.get("n") is None and region != "box":
            _require(cfg, "n")
        if cmd == "volume" and cfg["samples"] < 10**4:
            raise UsageError("--samples must be >= 10000")
    if cfg.get("a") is not None and cfg.get("b") is not None and not cfg["a"] < cfg["b"]:
        raise UsageError("need --a < --b")
    if cmd in ("cq",) and len(cfg["tgrid"]) < 4:
        raise UsageError("--tgrid needs at least 4 values")
    if cmd == "error-term-exp" and len(cfg["tgrid"]) < 6:
        raise UsageError("--tgrid needs at least 6 values")
    if cmd == "small-values-exp" and cfg["jmax"] < 6:
        raise UsageError("--jmax must be >= 6")
    if cmd == "sequences-exp" and cfg["f_power"] <= 0.5:
        raise UsageError("--f-power must exceed 0.5 so that sum f(k)^-2 converges")


# ----------------------------------------------------------------------------
# output helpers


def _emit(cfg, text: str, name: str | None = None):
    out = cfg.get("output")
    if out is None:
        sys.stdout.write(text)
        return
    path = os.path.join(out, name) if name else out
    atomic_write_text(path, text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _summary(cfg, payload: dict) -> dict:
    return {"config": {k: v for k, v in cfg.items()}, "version": __version__, **payload}


def _write_bundle(cfg, summary: dict, csv_name: str | None = None, csv_text: str | None = None):
    """summary.json (+ one CSV) into --output as a directory, or summary to stdout."""
    if cfg.get("output") is None:
        sys.stdout.write(_json(summary))
        return
    if csv_text is not None:
        atomic_write_text(os.path.join(cfg["output"], csv_name), csv_text)
    atomic_write_text(os.path.join(cfg["output"], "summary.json"), _json(summary))


def _load_form(path) -> QuadraticForm:
    with open(path, encoding="utf-8") as fh:
        return QuadraticForm.from_json(fh.read())


def _load_lattice(path) -> Lattice:
    with open(path, encoding="utf-8") as fh:
        return Lattice.from_json(fh.read())


def _region(cfg, n=None):
    kind = cfg["region"]
    if kind == "ball":
        return Ball(n or cfg["n"], cfg["T"])
    if kind == "shell":
        return QuadShell(_load_form(cfg["form_file"]), cfg["a"], cfg["b"], cfg["T"])
    return Box(cfg["side"])


def _sampler(cfg) -> LatticeSampler:
    return LatticeSampler(cfg["sampler"], cfg["n"], cfg["q"])


def _trials_csv(seeds, counts) -> str:
    rows = ["trial_index,seed,count\n"]
    rows += [f"{i},{s},{int(c)}\n" for i, (s, c) in enumerate(zip(seeds, counts))]
    return "".join(rows)


# ----------------------------------------------------------------------------
# commands


def cmd_sample_lattice(cfg):
    L = _sampler(cfg)(cfg["seed"])
    _emit(cfg, L.to_json() + "\n")


def cmd_count(cfg):
    L = _load_lattice(cfg["basis_file"])
    _emit(cfg, f"{count_region(L, _region(cfg, L.dim))}\n")


def cmd_small_values(cfg):
    sol = min_height_solution(_load_form(cfg["form_file"]), cfg["eps"], cfg["mode"], cfg["tmax"])
    _emit(cfg, json.dumps(None if sol is None else sol.to_dict()) + "\n")


def cmd_volume(cfg):
    est = estimate_volume(_region(cfg), cfg["samples"], cfg["seed"])
    if cfg["format"] == "csv":
        _emit(cfg, "value,std_error,samples,method\n"
                   f"{fmt_float(est.value)},{fmt_float(est.std_error)},{est.samples},{est.method}\n")
    else:
        _emit(cfg, _json(est.to_dict()))


def cmd_cq(cfg):
    res = c_q_estimate(_load_form(cfg["form_file"]), cfg["a"], cfg["b"], cfg["tgrid"], cfg["samples"], cfg["seed"])
    if cfg["format"] == "csv":
        text = "T,volume,std_error,normalized\n" + "".join(
            ",".join(fmt_float(v) for v in row) + "\n" for row in res.rows())
        _emit(cfg, text)
    else:
        _emit(cfg, _json({"c_q": res.c_q, "T": list(res.T_grid), "normalized": list(res.normalized),
                          "residuals": list(res.residuals)}))


def _ensemble(cfg):
    R = Ball(cfg["n"], symmetrization_radius(cfg["volume"], cfg["n"]))
    seeds, counts = sample_counts(_sampler(cfg), R, cfg["trials"], cfg["seed"], cfg["threads"])
    return seeds, counts


def cmd_siegel_stats(cfg):
    seeds, counts = _ensemble(cfg)
    st = SampleStats.from_values(counts)
    a, n = cfg["volume"], cfg["n"]
    cn = c_n(n)
    mean_tol = 3 * math.sqrt(cn * a / cfg["trials"])
    summary = _summary(cfg, {
        "stats": st.to_dict(), "volume": a, "C_n": cn,
        "mean_bound": [a - mean_tol, a + mean_tol], "variance_bound": 1.25 * cn * a,
        "mean_pass": abs(st.mean - a) <= mean_tol, "variance_pass": st.variance <= 1.25 * cn * a,
        "second_moment_ball_formula": a * a + cn * a, "second_moment_observed": st.second_moment,
    })
    _write_bundle(cfg, summary, "trials.csv", _trials_csv(seeds, counts))


def cmd_minkowski(cfg):
    seeds, counts = _ensemble(cfg)
    frac = float(np.mean(counts == 0))
    bound = minkowski_bound(cfg["n"], cfg["volume"])
    se = binomial_stderr(bound, cfg["trials"])
    summary = _summary(cfg, {"hole_fraction": frac, "bound": bound, "threshold": bound + 3 * se,
                             "pass": frac <= bound + 3 * se, "C_n": c_n(cfg["n"])})
    _write_bundle(cfg, summary, "trials.csv", _trials_csv(seeds, counts))


def cmd_chebyshev(cfg):
    seeds, counts = _ensemble(cfg)
    a, M = cfg["volume"], cfg["M"]
    frac = float(np.mean(np.abs(counts - a) > M * math.sqrt(a)))
    bound = chebyshev_bound(cfg["n"], M)
    se = binomial_stderr(min(bound, 1.0), cfg["trials"])
    summary = _summary(cfg, {"tail_fraction": frac, "bound": bound, "threshold": bound + 3 * se,
                             "pass": frac <= bound + 3 * se, "C_n": c_n(cfg["n"])})
    _write_bundle(cfg, summary, "trials.csv", _trials_csv(seeds, counts))


def cmd_small_values_exp(cfg):
    n = cfg["n"]
    res = small_values_ensemble(n, cfg["forms"], cfg["jmax"], cfg["seed"], cfg["mode"], cfg["tmax"],
                                threads=cfg["threads"])
    records = [r for x in res for r in x.records]
    slopes = [x.fit.slope for x in res if x.fit is not None]
    med = float(np.median(slopes)) if slopes else None
    limit = 1.0 / (n - 2) + 0.2
    summary = _summary(cfg, {
        "fits": [x.fit.to_dict() if x.fit else None for x in res],
        "censored": [x.censored for x in res],
        "median_slope": med, "theory_exponent": 1.0 / (n - 2), "slope_limit": limit,
        "pass": med is not None and med <= limit,
    })
    _write_bundle(cfg, summary, "records.csv", records_csv(records))


def cmd_error_term_exp(cfg):
    n = cfg["n"]
    res = error_term_ensemble(n, cfg["forms"], cfg["a"], cfg["b"], cfg["tgrid"], cfg["seed"], cfg["samples"],
                              threads=cfg["threads"])
    records = [r for x in res for r in x.records]
    slopes = [x.fit.slope for x in res if x.fit is not None]
    med = float(np.median(slopes)) if slopes else None
    limit = (n - 1) / 2 + 0.5
    ratios = [x.records[-1].observed / x.records[-1].reference for x in res]
    summary = _summary(cfg, {
        "c_q": [x.c_q for x in res], "fits": [x.fit.to_dict() if x.fit else None for x in res],
        "main_term_ratio_at_max_T": ratios, "median_slope": med, "slope_limit": limit,
        "pass": med is not None and med <= limit,
    })
    _write_bundle(cfg, summary, "records.csv", records_csv(records))


def cmd_dilates_exp(cfg):
    n = cfg["n"]
    res = dilates_experiment(_sampler(cfg), Box([1.0] * n), cfg["tgrid"], cfg["delta"], cfg["trials"],
                             cfg["seed"], cfg["threads"])
    summary = _summary(cfg, {"pass_fraction": res.pass_fraction, "passed": res.passed,
                             "pass": res.pass_fraction >= 0.9})
    _write_bundle(cfg, summary, "records.csv", records_csv(res.records))


def cmd_sequences_exp(cfg):
    n, power = cfg["n"], cfg["f_power"]
    res = sequences_experiment(_sampler(cfg), lambda k: Ball(n, symmetrization_radius(k, n)),
                               lambda k: k**power, cfg["kmax"], cfg["trials"], cfg["seed"], cfg["threads"],
                               check_summable=False)
    summary = _summary(cfg, {"last_violation": res.last_violation,
                             "fraction_clean_from_10": res.fraction_clean_from(10)})
    _write_bundle(cfg, summary, "records.csv", records_csv(res.records))


DISPATCH = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required")
        cfg = resolve(ns)
        validate(cfg)
    except UsageError as e:
        print(f"geonum: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"geonum: error: {e}", file=sys.stderr)
        return 1
    try:
        DISPATCH[cfg["command"]](cfg)
    except (ValueError, OSError, UsageError) as e:
        print(f"geonum: error: {e}", file=sys.stderr)
        return 1
    except (OverflowError, ArithmeticError, RuntimeError, MemoryError) as e:
        print(f"geonum: computation failed: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
