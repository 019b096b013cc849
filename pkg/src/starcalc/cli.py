"""Batch command-line interface.

Every subcommand resolves its configuration from defaults, an optional
--config JSON file, and explicit flags (in that order), validates it
against a schema, runs, and emits a JSON envelope

    {"command": ..., "config": <resolved>, "result": ...}

with 17-significant-digit floats so identical (config, seed) pairs give
byte-identical output. Exit codes: 0 success, 1 a mathematical check
failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import jsonschema
import numpy as np

from . import serialize
from .calculus import conv_exp, conv_inverse, conv_log, conv_power
from .errors import (
    DivergentSeries,
    GrowthViolation,
    IntegrationBudgetExceeded,
    NegativeDensity,
    StarcalcError,
)
from .evolution import evolve, resolvent
from .kernels import kernel_from_json, tabulate
from .model import GroundConfiguration, SetFunction, space_from_json
from .norms import power_norm_check, young_check
from .poisson import (
    bogolyubov,
    integrate_exponent,
    integrate_mc,
    measure_convolution_check,
    minlos_check,
)
from .posdef import critposdef_check, default_basis, gram_star
from .transforms import (
    conv_fast,
    conv_naive,
    conv_naive_values,
    cover_fast,
    cover_fast_values,
    cover_naive,
)
from .fields import parse_field
from .verify import VerifyContext, run_all, summarize

# errors that mean "the mathematics failed", not "you called it wrong"
_CHECK_ERRORS = (DivergentSeries, GrowthViolation, NegativeDensity,
                 IntegrationBudgetExceeded)

_DEFAULT_SPACE = {"dim": 1, "box": [[0.0, 1.0]], "z": 1.0}

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_STR = {"type": "string"}

SCHEMAS = {
    "conv": {
        "k1": _STR, "k2": _STR, "mode": {"enum": ["fast", "naive", "both"]},
        "product": {"enum": ["conv", "cover"]}, "n": _INT, "tol": _NUM,
        "seed": _INT,
    },
    "calculus": {
        "op": {"enum": ["exp", "log", "inverse", "power"]},
        "k": _STR, "m": _INT, "seed": _INT,
    },
    "evolve": {
        "a": _STR, "k0": _STR, "t": _NUM, "snapshots": _INT, "seed": _INT,
    },
    "resolvent": {"a": _STR, "k": _STR, "z": _NUM, "seed": _INT},
    "integrate": {
        "kernel": _STR, "space": _STR,
        "method": {"enum": ["auto", "mc", "exponent"]},
        "samples": _INT, "seed": _INT,
    },
    "bogolyubov": {
        "kernel": _STR, "f": _STR, "space": _STR,
        "method": {"enum": ["auto", "exponent", "levels", "mc"]},
        "n_max": _INT, "growth": _NUM, "samples": _INT, "seed": _INT,
    },
    "minlos-check": {
        "h": _STR, "g1": _STR, "g2": _STR, "space": _STR,
        "samples": _INT, "seed": _INT,
    },
    "measure-conv": {
        "k1": _STR, "k2": _STR, "g": _STR, "space": _STR,
        "samples": _INT, "seed": _INT,
    },
    "young": {
        "variant": {"enum": ["Y1", "Y2", "Y3", "Y4", "Y5", "power"]},
        "C1": _NUM, "delta1": _NUM, "C2": _NUM, "delta2": _NUM,
        "C_prime": _NUM, "n": _INT, "n_power": _INT,
        "bounded": {"type": "boolean"}, "seed": _INT,
    },
    "posdef": {
        "kernel": _STR, "k2": _STR, "space": _STR, "cells": _INT,
        "method": {"enum": ["auto", "mc"]},
        "samples": _INT, "seed": _INT, "tol": _NUM,
    },
    "verify-all": {
        "seed": _INT, "n": _INT, "trials": _INT, "samples": _INT,
        "area": _STR,
    },
    "bench": {"op": {"enum": ["conv", "cover"]}, "n": _STR, "seed": _INT},
}

DEFAULTS = {
    "conv": {"mode": "both", "product": "conv", "n": 8, "seed": 0},
    "calculus": {"op": "exp", "m": 2, "seed": 0},
    "evolve": {"t": 1.0, "snapshots": 1, "seed": 0},
    "resolvent": {"seed": 0},
    "integrate": {"method": "auto", "samples": 10000, "seed": 0},
    "bogolyubov": {"method": "auto", "n_max": 12, "samples": 100000, "seed": 0},
    "minlos-check": {"samples": 20000, "seed": 0},
    "measure-conv": {"samples": 20000, "seed": 0},
    "young": {"variant": "Y1", "C1": 1.5, "delta1": 0.0, "C2": 2.0,
              "delta2": 0.0, "n": 30, "n_power": 2, "bounded": False,
              "seed": 0},
    "posdef": {"cells": 4, "method": "auto", "samples": 20000, "seed": 0},
    "verify-all": {"seed": 0, "n": 10, "trials": 20, "samples": 20000},
    "bench": {"op": "conv", "n": "4..20", "seed": 0},
}


class UsageError(Exception):
    pass


def _load_obj(arg: str):
    """JSON argument: inline if it starts with '{', else a file path."""
    text = arg if arg.lstrip().startswith("{") else None
    if text is None:
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read {arg}: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"invalid JSON in {arg}: {e}")


def _grid_ground(n: int, dim: int = 1) -> GroundConfiguration:
    pts = (np.arange(n, dtype=float).reshape(n, 1) + 0.5) / max(n, 1)
    return GroundConfiguration(np.broadcast_to(pts, (n, dim)).copy())


def _parse_kernel(arg: str, dim: int):
    try:
        return kernel_from_json(_load_obj(arg), dim=dim)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"bad kernel descriptor {arg}: {e}")


def _parse_field_arg(arg: str, dim: int):
    try:
        return parse_field(_load_obj(arg), dim=dim)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"bad field expression {arg}: {e}")


def _load_setfunction(arg: str, n: int) -> SetFunction:
    obj = _load_obj(arg)
    if isinstance(obj, dict) and "values" in obj and "ground" in obj:
        try:
            return serialize.setfunction_from_json(obj)
        except (ValueError, KeyError, TypeError) as e:
            raise UsageError(f"bad set-function table {arg}: {e}")
    try:
        k = kernel_from_json(obj, dim=1)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"bad kernel descriptor {arg}: {e}")
    return tabulate(k, _grid_ground(n))


def _load_space(config):
    spec = config.get("space")
    try:
        return space_from_json(_load_obj(spec) if spec else _DEFAULT_SPACE)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"bad phase-space descriptor: {e}")


def _resolve(name: str, args) -> dict:
    config = dict(DEFAULTS[name])
    if getattr(args, "config", None):
        file_cfg = _load_obj(args.config)
        if not isinstance(file_cfg, dict):
            raise UsageError("--config must contain a JSON object")
        config.update(file_cfg)
    for key, value in vars(args).items():
        if key in ("command", "config", "out", "format") or value is None:
            continue
        config[key.replace("-", "_")] = value
    schema = {
        "type": "object",
        "properties": SCHEMAS[name],
        "additionalProperties": False,
    }
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as e:
        raise UsageError(f"config rejected: {e.message}")
    return config


# -- subcommand bodies (each returns (result, exit_code)) ----------------------

def _run_conv(cfg):
    for key in ("k1", "k2"):
        if key not in cfg:
            raise UsageError(f"conv requires --{key}")
    k1 = _load_setfunction(cfg["k1"], cfg["n"])
    k2 = _load_setfunction(cfg["k2"], cfg["n"])
    fast = conv_fast if cfg["product"] == "conv" else cover_fast
    naive = conv_naive if cfg["product"] == "conv" else cover_naive
    result, code = {}, 0
    if cfg["mode"] in ("fast", "both"):
        result["fast"] = serialize.setfunction_to_json(fast(k1, k2))
    if cfg["mode"] in ("naive", "both"):
        result["naive"] = serialize.setfunction_to_json(naive(k1, k2))
    if cfg["mode"] == "both":
        a = np.asarray(result["fast"]["values"], dtype=float)
        b = np.asarray(result["naive"]["values"], dtype=float)
        dev = float(np.max(np.abs(a - b))) if a.size else 0.0
        result["max_deviation"] = dev
        if "tol" in cfg and dev > cfg["tol"]:
            code = 1
    return result, code


def _run_calculus(cfg):
    if "k" not in cfg:
        raise UsageError("calculus requires --k")
    k = _load_setfunction(cfg["k"], 8)
    op = {"exp": conv_exp, "log": conv_log, "inverse": conv_inverse,
          "power": lambda u: conv_power(u, cfg["m"])}[cfg["op"]]
    return {"op": cfg["op"], "result": serialize.setfunction_to_json(op(k))}, 0


def _run_evolve(cfg):
    for key in ("a", "k0"):
        if key not in cfg:
            raise UsageError(f"evolve requires --{key}")
    a = _load_setfunction(cfg["a"], 8)
    k0 = _load_setfunction(cfg["k0"], 8)
    snaps = max(1, cfg["snapshots"])
    rows = []
    for i in range(1, snaps + 1):
        t = cfg["t"] * i / snaps
        res = evolve(a, k0, t)
        rows.append({
            "t": t,
            "values": list(res.solution.values),
            "truncation_terms": res.truncation_terms,
            "tail_bound": res.tail_bound,
        })
    return {"snapshots": rows,
            "ground": serialize.setfunction_to_json(k0)["ground"]}, 0


def _run_resolvent(cfg):
    for key in ("a", "k", "z"):
        if key not in cfg:
            raise UsageError(f"resolvent requires --{key}")
    a = _load_setfunction(cfg["a"], 8)
    k = _load_setfunction(cfg["k"], 8)
    r = resolvent(a, k, cfg["z"])
    residual = (r * cfg["z"]) - conv_fast(a, r) - k
    return {"result": serialize.setfunction_to_json(r),
            "identity_residual": float(np.max(np.abs(residual.values)))}, 0


def _run_integrate(cfg):
    from dataclasses import replace

    from .kernels import exponent_form

    if "kernel" not in cfg:
        raise UsageError("integrate requires --kernel")
    space = _load_space(cfg)
    kernel = _parse_kernel(cfg["kernel"], space.dim)
    form = None if cfg["method"] == "mc" else exponent_form(kernel)
    if form is None and cfg["method"] == "exponent":
        raise UsageError("kernel has no factorized exponent form")
    if form is not None:
        coeff, field = form
        base = integrate_exponent(field, space)
        est = replace(base, value=coeff * base.value)
    else:
        est = integrate_mc(kernel, space, n_samples=cfg["samples"],
                           seed=cfg["seed"])
    return {"value": est.value, "stderr": est.stderr, "samples": est.samples,
            "exact": est.exact, "trace": est.trace}, 0


def _run_bogolyubov(cfg):
    for key in ("kernel", "f"):
        if key not in cfg:
            raise UsageError(f"bogolyubov requires --{key}")
    space = _load_space(cfg)
    kernel = _parse_kernel(cfg["kernel"], space.dim)
    f = _parse_field_arg(cfg["f"], space.dim)
    est = bogolyubov(kernel, f, space, method=cfg["method"],
                     n_max=cfg["n_max"], growth=cfg.get("growth"),
                     n_samples=cfg["samples"], seed=cfg["seed"])
    return {"value": est.value, "stderr": est.stderr, "tail": est.tail,
            "exact": est.exact, "trace": est.trace}, 0


def _run_minlos(cfg):
    for key in ("h", "g1", "g2"):
        if key not in cfg:
            raise UsageError(f"minlos-check requires --{key}")
    space = _load_space(cfg)
    H = _parse_kernel(cfg["h"], space.dim)
    G1 = _parse_kernel(cfg["g1"], space.dim)
    G2 = _parse_kernel(cfg["g2"], space.dim)
    rep = minlos_check(H, G1, G2, space, n_samples=cfg["samples"],
                       seed=cfg["seed"])
    return serialize.to_plain(rep), 0 if rep.within_tol else 1


def _run_measure_conv(cfg):
    for key in ("k1", "k2", "g"):
        if key not in cfg:
            raise UsageError(f"measure-conv requires --{key}")
    space = _load_space(cfg)
    k1 = _parse_kernel(cfg["k1"], space.dim)
    k2 = _parse_kernel(cfg["k2"], space.dim)
    G = _parse_kernel(cfg["g"], space.dim)
    rep = measure_convolution_check(k1, k2, G, space, n_samples=cfg["samples"],
                                    seed=cfg["seed"])
    ok = rep.within_tol and rep.disjoint_violations == 0
    return serialize.to_plain(rep), 0 if ok else 1


def _run_young(cfg):
    if cfg["variant"] == "power":
        rep = power_norm_check(cfg["C1"], cfg["delta1"], cfg["n_power"],
                               C_prime=cfg.get("C_prime"), n_max=cfg["n"],
                               bounded=cfg["bounded"])
    else:
        rep = young_check(cfg["variant"], cfg["C1"], cfg["delta1"],
                          C2=cfg.get("C2"), delta2=cfg.get("delta2"),
                          C_prime=cfg.get("C_prime"), n_max=cfg["n"])
    result = serialize.to_plain(rep)
    result["satisfied"] = rep.satisfied
    return result, 0 if rep.satisfied else 1


def _run_posdef(cfg):
    if "kernel" not in cfg:
        raise UsageError("posdef requires --kernel")
    space = _load_space(cfg)
    basis = default_basis(space, cells=cfg["cells"])
    kernel = _parse_kernel(cfg["kernel"], space.dim)
    if "k2" in cfg:
        k2 = _parse_kernel(cfg["k2"], space.dim)
        rep = critposdef_check(kernel, k2, basis, space, method=cfg["method"],
                               n_samples=cfg["samples"], seed=cfg["seed"],
                               tol=cfg.get("tol"))
        ok = rep.implication_ok and rep.entries_match
        return serialize.to_plain(rep), 0 if ok else 1
    rep = gram_star(kernel, basis, space, method=cfg["method"],
                    n_samples=cfg["samples"], seed=cfg["seed"],
                    tol=cfg.get("tol"))
    return serialize.to_plain(rep), 0 if rep.psd else 1


def _run_verify_all(cfg):
    ctx = VerifyContext(seed=cfg["seed"], n=cfg["n"], trials=cfg["trials"],
                        samples=cfg["samples"])
    areas = {cfg["area"]} if "area" in cfg else None
    results = run_all(ctx, areas=areas)
    if not results:
        raise UsageError(f"no checks in area {cfg.get('area')!r}")
    payload = {
        "checks": [serialize.to_plain(r) for r in results],
        "summary": summarize(results),
    }
    return payload, 0 if all(r.passed for r in results) else 1


def _parse_range(spec: str):
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(spec)]


def _run_bench(cfg):
    from .rng import philox_stream
    from .transforms import conv_fast_values, cover_naive_values

    if cfg["op"] == "conv":
        def fast(a, b, n):
            return conv_fast_values(a, b, n, cutoff=0)

        naive = conv_naive_values
    else:
        fast, naive = cover_fast_values, cover_naive_values
    rows = []
    try:
        ns = _parse_range(cfg["n"])
    except ValueError:
        raise UsageError(f"bad range {cfg['n']!r}; expected like 4..20")
    rng = philox_stream(cfg["seed"])
    for n in ns:
        a = rng.standard_normal(1 << n)
        b = rng.standard_normal(1 << n)
        fast(a, b, n)  # warm the JIT before timing
        naive(a, b, n)
        repeats = 3 if n <= 16 else 1
        t_fast = min(_time_one(fast, a, b, n) for _ in range(repeats))
        t_naive = min(_time_one(naive, a, b, n) for _ in range(repeats))
        rows.append({"n": n, "naive_seconds": t_naive, "fast_seconds": t_fast,
                     "ratio": t_naive / t_fast if t_fast > 0 else float("inf")})
    return {"op": cfg["op"], "rows": rows}, 0


def _time_one(fn, a, b, n) -> float:
    t0 = time.perf_counter()
    fn(a, b, n)
    return time.perf_counter() - t0


RUNNERS = {
    "conv": _run_conv,
    "calculus": _run_calculus,
    "evolve": _run_evolve,
    "resolvent": _run_resolvent,
    "integrate": _run_integrate,
    "bogolyubov": _run_bogolyubov,
    "minlos-check": _run_minlos,
    "measure-conv": _run_measure_conv,
    "young": _run_young,
    "posdef": _run_posdef,
    "verify-all": _run_verify_all,
    "bench": _run_bench,
}


# -- CSV rendering for the tabular subcommands ---------------------------------

def _csv_lines(command: str, result: dict):
    g = serialize.format_float
    if command == "bench":
        yield "n,naive_seconds,fast_seconds,ratio"
        for r in result["rows"]:
            yield f"{r['n']},{g(r['naive_seconds'])},{g(r['fast_seconds'])},{g(r['ratio'])}"
    elif command == "young":
        yield "level,lhs,rhs_bound"
        for i, v in enumerate(result["lhs_per_level"]):
            yield f"{i},{g(v)},{g(result['rhs_bound'])}"
    elif command == "verify-all":
        yield "name,area,passed,detail"
        for r in result["checks"]:
            detail = str(r["detail"]).replace('"', "'")
            yield f"{r['name']},{r['area']},{int(r['passed'])},\"{detail}\""
    elif command == "evolve":
        yield "t,mask,value"
        for row in result["snapshots"]:
            for mask, v in enumerate(row["values"]):
                yield f"{g(row['t'])},{mask},{g(v)}"
    else:
        raise UsageError(f"{command} has no CSV rendering; use --format json")


# -- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="starcalc",
        description="Set-function calculus toolbox: transforms, evolution, "
                    "Poisson-weighted integration, inequality and positivity checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, flags):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file with defaults for this run")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=["json", "csv"], default=None)
        for flag, kw in flags:
            sp.add_argument(flag, **kw)
        return sp

    num = {"type": float}
    integer = {"type": int}
    add("conv", "convolve or cover-multiply two set functions", [
        ("--k1", {}), ("--k2", {}),
        ("--mode", {"choices": ["fast", "naive", "both"]}),
        ("--product", {"choices": ["conv", "cover"]}),
        ("--n", integer), ("--tol", num), ("--seed", integer)])
    add("calculus", "exp*/ln*/inverse/power of a set function", [
        ("--op", {"choices": ["exp", "log", "inverse", "power"]}),
        ("--k", {}), ("--m", integer), ("--seed", integer)])
    add("evolve", "solve dk/dt = a * k by truncated series", [
        ("--a", {}), ("--k0", {}), ("--t", num),
        ("--snapshots", integer), ("--seed", integer)])
    add("resolvent", "solve (z - A)r = k", [
        ("--a", {}), ("--k", {}), ("--z", num), ("--seed", integer)])
    add("integrate", "Poisson-weighted integral of a kernel", [
        ("--kernel", {}), ("--space", {}),
        ("--method", {"choices": ["auto", "mc", "exponent"]}),
        ("--samples", integer), ("--seed", integer)])
    add("bogolyubov", "generating functional of a kernel", [
        ("--kernel", {}), ("--f", {}), ("--space", {}),
        ("--method", {"choices": ["auto", "exponent", "levels", "mc"]}),
        ("--n-max", integer), ("--growth", num),
        ("--samples", integer), ("--seed", integer)])
    add("minlos-check", "two-pool integration-by-parts identity", [
        ("--h", {}), ("--g1", {}), ("--g2", {}), ("--space", {}),
        ("--samples", integer), ("--seed", integer)])
    add("measure-conv", "convolution-of-measures identity", [
        ("--k1", {}), ("--k2", {}), ("--g", {}), ("--space", {}),
        ("--samples", integer), ("--seed", integer)])
    add("young", "per-level convolution inequality check", [
        ("--variant", {"choices": ["Y1", "Y2", "Y3", "Y4", "Y5", "power"]}),
        ("--C1", num), ("--delta1", num), ("--C2", num), ("--delta2", num),
        ("--C-prime", num), ("--n", integer), ("--n-power", integer),
        ("--bounded", {"action": "store_const", "const": True}),
        ("--seed", integer)])
    add("posdef", "Gram positivity of a correlation kernel", [
        ("--kernel", {}), ("--k2", {}), ("--space", {}), ("--cells", integer),
        ("--method", {"choices": ["auto", "mc"]}),
        ("--samples", integer), ("--seed", integer), ("--tol", num)])
    add("verify-all", "run the full named-invariant suite", [
        ("--seed", integer), ("--n", integer), ("--trials", integer),
        ("--samples", integer), ("--area", {})])
    add("bench", "naive vs fast transform timings", [
        ("--op", {"choices": ["conv", "cover"]}), ("--n", {}),
        ("--seed", integer)])
    return p


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        cfg = _resolve(command, args)
        result, code = RUNNERS[command](cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except _CHECK_ERRORS as e:
        print(f"check failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except StarcalcError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    fmt = args.format or ("csv" if command == "bench" else "json")
    if fmt == "csv":
        try:
            text = "\n".join(_csv_lines(command, result)) + "\n"
        except UsageError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    else:
        envelope = {"command": command, "config": serialize.to_plain(cfg),
                    "result": result}
        text = serialize.dumps(envelope)
    _emit(text, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
