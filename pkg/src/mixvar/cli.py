"""Command line interface.

Verbs: estimate, simulate, girf, diagnose, decompose, transform, check-id.
Machine readable outputs go to files under --out; progress goes to stderr
(silenced by --quiet).  Exit codes: 0 success, 1 usage error (bad
arguments, missing files), 2 computation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .data_io import SeriesFrame, apply_transforms, load_csv, save_csv
from .diagnostics import correlogram, shape_summary
from .errors import MixvarError
from .estimation import (
    EstimationConfig,
    config_from_dict,
    fit,
    information_criteria,
    parameter_count,
    standard_errors,
)
from .girf import GirfSpec, estimate_girf, girf_rows
from .likelihood import quantile_residuals
from .model import Dimensions, ModelParameters, simulate
from .model_io import load_model, model_from_dict, model_to_dict, save_model
from .structural import check_assumption1, check_identification, decompose_two_regime
from .model import Regime


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="mixvar", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mixvar {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(verb, help_text, *, data=False, model=False, config=False, out=True):
        p = sub.add_parser(verb, help=help_text)
        if data:
            p.add_argument("--data", required=True, help="input CSV")
        if model:
            p.add_argument("--model", required=True, help="model JSON")
        if config:
            p.add_argument("--config", "--spec", dest="config", required=config == "required",
                           help="JSON settings file")
        if out:
            p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--threads", type=int, default=1, help="parallelism hint")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        return p

    add("estimate", "fit a model to data", data=True, config="required")
    add("simulate", "draw a path from a model", model=True, config=True)
    add("girf", "Monte Carlo impulse responses", model=True, config="required")
    add("diagnose", "quantile residual diagnostics", data=True, model=True)
    add("decompose", "add a structural block to a 2-regime model", model=True)
    add("transform", "apply column transformations", data=True, config="required")
    add("check-id", "evaluate an identification pattern", model=True)
    return parser


def _progress(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _out_path(args, name):
    import os

    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _parse_init(raw):
    if raw is None:
        return "stationary"
    if isinstance(raw, str) or isinstance(raw, int):
        return raw
    if isinstance(raw, dict) and "history" in raw:
        return np.asarray(raw["history"], dtype=float)
    if isinstance(raw, list):
        return np.asarray(raw, dtype=float)
    raise MixvarError(f"cannot interpret init {raw!r}")


def _cmd_estimate(args):
    frame = load_csv(args.data)
    doc = _load_json(args.config)
    if "p" not in doc or "M" not in doc:
        raise _UsageError("estimation config must carry the lag order p and regime count M")
    dims = Dimensions(d=frame.d, p=int(doc["p"]), M=int(doc["M"]))
    config = config_from_dict(doc)
    if args.seed is not None:
        config = EstimationConfig(
            rounds=config.rounds, ga=config.ga, refine=config.refine,
            likelihood_kind=config.likelihood_kind, constraints=config.constraints,
            seed=args.seed,
        )
    _progress(args, f"estimating a {dims.M}-regime VAR({dims.p}) on {frame.T} x {frame.d} data")
    result = fit(frame, dims, config)
    _progress(args, f"log-likelihood {result.loglik.total:.4f}; computing standard errors")
    se = standard_errors(
        result.theta_hat, frame, likelihood_kind=config.likelihood_kind,
        constraints=config.constraints,
    )
    k = parameter_count(dims, config.constraints)
    n = frame.T if config.likelihood_kind == "exact" else frame.T - dims.p
    ic = information_criteria(result.loglik.total, k, n)
    save_model(result.theta_hat, _out_path(args, "model.json"))
    report = {
        "loglik": result.loglik.total,
        "initial_term": result.loglik.initial_term,
        "likelihood_kind": config.likelihood_kind,
        "n_obs": n,
        "n_params": k,
        "criteria": {"aic": ic.aic, "bic": ic.bic, "hqic": ic.hqic},
        "converged": result.converged,
        "rounds": [
            {"round": r.round_index, "loglik": r.loglik, "converged": r.converged}
            for r in result.rounds_table
        ],
        "hessian_ok": se.hessian_ok,
        "std_errors": {
            name: (None if math.isnan(v) else v) for name, v in zip(se.names, se.values)
        },
    }
    _write_json(_out_path(args, "report.json"), report)
    _progress(args, f"wrote model.json and report.json to {args.out}")


def _cmd_simulate(args):
    model = load_model(args.model)
    doc = _load_json(args.config) if args.config else {}
    length = int(doc.get("length", 200))
    init = _parse_init(doc.get("init"))
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    _progress(args, f"simulating {length} observations (seed {seed})")
    path = simulate(model, length, init=init, seed=seed)
    d, M = model.dims.d, model.dims.M
    with open(_out_path(args, "path.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["index", *[f"y{i + 1}" for i in range(d)], "regime",
             *[f"alpha{m + 1}" for m in range(M)]]
        )
        for t in range(length):
            writer.writerow(
                [t + 1, *[repr(float(v)) for v in path.observations[t]],
                 int(path.regimes[t]), *[repr(float(v)) for v in path.weights[t]]]
            )
    _progress(args, f"wrote path.csv to {args.out}")


def _cmd_girf(args):
    model = load_model(args.model)
    doc = _load_json(args.config)
    for key in ("shock_index", "magnitude"):
        if key not in doc:
            raise MixvarError(f"girf spec is missing {key!r}")
    scaling = doc.get("scaling") or {}
    spec = GirfSpec(
        shock_index=int(doc["shock_index"]),
        magnitude=float(doc["magnitude"]),
        horizon=int(doc.get("horizon", 32)),
        inner_reps=int(doc.get("inner_reps", 2500)),
        outer_reps=int(doc.get("outer_reps", 2500)),
        init=_parse_init(doc.get("init")),
        quantiles=tuple(doc.get("quantiles", [0.05, 0.95])),
        scale_variable=scaling.get("variable"),
        scale_target=scaling.get("target"),
        scale_window=scaling.get("window"),
        seed=args.seed if args.seed is not None else int(doc.get("seed", 0)),
    )
    _progress(
        args,
        f"impulse responses for shock {spec.shock_index}, horizon {spec.horizon}, "
        f"{spec.inner_reps} x {spec.outer_reps} repetitions",
    )
    result = estimate_girf(model, spec)
    with open(_out_path(args, "girf.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["horizon", "series", "statistic", "value"])
        for row in girf_rows(result):
            writer.writerow([row[0], row[1], row[2], repr(row[3])])
    _progress(args, f"wrote girf.csv to {args.out}")


def _cmd_diagnose(args):
    model = load_model(args.model)
    frame = load_csv(args.data)
    _progress(args, f"computing quantile residuals on {frame.T} rows")
    res = quantile_residuals(model, frame)
    T = res.values.shape[0]
    names = [f"qres_{n}" for n in frame.names]
    res_frame = SeriesFrame(names=tuple(names), index=frame.index[frame.T - T:], values=res.values)
    save_csv(res_frame, _out_path(args, "residuals.csv"))
    with open(_out_path(args, "correlograms.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "lag", "row", "col", "value"])
        for kind, squared in (("plain", False), ("squared", True)):
            cg = correlogram(res, squared=squared)
            for k in cg.lags:
                for i, ri in enumerate(frame.names):
                    for j, cj in enumerate(frame.names):
                        writer.writerow([kind, int(k), ri, cj, repr(float(cg.values[i, j, k]))])
    cg = correlogram(res)
    shape = shape_summary(res)
    summary = {
        "nobs": T,
        "n_clamped": res.n_clamped,
        "bounds95": cg.bounds95,
        "bounds99": cg.bounds99,
        "columns": {
            name: {
                "mean": float(shape.mean[i]),
                "variance": float(shape.variance[i]),
                "skewness": float(shape.skewness[i]),
                "excess_kurtosis": float(shape.excess_kurtosis[i]),
            }
            for i, name in enumerate(frame.names)
        },
    }
    _write_json(_out_path(args, "summary.json"), summary)
    _progress(args, f"wrote residuals.csv, correlograms.csv and summary.json to {args.out}")


def _cmd_decompose(args):
    model = load_model(args.model)
    if model.dims.M != 2:
        raise MixvarError(f"decompose needs exactly 2 regimes, got {model.dims.M}")
    struct = decompose_two_regime(model.regimes[0].omega, model.regimes[1].omega)
    regimes = tuple(
        Regime(phi0=reg.phi0, A=reg.A, omega=omega)
        for reg, omega in zip(model.regimes, struct.reconstruct_omegas())
    )
    out = ModelParameters(
        dims=model.dims, regimes=regimes, alpha=model.alpha,
        structural=struct, ordering_waived=model.ordering_waived,
    )
    save_model(out, _out_path(args, "model.json"))
    _progress(args, f"wrote structural model.json to {args.out}")


def _cmd_transform(args):
    frame = load_csv(args.data)
    doc = _load_json(args.config)
    manifest = doc["columns"] if isinstance(doc, dict) and "columns" in doc else doc
    out = apply_transforms(frame, manifest)
    save_csv(out, _out_path(args, "data_out.csv"))
    _write_json(_out_path(args, "transform_manifest.json"), manifest)
    _progress(args, f"wrote data_out.csv and transform_manifest.json to {args.out}")


def _cmd_check_id(args):
    model = load_model(args.model)
    struct = model.structural
    if struct is None or struct.pattern is None:
        raise MixvarError("check-id needs a model with a structural block and a pattern")
    if not struct.lambdas:
        raise MixvarError("check-id needs at least two regimes")
    report = check_assumption1(struct.lambdas)
    result = check_identification(struct.pattern, report)
    doc = {
        "verdict": result.verdict.value,
        "failing_condition": result.failing_condition,
        "tied_pair": list(result.tied_pair) if result.tied_pair else None,
        "assumption1_holds": report.assumption1_holds,
        "columns": [dict(c) for c in result.columns],
    }
    _write_json(_out_path(args, "identification.json"), doc)
    print(result.verdict.value)


_COMMANDS = {
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "girf": _cmd_girf,
    "diagnose": _cmd_diagnose,
    "decompose": _cmd_decompose,
    "transform": _cmd_transform,
    "check-id": _cmd_check_id,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        _COMMANDS[args.verb](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (MixvarError, np.linalg.LinAlgError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
