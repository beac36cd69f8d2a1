"""Command-line entry point: ``strongdamp <command> [--config FILE] [--csv F] [--json F]``.

Exit status: 0 when every check passes, 1 when a check fails (named on
stderr), 2 for a bad config or unknown command.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from .config import ConfigError, ExperimentConfig, load_config

COMMANDS = (
    "verify-lemma21",
    "verify-theorem11",
    "profile-norms",
    "hf-envelope",
    "lemma22",
    "kirchhoff-crosscheck",
    "identities",
)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, an.FitResult):
        return {"exponent": x.exponent, "log_intercept": x.log_intercept,
                "residual_rms": x.residual_rms, "window": _jsonable(x.window)}
    if isinstance(x, an.BoundCheck):
        return {"sup_ratio": x.sup_ratio, "trend_slope": x.trend_slope, "window": _jsonable(x.window)}
    return x


def write_csv(path, rows, first="t"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([first, "value", "bound", "ratio"])
        for row in rows:
            w.writerow(["%.17g" % v for v in row])


def write_json(path, payload):
    Path(path).write_text(json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def _rows(t, value, bound):
    t, value, bound = (np.asarray(a, dtype=float) for a in (t, value, bound))
    return zip(t, value, bound, value / bound)


# each runner returns (payload, csv rows or None, csv first-column name)

def _run_lemma21(cfg):
    res = an.verify_lemma21(cfg)
    payload = {
        "exponent": res.fit, "bound_check": res.check, "checks": res.checks,
        "expected_exponent": an.expected_lemma21_exponent(cfg),
        "majorants": {
            "t": res.majorants.t, "quadrature": res.majorants.actual,
            "bounds": res.majorants.majorants, "fits": res.majorants.fits,
        },
    }
    return payload, _rows(res.series.t, res.series.values, res.bound), "t"


def _run_theorem11(cfg):
    res = an.verify_theorem11(cfg)
    payload = {
        "exponent": res.fit, "bound_check": res.check, "checks": res.checks,
        "low": res.low.values, "high": res.high.values, "t": res.series.t,
        "split_mismatch": res.split,
        "hf_part": {"t": res.hf_series.t, "value": res.hf_series.values, "fit": res.hf_fit,
                    "rate": res.hf_fit.rate},
        "profile_tail": {"t": res.tail_series.t, "value": res.tail_series.values,
                         "fit": res.tail_fit},
        "parseval": res.parseval,
    }
    return payload, _rows(res.series.t, res.series.values, res.bound), "t"


def _run_profile_norms(cfg):
    res = an.profile_norm_asymptotics(cfg.n, cfg.t_grid(), min(cfg.tol, 1e-10))
    t = res.sin_series.t
    payload = {
        "n": cfg.n, "I_sin": res.sin_series.values, "I_cos": res.cos_series.values, "t": t,
        "I_sin_fit": res.sin_fit, "I_cos_fit": res.cos_fit, "checks": res.checks,
        "log_ratio": res.log_ratio, "informational": res.informational,
    }
    # CSV carries I_sin against the rate t^{-(n-2)/2}
    return payload, _rows(t, res.sin_series.values, t ** (-(cfg.n - 2) / 2)), "t"


def _run_hf_envelope(cfg):
    res = an.hf_envelope(cfg)
    payload = {"r": res.r, "rates": res.rates, "expected": res.expected, "epsilon": res.epsilon,
               "fit_window": res.window, "checks": res.checks}
    return payload, _rows(res.r, res.rates, res.expected), "r"


def _run_lemma22(cfg):
    res = an.lemma22_experiment(cfg.samples, cfg.seed)
    payload = {k: getattr(res, k) for k in ("L", "M", "theta_star", "stationarity",
                                            "max_ratio_A", "max_ratio_B", "samples", "checks")}
    return payload, None, None


def _run_kirchhoff(cfg):
    payload = {"checks": {}}
    for n in (2, 3):
        res = an.kirchhoff_crosscheck(n, t=cfg.grid_t, box=cfg.grid_box)
        payload[f"n{n}"] = {"rel_l2": res.rel_l2, "eigencheck": res.eigencheck, "t": res.t}
        payload["checks"].update({f"n={n}: {k}": v for k, v in res.checks.items()})
    return payload, None, None


def _run_identities(cfg):
    res = an.identity_suite(cfg.samples, cfg.seed, cfg.delta0)
    payload = {"samples": res.samples, "max_decomposition_residual": res.max_decomposition_residual,
               "max_form_mismatch": res.max_form_mismatch, "checks": res.checks}
    return payload, None, None


RUNNERS = {
    "verify-lemma21": _run_lemma21,
    "verify-theorem11": _run_theorem11,
    "profile-norms": _run_profile_norms,
    "hf-envelope": _run_hf_envelope,
    "lemma22": _run_lemma22,
    "kirchhoff-crosscheck": _run_kirchhoff,
    "identities": _run_identities,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="strongdamp", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="TOML experiment config")
    parser.add_argument("--csv", type=Path, help="CSV output (t, value, bound, ratio)")
    parser.add_argument("--json", type=Path, help="JSON summary output")
    return parser


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        payload, rows, first = RUNNERS[args.command](cfg)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    checks = payload["checks"]
    passed = all(bool(v) for v in checks.values())
    payload.update({"command": args.command, "passed": passed})

    csv_path = args.csv or cfg.csv_path
    json_path = args.json or cfg.json_path
    if csv_path is not None and rows is not None:
        write_csv(csv_path, rows, first)
    if json_path is not None:
        write_json(json_path, payload)

    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        print(f"{args.command}: failed criterion: {'; '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_cli())
