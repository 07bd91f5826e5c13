"""Command-line entry point: ``weakvalues {run,sweep,mc,response}``.

Every number printed here comes from a library call; the CLI only
assembles and formats. JSON reports carry ``"schema": 1``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amplitudes import interference_contrast
from .exceptions import DarkStateError, GridError, ValidationError
from .montecarlo import estimate, sample_trials
from .pointer import (
    PADDING,
    PointerProfile,
    QuadratureGrid,
    conditional_mean_reading,
    joint_distribution,
    momentum_mean_reading,
    unconditional_mean_reading,
)
from .scenarios import builtin_scenario, load_scenario
from .values import abl_value, linear_response, weak_value

REPORT_SCHEMA = 1
BUILTIN = ("spin", "three-path", "identity-two-level")
EXIT_CONFIG, EXIT_NUMERICAL = 2, 3


class ConfigError(Exception):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")


def parse_params(text: str | None) -> dict:
    """``"a=0.3,a_prime=0.1+0.2j"`` → ``{"a": 0.3, "a_prime": (0.1+0.2j)}``."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, raw = item.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError("--params", f"expected key=value, got {item!r}")
        try:
            out[key] = float(raw)
        except ValueError:
            try:
                out[key] = complex(raw.replace("i", "j") if "j" not in raw else raw)
            except ValueError:
                raise ConfigError(f"--params.{key}", f"not a number: {raw!r}") from None
    return out


def parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(flag, f"expected comma-separated numbers, got {text!r}") from None
    return values


def fmt_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}i"


def _json_weak(wv):
    if wv.diverged:
        return "divergent"
    return [wv.value.real, wv.value.imag]


def _csv_weak(wv):
    if wv.diverged:
        return f"divergent(|denominator|={wv.denominator_magnitude:.3g})"
    return fmt_complex(wv.value)


def _or_none(fn, *args):
    try:
        return fn(*args)
    except DarkStateError:
        return None


def load(args):
    if args.scenario in BUILTIN:
        scenario = builtin_scenario(args.scenario, parse_params(args.params))
    else:
        if args.params:
            raise ConfigError("--params", "parameters apply only to built-in scenarios")
        if not Path(args.scenario).exists():
            raise ConfigError("--scenario", f"not a built-in name ({', '.join(BUILTIN)}) or an existing file")
        scenario = load_scenario(args.scenario)
    name = args.observable or ("pi_1" if "pi_1" in scenario.observables else next(iter(scenario.observables)))
    return scenario, name, scenario.observable(name)


def make_profile(args, delta_f=None):
    return PointerProfile.gaussian(args.delta_f if delta_f is None else delta_f, args.beta)


def make_grid(args, observable, profile):
    if args.grid_points is None and args.grid_span == PADDING:
        return None
    if args.grid_points is not None and (args.grid_points < 513 or args.grid_points % 2 == 0):
        raise ConfigError("--grid-points", "must be odd and at least 513")
    return QuadratureGrid.covering(observable.eigenvalues * profile.coupling, profile,
                                   points=args.grid_points, padding=args.grid_span)


def header(args, scenario, obs_name, observable, command):
    return {
        "schema": REPORT_SCHEMA,
        "command": command,
        "scenario": scenario.name,
        "observable": obs_name,
        "eigenvalues": observable.eigenvalues.tolist(),
        "beta": args.beta,
        "notes": list(scenario.notes),
    }


def emit(args, report, rows, columns, out):
    if args.output == "json":
        out.write(json.dumps(report, indent=2, allow_nan=False) + "\n")
        return
    for note in report.get("notes", []):
        out.write(f"# {note}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else row.get(c) for c in columns])


def cmd_run(args, out):
    scenario, obs_name, observable = load(args)
    profile = make_profile(args)
    jd = joint_distribution(scenario.chain, observable, profile, make_grid(args, observable, profile))
    report = header(args, scenario, obs_name, observable, "run")
    report.update(delta_f=args.delta_f, grid={
        "f_min": jd.grid.f_min, "f_max": jd.grid.f_max, "points": jd.grid.points,
        "norm_defect": jd.norm_defect})
    finals, rows = [], []
    for i in range(scenario.chain.dim):
        wv = weak_value(jd.table, observable.eigenvalues, i)
        abl = _or_none(abl_value, jd.table, observable.eigenvalues, i)
        p_int, p_res = interference_contrast(jd.table, i)
        cond = _or_none(conditional_mean_reading, jd, i)
        mom = _or_none(momentum_mean_reading, scenario.chain, observable, profile, i)
        rec = {
            "index": i,
            "postselection_probability": jd.postselection_probability(i),
            "p_interfering": p_int,
            "p_resolved": p_res,
            "abl": None if abl is None else abl.value,
            "weak_value": _json_weak(wv),
            "weak_value_denominator": wv.denominator_magnitude,
            "weak_value_diverged": wv.diverged,
            "conditional_mean": cond,
            "conditional_mean_over_beta": None if cond is None else cond / args.beta,
            "momentum_mean": mom,
            "unconditional_mean": unconditional_mean_reading(jd, i),
            "dark": cond is None,
        }
        finals.append(rec)
        rows.append(dict(rec, weak_value=_csv_weak(wv)))
    report["finals"] = finals
    emit(args, report, rows, RUN_COLUMNS, out)


RUN_COLUMNS = [
    "index", "postselection_probability", "p_interfering", "p_resolved", "abl", "weak_value",
    "weak_value_diverged", "conditional_mean", "conditional_mean_over_beta", "momentum_mean",
    "unconditional_mean", "dark",
]


def cmd_sweep(args, out):
    scenario, obs_name, observable = load(args)
    strengths = parse_floats(args.strengths or "", "--strengths")
    if len(strengths) < 2:
        raise ConfigError("--strengths", "need at least two pointer widths")
    if any(not (s > 0 and math.isfinite(s)) for s in strengths):
        raise ConfigError("--strengths", "pointer widths must be positive")
    n = scenario.chain.dim
    rows = []
    table = None
    for s in strengths:
        profile = make_profile(args, s)
        jd = joint_distribution(scenario.chain, observable, profile, make_grid(args, observable, profile))
        table = jd.table
        row = {"delta_f": s}
        for i in range(n):
            row[f"cond_mean_{i}"] = _or_none(conditional_mean_reading, jd, i)
            row[f"p_{i}"] = jd.postselection_probability(i)
            row[f"uncond_mean_{i}"] = unconditional_mean_reading(jd, i)
        rows.append(row)
    asymptotes = {}
    for i in range(n):
        abl = _or_none(abl_value, table, observable.eigenvalues, i)
        wv = weak_value(table, observable.eigenvalues, i)
        p_int, p_res = interference_contrast(table, i)
        asymptotes.update({
            f"abl_{i}": None if abl is None else args.beta * abl.value,
            f"re_weak_{i}": None if wv.diverged else args.beta * wv.value.real,
            f"p_interfering_{i}": p_int,
            f"p_resolved_{i}": p_res,
        })
    for row in rows:
        row.update(asymptotes)
    columns = ["delta_f"]
    for i in range(n):
        columns += [f"cond_mean_{i}", f"abl_{i}", f"re_weak_{i}", f"p_{i}",
                    f"p_resolved_{i}", f"p_interfering_{i}", f"uncond_mean_{i}"]
    report = header(args, scenario, obs_name, observable, "sweep")
    report["rows"] = [{c: r[c] for c in columns} for r in rows]
    emit(args, report, rows, columns, out)


def _regime(args, observable):
    if args.regime != "auto":
        return args.regime
    ev = np.unique(observable.eigenvalues)
    gap = float(np.min(np.diff(ev))) if ev.size > 1 else math.inf
    return "strong" if args.delta_f <= 0.05 * gap else "weak"


def cmd_mc(args, out):
    scenario, obs_name, observable = load(args)
    if args.trials < 1:
        raise ConfigError("--trials", "must be at least 1")
    profile = make_profile(args)
    jd = joint_distribution(scenario.chain, observable, profile, make_grid(args, observable, profile))
    trials = sample_trials(jd, args.trials, args.seed)
    if args.dump_trials:
        trials.to_csv(args.dump_trials)
    regime = _regime(args, observable)
    est = estimate(trials, observable.eigenvalues, regime, args.beta)
    report = header(args, scenario, obs_name, observable, "mc")
    report.update(delta_f=args.delta_f, trials=args.trials, seed=args.seed, regime=regime)
    finals, rows = [], []
    for i, st in enumerate(est.per_final):
        abl = _or_none(abl_value, jd.table, observable.eigenvalues, i)
        wv = weak_value(jd.table, observable.eigenvalues, i)
        rec = {
            "index": i,
            "count": st.count,
            "frequency": st.frequency,
            "frequency_stderr": st.frequency_stderr,
            "mean": _finite(st.mean),
            "mean_stderr": _finite(st.mean_stderr),
            "unconditional_mean": st.unconditional_mean,
            "unconditional_stderr": _finite(st.unconditional_stderr),
            "oracle_probability": jd.postselection_probability(i),
            "oracle_conditional_mean": _or_none(conditional_mean_reading, jd, i),
            "oracle_unconditional_mean": unconditional_mean_reading(jd, i),
            "oracle_abl": None if abl is None else abl.value,
            "oracle_re_weak": None if wv.diverged else wv.value.real,
        }
        if st.class_counts is not None:
            rec["class_counts"] = list(st.class_counts)
        finals.append(rec)
        rows.append(rec)
    report["finals"] = finals
    emit(args, report, rows, MC_COLUMNS, out)


MC_COLUMNS = [
    "index", "count", "frequency", "frequency_stderr", "mean", "mean_stderr",
    "unconditional_mean", "unconditional_stderr", "oracle_probability",
    "oracle_conditional_mean", "oracle_unconditional_mean", "oracle_abl", "oracle_re_weak",
]


def _finite(x):
    return x if x is not None and math.isfinite(x) else None


def cmd_response(args, out):
    scenario, obs_name, observable = load(args)
    s = args.strength
    if not math.isfinite(s):
        raise ConfigError("--strength", "must be finite")
    report = header(args, scenario, obs_name, observable, "response")
    report["strength"] = s
    finals, rows = [], []
    for i in range(scenario.chain.dim):
        try:
            full = linear_response(scenario.chain, observable.scaled(s), i)
            half = linear_response(scenario.chain, observable.scaled(s / 2), i)
        except DarkStateError:
            continue
        ratio = full.residual / half.residual if half.residual != 0 else None
        rec = {
            "index": i,
            "p0": full.p0,
            "delta_p_exact": full.delta_p_exact,
            "first_order_prediction": full.first_order_prediction,
            "residual": full.residual,
            "delta_p_exact_half": half.delta_p_exact,
            "first_order_prediction_half": half.first_order_prediction,
            "residual_half": half.residual,
            "residual_ratio": ratio,
        }
        finals.append(rec)
        rows.append(rec)
    if not finals:
        raise DarkStateError("every final state has vanishing unperturbed probability")
    report["finals"] = finals
    emit(args, report, rows, list(finals[0]), out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakvalues", description="Pre- and post-selected measurement simulator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True,
                        help=f"built-in name ({', '.join(BUILTIN)}) or a scenario JSON file")
    common.add_argument("--params", help="built-in scenario parameters, k=v,...")
    common.add_argument("--observable", help="observable name (default pi_1)")
    common.add_argument("--delta-f", type=float, default=1.0, help="pointer width")
    common.add_argument("--beta", type=float, default=1.0, help="coupling strength")
    common.add_argument("--grid-points", type=int, help="odd number of quadrature points (>= 513)")
    common.add_argument("--grid-span", type=float, default=PADDING,
                        help="padding around the shifted eigenvalues, in pointer widths (>= 10)")
    common.add_argument("--output", choices=("json", "csv"), default="json")

    sub.add_parser("run", parents=[common], help="closed forms and pointer readings at one width")
    p = sub.add_parser("sweep", parents=[common], help="conditional means across pointer widths")
    p.add_argument("--strengths", required=True, help="comma-separated pointer widths")
    p = sub.add_parser("mc", parents=[common], help="Monte Carlo trials and estimators")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--regime", choices=("auto", "strong", "weak"), default="auto")
    p.add_argument("--dump-trials", help="write trial,final_index,reading CSV here")
    p = sub.add_parser("response", parents=[common], help="linear response to an impulsive kick")
    p.add_argument("--strength", type=float, default=0.01, help="perturbation scale s in V = s*B")
    return parser


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "mc": cmd_mc, "response": cmd_response}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        if not (args.delta_f > 0 and math.isfinite(args.delta_f)):
            raise ConfigError("--delta-f", "must be positive")
        if not (args.beta > 0 and math.isfinite(args.beta)):
            raise ConfigError("--beta", "must be positive")
        buf = io.StringIO()
        COMMANDS[args.command](args, buf)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridError, DarkStateError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
