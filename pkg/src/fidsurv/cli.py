"""Command-line interface.

Subcommands read survival CSV data, run the library operations, and
write CSV/JSON artifacts plus a run manifest that records the command,
options, input fingerprints, output hashes, and library versions, so
any artifact can be regenerated from its manifest alone. All randomness
flows from --seed; --threads never changes results.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import sys
import time

import numpy as np
import scipy

from . import __version__
from .curves import EvaluationWindow, StepCurve
from .dataset import parse_dataset, sort_and_validate, split_groups
from .errors import FidsurvError
from .estimators import TAIL_CONVENTIONS, fiducial_point_estimate, kaplan_meier, modified_km
from .inference import curvewise_band, one_sample_test, pointwise_ci, quantile_ci, two_sample_test
from .logrank import WEIGHT_KINDS, WeightSpec, run_all_variants, sup_logrank, weighted_logrank
from .sampler import RngStream, sample_ensemble
from .simlab import (
    PRESETS,
    TwoSampleScenario,
    parse_scenario,
    run_band_experiment,
    run_ci_experiment,
    run_mse_experiment,
    run_power_experiment,
)

MANIFEST_NAME = "manifest.json"
# keys that legitimately differ between reruns of the same command
MANIFEST_VOLATILE_KEYS = ("started_at", "elapsed_seconds")


def _env(name, cast, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    return cast(raw)


def _add_common(p, *, m=True, seed=True, level=False, alpha=False, window=False):
    p.add_argument("--out", default=_env("FIDSURV_OUT", str, "."), help="output directory")
    p.add_argument("--threads", type=int, default=_env("FIDSURV_THREADS", int, 1), help="worker cap; never changes results")
    if m:
        p.add_argument("--m", type=int, default=_env("FIDSURV_M", int, 1000), help="fiducial sample size")
    if seed:
        p.add_argument("--seed", type=int, default=_env("FIDSURV_SEED", int, 0), help="master random seed")
    if level:
        p.add_argument("--level", type=float, default=_env("FIDSURV_LEVEL", float, 0.95), help="confidence level")
    if alpha:
        p.add_argument("--alpha", type=float, default=_env("FIDSURV_ALPHA", float, 0.05), help="test level")
    if window:
        p.add_argument("--window", type=float, default=None, help="right endpoint of the evaluation window")


def _build_parser():
    top = argparse.ArgumentParser(prog="fidsurv", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=f"fidsurv {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="point estimates: product-limit and fiducial median")
    p.add_argument("data", help="survival CSV (time,status[,group])")
    p.add_argument("--tail", choices=TAIL_CONVENTIONS, default="kml")
    _add_common(p)

    p = sub.add_parser("ci", help="pointwise confidence intervals for S(t)")
    p.add_argument("data")
    p.add_argument("--times", required=True, help="comma-separated evaluation times")
    p.add_argument("--flavor", choices=("interp", "conservative"), default="interp")
    _add_common(p, level=True)

    p = sub.add_parser("quantile-ci", help="confidence interval for a survival quantile time")
    p.add_argument("data")
    p.add_argument("--q", type=float, required=True, help="survival level to invert at")
    _add_common(p, level=True)

    p = sub.add_parser("band", help="simultaneous confidence band")
    p.add_argument("data")
    _add_common(p, level=True, window=True)

    p = sub.add_parser("test", help="one-sample curve test against a null CSV")
    p.add_argument("data")
    p.add_argument("--null", required=True, help="CSV of (t, survival) step-curve knots")
    p.add_argument("--sided", choices=("two", "lower", "upper"), default="two")
    _add_common(p, window=True)

    p = sub.add_parser("test2", help="two-sample fiducial curve test")
    p.add_argument("data", nargs="+", help="two CSVs, or one CSV with a group column")
    _add_common(p, window=True)

    p = sub.add_parser("logrank", help="weighted and supremum log-rank comparators")
    p.add_argument("data", nargs="+", help="two CSVs, or one CSV with a group column")
    p.add_argument("--weight", choices=WEIGHT_KINDS, default=None, help="single weight (default: all variants)")
    p.add_argument("--sup", action="store_true", help="supremum form of the selected weight")
    p.add_argument("--fh-p", type=float, default=1.0)
    p.add_argument("--fh-q", type=float, default=1.0)
    _add_common(p, m=False, seed=False, alpha=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment from a TOML/JSON config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--reps", type=int, default=None, help="override the replication count")
    p.add_argument("--m", type=int, default=None, help="override the fiducial sample size")
    p.add_argument("--out", default=_env("FIDSURV_OUT", str, "."))
    p.add_argument("--threads", type=int, default=_env("FIDSURV_THREADS", int, 1))

    p = sub.add_parser("plotdata", help="grid CSV of curves, band, and sample draws for plotting")
    p.add_argument("data")
    p.add_argument("--tail", choices=TAIL_CONVENTIONS, default="kml")
    p.add_argument("--draws", type=int, default=0, help="also export this many individual draws")
    p.add_argument("--dump-ensemble", action="store_true", help="export the full ensemble component CSVs")
    _add_common(p, level=True, window=True)

    return top


# ---------------------------------------------------------------------------
# artifact plumbing


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


class _Run:
    """Collects inputs/outputs and writes the manifest at the end."""

    def __init__(self, args):
        self.args = args
        self.outdir = args.out
        os.makedirs(self.outdir, exist_ok=True)
        self.inputs = {}
        self.outputs = []
        self.started = time.monotonic()

    def read_dataset(self, path):
        with open(path, "r", encoding="utf-8") as fh:
            data = parse_dataset(fh)
        self.inputs[os.path.basename(path)] = data.fingerprint()
        return data

    def path(self, name):
        full = os.path.join(self.outdir, name)
        self.outputs.append(full)
        return full

    def write_csv(self, name, header, rows):
        import csv

        full = self.path(name)
        with open(full, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# manifest: {MANIFEST_NAME}\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
        return full

    def write_json(self, name, payload):
        full = self.path(name)
        payload = dict(payload)
        payload["manifest"] = MANIFEST_NAME
        with open(full, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return full

    def finish(self):
        options = {
            k: v for k, v in sorted(vars(self.args).items()) if k not in ("command",) and not callable(v)
        }
        manifest = {
            "command": self.args.command,
            "options": options,
            "versions": {
                "fidsurv": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "inputs": self.inputs,
            "outputs": {os.path.basename(p): _sha256(p) for p in self.outputs},
            "started_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "elapsed_seconds": time.monotonic() - self.started,
        }
        with open(os.path.join(self.outdir, MANIFEST_NAME), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _two_datasets(run, paths):
    if len(paths) == 2:
        return run.read_dataset(paths[0]), run.read_dataset(paths[1])
    if len(paths) == 1:
        groups = split_groups(run.read_dataset(paths[0]))
        if len(groups) != 2:
            raise FidsurvError(f"need exactly 2 groups, found {sorted(groups)}")
        labels = sorted(groups)
        return groups[labels[0]], groups[labels[1]]
    raise FidsurvError("expected one grouped CSV or two CSVs")


def _window_for(sd, tau):
    return EvaluationWindow.for_dataset(sd, tau) if tau is not None else None


def _fmt(x):
    return f"{x:.6g}"


def _read_null_curve(path):
    knots, values = [], []
    with open(path, "r", encoding="utf-8") as fh:
        import csv

        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                continue  # header line
            knots.append(t)
            values.append(v)
    if not knots:
        raise FidsurvError(f"no numeric (t, survival) rows in {path}")
    return StepCurve(np.asarray(knots), np.asarray(values))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_fit(run, args):
    sd = sort_and_validate(run.read_dataset(args.data))
    est = kaplan_meier(sd, tail=args.tail)
    modified = modified_km(sd)
    ts = sd.event_times

    header = ["t", "estimate", "variance", "modified_estimate"]
    columns = [ts, est.curve.values, est.variance, modified.values]
    if args.m > 0 and sd.n_failures > 0:
        ensemble = sample_ensemble(sd, args.m, RngStream(args.seed))
        median = fiducial_point_estimate(ensemble)
        header.append("fiducial_median")
        columns.append(np.asarray(median(ts)))
    rows = [[_fmt(c[i]) for c in columns] for i in range(ts.size)]
    run.write_csv("estimates.csv", header, rows)
    print(f"n={sd.n} failures={sd.n_failures} events={ts.size} tail={args.tail}")
    if ts.size:
        print(f"estimate at last event t={_fmt(ts[-1])}: {_fmt(est.curve.values[-1])}")
    return 0


def _cmd_ci(run, args):
    sd = sort_and_validate(run.read_dataset(args.data))
    ensemble = sample_ensemble(sd, args.m, RngStream(args.seed))
    flavor = "interpolation" if args.flavor == "interp" else args.flavor
    times = [float(tok) for tok in args.times.split(",") if tok.strip()]
    rows = []
    for t in times:
        lo, hi = pointwise_ci(ensemble, t, args.level, flavor)
        rows.append([_fmt(t), flavor, _fmt(args.level), _fmt(lo), _fmt(hi)])
        print(f"S({_fmt(t)}): [{_fmt(lo)}, {_fmt(hi)}]  ({flavor}, level {args.level})")
    run.write_csv("intervals.csv", ["t", "flavor", "level", "lower", "upper"], rows)
    return 0


def _cmd_quantile_ci(run, args):
    sd = sort_and_validate(run.read_dataset(args.data))
    ensemble = sample_ensemble(sd, args.m, RngStream(args.seed))
    lo, hi = quantile_ci(ensemble, args.q, args.level)
    open_ended = not np.isfinite(hi)
    run.write_json(
        "quantile_ci.json",
        {
            "q": args.q,
            "level": args.level,
            "lower": lo if np.isfinite(lo) else None,
            "upper": None if open_ended else hi,
            "open_ended": open_ended,
        },
    )
    lower_txt = _fmt(lo) if np.isfinite(lo) else "open-ended"
    upper_txt = "open-ended" if open_ended else _fmt(hi)
    print(f"time at survival {args.q}: [{lower_txt}, {upper_txt}]  (level {args.level})")
    return 0


def _cmd_band(run, args):
    sd = sort_and_validate(run.read_dataset(args.data))
    ensemble = sample_ensemble(sd, args.m, RngStream(args.seed))
    band = curvewise_band(ensemble, args.level, _window_for(sd, args.window))
    rows = [[_fmt(t), _fmt(lo), _fmt(c), _fmt(hi)] for t, lo, c, hi in band.grid_rows()]
    run.write_csv("band.csv", ["t", "lower", "center", "upper"], rows)
    run.write_json(
        "band.json",
        {"radius": band.radius, "level": band.level, "tau": band.window.tau},
    )
    print(f"band radius {_fmt(band.radius)} at level {args.level} on [0, {_fmt(band.window.tau)}]")
    return 0


def _cmd_test(run, args):
    sd = sort_and_validate(run.read_dataset(args.data))
    ensemble = sample_ensemble(sd, args.m, RngStream(args.seed))
    null_curve = _read_null_curve(args.null)
    report = one_sample_test(ensemble, null_curve, sided=args.sided, window=_window_for(sd, args.window))
    run.write_json("test.json", json.loads(report.to_json()))
    print(f"one-sample {args.sided}-sided: statistic {_fmt(report.statistic)} p={_fmt(report.p_value)}")
    if report.at_resolution_floor:
        print(f"p-value below the 1/{report.m} resolution of the ensemble")
    return 0


def _cmd_test2(run, args):
    data_a, data_b = _two_datasets(run, args.data)
    sd_a, sd_b = sort_and_validate(data_a), sort_and_validate(data_b)
    ens_a = sample_ensemble(sd_a, args.m, RngStream(args.seed, 0))
    ens_b = sample_ensemble(sd_b, args.m, RngStream(args.seed, 1))
    window = EvaluationWindow.for_two_samples(sd_a, sd_b, args.window) if args.window is not None else None
    report = two_sample_test(ens_a, ens_b, window=window)
    run.write_json("test2.json", json.loads(report.to_json()))
    print(f"two-sample: statistic {_fmt(report.statistic)} p={_fmt(report.p_value)}")
    if report.at_resolution_floor:
        print(f"p-value below the 1/{report.m} resolution of the ensemble")
    return 0


def _cmd_logrank(run, args):
    data_a, data_b = _two_datasets(run, args.data)
    sd_a, sd_b = sort_and_validate(data_a), sort_and_validate(data_b)
    if args.weight is None:
        results = run_all_variants(sd_a, sd_b, fh=(args.fh_p, args.fh_q))
    else:
        spec = WeightSpec(args.weight, args.fh_p, args.fh_q)
        one = sup_logrank(sd_a, sd_b, spec) if args.sup else weighted_logrank(sd_a, sd_b, spec)
        results = {("S" if args.sup else "") + args.weight: one}
    payload = {
        name: {"test": r.test, "form": r.form, "statistic": r.statistic, "p_value": r.p_value}
        for name, r in results.items()
    }
    run.write_json("logrank.json", payload)
    for name in sorted(results):
        r = results[name]
        flag = " *" if r.p_value < args.alpha else ""
        print(f"{name:>5}: statistic {_fmt(r.statistic):>10} p={_fmt(r.p_value)}{flag}")
    return 0


def _load_config(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".json"):
        return json.loads(raw.decode("utf-8"))
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(raw.decode("utf-8"))


def _scenario_from_config(cfg):
    if "preset" in cfg:
        name = cfg["preset"]
        if name not in PRESETS:
            raise FidsurvError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
        return PRESETS[name]
    if "group_a" in cfg or "group_b" in cfg:
        return TwoSampleScenario(parse_scenario(cfg["group_a"]), parse_scenario(cfg["group_b"]))
    return parse_scenario(cfg)


def _cmd_simulate(run, args):
    cfg = _load_config(args.config)
    self_keys = {"kind", "seed", "reps", "m", "level", "alpha", "times", "survival_levels", "preset"}
    scenario_cfg = {k: v for k, v in cfg.items() if k not in self_keys}
    scenario = _scenario_from_config({**scenario_cfg, **({"preset": cfg["preset"]} if "preset" in cfg else {})})

    kind = cfg.get("kind")
    if kind not in ("ci", "mse", "power", "band"):
        raise FidsurvError("config needs kind = 'ci' | 'mse' | 'power' | 'band'")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    reps = args.reps if args.reps is not None else int(cfg.get("reps", 100))
    m = args.m if args.m is not None else int(cfg.get("m", 1000))
    workers = max(1, args.threads)

    if kind == "ci":
        result = run_ci_experiment(
            scenario, cfg["times"], reps, m, float(cfg.get("level", 0.95)), seed, workers
        )
        header = ["flavor", "t", "lower_miss_pct", "upper_miss_pct", "mean_width"]
    elif kind == "mse":
        result = run_mse_experiment(scenario, cfg["survival_levels"], reps, m, seed, workers)
        header = ["estimator", "survival_level", "t", "mse"]
    elif kind == "power":
        result = run_power_experiment(scenario, reps, m, float(cfg.get("alpha", 0.05)), seed, workers)
        header = ["test", "rejection_pct"]
    else:
        result = run_band_experiment(scenario, reps, m, float(cfg.get("level", 0.95)), seed, workers)
        header = ["level", "coverage_pct"]

    rows = [[_fmt(v) if isinstance(v, float) else v for v in row] for row in result.rows()]
    run.write_csv("results.csv", header, rows)
    run.write_json(
        "results.json",
        {
            "kind": kind,
            "scenario": result.scenario,
            "reps": result.reps,
            "m": result.m,
            "seed": result.seed,
            "rows": [list(map(str, row)) for row in rows],
        },
    )
    for row in rows:
        print("  ".join(str(v) for v in row))
    print(f"{kind} experiment: {reps} replications in {result.runtime_seconds:.1f}s")
    return 0


def _cmd_plotdata(run, args):
    sd = sort_and_validate(run.read_dataset(args.data))
    ensemble = sample_ensemble(sd, args.m, RngStream(args.seed))
    window = _window_for(sd, args.window) or ensemble.window()
    ts = window.grid

    est = kaplan_meier(sd, tail=args.tail)
    modified = modified_km(sd)
    band = curvewise_band(ensemble, args.level, window)
    header = ["t", "kaplan_meier", "modified", "fiducial_median", "band_lower", "band_center", "band_upper"]
    columns = [
        ts,
        np.asarray(est(ts)),
        np.asarray(modified(ts)),
        np.asarray(band.center(ts)),
        band.lower(ts),
        np.asarray(band.center(ts)),
        band.upper(ts),
    ]
    if args.draws > 0:
        interp = ensemble.eval_interp(ts)
        for j in range(min(args.draws, ensemble.m)):
            header.append(f"draw_{j}")
            columns.append(interp[j])
    rows = [[_fmt(c[i]) for c in columns] for i in range(ts.size)]
    run.write_csv("curves.csv", header, rows)

    if args.dump_ensemble:
        for name, values in (
            ("ensemble_lower.csv", ensemble.eval_lower(ts)),
            ("ensemble_upper.csv", ensemble.eval_upper(ts)),
            ("ensemble_interp.csv", ensemble.eval_interp(ts)),
        ):
            rows = [
                [str(j), _fmt(ts[i]), _fmt(values[j, i])]
                for j in range(ensemble.m)
                for i in range(ts.size)
            ]
            run.write_csv(name, ["draw", "t", "value"], rows)
        run.write_json(
            "ensemble_meta.json",
            {
                "m": ensemble.m,
                "seed": args.seed,
                "dataset_fingerprint": sd.source_fingerprint,
                "grid": ts.tolist(),
            },
        )
    print(f"wrote plotting grid with {ts.size} times on [0, {_fmt(window.tau)}]")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "ci": _cmd_ci,
    "quantile-ci": _cmd_quantile_ci,
    "band": _cmd_band,
    "test": _cmd_test,
    "test2": _cmd_test2,
    "logrank": _cmd_logrank,
    "simulate": _cmd_simulate,
    "plotdata": _cmd_plotdata,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    run = _Run(args)
    try:
        code = _COMMANDS[args.command](run, args)
        run.finish()
        return code
    except (FidsurvError, FileNotFoundError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
