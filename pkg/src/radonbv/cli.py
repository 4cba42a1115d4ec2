"""Command line entry points.

Subcommands: norms, approx-rate, horizon-approx, train, experiment, report.
Every run writes resolved_config.json next to its outputs.  Exit codes:
0 on success, 1 if any cell failed, 2 on configuration problems.
"""

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .approx import IntegralRepFunction, random_atomic_measure, subsample_to_shallow, \
    sup_error, disagreement_measure
from .bench import HorizonClassifier, aggregate_rows, base_family, read_report_csv, \
    run_experiment, slab_sampler, stable_seed, train_cell, write_aggregate_csv, \
    write_plotdata_csv
from .config import ConfigError, ExperimentConfig, as_dict, validate_config, \
    write_resolved_config
from .networks import compose_horizon_net, default_transition_width, eval_shallow, \
    net_to_json
from .radon import BoundaryFunction, boundary_norm


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _apply_override(raw: dict, spec: str) -> None:
    """--set a.b.c=VALUE; VALUE is parsed as JSON, falling back to a string."""
    key, sep, value = spec.partition("=")
    if not sep or not key:
        raise ConfigError([f"--set expects KEY=VALUE, got {spec!r}"])
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    node = raw
    parts = key.split(".")
    for p in parts[:-1]:
        nxt = node.setdefault(p, {})
        if not isinstance(nxt, dict):
            raise ConfigError([f"--set {key}: {p} is not an object"])
        node = nxt
    node[parts[-1]] = parsed


def _load_config(args) -> ExperimentConfig:
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError([f"config file not found: {path}"])
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"])
        if not isinstance(raw, dict):
            raise ConfigError(["config root must be a JSON object"])
    else:
        raw = {}
    for spec in args.set or []:
        _apply_override(raw, spec)
    return validate_config(raw)


def _settings_hash(settings) -> str:
    blob = json.dumps(dataclasses.asdict(settings), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def cmd_norms(cfg: ExperimentConfig, out: Path) -> int:
    """Estimate every configured norm for every family member and dimension."""
    est = cfg.norm_estimation
    h = _settings_hash(est)
    failures = 0
    with open(out / "norms.csv", "w", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["dim", "function_id", "norm_kind", "value",
                    "estimator_settings_hash", "seed"])
        for dim in sorted(cfg.dims):
            for f in base_family(dim):
                for kind in cfg.norms:
                    try:
                        value = boundary_norm(f, kind, est)
                    except Exception as exc:
                        failures += 1
                        print(f"norm failed for dim={dim} {f.closed_form_id} "
                              f"{kind}: {exc}", file=sys.stderr)
                        continue
                    w.writerow([dim, f.closed_form_id, kind, _fmt(value), h, est.seed])
    return 1 if failures else 0


def cmd_approx_rate(cfg: ExperimentConfig, out: Path) -> int:
    """Sup-norm error of subsampled shallow nets against random atomic targets.

    One target per trial, shared across the neuron grid; probe points are also
    shared across the grid so errors within a trial are paired.
    """
    blk = cfg.approx_rate
    failures = 0
    with open(out / "approx_rate.csv", "w", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["d", "N", "trial", "sup_error", "seed", "measure_id"])
        for trial in range(blk.trials):
            mseed = stable_seed(cfg.master_seed, "approx-rate", "measure", blk.d, trial)
            mu = random_atomic_measure(blk.d, blk.atoms, blk.total_variation,
                                       np.random.default_rng(mseed))
            g = IntegralRepFunction.zeroed_at_origin(mu)
            measure_id = f"d{blk.d}_t{trial:02d}_{mseed:016x}"
            probe_seed = stable_seed(cfg.master_seed, "approx-rate", "probes", blk.d, trial)
            for n_units in blk.neuron_grid:
                seed = stable_seed(cfg.master_seed, "approx-rate", "sub", blk.d, trial, n_units)
                try:
                    fn = subsample_to_shallow(g, n_units, np.random.default_rng(seed))
                    err = sup_error(g.evaluate, lambda p: eval_shallow(fn, p),
                                    blk.probe_points, blk.d,
                                    np.random.default_rng(probe_seed))
                except Exception as exc:
                    failures += 1
                    print(f"approx-rate failed for trial={trial} N={n_units}: {exc}",
                          file=sys.stderr)
                    continue
                w.writerow([blk.d, n_units, trial, _fmt(err), seed, measure_id])
    return 1 if failures else 0


def cmd_horizon_approx(cfg: ExperimentConfig, out: Path) -> int:
    """Disagreement mass between a horizon labeler and its composed network.

    The boundary is a random atomic representation on d-1 variables; each
    neuron count gets its own subsample and the transition width shrinks with
    the unit count.
    """
    blk = cfg.horizon_approx
    failures = 0
    with open(out / "horizon_approx.csv", "w", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["d", "N", "trial", "disagreement", "seed", "measure_id"])
        for trial in range(blk.trials):
            mseed = stable_seed(cfg.master_seed, "horizon-approx", "measure", blk.d, trial)
            mu = random_atomic_measure(blk.d - 1, blk.atoms, blk.total_variation,
                                       np.random.default_rng(mseed))
            g = IntegralRepFunction.zeroed_at_origin(mu)
            measure_id = f"d{blk.d}_t{trial:02d}_{mseed:016x}"
            boundary = BoundaryFunction(dim=blk.d - 1, evaluate=g.evaluate,
                                        frequency_sum=None, closed_form_id=measure_id)
            labeler = HorizonClassifier(boundary=boundary, axis=blk.d)
            probe_seed = stable_seed(cfg.master_seed, "horizon-approx", "probes", blk.d, trial)
            for n_units in blk.neuron_grid:
                seed = stable_seed(cfg.master_seed, "horizon-approx", "sub", blk.d, trial, n_units)
                try:
                    fn = subsample_to_shallow(g, n_units, np.random.default_rng(seed))
                    delta = default_transition_width(n_units, blk.d)
                    net = compose_horizon_net(fn, blk.d, delta)
                    dis = disagreement_measure(labeler, net, 0.5, blk.probe_points,
                                               slab_sampler(blk.d),
                                               np.random.default_rng(probe_seed))
                except Exception as exc:
                    failures += 1
                    print(f"horizon-approx failed for trial={trial} N={n_units}: {exc}",
                          file=sys.stderr)
                    continue
                w.writerow([blk.d, n_units, trial, _fmt(dis), seed, measure_id])
    return 1 if failures else 0


def cmd_train(cfg: ExperimentConfig, out: Path, args) -> int:
    """Train a single sweep cell and save the model plus its training report."""
    known = {f.closed_form_id for f in base_family(args.dim)}
    if args.function_id not in known:
        print(f"unknown function id {args.function_id!r} for dim {args.dim}",
              file=sys.stderr)
        return 2
    if args.norm not in cfg.norms:
        print(f"norm {args.norm!r} not in configured norms {list(cfg.norms)}",
              file=sys.stderr)
        return 2
    try:
        result, net, report = train_cell(cfg, args.dim, args.norm,
                                         args.function_id, args.m, args.trial)
    except Exception as exc:
        print(f"training failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    (out / "model.json").write_text(net_to_json(net) + "\n")
    payload = {
        "dim": result.dim,
        "norm_kind": result.norm_kind,
        "function_id": result.function_id,
        "m": result.m,
        "trial": result.trial,
        "seed": result.seed,
        "test_error": result.test_error,
        "final_empirical_risk": report.final_empirical_risk,
        "epochs_run": report.epochs_run,
        "projection_clips": report.projection_clips,
        "nonzero_weights": report.nonzero_weights,
        "weight_budget": report.weight_budget,
        "risk_trajectory": list(report.risk_trajectory),
    }
    (out / "train_report.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(f"test_error={result.test_error:.6f} "
          f"train_risk={report.final_empirical_risk:.6f} seed={result.seed}")
    return 0


def cmd_experiment(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    result = run_experiment(cfg, out, workers=workers)
    print(f"{len(result.rows)} cells ok, {len(result.failures)} failed")
    return 1 if result.failures else 0


def cmd_report(out: Path) -> int:
    """Rebuild aggregate.csv and the plot data from an existing report.csv."""
    path = out / "report.csv"
    if not path.is_file():
        print(f"no report found at {path}", file=sys.stderr)
        return 2
    rows = read_report_csv(path)
    write_aggregate_csv(aggregate_rows(rows), out / "aggregate.csv")
    norms = sorted({r.norm_kind for r in rows})
    for dim in sorted({r.dim for r in rows}):
        write_plotdata_csv(rows, norms, dim, out / f"plotdata_d{dim}.csv")
    print(f"aggregated {len(rows)} rows")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radonbv",
                                     description="Norm estimation, network "
                                     "approximation, and sample-complexity "
                                     "experiments for horizon classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults apply if omitted)")
        p.add_argument("--output-dir", default="out")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config entry (dotted path, JSON value)")

    common(sub.add_parser("norms", help="estimate boundary norms for the families"))
    common(sub.add_parser("approx-rate", help="sup-error of subsampled shallow nets"))
    common(sub.add_parser("horizon-approx", help="disagreement of composed horizon nets"))

    p_train = sub.add_parser("train", help="train one sweep cell")
    common(p_train)
    p_train.add_argument("--dim", type=int, required=True, choices=(2, 3, 4))
    p_train.add_argument("--norm", required=True)
    p_train.add_argument("--function-id", required=True)
    p_train.add_argument("--m", type=int, required=True)
    p_train.add_argument("--trial", type=int, default=0)

    p_exp = sub.add_parser("experiment", help="run the full sweep")
    common(p_exp)
    p_exp.add_argument("--workers", type=int, default=1)

    p_rep = sub.add_parser("report", help="recompute aggregates from report.csv")
    p_rep.add_argument("--output-dir", default="out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.output_dir)
    if args.command == "report":
        return cmd_report(out)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        for msg in exc.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    write_resolved_config(cfg, out)
    if args.command == "norms":
        return cmd_norms(cfg, out)
    if args.command == "approx-rate":
        return cmd_approx_rate(cfg, out)
    if args.command == "horizon-approx":
        return cmd_horizon_approx(cfg, out)
    if args.command == "train":
        return cmd_train(cfg, out, args)
    if args.command == "experiment":
        return cmd_experiment(cfg, out, args.workers)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
