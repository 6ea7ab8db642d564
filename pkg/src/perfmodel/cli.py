"""Command-line surface: train, predict, evaluate, epr, and synth.

Exit codes: 0 success, 1 success with prediction-quality warnings (clamped
layer predictions), 2 input errors. All randomness flows from explicit
seeds; PERFMODEL_SEED provides the fallback seed, and SOURCE_DATE_EPOCH (if
set) pins the timestamp embedded in model files so identical runs produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from pathlib import Path

from . import dataio, epr, netpredict, synth
from .arch import LayerSpecError, NetworkSpecError, parse_network
from .dataio import CSV_HEADER, DataError
from .layermodel import (ModelFormatError, ModelSet, load_model_set,
                         save_model_set, train_layer_model)
from .netpredict import ActualAggregates, PredictionReport, actual_aggregates
from .regress import InsufficientDataError

EXIT_OK = 0
EXIT_WARN = 1
EXIT_DATA = 2

_INPUT_ERRORS = (DataError, NetworkSpecError, LayerSpecError, ModelFormatError,
                 InsufficientDataError, OSError, json.JSONDecodeError)


def _fallback_seed() -> int:
    env = os.environ.get("PERFMODEL_SEED")
    return int(env) if env else 0


def _created_at() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        stamp = datetime.datetime.fromtimestamp(int(epoch), tz=datetime.timezone.utc)
    else:
        stamp = datetime.datetime.now(tz=datetime.timezone.utc)
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected a non-empty integer list")
    return values


# --- train -------------------------------------------------------------------

def cmd_train(args) -> int:
    samples = dataio.read_measurements_csv(args.data)
    by_kind: dict[str, list] = {"conv": [], "fc": [], "pool": []}
    for s in samples:
        by_kind[s.layer.kind].append(s)
    missing = [kind for kind, group in by_kind.items() if not group]
    if missing:
        raise DataError(f"dataset has no rows for layer kind(s): {', '.join(missing)}")
    models = {}
    for kind in ("conv", "fc", "pool"):
        for target in ("runtime", "power"):
            model = train_layer_model(
                by_kind[kind], target, degrees=args.degrees,
                folds=args.folds, lambda_count=args.lambda_count, seed=args.seed)
            models[(kind, target)] = model
            best = model.cv_report
            point = next(g for g in best.grid
                         if g.degree == best.best_degree and g.lam == best.best_lambda)
            print(f"{kind}/{target}: degree={model.degree} lambda={model.lam:.6g} "
                  f"terms={len(model.coefficients)} cv_rmse={point.cv_rmse:.6g} "
                  f"cv_rmspe={point.cv_rmspe:.4g}% train_rmspe={model.train_rmspe:.4g}%")
    model_set = ModelSet(models=models, platform_tag=args.platform_tag,
                         created_at=_created_at())
    save_model_set(model_set, args.out)
    print(f"wrote model set to {args.out}")
    return EXIT_OK


# --- predict -----------------------------------------------------------------

def _emit_text(report: PredictionReport) -> None:
    print(f"network: {report.network_name}")
    print(f"{'idx':>4} {'kind':<5} {'runtime_ms':>12} {'power_w':>10} {'energy_j':>12} flags")
    for p in report.per_layer:
        flags = ",".join(name for name, hit in
                         (("runtime_clamped", p.runtime_clamped),
                          ("power_clamped", p.power_clamped)) if hit) or "-"
        print(f"{p.index:>4} {p.layer_kind:<5} {p.runtime_ms:>12.6g} "
              f"{p.power_w:>10.6g} {p.energy_j:>12.6g} {flags}")
    print(f"total runtime: {report.total_runtime_ms:.6g} ms")
    print(f"average power: {report.avg_power_w:.6g} W")
    print(f"total energy:  {report.total_energy_j:.6g} J")
    print(f"runtime ranking: {' > '.join(map(str, report.ranking_by_runtime()))}")
    print(f"energy ranking:  {' > '.join(map(str, report.ranking_by_energy()))}")
    per_layer_sum = sum(p.energy_j for p in report.per_layer)
    identity = report.total_runtime_ms * report.avg_power_w / 1000.0
    rel = abs(identity - per_layer_sum) / per_layer_sum if per_layer_sum else 0.0
    print(f"energy identity check: total*avg vs per-layer sum, rel diff {rel:.3e} "
          f"({'ok' if rel < 1e-9 else 'VIOLATION'})")


def _report_json(report: PredictionReport) -> dict:
    return {
        "network": report.network_name,
        "layers": [{
            "index": p.index, "kind": p.layer_kind,
            "runtime_ms": p.runtime_ms, "power_w": p.power_w, "energy_j": p.energy_j,
            "runtime_clamped": p.runtime_clamped, "power_clamped": p.power_clamped,
        } for p in report.per_layer],
        "totals": {
            "runtime_ms": report.total_runtime_ms,
            "power_w": report.avg_power_w,
            "energy_j": report.total_energy_j,
        },
        "rankings": {
            "runtime": list(report.ranking_by_runtime()),
            "energy": list(report.ranking_by_energy()),
        },
        "clamped": report.has_clamped,
    }


def _emit_csv(report: PredictionReport, net) -> None:
    fieldnames = list(CSV_HEADER) + ["energy_j", "runtime_clamped", "power_clamped"]
    writer = csv.DictWriter(sys.stdout, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for p, layer in zip(report.per_layer, net.layers):
        row = dataio._layer_to_columns(layer)
        row["runtime_ms"] = repr(p.runtime_ms)
        row["power_w"] = repr(p.power_w)
        row["energy_j"] = repr(p.energy_j)
        row["runtime_clamped"] = str(p.runtime_clamped).lower()
        row["power_clamped"] = str(p.power_clamped).lower()
        writer.writerow(row)
    total = {name: "" for name in fieldnames}
    total["layer_type"] = "total"
    total["runtime_ms"] = repr(report.total_runtime_ms)
    total["power_w"] = repr(report.avg_power_w)
    total["energy_j"] = repr(report.total_energy_j)
    writer.writerow(total)


def cmd_predict(args) -> int:
    model_set = load_model_set(args.model)
    net = dataio.load_network(args.network)
    report = netpredict.predict_network(model_set, net)
    if args.format == "text":
        _emit_text(report)
    elif args.format == "json":
        json.dump(_report_json(report), sys.stdout, indent=1)
        print()
    else:
        _emit_csv(report, net)
    if report.has_clamped:
        print("warning: some layer predictions were clamped to their floor",
              file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


# --- evaluate ----------------------------------------------------------------

def _print_eval(name: str, report: PredictionReport, actual: ActualAggregates) -> None:
    summary = netpredict.evaluate_network(report, actual)
    print(f"network: {name}")
    print(f"{'quantity':<12} {'predicted':>14} {'actual':>14} {'rel_error':>10}")
    rows = (("runtime_ms", report.total_runtime_ms, actual.sum_runtime_ms, summary.runtime),
            ("power_w", report.avg_power_w, actual.weighted_power_w, summary.power),
            ("energy_j", report.total_energy_j, actual.sum_energy_j, summary.energy))
    for quantity, pred, act, err in rows:
        print(f"{quantity:<12} {pred:>14.6g} {act:>14.6g} {err:>+9.2%}")


def cmd_evaluate(args) -> int:
    if not args.data and not args.per_network:
        raise DataError("evaluate needs --data and/or --per-network")
    model_set = load_model_set(args.model)
    evaluated = []
    if args.data:
        samples = dataio.read_measurements_csv(args.data)
        from .arch import NetworkSpec
        net = NetworkSpec(name=Path(args.data).stem,
                          layers=tuple(s.layer for s in samples))
        report = netpredict.predict_network(model_set, net)
        actual = actual_aggregates([(s.runtime_ms, s.power_w) for s in samples])
        evaluated.append((net.name, report, actual))
    if args.per_network:
        with open(args.per_network, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, list) or not doc:
            raise DataError("--per-network file must be a non-empty JSON array")
        for i, entry in enumerate(doc):
            try:
                net = parse_network(entry["network"])
                act = entry["actual"]
                actual = ActualAggregates(
                    sum_runtime_ms=float(act["runtime_ms"]),
                    weighted_power_w=float(act["power_w"]),
                    sum_energy_j=float(act["energy_j"]))
                name = str(entry.get("name", net.name))
            except (KeyError, TypeError) as exc:
                raise DataError(f"--per-network entry {i}: {exc}") from exc
            report = netpredict.predict_network(model_set, net)
            evaluated.append((name, report, actual))
    summaries = []
    for name, report, actual in evaluated:
        _print_eval(name, report, actual)
        summaries.append(netpredict.evaluate_network(report, actual))
    suite = netpredict.suite_rmspe(summaries)
    print(f"suite RMSPE over {len(summaries)} network(s): "
          f"runtime {suite.runtime:.4g}% power {suite.power:.4g}% "
          f"energy {suite.energy:.4g}%")
    if any(report.has_clamped for _, report, _ in evaluated):
        print("warning: some layer predictions were clamped to their floor",
              file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


# --- epr ---------------------------------------------------------------------

def _parse_inline_candidates(text: str) -> list[epr.CandidateArch]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(":")
        if len(pieces) != 3:
            raise DataError(f"inline candidate must be name:error:epi_mj, got {part!r}")
        try:
            out.append(epr.CandidateArch(pieces[0], float(pieces[1]), float(pieces[2])))
        except ValueError as exc:
            raise DataError(f"inline candidate {part!r}: {exc}") from exc
    if not out:
        raise DataError("no inline candidates given")
    return out


def cmd_epr(args) -> int:
    if bool(args.candidates) == bool(args.inline):
        raise DataError("give exactly one of --candidates or --inline")
    cands = (dataio.read_candidates_csv(args.candidates) if args.candidates
             else _parse_inline_candidates(args.inline))
    alphas = args.alpha
    for alpha in alphas:
        if alpha < 1:
            raise DataError(f"alpha must be a positive integer, got {alpha}")
    header = f"{'name':<16} {'error':>8} {'epi_mj':>10} " + " ".join(
        f"{'M(a=' + str(a) + ')':>12}" for a in alphas)
    print(header)
    for cand in cands:
        scores = " ".join(f"{epr.epr_score(cand, a):>12.6g}" for a in alphas)
        print(f"{cand.name:<16} {cand.error:>8.4f} {cand.epi_mj:>10.6g} {scores}")
    for alpha in alphas:
        winner = epr.rank(cands, alpha)[0]
        print(f"best at alpha={alpha}: {winner.name}")
    return EXIT_OK


# --- synth -------------------------------------------------------------------

def cmd_synth(args) -> int:
    doc = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise DataError("synth config must be a JSON object")
    if args.seed is not None:
        doc["seed"] = args.seed
    elif "seed" not in doc:
        doc["seed"] = _fallback_seed()
    try:
        config = synth.SynthConfig.from_dict(doc)
    except ValueError as exc:
        raise DataError(f"bad synth config: {exc}") from exc
    samples, truth = synth.generate(config)
    if not samples:
        raise DataError("config produced no samples (all counts zero?)")
    dataio.write_measurements_csv(args.out, samples)
    save_model_set(truth, args.truth)
    print(f"wrote {len(samples)} samples to {args.out} "
          f"(seed {config.seed}, noise {config.noise_pct}%)")
    print(f"wrote hidden truth models to {args.truth}")
    return EXIT_OK


# --- wiring ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perfmodel",
        description="Layer-wise runtime/power/energy prediction for serial CNNs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the six per-layer models from a measurement CSV")
    p.add_argument("--data", required=True, help="measurement CSV")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--degrees", type=_parse_int_list, default=[1, 2, 3],
                   help="candidate polynomial degrees (default 1,2,3)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambda-count", type=int, default=30,
                   help="points on the regularization path")
    p.add_argument("--platform-tag", default="unspecified")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict runtime/power/energy of a network")
    p.add_argument("--model", required=True)
    p.add_argument("--network", required=True, help="network spec JSON")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="compare predictions against measured values")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="per-layer measurement CSV treated as one network")
    p.add_argument("--per-network", help="JSON array of {name, network, actual} entries")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("epr", help="rank candidate architectures by energy-precision score")
    p.add_argument("--candidates", help="CSV with name,error,epi_mj columns")
    p.add_argument("--inline", help="comma-separated name:error:epi_mj triples")
    p.add_argument("--alpha", type=_parse_int_list, default=[1, 2, 3, 4])
    p.set_defaults(func=cmd_epr)

    p = sub.add_parser("synth", help="generate a synthetic dataset with hidden truth models")
    p.add_argument("--config", help="synth config JSON (defaults used when omitted)")
    p.add_argument("--out", required=True, help="output measurement CSV")
    p.add_argument("--truth", required=True, help="output hidden-truth model JSON")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command == "train":
        args.seed = _fallback_seed()
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
