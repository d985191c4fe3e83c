"""Command-line entry point for reproducible number-game runs.

Subcommands: space, reference, ingest-validate, fit, metrics, agent.
Exit codes: 0 success, 1 validation failure, 2 usage or I/O error.
Every run writes a run-manifest JSON next to its outputs recording the
resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import agents, fitting, metrics, readouts, registry, stimuli
from .engine import posterior, posterior_entropy, predictive
from .errors import ConfigurationError, InputError, NumberGameError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2

OUT_DIR_ENV = "NUMBERGAME_OUT"

GOLDEN_COUNTS = {
    (registry.TENENBAUM99, 100): (31, 230, 261),
    (registry.TENENBAUM99, 200): (32, 860, 892),
    (registry.BIGELOW16, 100): (128, 230, 358),
}


@dataclass
class RunConfig:
    """Resolved run options, echoed into the run manifest."""

    kl_eps: float = metrics.KL_EPS
    rule_fraction_threshold: float = stimuli.RULE_FRACTION_THRESHOLD
    similarity_spread_threshold: int = stimuli.SIMILARITY_SPREAD_THRESHOLD
    exclude_examples: bool = False
    grid_range: tuple = (fitting.GRID_LO, fitting.GRID_HI)
    grid_step: float = fitting.GRID_STEP
    nm_maxiter: int = fitting.NM_MAXITER
    synonyms_version: int = readouts.SYNONYMS_VERSION


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if not p.is_absolute() and base:
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config) as f:
            doc = json.load(f)
        for key, value in doc.items():
            if not hasattr(cfg, key):
                raise InputError(f"unknown config key: {key}")
            setattr(cfg, key, value)
    if getattr(args, "exclude_examples", False):
        cfg.exclude_examples = True
    return cfg


def _write_manifest(out: Path, command: str, cfg: RunConfig, extra: dict) -> None:
    manifest = {"command": command, "config": asdict(cfg), **extra}
    with open(out.parent / (out.stem + ".run-manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2)


def _space_for_args(task: str, d: int) -> registry.HypothesisSpace:
    return registry.build_space(task, registry.Domain(d))


def _load_stimuli(args, space) -> list:
    if getattr(args, "stimuli", None):
        sets = stimuli.load_stimulus_file(args.stimuli)
    elif args.task == registry.TENENBAUM99:
        sets = stimuli.tenenbaum99_sets()
    else:
        raise InputError("bigelow16 runs need --stimuli pointing at a stimulus file")
    return stimuli.classify_all(sets, space)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_space(args) -> int:
    cfg = _load_config(args)
    space = _space_for_args(args.task, args.d)
    n_rules, n_intervals = len(space.rules), len(space.intervals)
    print(f"task={space.task} d={space.domain.size} "
          f"rules={n_rules} intervals={n_intervals} total={len(space)}")
    out = _resolve_out(args.out)
    registry.save_space(space, out)
    _write_manifest(out, "space", cfg, {"task": args.task, "d": args.d})
    golden = GOLDEN_COUNTS[(args.task, args.d)]
    if (n_rules, n_intervals, len(space)) != golden:
        print(f"count mismatch: expected {golden}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_reference(args) -> int:
    cfg = _load_config(args)
    space = _space_for_args(args.task, args.d)
    sets = _load_stimuli(args, space)
    presentations = stimuli.expand_prefixes(sets)
    agent = agents.AgentSpec(kind=agents.BAYESIAN, alpha=1.0, beta=1.0)
    records = []
    for pres in presentations:
        readout = agents.emit_prediction(agent, space, pres)
        if readout is None:
            continue
        records.append(readouts.prediction_record(readout.key, readout.curve,
                                                  provenance="synthetic"))
    out = _resolve_out(args.out)
    readouts.write_records(records, out)
    _write_manifest(out, "reference", cfg,
                    {"task": args.task, "d": args.d, "n_records": len(records)})
    print(f"wrote {len(records)} reference curve records to {out}")
    return EXIT_OK


def cmd_ingest_validate(args) -> int:
    cfg = _load_config(args)
    records = readouts.read_records(args.readouts)
    with open(args.manifest) as f:
        manifest = json.load(f)
    report = readouts.validate_manifest(records, manifest)
    out = _resolve_out(args.out)
    with open(out, "w") as f:
        json.dump(report.to_json(), f, indent=2)
    _write_manifest(out, "ingest-validate", cfg,
                    {"readouts": args.readouts, "manifest": args.manifest})
    print(f"coverage: {report.n_present}/{report.n_expected} cells present; "
          f"{len(report.missing)} missing, {len(report.duplicates)} duplicates")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _load_prediction_readouts(path, space, stimuli_index, condition, thinking):
    records = readouts.read_records(path)
    out = []
    for rec in records:
        if rec.key.measurement != readouts.PREDICTION:
            continue
        if condition is not None and rec.key.condition != condition:
            continue
        if thinking is not None and rec.key.thinking != thinking:
            continue
        if rec.key.task != space.task or rec.key.d != space.domain.size:
            continue
        readout = readouts.parse_prediction(rec)
        stim = stimuli_index.get(rec.key.stimulus_id)
        if stim is None:
            continue
        readout.examples = stim.numbers[: rec.key.n]
        out.append(readout)
    return out


def cmd_fit(args) -> int:
    cfg = _load_config(args)
    space = _space_for_args(args.task, args.d)
    sets = _load_stimuli(args, space)
    index = {s.id: s for s in sets}
    pool = []
    for path in args.readouts:
        pool.extend(_load_prediction_readouts(path, space, index,
                                              args.condition, None))
    if not pool:
        print("empty presentation pool", file=sys.stderr)
        return EXIT_USAGE

    rows = []
    if args.scope == "trajectory":
        results = fitting.fit_trajectory(pool, space, index,
                                         exclude_examples=cfg.exclude_examples)
        for n, result in sorted(results.items()):
            print(f"prefix-{n}: alpha={result.alpha:.4f} beta={result.beta:.4f} "
                  f"log(alpha/beta)={result.log_alpha_over_beta:+.4f}")
            rows.append(fitting.fit_row(result, args.task, args.d,
                                        args.condition or "default"))
    else:
        if args.scope == "full":
            scope = fitting.FitScope(kind="full")
        else:
            scope = fitting.FitScope(kind="prefix", n=int(args.scope))
        selected = fitting.select_scope(pool, index, scope)
        if not selected:
            print("no presentations in scope", file=sys.stderr)
            return EXIT_USAGE
        result = fitting.fit(selected, space, scope,
                             exclude_examples=cfg.exclude_examples)
        print(f"{scope.describe()}: alpha={result.alpha:.4f} beta={result.beta:.4f} "
              f"log(alpha/beta)={result.log_alpha_over_beta:+.4f}")
        rows.append(fitting.fit_row(result, args.task, args.d,
                                    args.condition or "default"))

    out = _resolve_out(args.out)
    fitting.write_fit_csv(rows, out)
    _write_manifest(out, "fit", cfg,
                    {"task": args.task, "d": args.d, "scope": args.scope,
                     "readouts": args.readouts})
    return EXIT_OK


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return repr(value) if isinstance(value, float) else str(value)


def cmd_metrics(args) -> int:
    cfg = _load_config(args)
    space = _space_for_args(args.task, args.d)
    sets = _load_stimuli(args, space)
    index = {s.id: s for s in sets}

    ref_records = readouts.read_records(args.reference)
    ref_curves = {}
    for rec in ref_records:
        if rec.key.measurement == readouts.PREDICTION:
            key = (rec.key.task, rec.key.d, rec.key.stimulus_id, rec.key.n)
            ref_curves[key] = readouts.parse_prediction(rec).curve

    records = readouts.read_records(args.readouts)
    # index model d=200 prediction curves for extension pairing
    curves_by_key = {}
    for rec in records:
        if rec.key.measurement == readouts.PREDICTION:
            k = (rec.key.task, rec.key.d, rec.key.stimulus_id, rec.key.n,
                 rec.key.condition, rec.key.thinking)
            curves_by_key[k] = readouts.parse_prediction(rec).curve

    space_200 = None
    if args.task == registry.TENENBAUM99:
        space_200 = _space_for_args(args.task, 200)

    rows, skipped = [], []
    for rec in records:
        stim = index.get(rec.key.stimulus_id)
        ref = ref_curves.get((rec.key.task, rec.key.d, rec.key.stimulus_id, rec.key.n))
        if stim is None or ref is None:
            skipped.append(rec.key.as_tuple())
            continue
        examples = stim.numbers[: rec.key.n]
        row = {"task": rec.key.task, "d": rec.key.d,
               "stimulus_id": rec.key.stimulus_id, "n": rec.key.n,
               "measurement": rec.key.measurement,
               "condition": rec.key.condition, "thinking": rec.key.thinking}

        if rec.key.measurement == readouts.PREDICTION:
            curve = readouts.parse_prediction(rec).curve
        else:
            candidates = None
            if rec.key.measurement == readouts.EVALUATION:
                candidates = registry.candidate_list(space, examples)
            readout = readouts.parse_labels(rec, space.domain, candidates)
            if not readout.entries:
                skipped.append(rec.key.as_tuple())
                continue
            curve = metrics.project(readout, space.domain).curve
            summary = metrics.top1(readout, examples, space.domain)
            row.update(top1_label=summary.label,
                       top1_weight=_fmt(summary.weight),
                       top1_support_fraction=_fmt(summary.support_fraction),
                       top1_example_consistency=summary.example_consistency,
                       top1_rule_indicator=summary.rule_indicator)

        row["jsd"] = _fmt(metrics.jsd(curve, ref))
        row["kl"] = _fmt(metrics.kl_to_reference(curve, ref, eps=cfg.kl_eps))
        row["entropy"] = _fmt(posterior_entropy(curve))

        if rec.key.d == 200 and space_200 is not None:
            k100 = (rec.key.task, 100, rec.key.stimulus_id, rec.key.n,
                    rec.key.condition, rec.key.thinking)
            curve_100 = curves_by_key.get(k100)
            if curve_100 is None:
                skipped.append(rec.key.as_tuple())
            else:
                report = metrics.domain_extension(curve_100, curve, examples,
                                                  space_200)
                row.update(m_ext=_fmt(report.extension_mass),
                           shape_kl=_fmt(report.shape_kl),
                           rule_mean=_fmt(report.rule_target_mean),
                           nonrule_mean=_fmt(report.nonrule_target_mean))
        rows.append(row)

    out = _resolve_out(args.out)
    metrics.write_metric_csv(rows, out)
    _write_manifest(out, "metrics", cfg,
                    {"task": args.task, "d": args.d, "readouts": args.readouts,
                     "reference": args.reference,
                     "skipped": [list(k) for k in skipped]})
    print(f"wrote {len(rows)} metric rows to {out}; skipped {len(skipped)}")
    return EXIT_OK


def cmd_agent(args) -> int:
    cfg = _load_config(args)
    space = _space_for_args(args.task, args.d)
    sets = _load_stimuli(args, space)
    presentations = stimuli.expand_prefixes(sets)
    spec = agents.AgentSpec(kind=args.kind, alpha=args.alpha, beta=args.beta,
                            noise=args.noise, seed=args.seed)
    records = []
    for pres in presentations:
        if args.measurement == readouts.PREDICTION:
            readout = agents.emit_prediction(spec, space, pres)
            if readout is not None:
                records.append(readouts.prediction_record(
                    readout.key, readout.curve, provenance="synthetic"))
        else:
            readout = agents.emit_labels(spec, space, pres, k=args.k)
            if readout is not None:
                records.append(readouts.label_record(
                    readout.key,
                    [(e.label, e.raw_confidence) for e in readout.entries]))
    out = _resolve_out(args.out)
    readouts.write_records(records, out)
    _write_manifest(out, "agent", cfg,
                    {"task": args.task, "d": args.d, "agent": asdict(spec),
                     "measurement": args.measurement, "n_records": len(records)})
    print(f"wrote {len(records)} synthetic records to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="numbergame")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_stimuli=True):
        p.add_argument("--task", choices=[registry.TENENBAUM99, registry.BIGELOW16],
                       required=True)
        p.add_argument("--d", type=int, choices=[100, 200], required=True)
        p.add_argument("--config", help="JSON config file with option overrides")
        if with_stimuli:
            p.add_argument("--stimuli", help="stimulus JSON file "
                           "(defaults to the embedded tenenbaum99 sets)")

    p = sub.add_parser("space", help="build and export a hypothesis space")
    add_common(p, with_stimuli=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_space)

    p = sub.add_parser("reference", help="emit Bayesian (1,1) reference curves")
    add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("ingest-validate", help="check readout coverage")
    p.add_argument("--readouts", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest_validate)

    p = sub.add_parser("fit", help="fit (alpha, beta) to prediction readouts")
    add_common(p)
    p.add_argument("--readouts", nargs="+", required=True)
    p.add_argument("--scope", default="full",
                   choices=["full", "1", "2", "3", "4", "trajectory"])
    p.add_argument("--condition", default=None)
    p.add_argument("--exclude-examples", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("metrics", help="metric tables against a reference run")
    add_common(p)
    p.add_argument("--readouts", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("agent", help="emit synthetic readouts")
    add_common(p)
    p.add_argument("--kind", default=agents.BAYESIAN, choices=agents.AGENT_KINDS)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measurement", default=readouts.PREDICTION,
                   choices=[readouts.PREDICTION, readouts.GENERATION])
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_agent)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigurationError, FileNotFoundError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except NumberGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
