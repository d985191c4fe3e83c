"""Cross-measurement projection and comparison metrics.

Curves are per-integer yes-probability vectors; divergences operate on
domain-normalized copies.  KL uses an additive floor on the reference
bins before normalization so that one-hot references stay finite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.spatial.distance import jensenshannon

from .engine import posterior
from .errors import DegenerateInputError, InputError, ProjectionUndefinedError
from .readouts import LabelReadout
from .registry import Domain, HypothesisSpace

KL_EPS = 1e-9


@dataclass
class ProjectedPredictive:
    curve: np.ndarray
    measurement: str
    matched_mass: float
    unmatched_mass: float


@dataclass
class Top1Summary:
    label: str
    weight: float
    support_fraction: float
    example_consistency: int
    rule_indicator: int


@dataclass
class DomainExtensionReport:
    extension_mass: float
    shape_kl: float
    rule_target_mean: float
    nonrule_target_mean: float


def project(readout: LabelReadout, domain: Domain) -> ProjectedPredictive:
    """Weighted indicator sum over matched label supports."""
    if not readout.entries:
        raise ProjectionUndefinedError("label readout has zero matched mass")
    curve = np.zeros(domain.size)
    for entry in readout.entries:
        idx = np.fromiter(entry.support, dtype=int) - 1
        curve[idx] += entry.weight
    return ProjectedPredictive(
        curve=np.clip(curve, 0.0, 1.0),
        measurement=readout.key.measurement if readout.key else "unknown",
        matched_mass=readout.matched_mass,
        unmatched_mass=readout.unmatched_mass,
    )


def _normalize(curve, name: str) -> np.ndarray:
    curve = np.asarray(curve, dtype=float)
    total = curve.sum()
    if total <= 0.0:
        raise DegenerateInputError(f"{name} curve has no positive mass")
    return curve / total


def jsd(curve_a, curve_b) -> float:
    """Base-2 Jensen-Shannon distance between normalized curves, in [0, 1]."""
    a = _normalize(curve_a, "first")
    b = _normalize(curve_b, "second")
    return float(jensenshannon(a, b, base=2))


def kl_to_reference(model_curve, reference_curve, eps: float = KL_EPS) -> float:
    """KL(model || reference) over domain-normalized curves (nats)."""
    p = _normalize(model_curve, "model")
    q = np.asarray(reference_curve, dtype=float)
    if q.sum() <= 0.0:
        raise DegenerateInputError("reference curve has no positive mass")
    q = q + eps
    q = q / q.sum()
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))


def top1(readout: LabelReadout, examples, domain: Domain) -> Top1Summary:
    """Top-weighted matched label; ties break to smaller support, then label."""
    if not readout.entries:
        raise ProjectionUndefinedError("no matched labels for top-1 summary")
    best = min(readout.entries,
               key=lambda e: (-e.weight, len(e.support), e.label))
    xs = set(examples)
    return Top1Summary(
        label=best.label,
        weight=best.weight,
        support_fraction=len(best.support) / domain.size,
        example_consistency=int(xs <= best.support),
        rule_indicator=int(best.kind == "rule"),
    )


def rule_consistent_targets(examples, space_200: HypothesisSpace) -> frozenset:
    """Unseen-window targets satisfying the rule implied by the examples.

    The implied rule is the highest-posterior rule hypothesis under the
    enlarged-domain Bayesian reference at (1, 1).
    """
    post = posterior(space_200, examples, alpha=1.0, beta=1.0)
    best = None
    for h, m in zip(space_200.hypotheses, post.mass):
        if h.kind != "rule":
            continue
        if best is None or m > best[0]:
            best = (m, h)
    if best is None or best[0] <= 0.0:
        return frozenset()
    window = set(range(101, space_200.domain.size + 1))
    return frozenset(best[1].support & window)


def domain_extension(curve_100, curve_200, examples,
                     space_200: HypothesisSpace) -> DomainExtensionReport:
    """Unseen-window mass, in-domain shape KL, and rule-target discrimination."""
    curve_100 = np.asarray(curve_100, dtype=float)
    curve_200 = np.asarray(curve_200, dtype=float)
    if curve_100.shape != (100,) or curve_200.shape != (200,):
        raise InputError("expected curves of lengths 100 and 200")
    for x in examples:
        if not 1 <= x <= 100:
            raise InputError(f"example {x} outside the original domain 1..100")

    normalized_200 = _normalize(curve_200, "enlarged-domain")
    extension_mass = float(normalized_200[100:].sum())

    if curve_200[:100].sum() <= 0.0:
        raise DegenerateInputError("enlarged-domain curve has no mass on 1..100")
    shape_kl = kl_to_reference(curve_100, curve_200[:100])

    rule_targets = rule_consistent_targets(examples, space_200)
    window = np.arange(101, 201)
    in_rule = np.array([y in rule_targets for y in window])
    rule_mean = float(curve_200[100:][in_rule].mean()) if in_rule.any() else float("nan")
    nonrule_mean = (float(curve_200[100:][~in_rule].mean())
                    if (~in_rule).any() else float("nan"))
    return DomainExtensionReport(
        extension_mass=extension_mass,
        shape_kl=shape_kl,
        rule_target_mean=rule_mean,
        nonrule_target_mean=nonrule_mean,
    )


METRIC_CSV_FIELDS = [
    "task", "d", "stimulus_id", "n", "measurement", "condition", "thinking",
    "jsd", "kl", "entropy", "m_ext", "shape_kl", "rule_mean", "nonrule_mean",
    "top1_label", "top1_weight", "top1_support_fraction",
    "top1_example_consistency", "top1_rule_indicator",
]


def write_metric_csv(rows: Iterable[dict], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=METRIC_CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
