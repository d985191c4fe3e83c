"""Ingestion of cached behavioral readouts.

Readout files are JSON-lines, one record per (presentation, measurement,
condition) cell:

    {"task": ..., "d": ..., "stimulus_id": ..., "n": ...,
     "measurement": "prediction" | "evaluation" | "generation",
     "condition": "default" | "strong" | "weak" | "explicit",
     "thinking": false, "payload": {...}}

Prediction payloads carry either a ready curve ({"curve": [...],
"provenance": ...}) or raw response counts ({"yes_counts": [...],
"valid_counts": [...]}).  Label payloads carry {"entries": [[label,
confidence], ...]}.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import EmptyReadoutError, InputError, MissingTargetError
from .registry import CandidateList, Domain, parse_label

PREDICTION = "prediction"
EVALUATION = "evaluation"
GENERATION = "generation"
MEASUREMENTS = (PREDICTION, EVALUATION, GENERATION)

CONDITIONS = ("default", "strong", "weak", "explicit")

# Versioned synonym table for generation-label matching.  Entries map
# free-text phrasings onto the canonical label grammar so that matching
# decisions stay auditable.
SYNONYMS_VERSION = 1
SYNONYMS = {
    "even": "even numbers",
    "evens": "even numbers",
    "odd": "odd numbers",
    "odds": "odd numbers",
    "square numbers": "squares",
    "perfect squares": "squares",
    "cube numbers": "cubes",
    "perfect cubes": "cubes",
    "prime numbers": "primes",
    "powers of two": "powers of 2",
    "powers of three": "powers of 3",
    "multiples of two": "even numbers",
    "multiples of ten": "multiples of 10",
}
_INTERVAL_PHRASES = [
    re.compile(r"(?:numbers )?between (\d+) and (\d+)"),
    re.compile(r"numbers from (\d+) to (\d+)"),
]


def canonicalize_label(text: str) -> str:
    """Apply the synonym table to a free-text label."""
    text = text.strip().lower()
    if text in SYNONYMS:
        return SYNONYMS[text]
    for pat in _INTERVAL_PHRASES:
        m = pat.fullmatch(text)
        if m:
            return f"interval {m.group(1)}..{m.group(2)}"
    return text


# ---------------------------------------------------------------------------
# Readout containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecordKey:
    task: str
    d: int
    stimulus_id: str
    n: int
    measurement: str
    condition: str = "default"
    thinking: bool = False

    def as_tuple(self) -> tuple:
        return (self.task, self.d, self.stimulus_id, self.n,
                self.measurement, self.condition, self.thinking)


@dataclass
class PredictionReadout:
    key: RecordKey
    curve: np.ndarray
    provenance: str = "answer-probability"
    examples: Optional[tuple] = None


@dataclass(frozen=True)
class LabelEntry:
    label: str
    raw_confidence: float
    weight: float
    support: Optional[frozenset]
    kind: str = "rule"            # "rule" or "interval"


@dataclass
class LabelReadout:
    key: RecordKey
    entries: list                 # matched entries, weights sum to 1
    unmatched: list               # (label, raw confidence) pairs
    matched_mass: float
    unmatched_mass: float
    examples: Optional[tuple] = None


def curve_from_counts(yes_counts, valid_counts, key: Optional[RecordKey] = None) -> PredictionReadout:
    """Estimate q(y) as the fraction of valid Yes answers per target."""
    yes = np.asarray(yes_counts, dtype=float)
    valid = np.asarray(valid_counts, dtype=float)
    if yes.shape != valid.shape:
        raise InputError("yes_counts and valid_counts must have equal length")
    missing = np.nonzero(valid < 1)[0]
    if missing.size:
        raise MissingTargetError((missing + 1).tolist())
    if (yes > valid).any() or (yes < 0).any():
        raise InputError("yes_counts must satisfy 0 <= yes <= valid")
    return PredictionReadout(key=key, curve=yes / valid, provenance="text-response")


def normalize_labels(raw_entries, measurement: str, domain: Domain,
                     candidates: Optional[CandidateList] = None,
                     key: Optional[RecordKey] = None) -> LabelReadout:
    """Resolve, collapse, and renormalize raw (label, confidence) entries.

    Generation labels are parsed through the label grammar (after the
    synonym table); evaluation labels are matched verbatim against the
    displayed candidate list.  Entries resolving to the same support keep
    the larger confidence; retained positive weights are rescaled to sum
    to one; unmatched free-text mass is reported separately.
    """
    entries = [(str(label), float(conf)) for label, conf in raw_entries]
    entries = [(l, c) for l, c in entries if c > 0.0]
    if not entries:
        raise EmptyReadoutError("no positive-confidence entries")

    resolved = []   # (label, conf, support or None, kind)
    for label, conf in entries:
        support, kind = None, "rule"
        if measurement == EVALUATION:
            if candidates is None:
                raise InputError("evaluation normalization requires the candidate list")
            clean = label.strip().lower()
            for cand in candidates.entries:
                if cand.label == clean:
                    support = cand.support
                    kind = "interval" if (clean.startswith("interval ")
                                          or clean == "all numbers") else "rule"
                    break
        else:
            h = parse_label(canonicalize_label(label), domain)
            if h is not None:
                support, kind = h.support, h.kind
        resolved.append((label, conf, support, kind))

    # collapse entries sharing a support, keeping the larger confidence
    collapsed = []
    by_support = {}
    for label, conf, support, kind in resolved:
        if support is None:
            collapsed.append((label, conf, None, kind))
            continue
        if support in by_support:
            i = by_support[support]
            if conf > collapsed[i][1]:
                collapsed[i] = (label, conf, support, kind)
        else:
            by_support[support] = len(collapsed)
            collapsed.append((label, conf, support, kind))

    total = sum(c for _, c, _, _ in collapsed)
    matched = [(l, c, s, k) for l, c, s, k in collapsed if s is not None]
    unmatched = [(l, c) for l, c, s, _ in collapsed if s is None]
    matched_raw = sum(c for _, c, _, _ in matched)
    matched_entries = [
        LabelEntry(label=l, raw_confidence=c, weight=c / matched_raw,
                   support=s, kind=k)
        for l, c, s, k in matched
    ]
    return LabelReadout(
        key=key,
        entries=matched_entries,
        unmatched=unmatched,
        matched_mass=matched_raw / total,
        unmatched_mass=1.0 - matched_raw / total,
        examples=None,
    )


# ---------------------------------------------------------------------------
# JSON-lines I/O
# ---------------------------------------------------------------------------

@dataclass
class RawRecord:
    key: RecordKey
    payload: dict
    line: int = 0

    def to_json(self) -> dict:
        k = self.key
        return {"task": k.task, "d": k.d, "stimulus_id": k.stimulus_id,
                "n": k.n, "measurement": k.measurement,
                "condition": k.condition, "thinking": k.thinking,
                "payload": self.payload}


def record_from_json(doc: dict, line: int = 0) -> RawRecord:
    key = RecordKey(
        task=doc["task"], d=int(doc["d"]), stimulus_id=str(doc["stimulus_id"]),
        n=int(doc["n"]), measurement=doc["measurement"],
        condition=doc.get("condition", "default"),
        thinking=bool(doc.get("thinking", False)),
    )
    if key.measurement not in MEASUREMENTS:
        raise InputError(f"line {line}: unknown measurement {key.measurement!r}")
    return RawRecord(key=key, payload=doc["payload"], line=line)


def read_records(path) -> list:
    out = []
    with open(path) as f:
        for i, raw in enumerate(f, start=1):
            raw = raw.strip()
            if not raw:
                continue
            out.append(record_from_json(json.loads(raw), line=i))
    return out


def write_records(records: Iterable[RawRecord], path) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json()) + "\n")


def prediction_record(key: RecordKey, curve, provenance="answer-probability") -> RawRecord:
    return RawRecord(key=key, payload={
        "curve": [float(v) for v in curve], "provenance": provenance})


def label_record(key: RecordKey, entries) -> RawRecord:
    return RawRecord(key=key, payload={
        "entries": [[str(l), float(c)] for l, c in entries]})


def parse_prediction(record: RawRecord) -> PredictionReadout:
    """Typed view of a prediction record, with curve bounds enforced."""
    payload = record.payload
    if "curve" in payload:
        curve = np.asarray(payload["curve"], dtype=float)
        provenance = payload.get("provenance", "answer-probability")
        readout = PredictionReadout(key=record.key, curve=curve, provenance=provenance)
    else:
        readout = curve_from_counts(payload["yes_counts"], payload["valid_counts"],
                                    key=record.key)
    curve = readout.curve
    if curve.shape != (record.key.d,):
        raise InputError(
            f"line {record.line}: curve length {curve.shape[0]} != d={record.key.d}")
    if (curve < 0.0).any() or (curve > 1.0).any():
        raise InputError(f"line {record.line}: curve entries outside [0, 1]")
    return readout


def parse_labels(record: RawRecord, domain: Domain,
                 candidates: Optional[CandidateList] = None) -> LabelReadout:
    readout = normalize_labels(record.payload["entries"], record.key.measurement,
                               domain, candidates=candidates, key=record.key)
    return readout


# ---------------------------------------------------------------------------
# Manifest validation
# ---------------------------------------------------------------------------

@dataclass
class CoverageReport:
    n_expected: int
    n_present: int
    missing: list = field(default_factory=list)        # expected keys absent
    duplicates: list = field(default_factory=list)     # (key, [lines])
    domain_mismatches: list = field(default_factory=list)
    unexpected: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.missing or self.duplicates or self.domain_mismatches)

    def to_json(self) -> dict:
        return {
            "n_expected": self.n_expected,
            "n_present": self.n_present,
            "ok": self.ok,
            "missing": [list(k.as_tuple()) for k in self.missing],
            "duplicates": [[list(k.as_tuple()), lines] for k, lines in self.duplicates],
            "domain_mismatches": self.domain_mismatches,
            "unexpected": [list(k.as_tuple()) for k in self.unexpected],
        }


def manifest_keys(manifest: dict) -> list:
    """Expected cells from a manifest document: {"cells": [{...}, ...]}."""
    keys = []
    for cell in manifest["cells"]:
        keys.append(RecordKey(
            task=cell["task"], d=int(cell["d"]),
            stimulus_id=str(cell["stimulus_id"]), n=int(cell["n"]),
            measurement=cell["measurement"],
            condition=cell.get("condition", "default"),
            thinking=bool(cell.get("thinking", False)),
        ))
    return keys


def validate_manifest(records: list, manifest: dict) -> CoverageReport:
    """Check record coverage against the expected-cell manifest."""
    expected = manifest_keys(manifest)
    expected_set = set(expected)

    seen = {}
    mismatches = []
    for rec in records:
        seen.setdefault(rec.key, []).append(rec.line)
        if rec.key.measurement == PREDICTION and "curve" in rec.payload:
            if len(rec.payload["curve"]) != rec.key.d:
                mismatches.append(
                    {"key": list(rec.key.as_tuple()), "line": rec.line,
                     "curve_length": len(rec.payload["curve"])})

    missing = [k for k in expected if k not in seen]
    duplicates = sorted(
        ((k, lines) for k, lines in seen.items() if len(lines) > 1),
        key=lambda item: item[0].as_tuple())
    unexpected = sorted((k for k in seen if k not in expected_set),
                        key=lambda k: k.as_tuple())
    return CoverageReport(
        n_expected=len(expected),
        n_present=sum(1 for k in expected if k in seen),
        missing=missing,
        duplicates=duplicates,
        domain_mismatches=mismatches,
        unexpected=unexpected,
    )
