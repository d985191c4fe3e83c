"""Least-squares fitting of (alpha, beta) to pooled prediction readouts.

The objective is a mean over presentations of the per-presentation mean
squared error between the readout curve and the parameterized Bayesian
predictive, evaluated over the valid-target set of each presentation.
Optimization runs a coarse grid over (log alpha, log beta) followed by
Nelder-Mead refinement in log space, which keeps the fit deterministic.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import InputError
from .registry import HypothesisSpace

logger = logging.getLogger(__name__)

GRID_LO, GRID_HI, GRID_STEP = -3.0, 3.0, 0.25
NM_XATOL = 1e-6
NM_MAXITER = 500


@dataclass(frozen=True)
class FitScope:
    """Which presentations enter one pooled fit.

    kind "full" uses each stimulus set at its final configured prefix;
    kind "prefix" truncates every stimulus set with at least n examples
    to its first n.
    """

    kind: str = "full"            # "full" or "prefix"
    n: Optional[int] = None
    sources: Optional[frozenset] = None

    def __post_init__(self):
        if self.kind == "prefix" and self.n not in (1, 2, 3, 4):
            raise InputError(f"prefix scope needs n in 1..4, got {self.n}")

    def describe(self) -> str:
        return "full" if self.kind == "full" else f"prefix-{self.n}"


@dataclass
class FitResult:
    alpha: float
    beta: float
    loss: float
    n_presentations: int
    converged: bool
    scope: str = "full"
    grid_loss: float = math.inf   # best loss seen on the coarse grid
    nm_iterations: int = 0

    @property
    def log_alpha_over_beta(self) -> float:
        return math.log(self.alpha / self.beta)


@dataclass
class _PresentationData:
    """Precomputed per-presentation structures for fast objective evals."""

    curve: np.ndarray             # readout values over the target set
    log_prior: np.ndarray         # over compatible hypotheses
    neg_logsize: np.ndarray       # -|X| * log|h| over compatible hypotheses
    membership: np.ndarray        # (n_compatible, n_targets) 0/1 matrix


def _space_for(spaces, key) -> HypothesisSpace:
    if isinstance(spaces, HypothesisSpace):
        return spaces
    return spaces[key.task]


def _prepare(readouts, spaces, exclude_examples: bool) -> list:
    data = []
    for r in readouts:
        space = _space_for(spaces, r.key)
        d = space.domain.size
        if r.examples is None:
            raise InputError(f"readout {r.key} has unresolved examples")
        xs = set(r.examples)
        compat = [i for i, h in enumerate(space.hypotheses) if xs <= h.support]
        if not compat:
            logger.warning("presentation %s has no compatible hypothesis; excluded",
                           r.key)
            continue
        targets = np.arange(1, d + 1)
        if exclude_examples:
            targets = np.array([y for y in targets if y not in xs])
        member = np.zeros((len(compat), len(targets)))
        target_pos = {y: j for j, y in enumerate(targets)}
        for row, i in enumerate(compat):
            for y in space.hypotheses[i].support:
                j = target_pos.get(y)
                if j is not None:
                    member[row, j] = 1.0
        data.append(_PresentationData(
            curve=np.asarray(r.curve, dtype=float)[targets - 1],
            log_prior=np.array([math.log(space.prior[i]) for i in compat]),
            neg_logsize=np.array(
                [-len(xs) * math.log(space.hypotheses[i].size) for i in compat]),
            membership=member,
        ))
    return data


def _curve_at(data: _PresentationData, alpha: float, beta: float) -> np.ndarray:
    log_w = alpha * data.log_prior + beta * data.neg_logsize
    log_w -= log_w.max()
    w = np.exp(log_w)
    w /= w.sum()
    return w @ data.membership


def _objective(data: list, alpha: float, beta: float) -> float:
    total = 0.0
    for p in data:
        resid = p.curve - _curve_at(p, alpha, beta)
        total += float(resid @ resid) / resid.size
    return total / len(data)


def objective(readouts, spaces, alpha: float, beta: float,
              exclude_examples: bool = False) -> float:
    """The pooled mean-of-means squared error at one (alpha, beta).

    spaces may be a single HypothesisSpace or a mapping from task name to
    space, so pooled fits across task sources evaluate each presentation
    under its own space.
    """
    data = _prepare(readouts, spaces, exclude_examples)
    if not data:
        raise InputError("no usable presentations in the pool")
    return _objective(data, alpha, beta)


def select_scope(readouts, stimuli_index: dict, scope: FitScope,
                 max_n: int = 4) -> list:
    """Filter prediction readouts to one fit scope.

    stimuli_index maps stimulus_id to its StimulusSet, so that the scope
    can see the full example count of each set.
    """
    out = []
    for r in readouts:
        stim = stimuli_index.get(r.key.stimulus_id)
        if stim is None:
            continue
        if scope.sources is not None and stim.source not in scope.sources:
            continue
        size = min(len(stim.numbers), max_n)
        if scope.kind == "full":
            if r.key.n == size:
                out.append(r)
        else:
            if len(stim.numbers) >= scope.n and r.key.n == scope.n:
                out.append(r)
    return out


def fit(readouts, spaces, scope: Optional[FitScope] = None,
        exclude_examples: bool = False) -> FitResult:
    """Minimize the pooled objective over positive (alpha, beta)."""
    scope_name = scope.describe() if scope is not None else "full"
    data = _prepare(readouts, spaces, exclude_examples)
    if not data:
        raise InputError("no usable presentations in the pool")

    def f(logs):
        return _objective(data, math.exp(logs[0]), math.exp(logs[1]))

    grid = np.arange(GRID_LO, GRID_HI + GRID_STEP / 2, GRID_STEP)
    best = None
    for la in grid:
        for lb in grid:
            loss = f((la, lb))
            if best is None or loss < best[0]:
                best = (loss, la, lb)

    res = minimize(f, x0=np.array([best[1], best[2]]), method="Nelder-Mead",
                   options={"xatol": NM_XATOL, "fatol": 1e-14,
                            "maxiter": NM_MAXITER, "maxfev": 4 * NM_MAXITER})
    # keep the better of grid and refinement (NM cannot get worse, but be safe)
    if res.fun <= best[0]:
        alpha, beta, loss = math.exp(res.x[0]), math.exp(res.x[1]), float(res.fun)
    else:
        alpha, beta, loss = math.exp(best[1]), math.exp(best[2]), float(best[0])
    return FitResult(
        alpha=alpha, beta=beta, loss=loss,
        n_presentations=len(data),
        converged=bool(res.success),
        scope=scope_name,
        grid_loss=float(best[0]),
        nm_iterations=int(res.nit),
    )


def fit_trajectory(readouts, spaces, stimuli_index: dict,
                   sources: Optional[frozenset] = None,
                   exclude_examples: bool = False) -> dict:
    """One fit per prefix scope n=1..4; skips scopes with no coverage."""
    results = {}
    for n in (1, 2, 3, 4):
        scope = FitScope(kind="prefix", n=n, sources=sources)
        pool = select_scope(readouts, stimuli_index, scope)
        if not pool:
            logger.warning("prefix-%d scope has no pooled presentations; skipped", n)
            continue
        results[n] = fit(pool, spaces, scope, exclude_examples)
    return results


FIT_CSV_FIELDS = ["task", "d", "condition", "thinking", "scope", "alpha", "beta",
                  "log_alpha_over_beta", "loss", "n_presentations", "converged"]


def write_fit_csv(rows: Iterable[dict], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=FIT_CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def fit_row(result: FitResult, task: str, d: int, condition: str = "default",
            thinking: bool = False) -> dict:
    return {
        "task": task, "d": d, "condition": condition, "thinking": thinking,
        "scope": result.scope,
        "alpha": repr(result.alpha), "beta": repr(result.beta),
        "log_alpha_over_beta": repr(result.log_alpha_over_beta),
        "loss": repr(result.loss),
        "n_presentations": result.n_presentations,
        "converged": result.converged,
    }
