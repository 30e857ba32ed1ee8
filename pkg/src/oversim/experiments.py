"""The three simulation experiments and the nested explanation reports.

- weight_equivalence_sweep: how far can the value weights move before the
  fitted model's decisions change more than a threshold fraction?
- degradation_curve: Monte Carlo impact of random ground-truth corrections
  on the value statistics.
- local_strategies_table: global optimization vs. two local override
  strategies, replicated over random train/test splits.
- emit_explanation_report: E1-E4 nested explanation scopes.

Grid points and Monte Carlo replicas are embarrassingly parallel; result
assembly is keyed by index and sorted, so worker count never changes the
output.  Seed derivations (documented per operation) all flow from one
base seed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .data import Dataset, partition_by_attribute, split_train_test
from .errors import (
    DimensionMismatch,
    EmptySubpopulation,
    InvalidParameters,
    MissingContext,
    OversimError,
)
from .fairglm import (
    FairGlmModel,
    FitOptions,
    ValueWeights,
    as_weights,
    decide_all,
    fit,
    scores,
    _sigmoid,
)
from .pdm import PdmPolicy, apply_policy, correct_random_gt, describe
from .values import ValueReport, rho_decision, value_report

GLOBAL_OPT = "GlobalOpt"
LOCAL_CORRECT_GT = "LocalCorrectGT"
LOCAL_OPT_SOCIETY = "LocalOptSociety"

# seed offsets for the local-strategies experiment (documented derivation:
# split seed = base_seed ^ r; correction seed for subpopulation j of
# replication r = (base_seed ^ r) + _CORRECTION_STRIDE * (j + 1))
_CORRECTION_STRIDE = 10007


# ---------------------------------------------------------------------------
# weight-equivalence sweep


@dataclass(frozen=True)
class SweepResult:
    """Per-grid-point deviation from the reference (w*) model's decisions.

    grid rows follow row-major order over the per-dimension linspaces
    (first dimension slowest).  failed holds indices whose fit raised; they
    carry deviation NaN and are excluded from equivalent_set.
    """

    grid: np.ndarray  # G x m weight vectors
    deviation: np.ndarray  # G, in [0,1] (NaN for failed points)
    equivalent_set: tuple[int, ...]  # indices with deviation <= tau
    w_star: ValueWeights
    tau: float
    failed: tuple[int, ...]
    grid_shape: tuple[int, ...]
    sensitive_names: tuple[str, ...]


def build_grid(grid_spec) -> tuple[np.ndarray, tuple[int, ...]]:
    """Cartesian product of per-dimension (min, max, steps) linspaces,
    row-major (first dimension slowest)."""
    axes = []
    shape = []
    for dim, (lo, hi, steps) in enumerate(grid_spec):
        steps = int(steps)
        if steps < 1 or hi < lo:
            raise InvalidParameters(f"grid dimension {dim}: need steps >= 1 and max >= min")
        axes.append(np.linspace(lo, hi, steps))
        shape.append(steps)
    if not axes:
        raise InvalidParameters("grid must have at least one dimension")
    grid = np.array(list(product(*axes)), dtype=float)
    return grid, tuple(shape)


_CTX: dict = {}


def _init_ctx(ctx: dict) -> None:
    # runs once per worker process; the context is immutable thereafter
    _CTX.clear()
    _CTX.update(ctx)


def _sweep_point(task):
    index, wvec = task
    data, opts = _CTX["data"], _CTX["opts"]
    try:
        model = fit(data, ValueWeights(np.asarray(wvec)), opts)
    except OversimError as exc:
        return index, None, f"{type(exc).__name__}: {exc}"
    return index, decide_all(model, data.X), None


def _run_tasks(worker, tasks, ctx: dict, threads: int):
    """Order-independent parallel map; results come back sorted by index."""
    if threads > 1:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_init_ctx, initargs=(ctx,)
        ) as pool:
            out = list(pool.map(worker, tasks, chunksize=4))
    else:
        _init_ctx(ctx)
        out = [worker(t) for t in tasks]
    return sorted(out, key=lambda r: r[0])


def weight_equivalence_sweep(
    data: Dataset,
    w_star: ValueWeights,
    grid_spec,
    tau: float,
    opts: FitOptions = FitOptions(),
    threads: int = 1,
) -> SweepResult:
    """Fit one model per grid weight vector and measure the fraction of
    decisions (on the full dataset) differing from the w* model's.

    A grid point whose fit raises is recorded in failed and excluded from
    the equivalence set rather than aborting the sweep.
    """
    w_star = as_weights(w_star)
    if not 0.0 <= tau <= 1.0:
        raise InvalidParameters(f"tau must be in [0, 1], got {tau}")
    grid, shape = build_grid(grid_spec)
    if grid.shape[1] != w_star.m:
        raise DimensionMismatch(
            f"grid has {grid.shape[1]} dimensions but w_star has {w_star.m}"
        )
    ref_model = fit(data, w_star, opts)
    ref_dec = decide_all(ref_model, data.X)

    ctx = {"data": data, "opts": opts}
    results = _run_tasks(_sweep_point, list(enumerate(grid)), ctx, threads)

    deviation = np.full(grid.shape[0], np.nan)
    failed = []
    for index, dec, err in results:
        if err is not None:
            failed.append(index)
        else:
            deviation[index] = float(np.mean(dec != ref_dec))
    equivalent = tuple(
        int(i) for i in range(grid.shape[0])
        if not np.isnan(deviation[i]) and deviation[i] <= tau
    )
    return SweepResult(
        grid=grid,
        deviation=deviation,
        equivalent_set=equivalent,
        w_star=w_star,
        tau=tau,
        failed=tuple(failed),
        grid_shape=shape,
        sensitive_names=tuple(data.feature_names[j] for j in data.sensitive),
    )


# ---------------------------------------------------------------------------
# correction-degradation curves


@dataclass(frozen=True)
class DegradationCurve:
    """Change in each value statistic as k random ground-truth corrections
    are applied, aggregated over Monte Carlo runs.

    mean_change/std_change are raw (mean at k=0 is exactly 0); the
    normalized variants rescale each attribute's mean curve to [0,1] by its
    min-max range, with the std curve scaled by the same factor.  A flat
    mean curve (zero range) normalizes to zeros.
    """

    ks: tuple[int, ...]
    mean_change: np.ndarray  # m x K
    std_change: np.ndarray  # m x K (population std over runs)
    mean_normalized: np.ndarray  # m x K
    std_normalized: np.ndarray  # m x K
    runs: int
    base_seed: int
    sensitive_names: tuple[str, ...]


def degradation_curve(
    data: Dataset,
    w_star: ValueWeights,
    ks,
    runs: int,
    base_seed: int,
    opts: FitOptions = FitOptions(),
) -> DegradationCurve:
    """Fit once with w_star; for each run r (seed = base_seed XOR r) and
    each correction count k, correct k random errors toward the labels and
    record the change of every rho_decision against the uncorrected value."""
    w_star = as_weights(w_star)
    ks = [int(k) for k in ks]
    if not ks or ks[0] != 0 or any(b <= a for a, b in zip(ks, ks[1:])) or min(ks) < 0:
        raise InvalidParameters("ks must be strictly ascending and start at 0")
    if runs < 1:
        raise InvalidParameters(f"runs must be >= 1, got {runs}")
    model = fit(data, w_star, opts)
    rec = decide_all(model, data.X)
    m = len(data.sensitive)
    rho0 = np.array([rho_decision(data, rec, l) for l in data.sensitive])
    changes = np.zeros((runs, m, len(ks)))
    for r in range(runs):
        seed = base_seed ^ r
        for ki, k in enumerate(ks):
            if k == 0:
                continue  # change is identically 0
            applied = correct_random_gt(rec, data.y, k, seed)
            for li, l in enumerate(data.sensitive):
                changes[r, li, ki] = rho_decision(data, applied.decisions, l) - rho0[li]
    mean = changes.mean(axis=0)
    std = changes.std(axis=0)  # population convention, 0 when runs == 1
    mean_norm = np.zeros_like(mean)
    std_norm = np.zeros_like(std)
    for li in range(m):
        rng = mean[li].max() - mean[li].min()
        if rng > 0:
            mean_norm[li] = (mean[li] - mean[li].min()) / rng
            std_norm[li] = std[li] / rng
    return DegradationCurve(
        ks=tuple(ks),
        mean_change=mean,
        std_change=std,
        mean_normalized=mean_norm,
        std_normalized=std_norm,
        runs=runs,
        base_seed=int(base_seed),
        sensitive_names=tuple(data.feature_names[j] for j in data.sensitive),
    )


# ---------------------------------------------------------------------------
# local strategies table


@dataclass(frozen=True)
class StrategyRow:
    name: str
    rho_mean: tuple[float, ...]
    rho_se: tuple[float, ...]
    accuracy_mean: float
    accuracy_se: float


@dataclass(frozen=True)
class StrategyTable:
    """Mean +- standard error (over train/test-split replications) of each
    strategy's value statistics and accuracy on the full test set.  samples
    holds the raw per-replication values (rho_1..rho_m, accuracy) per
    strategy for downstream analysis."""

    rows: tuple[StrategyRow, ...]
    replications: int
    samples: tuple[tuple[str, np.ndarray], ...]


def _positions(parent: Dataset, part: Dataset) -> np.ndarray:
    # rows of `part` located inside `parent` (both subsets of one source)
    return np.searchsorted(parent.row_indices, part.row_indices)


def _constant_or_fit(subpop: Dataset, weights: ValueWeights, opts: FitOptions):
    """Local refit for one subpopulation: a w*-fit when both classes are
    present, otherwise the constant majority-class rule (the limit an
    unregularized logistic fit approaches on single-class data)."""
    classes = np.unique(subpop.y)
    if classes.size < 2:
        return ("constant", int(classes[0]))
    return ("model", fit(subpop, weights, opts))


def _strategy_rep(task):
    """One replication: returns (r, {strategy: (rho_1..rho_m, accuracy)})."""
    r = task
    data = _CTX["data"]
    weights = _CTX["weights"]
    opts = _CTX["opts"]
    attr_index = _CTX["attr_index"]
    threshold = _CTX["threshold"]
    p_percent = _CTX["p_percent"]
    base_seed = _CTX["base_seed"]

    split_seed = base_seed ^ r
    sp = split_train_test(data, 0.2, seed=split_seed)
    train, test = sp.train, sp.test

    model = fit(train, weights, opts)
    rec = decide_all(model, test.X)

    out = {}

    def measure(decisions):
        rep = value_report(test, decisions, test.y, weights)
        return (*rep.rho, rep.accuracy)

    out[GLOBAL_OPT] = measure(rec)

    # LocalCorrectGT: ground-truth corrections within each test subpopulation
    corrected = rec.copy()
    test_parts = list(partition_by_attribute(test, attr_index, threshold))
    for j, part in enumerate(test_parts):
        if part.n == 0:
            continue
        k = round(p_percent / 100.0 * part.n)
        pos = _positions(test, part)
        applied = correct_random_gt(
            corrected[pos], part.y, k, split_seed + _CORRECTION_STRIDE * (j + 1)
        )
        corrected[pos] = applied.decisions
    out[LOCAL_CORRECT_GT] = measure(corrected)

    # LocalOptSociety: per-subpopulation refits decide their own test rows
    local = np.zeros(test.n, dtype=np.int64)
    train_parts = list(partition_by_attribute(train, attr_index, threshold))
    for train_part, test_part in zip(train_parts, test_parts):
        if test_part.n == 0:
            continue
        if train_part.n == 0:
            raise EmptySubpopulation(
                f"threshold {threshold} leaves no training rows for a subpopulation "
                f"with {test_part.n} test rows (split seed {split_seed})"
            )
        kind, local_model = _constant_or_fit(train_part, weights, opts)
        pos = _positions(test, test_part)
        if kind == "constant":
            local[pos] = local_model
        else:
            local[pos] = decide_all(local_model, test_part.X)
    out[LOCAL_OPT_SOCIETY] = measure(local)

    return r, out


def local_strategies_table(
    data: Dataset,
    w_star: ValueWeights,
    attr_index: int,
    threshold: float,
    p_percent: float = 20.0,
    replications: int = 100,
    base_seed: int = 0,
    opts: FitOptions = FitOptions(),
    threads: int = 1,
) -> StrategyTable:
    """Compare GlobalOpt / LocalCorrectGT / LocalOptSociety over seeded
    80/20 splits; rho and accuracy are always computed on the full test set.

    Seed derivation: replication r splits with base_seed XOR r and corrects
    subpopulation j with (base_seed XOR r) + 10007 * (j + 1).
    """
    w_star = as_weights(w_star)
    if not 0.0 <= p_percent <= 100.0:
        raise InvalidParameters(f"p_percent must be in [0, 100], got {p_percent}")
    if replications < 1:
        raise InvalidParameters(f"replications must be >= 1, got {replications}")
    if not 0 <= attr_index < data.d:
        raise DimensionMismatch(f"attr_index {attr_index} out of range for d={data.d}")
    ctx = {
        "data": data,
        "weights": w_star,
        "opts": opts,
        "attr_index": int(attr_index),
        "threshold": float(threshold),
        "p_percent": float(p_percent),
        "base_seed": int(base_seed),
    }
    results = _run_tasks(_strategy_rep, list(range(replications)), ctx, threads)

    m = len(data.sensitive)
    rows = []
    samples = []
    for name in (GLOBAL_OPT, LOCAL_CORRECT_GT, LOCAL_OPT_SOCIETY):
        vals = np.array([res[name] for _, res in results])  # R x (m+1)
        means = vals.mean(axis=0)
        if replications > 1:
            ses = vals.std(axis=0, ddof=1) / np.sqrt(replications)
        else:
            ses = np.zeros(m + 1)
        rows.append(
            StrategyRow(
                name=name,
                rho_mean=tuple(float(v) for v in means[:m]),
                rho_se=tuple(float(v) for v in ses[:m]),
                accuracy_mean=float(means[m]),
                accuracy_se=float(ses[m]),
            )
        )
        samples.append((name, vals))
    return StrategyTable(rows=tuple(rows), replications=replications, samples=tuple(samples))


# ---------------------------------------------------------------------------
# explanation reports


@dataclass(frozen=True)
class ExplanationContext:
    """Everything a scope might need: the fitted model and evaluation data
    always; a policy for E3/E4; weights for E4's value reports."""

    model: FairGlmModel
    data: Dataset
    weights: ValueWeights | None = None
    policy: PdmPolicy | None = None


_SCOPES = ("E1", "E2", "E3", "E4")


def _report_dict(rep: ValueReport) -> dict:
    return {
        "accuracy": rep.accuracy,
        "rho": list(rep.rho),
        "F": rep.F,
        "n_evaluated": rep.n_evaluated,
    }


def emit_explanation_report(scope: str, context: ExplanationContext) -> dict:
    """Nested explanation scopes: E1 per-row (score, probability); E2 adds
    the recommended decision; E3 adds the applied decision and override
    accounting; E4 adds pre/post value reports.  Each scope's field set is
    a strict superset of the previous one's."""
    if scope not in _SCOPES:
        raise InvalidParameters(f"scope must be one of {_SCOPES}, got {scope!r}")
    level = _SCOPES.index(scope)
    model, data = context.model, context.data
    s = scores(model, data.X)
    p = _sigmoid(s)
    records = [
        {"score": float(si), "probability": float(pi)} for si, pi in zip(s, p)
    ]
    report: dict = {"scope": scope, "n": data.n, "records": records}
    if level < 1:
        return report

    rec = (s >= 0.0).astype(np.int64)
    for row, di in zip(records, rec):
        row["decision"] = int(di)
    if level < 2:
        return report

    if context.policy is None:
        raise MissingContext(f"scope {scope} requires a policy in the context")
    applied = apply_policy(context.policy, rec, data.y)
    for row, ai in zip(records, applied.decisions):
        row["applied"] = int(ai)
        row["overridden"] = bool(ai != row["decision"])
    report["policy"] = describe(context.policy)
    report["overrides"] = int(applied.overrides)
    report["seed_used"] = applied.seed_used
    if level < 3:
        return report

    if context.weights is None:
        raise MissingContext("scope E4 requires value weights in the context")
    weights = as_weights(context.weights)
    report["pre_report"] = _report_dict(value_report(data, rec, data.y, weights))
    report["post_report"] = _report_dict(
        value_report(data, applied.decisions, data.y, weights)
    )
    return report
