"""Practical decision-maker override policies.

A policy transforms the algorithm's recommended decisions into the applied
decisions, with budget accounting: full override toward a target, a budgeted
override (at most an epsilon fraction), random ground-truth corrections
(the PDM knows outcomes the algorithm cannot see), or a local refit
(realized in `experiments`, where fitting machinery lives).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameters

UNCONSTRAINED = "unconstrained"
EPSILON_BUDGET = "epsilon_budget"
RANDOM_CORRECT_GT = "random_correct_gt"
LOCAL_REFIT = "local_refit"


def _binary(v, name: str) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be a vector")
    v = v.astype(np.int64)
    if v.size and not np.isin(v, (0, 1)).all():
        raise DimensionMismatch(f"{name} must be 0/1")
    return v


def _pair(a, b, name_a: str, name_b: str):
    a, b = _binary(a, name_a), _binary(b, name_b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{name_a} has length {a.size}, {name_b} has {b.size}")
    return a, b


@dataclass(frozen=True)
class PdmPolicy:
    """One PDM behavior.  kind selects which fields matter:

    - unconstrained: target
    - epsilon_budget: target, epsilon
    - random_correct_gt: k, seed (k = 0 is the identity policy)
    - local_refit: attr_index, threshold (applied by the experiments module)
    """

    kind: str
    target: np.ndarray | None = None
    epsilon: float | None = None
    k: int | None = None
    seed: int | None = None
    attr_index: int | None = None
    threshold: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in (UNCONSTRAINED, EPSILON_BUDGET, RANDOM_CORRECT_GT, LOCAL_REFIT):
            raise InvalidParameters(f"unknown policy kind {self.kind!r}")
        if self.target is not None:
            t = _binary(self.target, "target")
            t.setflags(write=False)
            object.__setattr__(self, "target", t)
        if self.kind == UNCONSTRAINED and self.target is None:
            raise InvalidParameters("unconstrained policy needs a target")
        if self.kind == EPSILON_BUDGET:
            if self.target is None or self.epsilon is None:
                raise InvalidParameters("epsilon_budget policy needs target and epsilon")
            if not 0.0 <= self.epsilon <= 1.0:
                raise InvalidParameters(f"epsilon must be in [0, 1], got {self.epsilon}")
        if self.kind == RANDOM_CORRECT_GT:
            if self.k is None or self.k < 0:
                raise InvalidParameters("random_correct_gt policy needs k >= 0")
        if self.kind == LOCAL_REFIT and (self.attr_index is None or self.threshold is None):
            raise InvalidParameters("local_refit policy needs attr_index and threshold")


def unconstrained(target, label: str = "") -> PdmPolicy:
    return PdmPolicy(kind=UNCONSTRAINED, target=np.asarray(target), label=label)


def epsilon_budget(target, eps: float, label: str = "") -> PdmPolicy:
    return PdmPolicy(kind=EPSILON_BUDGET, target=np.asarray(target), epsilon=float(eps), label=label)


def random_correct_gt(k: int, seed: int = 0, label: str = "") -> PdmPolicy:
    return PdmPolicy(kind=RANDOM_CORRECT_GT, k=int(k), seed=int(seed), label=label)


def identity_policy(label: str = "identity") -> PdmPolicy:
    """No overrides: a zero-budget ground-truth correction."""
    return PdmPolicy(kind=RANDOM_CORRECT_GT, k=0, seed=0, label=label)


def local_refit(attr_index: int, threshold: float, label: str = "") -> PdmPolicy:
    return PdmPolicy(kind=LOCAL_REFIT, attr_index=int(attr_index), threshold=float(threshold), label=label)


def describe(policy: PdmPolicy) -> str:
    """One-line text form for experiment logs."""
    bits = [policy.kind]
    if policy.epsilon is not None:
        bits.append(f"epsilon={policy.epsilon:g}")
    if policy.k is not None:
        bits.append(f"k={policy.k}")
    if policy.seed is not None:
        bits.append(f"seed={policy.seed}")
    if policy.attr_index is not None:
        bits.append(f"attr_index={policy.attr_index}")
    if policy.threshold is not None:
        bits.append(f"threshold={policy.threshold:g}")
    if policy.target is not None:
        bits.append(f"target_ones={int(policy.target.sum())}/{policy.target.size}")
    if policy.label:
        bits.append(f"label={policy.label}")
    return " ".join(bits)


@dataclass(frozen=True)
class AppliedDecisions:
    """Post-override decisions; overrides is the Hamming distance to the
    recommendation they were derived from."""

    decisions: np.ndarray
    overrides: int
    seed_used: int | None = None

    def __post_init__(self):
        d = _binary(self.decisions, "decisions")
        d.setflags(write=False)
        object.__setattr__(self, "decisions", d)
        if not 0 <= self.overrides <= d.size:
            raise DimensionMismatch("overrides out of range")


def apply_unconstrained(recommended, target) -> AppliedDecisions:
    """The PDM replaces every decision: applied = target."""
    rec, tgt = _pair(recommended, target, "recommended", "target")
    return AppliedDecisions(decisions=tgt, overrides=int(np.sum(rec != tgt)))


def apply_epsilon_budget(recommended, target, eps: float) -> AppliedDecisions:
    """Move toward target at the first floor(eps*n) disagreeing indices
    (ascending order): deterministic, never more than the budget."""
    rec, tgt = _pair(recommended, target, "recommended", "target")
    if not 0.0 <= eps <= 1.0:
        raise InvalidParameters(f"eps must be in [0, 1], got {eps}")
    budget = int(np.floor(eps * rec.size))
    disagree = np.flatnonzero(rec != tgt)
    chosen = disagree[:budget]
    out = rec.copy()
    out[chosen] = tgt[chosen]
    return AppliedDecisions(decisions=out, overrides=int(chosen.size))


def correct_random_gt(recommended, labels, k: int, seed: int) -> AppliedDecisions:
    """Correct min(k, #wrong) recommendations to their ground-truth label,
    chosen uniformly without replacement among the misclassified indices
    (np.random.default_rng(seed)); never touches an already-correct index."""
    rec, y = _pair(recommended, labels, "recommended", "labels")
    if k < 0:
        raise InvalidParameters(f"k must be >= 0, got {k}")
    wrong = np.flatnonzero(rec != y)
    take = min(int(k), wrong.size)
    out = rec.copy()
    if take:
        pick = np.random.default_rng(seed).choice(wrong, size=take, replace=False)
        out[pick] = y[pick]
    return AppliedDecisions(decisions=out, overrides=take, seed_used=int(seed))


def deviation_fraction(a, b) -> float:
    """Normalized Hamming distance between two decision vectors."""
    va, vb = _pair(a, b, "a", "b")
    if va.size < 1:
        raise DimensionMismatch("deviation_fraction needs n >= 1")
    return float(np.mean(va != vb))


def apply_policy(policy: PdmPolicy, recommended, labels) -> AppliedDecisions:
    """Dispatch a policy against a recommendation.  labels are the ground
    truth the PDM can see (used by correction policies).  local_refit cannot
    be applied here — it needs fitting machinery (see experiments)."""
    if policy.kind == UNCONSTRAINED:
        return apply_unconstrained(recommended, policy.target)
    if policy.kind == EPSILON_BUDGET:
        return apply_epsilon_budget(recommended, policy.target, policy.epsilon)
    if policy.kind == RANDOM_CORRECT_GT:
        return correct_random_gt(recommended, labels, policy.k, policy.seed)
    raise InvalidParameters(
        f"policy kind {policy.kind!r} cannot be applied to a plain decision vector"
    )
