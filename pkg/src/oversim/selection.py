"""Algorithm selection under oversight.

The decision-maker picks from a finite candidate set, each candidate paired
with the finite set of override policies its overseers might apply.  Robust
selection maximizes the worst-case combined objective F over each
candidate's policy set; naive selection scores the raw recommendations and
ignores overrides entirely.  build_observation2_instance constructs the
counterexample where those two choices provably disagree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch, EmptyPolicySet, InvalidParameters
from .fairglm import ValueWeights, as_weights
from .pdm import PdmPolicy, apply_policy, epsilon_budget, identity_policy
from .values import value_report


@dataclass(frozen=True)
class CandidateSet:
    """Candidate decision vectors over one shared evaluation set, plus the
    ground-truth labels of that set."""

    candidates: tuple[tuple[str, np.ndarray], ...]  # (label, length-n binary decisions)
    labels: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "labels", y)
        if y.ndim != 1 or y.size < 1 or not np.isin(y, (0, 1)).all():
            raise DimensionMismatch("labels must be a non-empty 0/1 vector")
        if len(self.candidates) < 1:
            raise DimensionMismatch("need at least one candidate")
        normalized = []
        for name, dec in self.candidates:
            d = np.asarray(dec, dtype=np.int64)
            d.setflags(write=False)
            if d.shape != y.shape or not np.isin(d, (0, 1)).all():
                raise DimensionMismatch(f"candidate {name!r} decisions must be 0/1 of length {y.size}")
            normalized.append((str(name), d))
        object.__setattr__(self, "candidates", tuple(normalized))

    @property
    def n(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class PolicySet:
    """Policy list per candidate (same order as the CandidateSet)."""

    per_candidate: tuple[tuple[PdmPolicy, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "per_candidate", tuple(tuple(ps) for ps in self.per_candidate)
        )
        for i, ps in enumerate(self.per_candidate):
            if len(ps) == 0:
                raise EmptyPolicySet(f"candidate {i} has an empty policy set")


def _check_context(cands: CandidateSet, weights: ValueWeights, data: Dataset):
    if data.n != cands.n:
        raise DimensionMismatch(
            f"evaluation data has {data.n} rows but candidates have length {cands.n}"
        )
    if weights.m != len(data.sensitive):
        raise DimensionMismatch(
            f"{weights.m} weights for {len(data.sensitive)} sensitive attributes"
        )


def robust_select(
    cands: CandidateSet, policies: PolicySet, weights: ValueWeights, data: Dataset
) -> tuple[int, list[list[float]]]:
    """Worst-case-aware choice: winner = argmax over candidates of
    min over the candidate's policies of F(applied decisions).

    Returns (winner index, full F matrix — row per candidate, one entry per
    policy) so the matrix can double as a robustness explanation.  Ties go
    to the lowest index.
    """
    weights = as_weights(weights)
    _check_context(cands, weights, data)
    if len(policies.per_candidate) != len(cands.candidates):
        raise DimensionMismatch(
            f"{len(policies.per_candidate)} policy sets for {len(cands.candidates)} candidates"
        )
    matrix: list[list[float]] = []
    for (_, rec), pset in zip(cands.candidates, policies.per_candidate):
        row = []
        for pol in pset:
            applied = apply_policy(pol, rec, cands.labels)
            rep = value_report(data, applied.decisions, cands.labels, weights)
            row.append(rep.F)
        matrix.append(row)
    mins = [min(row) for row in matrix]
    winner = int(np.argmax(mins))  # argmax takes the first maximum: lowest index wins ties
    return winner, matrix


def naive_select(cands: CandidateSet, weights: ValueWeights, data: Dataset) -> int:
    """argmax of F on the raw recommendations, overrides ignored; ties to
    the lowest index."""
    weights = as_weights(weights)
    _check_context(cands, weights, data)
    fs = [
        value_report(data, rec, cands.labels, weights).F for _, rec in cands.candidates
    ]
    return int(np.argmax(fs))


def placeholder_dataset(labels) -> Dataset:
    """Accuracy-only evaluation context: one constant feature, no sensitive
    attributes, so F reduces to accuracy with empty weights.  Pair with
    ValueWeights([]) when evaluating constructed instances."""
    y = np.asarray(labels, dtype=np.int64)
    n = y.size
    return Dataset(
        X=np.zeros((n, 1)),
        X_raw=np.zeros((n, 1)),
        y=y,
        sensitive=(),
        feature_names=("const",),
        mu=np.zeros(1),
        sigma=np.ones(1),
        constant_columns=(0,),
    )


def build_observation2_instance(n: int, eps: float, delta: float) -> tuple[CandidateSet, PolicySet]:
    """Two candidates for which naive and robust selection provably disagree.

    Labels are all ones; candidate A_j flips the first e_j of them.  Error
    counts are chosen so that accuracy(A2) < accuracy(A1) < accuracy(A2) + delta
    strictly, A2 has at least floor(eps*n) errors (the correction budget is
    fully usable), and the corrected accuracy of A2 exceeds accuracy(A1):
    the naive choice is A1, the worst-case-aware choice is A2.

    Policy sets: Pi(A1) = {identity}; Pi(A2) = {move toward labels with
    budget floor(eps*n)}.  Evaluate with placeholder_dataset(labels) and
    empty weights, where F is plain accuracy.
    """
    if not 0 < delta < eps <= 1:
        raise InvalidParameters(f"need 0 < delta < eps <= 1, got eps={eps}, delta={delta}")
    if n < 2:
        raise InvalidParameters(f"n must be >= 2, got {n}")
    k_delta = int(np.floor(delta * n))
    if k_delta < 2:
        raise InvalidParameters(
            f"floor(delta*n) = {k_delta} < 2: no error gap fits strictly inside delta"
        )
    k_eps = int(np.floor(eps * n))
    gap = k_delta - 1  # e2 - e1: keeps accuracy(A1) strictly below accuracy(A2) + delta
    e2 = max(k_eps, gap + 1, -(-n // 10))  # at least the budget, the gap, and n/10 errors
    e1 = e2 - gap
    labels = np.ones(n, dtype=np.int64)
    a1 = labels.copy()
    a1[:e1] = 0
    a2 = labels.copy()
    a2[:e2] = 0
    cands = CandidateSet(candidates=(("A1", a1), ("A2", a2)), labels=labels)
    policies = PolicySet(
        per_candidate=(
            (identity_policy(),),
            (epsilon_budget(labels, eps, label="correct-toward-labels"),),
        )
    )
    return cands, policies
