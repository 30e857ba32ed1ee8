import numpy as np
import pytest

from oversim import (
    CandidateSet,
    EmptyPolicySet,
    InvalidParameters,
    PolicySet,
    ValueWeights,
    apply_policy,
    build_observation2_instance,
    epsilon_budget,
    identity_policy,
    naive_select,
    placeholder_dataset,
    robust_select,
    unconstrained,
    value_report,
)

EMPTY_W = ValueWeights([])


def accuracy_candidates(n, error_counts):
    """All-ones labels; candidate j zeroes its first error_counts[j] entries."""
    labels = np.ones(n, dtype=int)
    cands = []
    for j, e in enumerate(error_counts):
        dec = labels.copy()
        dec[:e] = 0
        cands.append((f"A{j + 1}", dec))
    return CandidateSet(candidates=tuple(cands), labels=labels)


# ---------------------------------------------------------------------------
# robust_select


def test_robust_maxmin_arithmetic():
    # F matrix (accuracy-only): A1 -> [0.8, 0.7], A2 -> [0.75, 0.74]
    # mins [0.7, 0.74] -> winner A2
    cands = accuracy_candidates(100, [20, 25])
    worse_a1 = np.ones(100, dtype=int)
    worse_a1[:30] = 0  # accuracy 0.7
    worse_a2 = np.ones(100, dtype=int)
    worse_a2[:26] = 0  # accuracy 0.74
    policies = PolicySet(
        per_candidate=(
            (identity_policy(), unconstrained(worse_a1)),
            (identity_policy(), unconstrained(worse_a2)),
        )
    )
    winner, matrix = robust_select(cands, policies, EMPTY_W, placeholder_dataset(cands.labels))
    assert matrix == [[0.8, 0.7], [0.75, 0.74]]
    assert winner == 1


def test_robust_single_candidate():
    cands = accuracy_candidates(10, [4])
    policies = PolicySet(per_candidate=((identity_policy(),),))
    winner, _ = robust_select(cands, policies, EMPTY_W, placeholder_dataset(cands.labels))
    assert winner == 0


def test_robust_identity_only_reduces_to_naive():
    cands = accuracy_candidates(50, [10, 5, 20])
    policies = PolicySet(per_candidate=tuple((identity_policy(),) for _ in range(3)))
    data = placeholder_dataset(cands.labels)
    winner, _ = robust_select(cands, policies, EMPTY_W, data)
    assert winner == naive_select(cands, EMPTY_W, data)


def test_robust_matrix_matches_independent_recomputation():
    rng = np.random.default_rng(14)
    labels = rng.integers(0, 2, 40)
    cands = CandidateSet(
        candidates=(("A1", rng.integers(0, 2, 40)), ("A2", rng.integers(0, 2, 40))),
        labels=labels,
    )
    policies = PolicySet(
        per_candidate=(
            (identity_policy(), epsilon_budget(labels, 0.25)),
            (unconstrained(labels), identity_policy()),
        )
    )
    data = placeholder_dataset(labels)
    _, matrix = robust_select(cands, policies, EMPTY_W, data)
    for (name, rec), pset, row in zip(cands.candidates, policies.per_candidate, matrix):
        for pol, cell in zip(pset, row):
            applied = apply_policy(pol, rec, labels)
            again = value_report(data, applied.decisions, labels, EMPTY_W).F
            assert cell == again


def test_adding_policy_never_raises_min():
    cands = accuracy_candidates(60, [12])
    small = PolicySet(per_candidate=((identity_policy(),),))
    grown = PolicySet(
        per_candidate=((identity_policy(), epsilon_budget(cands.labels, 0.1)),)
    )
    data = placeholder_dataset(cands.labels)
    _, m_small = robust_select(cands, small, EMPTY_W, data)
    _, m_grown = robust_select(cands, grown, EMPTY_W, data)
    # the identity cell recurs identically in both sets, so min is exactly monotone
    assert min(m_grown[0]) <= min(m_small[0])


def test_empty_policy_set_rejected():
    with pytest.raises(EmptyPolicySet):
        PolicySet(per_candidate=((),))


# ---------------------------------------------------------------------------
# naive_select


def test_naive_argmax_and_tie_rule():
    assert naive_select(
        accuracy_candidates(20, [4, 5]), EMPTY_W, placeholder_dataset(np.ones(20, dtype=int))
    ) == 0
    assert naive_select(
        accuracy_candidates(20, [5, 5]), EMPTY_W, placeholder_dataset(np.ones(20, dtype=int))
    ) == 0  # tie -> lowest index


# ---------------------------------------------------------------------------
# build_observation2_instance


def test_obs2_reference_instance():
    cands, policies = build_observation2_instance(1000, 0.02, 0.01)
    labels = cands.labels
    (n1, a1), (n2, a2) = cands.candidates
    acc1 = float(np.mean(a1 == labels))
    acc2 = float(np.mean(a2 == labels))
    assert acc2 == pytest.approx(0.900)
    assert acc1 == pytest.approx(0.909)  # one error gap below A2's count
    data = placeholder_dataset(labels)
    assert naive_select(cands, EMPTY_W, data) == 0
    winner, matrix = robust_select(cands, policies, EMPTY_W, data)
    assert winner == 1
    assert matrix[1][0] == pytest.approx(0.920)  # corrected accuracy beats A1


def test_obs2_invalid_parameters():
    with pytest.raises(InvalidParameters):
        build_observation2_instance(1000, 0.02, 0.02)  # delta must be < eps
    with pytest.raises(InvalidParameters):
        build_observation2_instance(1000, 0.01, 0.02)


def test_obs2_full_budget_saturation():
    cands, policies = build_observation2_instance(10, 1.0, 0.5)
    data = placeholder_dataset(cands.labels)
    winner, matrix = robust_select(cands, policies, EMPTY_W, data)
    assert winner == 1
    assert matrix[1][0] == pytest.approx(1.0)  # full budget corrects everything


def test_obs2_random_instances_disagree():
    rng = np.random.default_rng(21)
    for _ in range(30):
        n = int(rng.integers(40, 3000))
        delta = float(rng.uniform(2.2 / n, 0.3))
        eps = float(rng.uniform(delta * 1.2 + 1e-6, min(1.0, delta * 1.2 + 0.6)))
        cands, policies = build_observation2_instance(n, eps, delta)
        data = placeholder_dataset(cands.labels)
        naive = naive_select(cands, EMPTY_W, data)
        winner, matrix = robust_select(cands, policies, EMPTY_W, data)
        assert naive == 0 and winner == 1
        assert min(matrix[1]) > min(matrix[0])  # strictly better worst case


def test_placeholder_dataset_reduces_F_to_accuracy():
    labels = np.array([1, 0, 1, 1])
    data = placeholder_dataset(labels)
    rep = value_report(data, np.array([1, 0, 0, 1]), labels, EMPTY_W)
    assert rep.F == rep.accuracy == 0.75
