import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from oversim import (
    DimensionMismatch,
    InvalidParameters,
    ValueWeights,
    apply_epsilon_budget,
    apply_policy,
    apply_unconstrained,
    correct_random_gt,
    describe,
    deviation_fraction,
    epsilon_budget,
    identity_policy,
    local_refit,
    random_correct_gt,
    unconstrained,
    value_report,
)

from helpers import make_dataset

binary_vec = st.lists(st.integers(0, 1), min_size=1, max_size=40)


# ---------------------------------------------------------------------------
# apply_unconstrained


def test_unconstrained_identity():
    rec = np.array([1, 0, 1])
    out = apply_unconstrained(rec, rec)
    assert out.decisions.tolist() == [1, 0, 1]
    assert out.overrides == 0


def test_unconstrained_full_override():
    rec = np.array([1, 0, 1])
    out = apply_unconstrained(rec, 1 - rec)
    assert out.overrides == 3


def test_unconstrained_arithmetic():
    out = apply_unconstrained(np.array([1, 0, 1]), np.array([1, 1, 1]))
    assert out.decisions.tolist() == [1, 1, 1]
    assert out.overrides == 1


def test_unconstrained_length_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_unconstrained(np.array([1, 0]), np.array([1]))


# ---------------------------------------------------------------------------
# apply_epsilon_budget


def test_epsilon_zero_budget():
    rec = np.array([0, 1, 0, 1])
    out = apply_epsilon_budget(rec, 1 - rec, 0.0)
    assert out.decisions.tolist() == rec.tolist()
    assert out.overrides == 0


def test_epsilon_full_budget():
    rec = np.array([0, 1, 0, 1])
    out = apply_epsilon_budget(rec, 1 - rec, 1.0)
    assert out.decisions.tolist() == (1 - rec).tolist()


def test_epsilon_ascending_index_rule():
    out = apply_epsilon_budget(np.zeros(4, dtype=int), np.ones(4, dtype=int), 0.5)
    assert out.decisions.tolist() == [1, 1, 0, 0]
    assert out.overrides == 2


def test_epsilon_out_of_range():
    with pytest.raises(InvalidParameters):
        epsilon_budget(np.array([1, 0]), 1.5)


@settings(max_examples=100)
@given(binary_vec, binary_vec, st.floats(0, 1, allow_nan=False))
def test_epsilon_budget_bound(rec, target, eps):
    n = min(len(rec), len(target))
    rec = np.array(rec[:n])
    target = np.array(target[:n])
    out = apply_epsilon_budget(rec, target, eps)
    assert deviation_fraction(out.decisions, rec) <= eps
    assert out.overrides <= int(np.floor(eps * n))


# ---------------------------------------------------------------------------
# correct_random_gt


def test_correct_zero_budget():
    rec = np.array([0, 1, 0])
    out = correct_random_gt(rec, np.array([1, 1, 1]), 0, seed=0)
    assert out.decisions.tolist() == rec.tolist()
    assert out.overrides == 0


def test_correct_saturation_reaches_full_accuracy():
    rng = np.random.default_rng(8)
    rec = rng.integers(0, 2, 30)
    labels = rng.integers(0, 2, 30)
    out = correct_random_gt(rec, labels, 30, seed=1)
    assert np.array_equal(out.decisions, labels)
    assert out.overrides == int(np.sum(rec != labels))


def test_correct_same_seed_identical():
    rng = np.random.default_rng(9)
    rec = rng.integers(0, 2, 50)
    labels = rng.integers(0, 2, 50)
    a = correct_random_gt(rec, labels, 5, seed=123)
    b = correct_random_gt(rec, labels, 5, seed=123)
    assert np.array_equal(a.decisions, b.decisions)


@settings(max_examples=100)
@given(binary_vec, st.integers(0, 50), st.integers(0, 2**31 - 1))
def test_correct_never_flips_correct_indices(rec, k, seed):
    rec = np.array(rec)
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, rec.size)
    out = correct_random_gt(rec, labels, k, seed=seed)
    already_right = rec == labels
    assert np.array_equal(out.decisions[already_right], rec[already_right])
    # and every flip lands on the label
    flipped = out.decisions != rec
    assert np.array_equal(out.decisions[flipped], labels[flipped])
    assert out.overrides == min(k, int(np.sum(rec != labels)))


# ---------------------------------------------------------------------------
# deviation_fraction


def test_deviation_basic():
    a = np.array([1, 0, 0])
    assert deviation_fraction(a, a) == 0.0
    assert deviation_fraction(a, 1 - a) == 1.0
    assert deviation_fraction(a, np.array([1, 1, 0])) == pytest.approx(1 / 3)


@settings(max_examples=200)
@given(binary_vec, st.integers(0, 10**9))
def test_deviation_metric_axioms(bits, seed):
    n = len(bits)
    rng = np.random.default_rng(seed)
    a = np.array(bits)
    b = rng.integers(0, 2, n)
    c = rng.integers(0, 2, n)
    dab = deviation_fraction(a, b)
    assert dab == deviation_fraction(b, a)  # symmetry
    assert (dab == 0.0) == bool(np.array_equal(a, b))  # identity of indiscernibles
    assert dab <= deviation_fraction(a, c) + deviation_fraction(c, b) + 1e-12  # triangle


# ---------------------------------------------------------------------------
# observation-1 realizability


def test_unconstrained_report_ignores_recommendation(tiny):
    weights = ValueWeights([0.4])
    target = np.array([1, 0, 0, 1, 1, 0])
    for rec in (np.zeros(6, dtype=int), np.ones(6, dtype=int), target.copy(), 1 - target):
        out = apply_unconstrained(rec, target)
        got = value_report(tiny, out.decisions, tiny.y, weights)
        want = value_report(tiny, target, tiny.y, weights)
        assert got == want


# ---------------------------------------------------------------------------
# policy objects and dispatch


def test_policy_validation():
    with pytest.raises(InvalidParameters):
        random_correct_gt(-1)
    with pytest.raises(DimensionMismatch):
        unconstrained(np.array([2, 0]))  # non-binary target


def test_describe_is_one_line():
    for pol in (
        identity_policy(),
        unconstrained(np.array([1, 0])),
        epsilon_budget(np.array([1, 0]), 0.5),
        random_correct_gt(3, seed=7),
        local_refit(0, 50.0),
    ):
        text = describe(pol)
        assert "\n" not in text and len(text) > 0


def test_apply_policy_dispatch_matches_direct_calls():
    rec = np.array([0, 1, 0, 1, 0])
    labels = np.array([1, 1, 0, 0, 1])
    pol = epsilon_budget(labels, 0.4)
    via_policy = apply_policy(pol, rec, labels)
    direct = apply_epsilon_budget(rec, labels, 0.4)
    assert np.array_equal(via_policy.decisions, direct.decisions)

    pol = random_correct_gt(2, seed=11)
    via_policy = apply_policy(pol, rec, labels)
    direct = correct_random_gt(rec, labels, 2, seed=11)
    assert np.array_equal(via_policy.decisions, direct.decisions)

    assert apply_policy(identity_policy(), rec, labels).overrides == 0


def test_apply_policy_rejects_local_refit():
    rec = np.array([0, 1])
    with pytest.raises(InvalidParameters):
        apply_policy(local_refit(0, 50.0), rec, rec)
