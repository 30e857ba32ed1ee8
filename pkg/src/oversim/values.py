"""Societal-value statistics and the combined selection objective.

For a sensitive attribute column l (raw scale) and a decision vector d,

    rho_l = | (1/n) sum_i (x_raw[i, l] - xbar_l) * d_i |

with xbar_l taken over the evaluated rows themselves.  rho_score is the
same statistic with linear scores in place of hard decisions — on the
training set it coincides with the |c_l . theta~| term the fit penalizes.
The combined objective is F = accuracy - sum_l w_l * rho_l (higher better).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .fairglm import ValueWeights, as_weights
from .errors import DimensionMismatch


def _check_vector(data: Dataset, v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (data.n,):
        raise DimensionMismatch(f"{name} must have shape ({data.n},), got {v.shape}")
    return v


def _check_attr(data: Dataset, attr_index: int) -> int:
    if not 0 <= attr_index < data.d:
        raise DimensionMismatch(f"attr_index {attr_index} out of range for d={data.d}")
    return attr_index


def _rho(data: Dataset, v: np.ndarray, attr_index: int) -> float:
    if data.n == 0:
        raise DimensionMismatch("rho of an empty dataset is undefined")
    a = data.X_raw[:, attr_index]
    return float(abs((a - a.mean()) @ v / data.n))


def rho_decision(data: Dataset, decisions, attr_index: int) -> float:
    """Absolute raw-scale covariance of attribute attr_index with a 0/1
    decision vector, mean taken over the evaluated rows."""
    d = _check_vector(data, decisions, "decisions")
    if not np.isin(d, (0.0, 1.0)).all():
        raise DimensionMismatch("decisions must be 0/1")
    return _rho(data, d, _check_attr(data, attr_index))


def rho_score(data: Dataset, scores, attr_index: int) -> float:
    """Same statistic with real-valued scores in place of decisions."""
    s = _check_vector(data, scores, "scores")
    if not np.all(np.isfinite(s)):
        raise DimensionMismatch("scores must be finite")
    return _rho(data, s, _check_attr(data, attr_index))


def evaluate_F(accuracy: float, rho, weights: ValueWeights) -> float:
    """F = accuracy - sum_l w_l * rho_l."""
    weights = as_weights(weights)
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (weights.m,):
        raise DimensionMismatch(
            f"{rho.shape[0] if rho.ndim == 1 else rho.shape} rho values for {weights.m} weights"
        )
    return float(accuracy - weights.w @ rho)


@dataclass(frozen=True)
class ValueReport:
    """rho per sensitive attribute (dataset order), accuracy against the
    supplied labels, the combined F, and how many rows were evaluated."""

    rho: tuple[float, ...]
    accuracy: float
    F: float
    n_evaluated: int

    def csv_row(self) -> str:
        """accuracy, rho_1..rho_m, F, n — one comma-separated line."""
        cells = [f"{self.accuracy:.17g}", *(f"{r:.17g}" for r in self.rho),
                 f"{self.F:.17g}", str(self.n_evaluated)]
        return ",".join(cells)


def value_report(data: Dataset, decisions, labels, weights: ValueWeights) -> ValueReport:
    """Evaluate decisions on a dataset: per-attribute rho, accuracy, F."""
    weights = as_weights(weights)
    if weights.m != len(data.sensitive):
        raise DimensionMismatch(
            f"{weights.m} weights for {len(data.sensitive)} sensitive attributes"
        )
    d = _check_vector(data, decisions, "decisions")
    yv = _check_vector(data, labels, "labels")
    if not np.isin(d, (0.0, 1.0)).all() or not np.isin(yv, (0.0, 1.0)).all():
        raise DimensionMismatch("decisions and labels must be 0/1")
    if data.n == 0:
        raise DimensionMismatch("cannot evaluate on an empty dataset")
    rho = tuple(_rho(data, d, l) for l in data.sensitive)
    accuracy = float(np.mean(d == yv))
    return ValueReport(
        rho=rho,
        accuracy=accuracy,
        F=evaluate_F(accuracy, np.array(rho), weights),
        n_evaluated=data.n,
    )
