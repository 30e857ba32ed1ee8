"""Fairness-regularized logistic regression.

The candidate decision algorithm: a logistic model whose training objective
trades log-likelihood against per-attribute covariance penalties,

    maximize  sum_i log p(y_i | x_i, theta)
              - sum_l w_l * | c_l . theta~ |
              - (ridge / 2) * ||theta~||^2

where theta~ excludes the intercept and c_l is the covariance vector of raw
sensitive attribute l with the standardized features,

    c_l = (1/n) sum_i (x_raw[i, l] - mean_l) * x_i .

During training the "decision" inside the penalty is the linear score (which
keeps the objective concave); hard 0/1 decisions are only taken at
evaluation time.  Maximization is subgradient ascent with a backtracking
line search; the sign of a hinge term at its kink is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch, InvalidParameters, NonFiniteIterate, SingleClassData

_ARMIJO = 1e-4  # sufficient-increase constant
_SHRINK = 0.5  # backtracking factor
_MIN_STEP = 1e-20  # below this the iterate is converged at machine precision
_RESCUE_STEP = 1e-10  # accepted steps below this trigger the kink rescue
_KINK_TOL = 1e-6  # |c_l^T theta| within this (x scale) counts as on the kink
_GAUSS_SCALE = 0.1  # std-dev of the optional gaussian init


@dataclass(frozen=True)
class ValueWeights:
    """Non-negative penalty weights, one per sensitive attribute."""

    w: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.w, dtype=float))
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        if self.w.ndim != 1:
            raise DimensionMismatch("weights must be a vector")
        if not np.all(np.isfinite(self.w)) or np.any(self.w < 0):
            raise InvalidParameters("weights must be finite and non-negative")

    @property
    def m(self) -> int:
        return self.w.shape[0]


def as_weights(seq) -> ValueWeights:
    return seq if isinstance(seq, ValueWeights) else ValueWeights(np.asarray(seq, dtype=float))


@dataclass(frozen=True)
class FitOptions:
    """Solver knobs.

    step_rule "backtracking" starts each iteration from twice the last
    accepted step and halves until the Armijo condition holds; "fixed" takes
    step_size every iteration.  init "zeros" or "gaussian" (N(0, 0.1^2),
    drawn from np.random.default_rng(seed)).
    """

    max_iters: int = 5000
    tolerance: float = 1e-6
    step_rule: str = "backtracking"
    step_size: float = 1.0
    ridge: float = 1e-6
    init: str = "zeros"
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 0 or self.tolerance < 0 or self.step_size <= 0 or self.ridge < 0:
            raise InvalidParameters("max_iters/tolerance/ridge must be >= 0, step_size > 0")
        if self.step_rule not in ("backtracking", "fixed"):
            raise InvalidParameters(f"unknown step_rule {self.step_rule!r}")
        if self.init not in ("zeros", "gaussian"):
            raise InvalidParameters(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class FitInfo:
    iterations: int
    objective: float
    subgradient_norm: float
    seed: int
    stop_reason: str  # "tolerance" | "max_iters" | "stalled"


@dataclass(frozen=True)
class FairGlmModel:
    """theta holds the d coefficients followed by the intercept."""

    theta: np.ndarray
    weights: ValueWeights
    fit_info: FitInfo
    feature_names: tuple[str, ...]
    sensitive: tuple[int, ...]

    def __post_init__(self):
        th = np.ascontiguousarray(np.asarray(self.theta, dtype=float))
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)
        if self.theta.ndim != 1 or self.theta.shape[0] != len(self.feature_names) + 1:
            raise DimensionMismatch("theta must have one entry per feature plus an intercept")

    @property
    def coef(self) -> np.ndarray:
        return self.theta[:-1]

    @property
    def intercept(self) -> float:
        return float(self.theta[-1])


def sensitive_covariances(data: Dataset) -> np.ndarray:
    """m x d matrix whose row l is c_l, computed from this data's own rows
    (pass the training set so evaluation never leaks other splits' means)."""
    if data.n == 0:
        raise DimensionMismatch("cannot compute covariances of an empty dataset")
    rows = []
    for l in data.sensitive:
        a = data.X_raw[:, l]
        rows.append((a - a.mean()) @ data.X / data.n)
    return np.array(rows, dtype=float).reshape(len(data.sensitive), data.d)


def _check_theta(theta, d: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (d + 1,):
        raise DimensionMismatch(f"theta must have shape ({d + 1},), got {theta.shape}")
    return theta


def _log_sigmoid(s: np.ndarray) -> np.ndarray:
    # log sigma(s) = -log(1 + e^{-s}), stable for large |s|
    return -np.logaddexp(0.0, -s)


def _sigmoid(s: np.ndarray) -> np.ndarray:
    return np.exp(_log_sigmoid(s))


def _loglik(s: np.ndarray, y: np.ndarray) -> float:
    # sum_i [ y_i * s_i - log(1 + e^{s_i}) ]
    return float(y @ s - np.logaddexp(0.0, s).sum())


def objective_value(theta, data: Dataset, weights: ValueWeights, ridge: float = 1e-6) -> float:
    """Penalized log-likelihood at theta (the quantity fit maximizes)."""
    weights = as_weights(weights)
    if weights.m != len(data.sensitive):
        raise DimensionMismatch(
            f"{weights.m} weights for {len(data.sensitive)} sensitive attributes"
        )
    theta = _check_theta(theta, data.d)
    s = data.X @ theta[:-1] + theta[-1]
    C = sensitive_covariances(data)
    penalty = weights.w @ np.abs(C @ theta[:-1]) if weights.m else 0.0
    return _loglik(s, data.y) - penalty - 0.5 * ridge * float(theta[:-1] @ theta[:-1])


def objective_subgradient(theta, data: Dataset, weights: ValueWeights, ridge: float = 1e-6) -> np.ndarray:
    """A subgradient of the objective at theta (sign 0 at hinge kinks)."""
    weights = as_weights(weights)
    if weights.m != len(data.sensitive):
        raise DimensionMismatch(
            f"{weights.m} weights for {len(data.sensitive)} sensitive attributes"
        )
    theta = _check_theta(theta, data.d)
    s = data.X @ theta[:-1] + theta[-1]
    resid = data.y - _sigmoid(s)
    g = np.empty_like(theta)
    g[:-1] = resid @ data.X
    g[-1] = resid.sum()
    C = sensitive_covariances(data)
    if weights.m:
        signs = np.sign(C @ theta[:-1])  # sign(0) == 0 at the kink
        g[:-1] -= (weights.w * signs) @ C
    g[:-1] -= ridge * theta[:-1]
    return g


def fit(data: Dataset, weights: ValueWeights, opts: FitOptions = FitOptions()) -> FairGlmModel:
    """Maximize the penalized log-likelihood by subgradient ascent.

    Deterministic: identical (data, weights, opts) give bitwise-identical
    theta.  When the backtracking search collapses while the iterate sits on
    a penalty kink, one retry along the minimum-norm (steepest-ascent)
    element of the superdifferential lets the solver slide along the kink
    surface instead of stopping against it.  Stops when the minimum-norm
    subgradient falls below opts.tolerance ("tolerance"), when no direction
    improves the objective at machine precision ("stalled"), or after
    max_iters steps.  fit_info.subgradient_norm records the minimum-norm
    element, which vanishes at kink-optimal solutions.
    """
    weights = as_weights(weights)
    if weights.m != len(data.sensitive):
        raise DimensionMismatch(
            f"{weights.m} weights for {len(data.sensitive)} sensitive attributes"
        )
    if data.n < 2 or len(np.unique(data.y)) < 2:
        raise SingleClassData("fit needs at least two rows with both classes present")

    d = data.d
    y = data.y.astype(float)
    X = data.X
    C = sensitive_covariances(data)
    w = weights.w
    cnorms = np.linalg.norm(C, axis=1) if w.size else np.zeros(0)
    ridge = opts.ridge

    def value(theta):
        # returns (objective, score vector) so the accepted point's scores
        # can be reused by the subgradient
        s = X @ theta[:-1] + theta[-1]
        pen = w @ np.abs(C @ theta[:-1]) if w.size else 0.0
        return _loglik(s, y) - pen - 0.5 * ridge * float(theta[:-1] @ theta[:-1]), s

    def smooth_grad(theta, s):
        resid = y - _sigmoid(s)
        g = np.empty(d + 1)
        g[:-1] = resid @ X - ridge * theta[:-1]
        g[-1] = resid.sum()
        return g

    def subgrad(theta, s):
        g = smooth_grad(theta, s)
        if w.size:
            g[:-1] -= (w * np.sign(C @ theta[:-1])) @ C
        return g

    def min_norm_direction(theta, s):
        """Minimum-norm element of the superdifferential.

        Where the iterate sits numerically on a penalty kink the sign factor
        is free in [-1, 1]; choosing it to minimize the direction's norm
        yields the steepest-ascent direction, which slides along the kink
        surface instead of oscillating across it.  A (near-)zero norm
        certifies optimality.  Returns (direction, on_kink).
        """
        g = smooth_grad(theta, s)
        if not w.size:
            return g, False
        u = C @ theta[:-1]
        tnorm = max(1.0, float(np.linalg.norm(theta[:-1])))
        free = []
        for l in range(w.size):
            if w[l] == 0.0:
                continue
            # the trap the rescue unwinds leaves |u_l| at optimization-error
            # size, not machine size, so the band is generous; every sign
            # choice keeps the true gradient inside the candidate set and the
            # line search validates whatever direction comes out
            scale = max(1.0, float(cnorms[l]) * tnorm)
            if abs(float(u[l])) <= _KINK_TOL * scale:
                free.append(l)
            else:
                g[:-1] -= w[l] * np.sign(u[l]) * C[l]
        if not free:
            return g, False
        B = np.array([w[l] * C[l] for l in free])  # K x d rows to cancel
        beta = np.zeros(len(free))
        for _ in range(60):  # tiny box-constrained least squares, K <= m
            prev = beta.copy()
            for k in range(len(free)):
                bb = float(B[k] @ B[k])
                if bb == 0.0:
                    continue
                r = g[:-1] - (beta @ B - beta[k] * B[k])
                beta[k] = min(1.0, max(-1.0, float(B[k] @ r) / bb))
            if np.max(np.abs(beta - prev)) < 1e-14:
                break
        g[:-1] -= beta @ B
        return g, True

    def search(base, theta, f, direction):
        # backtracking Armijo line search; the sufficient-increase threshold
        # uses ||direction||^2, a valid lower bound on the directional
        # derivative both for the gradient and for the minimum-norm element
        dd = float(direction @ direction)
        step = base * 2.0
        while step >= _MIN_STEP:
            cand = theta + step * direction
            fc, sc = value(cand)
            # fc > f guards against float absorption: once step * direction
            # vanishes against theta the threshold also absorbs into f, and
            # accepting that no-op would spin the loop without progress
            if fc >= f + _ARMIJO * step * dd and fc > f:  # NaN -> shrink
                return step, cand, fc, sc
            step *= _SHRINK
        return 0.0, None, None, None

    if opts.init == "zeros":
        theta = np.zeros(d + 1)
    else:
        theta = _GAUSS_SCALE * np.random.default_rng(opts.seed).standard_normal(d + 1)

    f, s = value(theta)
    eta = opts.step_size
    iterations = 0
    stop = "max_iters"
    kink_mode = False  # last accepted step followed the minimum-norm element
    g = subgrad(theta, s)
    for _ in range(opts.max_iters):
        gnorm2 = float(g @ g)
        if np.sqrt(gnorm2) <= opts.tolerance:
            stop = "tolerance"
            break
        if opts.step_rule == "fixed":
            theta = theta + opts.step_size * g
            f, s = value(theta)
            if not np.isfinite(f) or not np.all(np.isfinite(theta)):
                raise NonFiniteIterate(
                    f"fixed step {opts.step_size} diverged at iteration {iterations + 1}"
                )
        else:
            accepted = None
            if kink_mode:
                # while the iterate stays on the kink, keep following the
                # minimum-norm element instead of re-collapsing the plain
                # search every iteration
                direction, on_kink = min_norm_direction(theta, s)
                if on_kink:
                    if float(np.linalg.norm(direction)) <= opts.tolerance:
                        stop = "tolerance"
                        break
                    found = search(eta, theta, f, direction)
                    if found[0] >= _MIN_STEP:
                        accepted = found
                else:
                    kink_mode = False
            if accepted is None:
                step, cand, fc, sc = search(eta, theta, f, g)
                if step < _RESCUE_STEP:
                    # sign(u) flips across a kink, so the plain subgradient
                    # can pin the iterate there; retry along the steepest-
                    # ascent (minimum-norm) element before giving up
                    direction, on_kink = min_norm_direction(theta, s)
                    if on_kink:
                        if float(np.linalg.norm(direction)) <= opts.tolerance:
                            stop = "tolerance"
                            break
                        # fresh base: eta may be microscopic after the creep
                        # that triggered the rescue
                        rstep, rcand, rfc, rsc = search(max(eta, 0.5), theta, f, direction)
                        if rstep >= _MIN_STEP:
                            step, cand, fc, sc = rstep, rcand, rfc, rsc
                            kink_mode = True
                if step < _MIN_STEP:
                    stop = "stalled"
                    break
                accepted = (step, cand, fc, sc)
            eta, theta, f, s = accepted
        iterations += 1
        g = subgrad(theta, s)

    info = FitInfo(
        iterations=iterations,
        objective=f,
        subgradient_norm=float(np.linalg.norm(min_norm_direction(theta, s)[0])),
        seed=opts.seed,
        stop_reason=stop,
    )
    return FairGlmModel(
        theta=theta,
        weights=weights,
        fit_info=info,
        feature_names=data.feature_names,
        sensitive=data.sensitive,
    )


def predict_score(model: FairGlmModel, x) -> tuple[float, float]:
    """Linear score and class-1 probability for one standardized row
    (standardize new rows with the same statistics as the fit data)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.theta.shape[0] - 1,):
        raise DimensionMismatch(
            f"x must have shape ({model.theta.shape[0] - 1},), got {x.shape}"
        )
    s = float(x @ model.coef + model.intercept)
    return s, float(_sigmoid(np.array(s)))


def decide(model: FairGlmModel, x) -> int:
    """Hard decision: 1 iff the class-1 probability is >= 1/2 (score >= 0)."""
    score, _ = predict_score(model, x)
    return int(score >= 0.0)


def scores(model: FairGlmModel, X: np.ndarray) -> np.ndarray:
    """Linear scores for a standardized matrix of rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.theta.shape[0] - 1:
        raise DimensionMismatch("X columns must match the model's feature count")
    return X @ model.coef + model.intercept


def decide_all(model: FairGlmModel, X: np.ndarray) -> np.ndarray:
    """Hard decisions for a standardized matrix of rows."""
    return (scores(model, X) >= 0.0).astype(np.int64)


_MODEL_FORMAT = "oversim-model-v1"


def save_model(model: FairGlmModel, path) -> None:
    """Flat key=value text record; theta entries use 17 significant digits so
    the round trip is exact and runs stay diffable."""
    if any("," in n or "\n" in n for n in model.feature_names):
        raise InvalidParameters("feature names must not contain commas or newlines")
    fi = model.fit_info
    lines = [
        f"format={_MODEL_FORMAT}",
        "feature_names=" + ",".join(model.feature_names),
        "sensitive=" + ",".join(str(j) for j in model.sensitive),
        "weights=" + ",".join(f"{v:.17g}" for v in model.weights.w),
        "theta=" + ",".join(f"{v:.17g}" for v in model.theta),
        f"iterations={fi.iterations}",
        f"objective={fi.objective:.17g}",
        f"subgradient_norm={fi.subgradient_norm:.17g}",
        f"seed={fi.seed}",
        f"stop_reason={fi.stop_reason}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> FairGlmModel:
    fields = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, val = line.partition("=")
            fields[key] = val
    if fields.get("format") != _MODEL_FORMAT:
        raise InvalidParameters(f"{path}: not a {_MODEL_FORMAT} file")
    feature_names = tuple(fields["feature_names"].split(","))
    sensitive = tuple(int(t) for t in fields["sensitive"].split(",") if t != "")
    wtext = fields["weights"]
    weights = ValueWeights(np.array([float(t) for t in wtext.split(",")] if wtext else [], dtype=float))
    theta = np.array([float(t) for t in fields["theta"].split(",")], dtype=float)
    info = FitInfo(
        iterations=int(fields["iterations"]),
        objective=float(fields["objective"]),
        subgradient_norm=float(fields["subgradient_norm"]),
        seed=int(fields["seed"]),
        stop_reason=fields["stop_reason"],
    )
    return FairGlmModel(
        theta=theta,
        weights=weights,
        fit_info=info,
        feature_names=feature_names,
        sensitive=sensitive,
    )
