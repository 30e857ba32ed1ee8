"""Tabular data loading, target binarization, standardization, splits.

The pipeline is: load_csv -> binarize/standardize (one call) -> split or
partition.  Standardization keeps the raw-scale matrix alongside the
standardized one; the raw columns are what the societal-value statistics
and the attribute-threshold partitions are defined on.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptySide, MissingColumn, ParseError

HOUSING_TARGET = "MEDV"
HOUSING_SENSITIVE = ("B", "TAX")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RawTable:
    """A parsed numeric table: ordered columns, a designated target column,
    and the names of the sensitive attribute columns (in the order given)."""

    column_names: tuple[str, ...]
    values: np.ndarray  # n x (number of columns), float64, all finite
    target_column: str
    sensitive_columns: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=float)))
        if self.values.ndim != 2 or self.values.shape[1] != len(self.column_names):
            raise DimensionMismatch(
                f"table has {self.values.shape} values for {len(self.column_names)} columns"
            )
        if self.values.shape[0] < 1:
            raise DimensionMismatch("table must have at least one row")
        if not np.all(np.isfinite(self.values)):
            raise ParseError("table contains non-finite values")
        for name in (self.target_column, *self.sensitive_columns):
            if name not in self.column_names:
                raise MissingColumn(f"column {name!r} not in table")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.column_names.index(name)
        except ValueError:
            raise MissingColumn(f"column {name!r} not in table") from None
        return self.values[:, j]


@dataclass(frozen=True)
class Dataset:
    """Standardized design matrix plus everything evaluation needs later:
    the raw-scale matrix, binary labels, sensitive column indices, and the
    standardization statistics (so new rows can be standardized consistently).

    row_indices track each row's position in the source table so that
    decisions made on a partition can be reassembled onto the parent set.
    Arrays are read-only; instances are safe to share across workers.
    """

    X: np.ndarray  # n x d, standardized
    X_raw: np.ndarray  # n x d, original scale
    y: np.ndarray  # n, values in {0, 1}
    sensitive: tuple[int, ...]  # column indices into X/X_raw
    feature_names: tuple[str, ...]
    mu: np.ndarray  # d, per-column means removed
    sigma: np.ndarray  # d, per-column scales divided out (1.0 where constant)
    constant_columns: tuple[int, ...] = ()
    row_indices: np.ndarray = field(default=None)  # n, indices into the source table

    def __post_init__(self):
        for name in ("X", "X_raw", "mu", "sigma"):
            object.__setattr__(self, name, _readonly(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "y", _readonly(np.asarray(self.y, dtype=np.int64)))
        if self.row_indices is None:
            object.__setattr__(self, "row_indices", np.arange(self.X.shape[0]))
        object.__setattr__(self, "row_indices", _readonly(np.asarray(self.row_indices, dtype=np.int64)))
        n, d = self.X.shape
        if self.X_raw.shape != (n, d):
            raise DimensionMismatch("X and X_raw shapes differ")
        if self.y.shape != (n,) or self.row_indices.shape != (n,):
            raise DimensionMismatch("label/index vectors do not match row count")
        if self.mu.shape != (d,) or self.sigma.shape != (d,):
            raise DimensionMismatch("standardization statistics do not match column count")
        if len(self.feature_names) != d:
            raise DimensionMismatch("feature_names does not match column count")
        if n and not np.isin(self.y, (0, 1)).all():
            raise DimensionMismatch("labels must be 0/1")
        for j in self.sensitive:
            if not 0 <= j < d:
                raise DimensionMismatch(f"sensitive index {j} out of range for d={d}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        """Rows selected by integer index array, preserving provenance."""
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            X=self.X[idx],
            X_raw=self.X_raw[idx],
            y=self.y[idx],
            sensitive=self.sensitive,
            feature_names=self.feature_names,
            mu=self.mu,
            sigma=self.sigma,
            constant_columns=self.constant_columns,
            row_indices=self.row_indices[idx],
        )


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int


@dataclass(frozen=True)
class Partition:
    """Result of an attribute-threshold partition.  Iterable as
    (at_or_above, below) so it unpacks like a pair; empty sides are legal
    and flagged rather than raised."""

    at_or_above: Dataset
    below: Dataset
    attr_index: int
    threshold: float

    def __iter__(self):
        return iter((self.at_or_above, self.below))

    @property
    def empty_sides(self) -> tuple[bool, bool]:
        return (self.at_or_above.n == 0, self.below.n == 0)


def load_csv(path, target_column: str, sensitive_columns) -> RawTable:
    """Parse a headed CSV of numeric columns.

    Errors carry 1-based row numbers (header is row 1) and column names so a
    bad cell can be found in the file directly.
    """
    sensitive_columns = tuple(sensitive_columns)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        names = tuple(h.strip() for h in header)
        if len(set(names)) != len(names):
            raise ParseError(f"{path}: duplicate column names in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # ignore blank lines
            if len(row) != len(names):
                raise ParseError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(names)}"
                )
            parsed = []
            for name, cell in zip(names, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {lineno}, column {name!r}: "
                        f"could not parse {cell.strip()!r} as a number"
                    ) from None
                if not np.isfinite(v):
                    raise ParseError(
                        f"{path}: row {lineno}, column {name!r}: non-finite value {cell.strip()!r}"
                    )
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return RawTable(
        column_names=names,
        values=np.array(rows, dtype=float),
        target_column=target_column,
        sensitive_columns=sensitive_columns,
    )


def binarize_target(values: np.ndarray) -> np.ndarray:
    """1 where the value is >= the median of the vector, else 0."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DimensionMismatch("target must be a non-empty vector")
    return (values >= np.median(values)).astype(np.int64)


def standardize(table: RawTable) -> Dataset:
    """Binarize the target at its median and standardize every feature column
    to zero mean and unit variance (divisor n).  Constant columns become all
    zeros, keep sigma 1.0, and are recorded (with a warning) instead of
    dividing by zero.  The raw matrix is preserved untouched.
    """
    feature_names = tuple(n for n in table.column_names if n != table.target_column)
    cols = [table.column_names.index(n) for n in feature_names]
    X_raw = table.values[:, cols]
    y = binarize_target(table.column(table.target_column))
    mu = X_raw.mean(axis=0)
    var = X_raw.var(axis=0)  # divisor n
    constant = np.where(var == 0.0)[0]
    sigma = np.sqrt(var)
    sigma[constant] = 1.0
    X = (X_raw - mu) / sigma
    if constant.size:
        names = ", ".join(feature_names[j] for j in constant)
        warnings.warn(f"constant feature column(s) left as zeros: {names}", stacklevel=2)
        X[:, constant] = 0.0
    sensitive = tuple(feature_names.index(n) for n in table.sensitive_columns)
    return Dataset(
        X=X,
        X_raw=X_raw,
        y=y,
        sensitive=sensitive,
        feature_names=feature_names,
        mu=mu,
        sigma=sigma,
        constant_columns=tuple(int(j) for j in constant),
    )


def split_train_test(data: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Uniform random split without replacement; test gets floor(f * n) rows.

    Both sides must be non-empty, otherwise EmptySide.  The permutation is
    drawn from np.random.default_rng(seed), so the assignment is a pure
    function of (data, test_fraction, seed).
    """
    if not 0.0 < test_fraction < 1.0:
        raise EmptySide(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(np.floor(test_fraction * data.n))
    if n_test < 1 or data.n - n_test < 1:
        raise EmptySide(
            f"split of n={data.n} at fraction {test_fraction} leaves an empty side"
        )
    perm = np.random.default_rng(seed).permutation(data.n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return SplitPair(train=data.subset(train_idx), test=data.subset(test_idx), seed=seed)


def partition_by_attribute(data: Dataset, attr_index: int, threshold: float) -> Partition:
    """Split rows by a raw-scale attribute: (value >= threshold, value < threshold).

    Empty sides are allowed; they come back as zero-row Datasets, flagged via
    Partition.empty_sides.
    """
    if not 0 <= attr_index < data.d:
        raise DimensionMismatch(f"attr_index {attr_index} out of range for d={data.d}")
    mask = data.X_raw[:, attr_index] >= threshold
    return Partition(
        at_or_above=data.subset(np.where(mask)[0]),
        below=data.subset(np.where(~mask)[0]),
        attr_index=attr_index,
        threshold=threshold,
    )


def bundled_housing_path() -> Path:
    """Filesystem path of the packaged 506-town housing table."""
    return Path(__file__).parent / "datasets" / "housing.csv"


def load_housing() -> Dataset:
    """The packaged housing table, binarized at the MEDV median, with
    B and TAX as the sensitive attributes (in that order)."""
    table = load_csv(bundled_housing_path(), HOUSING_TARGET, HOUSING_SENSITIVE)
    return standardize(table)
