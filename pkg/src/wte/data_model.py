"""Dataset containers, validation, and CSV ingestion.

CSV files are RFC-4180-style with a header row, UTF-8, '.' decimal
separator.  Missing or non-numeric cells are hard errors: silently
imputing values would change the estimand.  Row indices in error
messages are 1-based over data rows (the header is row 0).
"""

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BothArmsRequired,
    DataError,
    EmptyFile,
    MissingColumn,
    NaNValue,
    NonBinaryTreatment,
    NonNumericCell,
)

__all__ = [
    "ObservationSet",
    "UnlabeledCovariates",
    "EffectDirection",
    "load_dataset",
    "save_dataset",
    "validate",
]


class EffectDirection(enum.Enum):
    """Which tail of the CATE distribution is the worst case.

    ADVERSE_HIGH targets the subpopulation with the largest effects
    (sup convention); DESIRED_HIGH targets the smallest effects and is
    implemented by negating outcomes, estimating under ADVERSE_HIGH,
    and negating the point estimate back.
    """

    ADVERSE_HIGH = "adverse_high"
    DESIRED_HIGH = "desired_high"


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ObservationSet:
    """Immutable i.i.d. sample of (covariates X, outcome Y, treatment Z)."""

    covariates: np.ndarray
    outcomes: np.ndarray
    treatments: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        X = _frozen(np.asarray(self.covariates, dtype=float))
        y = _frozen(np.asarray(self.outcomes, dtype=float))
        zf = np.asarray(self.treatments, dtype=float)
        bad = ~((zf == 0) | (zf == 1))
        if zf.ndim == 1 and np.any(bad):
            raise NonBinaryTreatment(int(np.argmax(bad)) + 1)
        z = _frozen(zf.astype(np.int8))
        object.__setattr__(self, "covariates", X)
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "treatments", z)
        if self.column_names is not None:
            object.__setattr__(self, "column_names", tuple(self.column_names))
        validate(self)

    @property
    def n(self):
        return self.covariates.shape[0]

    @property
    def d(self):
        return self.covariates.shape[1]


@dataclass(frozen=True)
class UnlabeledCovariates:
    """Covariate-only pool used for quantile estimation."""

    covariates: np.ndarray

    def __post_init__(self):
        X = _frozen(np.asarray(self.covariates, dtype=float))
        object.__setattr__(self, "covariates", X)
        if X.ndim != 2 or X.shape[0] < 1:
            raise DataError("unlabeled pool must be a nonempty 2-d matrix")
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise NaNValue(int(r) + 1, int(c))

    @property
    def m(self):
        return self.covariates.shape[0]

    @property
    def d(self):
        return self.covariates.shape[1]


def validate(dataset, fitting_requested=False):
    """Check ObservationSet invariants; raises on the first violation.

    With ``fitting_requested`` the overlap precondition is enforced at
    the sample level: both treatment arms must be nonempty.
    """
    X, y, z = dataset.covariates, dataset.outcomes, dataset.treatments
    if X.ndim != 2:
        raise DataError("covariates must be a 2-d matrix")
    n = X.shape[0]
    if n < 1:
        raise EmptyFile("dataset has no rows")
    if y.shape != (n,) or z.shape != (n,):
        raise DataError("covariates, outcomes, treatments must share length")
    if not np.all(np.isfinite(X)):
        r, c = np.argwhere(~np.isfinite(X))[0]
        name = dataset.column_names[c] if dataset.column_names else int(c)
        raise NaNValue(int(r) + 1, name)
    if not np.all(np.isfinite(y)):
        r = int(np.argwhere(~np.isfinite(y))[0])
        raise NaNValue(r + 1, "outcome")
    bad = (z != 0) & (z != 1)
    if np.any(bad):
        raise NonBinaryTreatment(int(np.argmax(bad)) + 1)
    if fitting_requested and (np.all(z == 1) or np.all(z == 0)):
        raise BothArmsRequired("both treatment arms must be nonempty for nuisance fitting")


def _parse_cell(text, row, col):
    s = text.strip()
    if not s:
        raise NonNumericCell(row, col)
    try:
        v = float(s)
    except ValueError:
        raise NonNumericCell(row, col) from None
    if math.isnan(v) or math.isinf(v):
        raise NaNValue(row, col)
    return v


def load_dataset(path, outcome_col, treatment_col, drop_cols=()):
    """Read a CSV file into a validated ObservationSet.

    Covariate column order is file order minus the outcome, treatment,
    and dropped columns.  Deterministic: byte-identical files yield
    identical ObservationSets.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        for name in (outcome_col, treatment_col, *drop_cols):
            if name not in header:
                raise MissingColumn(name)
        drop = set(drop_cols)
        cov_names = [h for h in header if h not in drop and h not in (outcome_col, treatment_col)]
        y_idx = header.index(outcome_col)
        z_idx = header.index(treatment_col)
        cov_idx = [header.index(h) for h in cov_names]

        X_rows, ys, zs = [], [], []
        for r, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise NonNumericCell(r, header[min(len(row), len(header) - 1)])
            ys.append(_parse_cell(row[y_idx], r, outcome_col))
            zv = _parse_cell(row[z_idx], r, treatment_col)
            if zv not in (0.0, 1.0):
                raise NonBinaryTreatment(r)
            zs.append(int(zv))
            X_rows.append([_parse_cell(row[j], r, header[j]) for j in cov_idx])

    if not X_rows:
        raise EmptyFile(f"{path}: no data rows")
    return ObservationSet(
        covariates=np.array(X_rows, dtype=float),
        outcomes=np.array(ys, dtype=float),
        treatments=np.array(zs, dtype=np.int8),
        column_names=tuple(cov_names),
    )


def save_dataset(dataset, path, outcome_col="y", treatment_col="z"):
    """Write an ObservationSet to CSV with 17 significant digits.

    Round trips through :func:`load_dataset` to full float precision.
    """
    names = dataset.column_names or tuple(f"x{i + 1}" for i in range(dataset.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + [outcome_col, treatment_col])
        for i in range(dataset.n):
            row = ["%.17g" % v for v in dataset.covariates[i]]
            row.append("%.17g" % dataset.outcomes[i])
            row.append(str(int(dataset.treatments[i])))
            writer.writerow(row)
