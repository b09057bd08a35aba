"""Preprocessing chain: MinMax scaling, correlation-driven feature
engineering, SMOTE oversampling, and stratified train/test splitting.

Two pipeline orders are supported. ``paper_order`` scales, engineers and
oversamples the full dataset before splitting; it reproduces the familiar
876/219 arithmetic on a 1000-row input but leaks test information through
global scaling and SMOTE. ``leak_safe`` splits first and fits everything
on the training rows only; it is the methodologically sound choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RngStream, as_matrix, shuffle
from .dataset import Dataset, N_CLASSES

CORR_HI_DEFAULT = 0.5
CORR_LO_DEFAULT = -0.4
PIPELINE_ORDERS = ("paper_order", "leak_safe")


@dataclass
class MinMaxParams:
    col_min: np.ndarray
    col_max: np.ndarray

    def to_dict(self) -> dict:
        return {"min": self.col_min.tolist(), "max": self.col_max.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MinMaxParams":
        return cls(np.asarray(d["min"], float), np.asarray(d["max"], float))


@dataclass
class CorrelationReport:
    matrix: np.ndarray
    feature_names: list[str]
    zero_variance_columns: list[int]
    engineered_pairs: list[tuple[int, int, float]] = field(default_factory=list)
    flagged_pairs: list[tuple[int, int, float]] = field(default_factory=list)
    engineered_names: list[str] = field(default_factory=list)
    hi_threshold: float = CORR_HI_DEFAULT
    lo_threshold: float = CORR_LO_DEFAULT


@dataclass
class SplitIndices:
    train: list[int]
    test: list[int]


@dataclass
class PreparedData:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    minmax: MinMaxParams
    report: CorrelationReport
    feature_names: list[str]
    order: str


def fit_minmax(X_fit) -> MinMaxParams:
    X_fit = as_matrix(X_fit)
    if X_fit.shape[0] == 0:
        raise ValueError("cannot fit MinMax on an empty matrix")
    return MinMaxParams(X_fit.min(axis=0), X_fit.max(axis=0))


def apply_minmax(X, p: MinMaxParams) -> np.ndarray:
    """Scale columnwise to (x - min) / (max - min).

    Constant fitted columns map to 0. Values outside the fitted range are
    not clamped, so transformed values may fall outside [0, 1].
    """
    X = as_matrix(X)
    if X.shape[1] != p.col_min.shape[0]:
        raise ValueError(
            f"column count mismatch: matrix has {X.shape[1]}, params have {p.col_min.shape[0]}"
        )
    span = p.col_max - p.col_min
    safe = np.where(span == 0, 1.0, span)
    out = (X - p.col_min) / safe
    out[:, span == 0] = 0.0
    return out


def pearson_matrix(X, feature_names: list[str] | None = None) -> CorrelationReport:
    """Pearson r for every column pair.

    Zero-variance columns get r=0 against everything else and 1 on the
    diagonal.
    """
    X = as_matrix(X)
    n, m = X.shape
    if n < 2:
        raise ValueError("pearson_matrix needs at least 2 rows")
    if feature_names is None:
        feature_names = [f"col_{j}" for j in range(m)]
    centered = X - X.mean(axis=0)
    sd = np.sqrt((centered**2).mean(axis=0))
    zero_var = [int(j) for j in np.where(sd == 0)[0]]
    safe_sd = np.where(sd == 0, 1.0, sd)
    corr = (centered.T @ centered) / n / np.outer(safe_sd, safe_sd)
    for j in zero_var:
        corr[j, :] = 0.0
        corr[:, j] = 0.0
    np.fill_diagonal(corr, 1.0)
    return CorrelationReport(corr, list(feature_names), zero_var)


def append_pair_means(X, pairs) -> np.ndarray:
    """Append one column per (i, j) pair: the elementwise mean of i and j."""
    X = as_matrix(X)
    if not pairs:
        return X
    extra = [(X[:, i] + X[:, j]) / 2.0 for i, j, *_ in pairs]
    return np.column_stack([X] + extra)


def engineer_features(
    X,
    report: CorrelationReport,
    hi: float = CORR_HI_DEFAULT,
    lo: float = CORR_LO_DEFAULT,
):
    """Combine strongly correlated column pairs into new mean columns.

    For every original pair (i < j) with r > hi, a column named
    "<name_i>+<name_j>" is appended, in (i, j) order. Pairs with r < lo
    are recorded as flagged but nothing is dropped. Engineered columns
    never seed further engineering.
    """
    X = as_matrix(X)
    m = report.matrix.shape[0]
    if X.shape[1] != m:
        raise ValueError(
            f"shape mismatch: matrix has {X.shape[1]} columns, report covers {m}"
        )
    engineered: list[tuple[int, int, float]] = []
    flagged: list[tuple[int, int, float]] = []
    for i in range(m):
        for j in range(i + 1, m):
            r = float(report.matrix[i, j])
            if r > hi:
                engineered.append((i, j, r))
            elif r < lo:
                flagged.append((i, j, r))
    names = [
        f"{report.feature_names[i]}+{report.feature_names[j]}" for i, j, _ in engineered
    ]
    out = CorrelationReport(
        matrix=report.matrix,
        feature_names=report.feature_names,
        zero_variance_columns=report.zero_variance_columns,
        engineered_pairs=engineered,
        flagged_pairs=flagged,
        engineered_names=names,
        hi_threshold=hi,
        lo_threshold=lo,
    )
    return append_pair_means(X, engineered), out


def smote(X, y, k: int = 5, stream: RngStream | None = None):
    """Oversample every minority class up to the majority count.

    Each synthetic row is x_i + gap * (x_nn - x_i) for a uniformly random
    class member x_i, a uniformly random pick x_nn among its
    min(k, class_count - 1) nearest same-class neighbours (Euclidean,
    ties to the lower row index), and gap uniform in [0, 1). Original
    rows come first in the output, unchanged.
    """
    if stream is None:
        raise ValueError("smote requires an explicit RngStream")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=N_CLASSES)
    majority = int(counts.max())

    synth_X: list[np.ndarray] = []
    synth_y: list[int] = []
    for cls in range(N_CLASSES):
        count = int(counts[cls])
        need = majority - count
        if count == 0 or need == 0:
            continue
        if count < 2:
            raise ValueError(f"class too small for SMOTE: class {cls} has {count} sample")
        rows = np.where(y == cls)[0]
        Xc = X[rows]
        k_eff = min(k, count - 1)
        # per member: k_eff nearest same-class neighbours, ties to lower row index
        d2 = ((Xc[:, None, :] - Xc[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        neighbour_idx = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
        for _ in range(need):
            member = stream.randint(count)
            nn = neighbour_idx[member][stream.randint(k_eff)]
            gap = stream.uniform()
            synth_X.append(Xc[member] + gap * (Xc[nn] - Xc[member]))
            synth_y.append(cls)

    if not synth_X:
        return X, y
    X_out = np.vstack([X, np.vstack(synth_X)])
    y_out = np.concatenate([y, np.asarray(synth_y, dtype=np.int64)])
    return X_out, y_out


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(y, test_fraction: float = 0.2, stream: RngStream | None = None) -> SplitIndices:
    """Per-class shuffled split; test gets round(n_c * fraction) per class.

    Classes with at least 2 samples contribute at least 1 test row and
    keep at least 1 training row.
    """
    if stream is None:
        raise ValueError("stratified_split requires an explicit RngStream")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    y = np.asarray(y, dtype=np.int64)
    train: list[int] = []
    test: list[int] = []
    for cls in range(N_CLASSES):
        idx = [int(i) for i in np.where(y == cls)[0]]
        n_c = len(idx)
        if n_c == 0:
            continue
        order = shuffle(idx, stream)
        n_test = _round_half_up(n_c * test_fraction)
        if n_c >= 2:
            n_test = min(max(n_test, 1), n_c - 1)
        else:
            n_test = min(n_test, n_c)
        test.extend(order[:n_test])
        train.extend(order[n_test:])
    return SplitIndices(train=train, test=test)


def run_pipeline(
    d: Dataset,
    order: str = "paper_order",
    *,
    test_fraction: float = 0.2,
    smote_k: int = 5,
    corr_hi: float = CORR_HI_DEFAULT,
    corr_lo: float = CORR_LO_DEFAULT,
    stream: RngStream | None = None,
) -> PreparedData:
    """Run the full preprocessing chain in the requested order."""
    if stream is None:
        raise ValueError("run_pipeline requires an explicit RngStream")
    if order not in PIPELINE_ORDERS:
        raise ValueError(f"order must be one of {PIPELINE_ORDERS}, got {order!r}")
    smote_stream = stream.derive(0)
    split_stream = stream.derive(1)

    if order == "paper_order":
        params = fit_minmax(d.X)
        X_scaled = apply_minmax(d.X, params)
        report = pearson_matrix(X_scaled, d.feature_names)
        X_eng, report = engineer_features(X_scaled, report, corr_hi, corr_lo)
        X_bal, y_bal = smote(X_eng, d.y, smote_k, smote_stream)
        split = stratified_split(y_bal, test_fraction, split_stream)
        X_train, y_train = X_bal[split.train], y_bal[split.train]
        X_test, y_test = X_bal[split.test], y_bal[split.test]
    else:
        split = stratified_split(d.y, test_fraction, split_stream)
        params = fit_minmax(d.X[split.train])
        Xtr = apply_minmax(d.X[split.train], params)
        Xte = apply_minmax(d.X[split.test], params)
        report = pearson_matrix(Xtr, d.feature_names)
        Xtr, report = engineer_features(Xtr, report, corr_hi, corr_lo)
        Xte = append_pair_means(Xte, report.engineered_pairs)
        X_train, y_train = smote(Xtr, d.y[split.train], smote_k, smote_stream)
        X_test, y_test = Xte, d.y[split.test]

    return PreparedData(
        X_train=X_train,
        y_train=y_train,
        X_test=X_test,
        y_test=y_test,
        minmax=params,
        report=report,
        feature_names=list(report.feature_names) + list(report.engineered_names),
        order=order,
    )


# --- report serialization ---------------------------------------------------


def correlation_to_csv(report: CorrelationReport) -> str:
    names = report.feature_names
    lines = ["," + ",".join(_csv_quote(n) for n in names)]
    for i, name in enumerate(names):
        row = [repr(float(v)) for v in report.matrix[i]]
        lines.append(_csv_quote(name) + "," + ",".join(row))
    return "\n".join(lines) + "\n"


def correlation_to_json(report: CorrelationReport) -> dict:
    def pair_doc(p):
        i, j, r = p
        return {
            "i": int(i),
            "j": int(j),
            "feature_i": report.feature_names[i],
            "feature_j": report.feature_names[j],
            "r": float(r),
        }

    return {
        "hi_threshold": report.hi_threshold,
        "lo_threshold": report.lo_threshold,
        "engineered": [pair_doc(p) for p in report.engineered_pairs],
        "flagged": [pair_doc(p) for p in report.flagged_pairs],
        "zero_variance_columns": list(report.zero_variance_columns),
    }


def _csv_quote(s: str) -> str:
    if "," in s or '"' in s:
        return '"' + s.replace('"', '""') + '"'
    return s
