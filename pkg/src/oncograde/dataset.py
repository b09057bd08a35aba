"""Dataset schema, CSV loading, and the seeded synthetic generator.

The schema is a 23-feature tabular layout for lung-cancer risk records
with a three-level target (Low=0, Medium=1, High=2). A "Patient Id"
column is carried as metadata only; it never feeds a model.

Real data is not bundled; :func:`synth_generate` produces a deterministic
stand-in with class-monotone risk features so the whole suite runs
hermetically.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import RngStream, as_matrix

ORDINAL_LOW, ORDINAL_HIGH = 1, 9
AGE_MIN, AGE_MAX = 25, 75

FEATURE_NAMES: tuple[str, ...] = (
    "Age",
    "Gender",
    "Air Pollution",
    "Alcohol use",
    "Dust Allergy",
    "Occupational Hazards",
    "Genetic Risk",
    "Chronic Lung Disease",
    "Balanced Diet",
    "Obesity",
    "Smoking",
    "Passive Smoker",
    "Chest Pain",
    "Coughing of Blood",
    "Fatigue",
    "Weight Loss",
    "Shortness of Breath",
    "Wheezing",
    "Swallowing Difficulty",
    "Clubbing of Finger Nails",
    "Frequent Cold",
    "Dry Cough",
    "Snoring",
)

LABEL_NAME = "Level"
LABEL_VALUES: tuple[str, str, str] = ("Low", "Medium", "High")
ID_NAME = "Patient Id"
N_CLASSES = 3


@dataclass(frozen=True)
class Schema:
    feature_names: tuple[str, ...] = FEATURE_NAMES
    label_name: str = LABEL_NAME
    label_values: tuple[str, ...] = LABEL_VALUES
    id_name: str = ID_NAME


DEFAULT_SCHEMA = Schema()


@dataclass
class Dataset:
    """Feature matrix plus integer labels in {0,1,2} and provenance metadata."""

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    provenance: dict
    patient_ids: list[str] | None = None

    def __post_init__(self):
        self.X = as_matrix(self.X)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("row count mismatch between X and y")
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("column count mismatch between X and feature_names")
        if self.y.size and (self.y.min() < 0 or self.y.max() >= N_CLASSES):
            raise ValueError("labels must lie in {0,1,2}")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


@dataclass
class ClassCounts:
    counts: tuple[int, int, int]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)


def class_counts(d: Dataset) -> ClassCounts:
    c = np.bincount(d.y, minlength=N_CLASSES)
    return ClassCounts(tuple(int(v) for v in c[:N_CLASSES]))


# --- synthetic generation -------------------------------------------------
#
# Each ordinal feature f is drawn as
#   clamp(round(base_f + slope_f * class + load_f * t + sigma_f * eps), 1, 9)
# where t is a per-row severity latent shared across features (it is what
# makes symptom features correlate), eps is independent noise, and slope
# is positive for risk factors and negative for protective ones. The
# magnitudes are tuned so classes overlap: a depth-2 tree should land
# around 70-95% training accuracy, not 100%.

_ORDINAL_RECIPE: dict[str, tuple[float, float, float, float]] = {
    # name: (base, slope, load, sigma); load couples the severity latent,
    # zero-load features carry independent noise
    "Air Pollution": (3.0, 1.8, 1.3, 1.15),
    "Alcohol use": (3.0, 1.55, 0.0, 1.35),
    "Dust Allergy": (3.5, 1.25, 0.0, 1.45),
    "Occupational Hazards": (3.0, 1.7, 0.0, 1.25),
    "Genetic Risk": (3.0, 1.8, 0.0, 1.25),
    "Chronic Lung Disease": (3.0, 1.55, 0.0, 1.35),
    "Balanced Diet": (6.5, -1.7, -1.4, 1.15),
    "Obesity": (3.5, 1.25, 0.0, 1.45),
    "Smoking": (2.8, 1.95, 1.4, 1.15),
    "Passive Smoker": (3.0, 1.7, 0.0, 1.35),
    "Chest Pain": (2.8, 1.8, 1.4, 1.15),
    "Coughing of Blood": (2.5, 1.95, 1.5, 1.15),
    "Fatigue": (3.2, 1.7, 1.3, 1.25),
    "Weight Loss": (3.0, 1.4, 0.0, 1.35),
    "Shortness of Breath": (3.2, 1.7, 1.3, 1.25),
    "Wheezing": (3.5, 1.4, 0.0, 1.45),
    "Swallowing Difficulty": (2.8, 1.25, 0.0, 1.45),
    "Clubbing of Finger Nails": (2.5, 1.4, 0.0, 1.35),
    "Frequent Cold": (3.5, 1.0, 0.0, 1.55),
    "Dry Cough": (3.5, 1.1, 0.0, 1.55),
    "Snoring": (4.0, 0.7, 0.0, 1.65),
}

_SEVERITY_SD = 0.7


def largest_remainder_counts(n: int, proportions) -> tuple[int, ...]:
    """Allocate n into integer counts matching proportions exactly in total.

    Floors first, then hands the remaining units to the largest fractional
    remainders (ties to the lower class index).
    """
    raw = [n * p for p in proportions]
    counts = [int(np.floor(r)) for r in raw]
    short = n - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return tuple(counts)


def synth_generate(n: int, seed: int, class_proportions=(1 / 3, 1 / 3, 1 / 3)) -> Dataset:
    """Deterministic synthetic dataset over the full schema.

    Rows come out grouped by class (all Low, then Medium, then High);
    counts follow largest-remainder rounding of the proportions.
    """
    if n < 30:
        raise ValueError(f"n must be >= 30, got {n}")
    props = tuple(float(p) for p in class_proportions)
    if len(props) != N_CLASSES or any(p <= 0 for p in props):
        raise ValueError("class_proportions must be 3 positive reals")
    if abs(sum(props) - 1.0) > 1e-9:
        raise ValueError(f"class_proportions must sum to 1, got {sum(props)}")

    counts = largest_remainder_counts(n, props)
    stream = RngStream(seed)
    names = list(FEATURE_NAMES)
    X = np.empty((n, len(names)), dtype=np.float64)
    y = np.empty(n, dtype=np.int64)

    row = 0
    for cls, n_cls in enumerate(counts):
        age_lo = AGE_MIN + 5 * cls
        age_hi = AGE_MAX - 10 + 5 * cls
        for _ in range(n_cls):
            y[row] = cls
            age = round(age_lo + stream.uniform() * (age_hi - age_lo))
            gender = 1.0 if stream.uniform() < 0.6 else 2.0
            severity = _SEVERITY_SD * stream.normal()
            X[row, 0] = age
            X[row, 1] = gender
            for j, name in enumerate(names[2:], start=2):
                base, slope, load, sigma = _ORDINAL_RECIPE[name]
                v = base + slope * cls + load * severity + sigma * stream.normal()
                X[row, j] = min(max(round(v), ORDINAL_LOW), ORDINAL_HIGH)
            row += 1

    return Dataset(
        X=X,
        y=y,
        feature_names=names,
        provenance={"kind": "synthetic", "seed": int(seed), "n": int(n)},
    )


# --- CSV I/O ---------------------------------------------------------------


def _norm(name: str) -> str:
    return name.strip().lower()


def _parse_label(token: str, schema: Schema) -> int:
    t = token.strip()
    by_name = {_norm(v): i for i, v in enumerate(schema.label_values)}
    if _norm(t) in by_name:
        return by_name[_norm(t)]
    try:
        num = int(float(t)) if float(t).is_integer() else None
    except ValueError:
        num = None
    if num is not None and 1 <= num <= N_CLASSES:
        return num - 1
    raise ValueError(f"unknown label value: {token!r}")


def load_csv(path, schema: Schema = DEFAULT_SCHEMA) -> Dataset:
    """Load a dataset, matching columns to the schema by header name.

    Matching is case-insensitive with surrounding whitespace trimmed;
    column order in the file does not matter. Numeric labels 1/2/3 are
    accepted as Low/Medium/High. Extra columns are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"empty file: {path}")

    header = [_norm(h) for h in rows[0]]
    col_of = {h: i for i, h in enumerate(header)}

    feature_idx = []
    for name in schema.feature_names:
        if _norm(name) not in col_of:
            raise ValueError(f"missing column: {name}")
        feature_idx.append(col_of[_norm(name)])
    if _norm(schema.label_name) not in col_of:
        raise ValueError(f"missing column: {schema.label_name}")
    label_idx = col_of[_norm(schema.label_name)]
    id_idx = col_of.get(_norm(schema.id_name))

    data_rows = rows[1:]
    if not data_rows:
        raise ValueError(f"no data rows in {path}")

    n = len(data_rows)
    X = np.empty((n, len(schema.feature_names)), dtype=np.float64)
    y = np.empty(n, dtype=np.int64)
    ids: list[str] | None = [] if id_idx is not None else None
    for r, row in enumerate(data_rows):
        for j, ci in enumerate(feature_idx):
            cell = row[ci].strip() if ci < len(row) else ""
            try:
                X[r, j] = float(cell)
            except ValueError:
                raise ValueError(
                    f"non-numeric value {cell!r} at row {r + 1}, "
                    f"column {schema.feature_names[j]!r}"
                ) from None
        y[r] = _parse_label(row[label_idx], schema)
        if ids is not None:
            ids.append(row[id_idx].strip())

    return Dataset(
        X=X,
        y=y,
        feature_names=list(schema.feature_names),
        provenance={"kind": "loaded_csv", "path": str(path)},
        patient_ids=ids,
    )


def _fmt_cell(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def save_csv(d: Dataset, path, schema: Schema = DEFAULT_SCHEMA) -> None:
    """Write a dataset back out in the schema's CSV layout."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(d.feature_names) + [schema.label_name]
        if d.patient_ids is not None:
            header = [schema.id_name] + header
        writer.writerow(header)
        for i in range(d.n_rows):
            row = [_fmt_cell(v) for v in d.X[i]]
            row.append(schema.label_values[d.y[i]])
            if d.patient_ids is not None:
                row = [d.patient_ids[i]] + row
            writer.writerow(row)
