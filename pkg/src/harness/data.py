"""
Tabular Datasets
================

CSV ingestion, train-only preprocessing and subsampling.

Features:
- Strict CSV reader reporting the line and column of every problem
- One-hot encoding of categorical columns (unseen levels map to all zeros)
- Numeric standardization with statistics from the training split only
- Serializable Preprocessor so a saved model can be applied to raw files
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd

from src.config import config
from src.exceptions import DataError, IngestError, InvalidInput, SchemaMismatch
from src.logging_config import get_logger, log_performance

logger = get_logger(__name__)

ColumnKind = Literal["numeric", "categorical"]


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: ColumnKind = "numeric"
    levels: tuple[str, ...] = ()


@dataclass(frozen=True)
class RegressionTarget:
    Y: np.ndarray
    names: tuple[str, ...] = ("target",)


@dataclass(frozen=True)
class ClassificationTarget:
    labels: np.ndarray
    n_classes: int
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise InvalidInput(
                f"Labels must lie in 0..{self.n_classes - 1}",
                component="data",
                details={"min": int(labels.min()), "max": int(labels.max())},
            )
        object.__setattr__(self, "labels", labels)
        if not self.class_names:
            object.__setattr__(self, "class_names", tuple(str(k) for k in range(self.n_classes)))


Target = RegressionTarget | ClassificationTarget


@dataclass(frozen=True)
class Dataset:
    """Feature frame plus target.

    ``frame`` holds only feature columns, in ``feature_meta`` order. Raw
    datasets may contain categorical (string) columns; preprocessed ones are
    all numeric.
    """

    frame: pd.DataFrame
    target: Target
    feature_meta: tuple[ColumnMeta, ...]
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n_target = (self.target.Y.shape[0] if isinstance(self.target, RegressionTarget)
                    else self.target.labels.shape[0])
        if len(self.frame) != n_target:
            raise InvalidInput("Features and target disagree on row count", component="data",
                               details={"features": len(self.frame), "target": n_target})
        if len(self.frame) < 1:
            raise DataError("Dataset has no rows", source=self.source, component="data")

    @property
    def n(self) -> int:
        return len(self.frame)

    @property
    def n_features(self) -> int:
        return self.frame.shape[1]

    @property
    def is_classification(self) -> bool:
        return isinstance(self.target, ClassificationTarget)

    @property
    def n_classes(self) -> int | None:
        return self.target.n_classes if self.is_classification else None

    @property
    def is_encoded(self) -> bool:
        return all(meta.kind == "numeric" for meta in self.feature_meta)

    @property
    def features(self) -> np.ndarray:
        """Feature matrix X (n x q); only for all-numeric datasets."""
        if not self.is_encoded:
            raise InvalidInput("Dataset has categorical columns; preprocess it first", component="data")
        return self.frame.to_numpy(dtype=np.float64)

    @property
    def targets(self) -> np.ndarray:
        """Y matrix (regression) or integer labels (classification)."""
        if isinstance(self.target, RegressionTarget):
            return self.target.Y
        return self.target.labels

    def subset(self, indices) -> Dataset:
        indices = np.asarray(indices, dtype=np.int64)
        frame = self.frame.iloc[indices].reset_index(drop=True)
        if isinstance(self.target, RegressionTarget):
            target: Target = replace(self.target, Y=self.target.Y[indices])
        else:
            target = replace(self.target, labels=self.target.labels[indices])
        return Dataset(frame=frame, target=target, feature_meta=self.feature_meta, source=self.source)


def from_arrays(X, y, task: Literal["regression", "classification"] = "regression",
                n_classes: int | None = None, feature_names: Sequence[str] | None = None,
                source: str | None = None) -> Dataset:
    """Dataset from in-memory arrays (all columns numeric)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    names = list(feature_names) if feature_names is not None else [f"x{j + 1}" for j in range(X.shape[1])]
    frame = pd.DataFrame(X, columns=names)
    if task == "regression":
        Y = np.asarray(y, dtype=np.float64)
        Y = Y.reshape(-1, 1) if Y.ndim == 1 else Y
        target: Target = RegressionTarget(Y=Y, names=tuple(f"y{j + 1}" for j in range(Y.shape[1])))
    else:
        labels = np.asarray(y, dtype=np.int64)
        K = n_classes if n_classes is not None else int(labels.max()) + 1
        target = ClassificationTarget(labels=labels, n_classes=K)
    meta = tuple(ColumnMeta(name) for name in names)
    return Dataset(frame=frame, target=target, feature_meta=meta, source=source)


# =============================================================================
# CSV ingestion
# =============================================================================

@dataclass(frozen=True)
class CsvSchema:
    """Column roles for load_csv: target column(s), task and categorical columns."""

    target: str | tuple[str, ...] = "target"
    task: Literal["regression", "classification"] = "regression"
    categorical: tuple[str, ...] = ()

    @property
    def target_columns(self) -> tuple[str, ...]:
        return (self.target,) if isinstance(self.target, str) else tuple(self.target)


def _parse_number(value: str, source: str, line: int, column: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise IngestError(f"Non-numeric value '{value}' in numeric column", source=source,
                          line=line, column=column) from None
    if not math.isfinite(number):
        raise IngestError(f"Non-finite value '{value}'", source=source, line=line, column=column)
    return number


@log_performance
def load_csv(path: str | Path, schema: CsvSchema | None = None,
             class_names: Sequence[str] | None = None) -> Dataset:
    """
    Read a comma-separated file with a header row.

    Parameters
    ----------
    path : str or Path
        CSV file (UTF-8, '.' decimal separator)
    schema : CsvSchema, optional
        Target column(s), task and categorical columns; defaults to a single
        numeric regression target named "target"
    class_names : sequence of str, optional
        Known class labels in label order, so files split from one dataset
        share an encoding. Inferred (sorted) from the file when omitted.

    Returns
    -------
    Dataset
        Raw dataset; categorical columns are kept as strings

    Raises
    ------
    IngestError
        Ragged rows, missing values, non-numeric entries, unknown columns
        or unknown class labels, with the offending line and column
    """
    schema = schema or CsvSchema()
    path = Path(path)
    source = str(path)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot open CSV file: {e}", source=source, component="ingest") from e

    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestError("File is empty; expected a header row", source=source, line=1) from None
        if len(set(header)) != len(header):
            raise IngestError("Duplicate column names in header", source=source, line=1)
        for name in (*schema.target_columns, *schema.categorical):
            if name not in header:
                raise IngestError("Declared column not found in header", source=source, line=1, column=name)
        if schema.task == "classification" and len(schema.target_columns) != 1:
            raise IngestError("Classification needs exactly one target column", source=source, line=1)

        categorical = set(schema.categorical)
        label_column = schema.target_columns[0] if schema.task == "classification" else None
        string_columns = categorical | ({label_column} if label_column else set())
        columns: dict[str, list] = {name: [] for name in header}

        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise IngestError(f"Expected {len(header)} fields, found {len(row)}", source=source, line=line)
            for name, cell in zip(header, row, strict=True):
                value = cell.strip()
                if value == "":
                    raise IngestError("Missing value", source=source, line=line, column=name)
                if name in string_columns:
                    columns[name].append(value)
                else:
                    columns[name].append(_parse_number(value, source, line, name))

    if not columns[header[0]]:
        raise DataError("CSV file has a header but no data rows", source=source, component="ingest")

    if label_column is not None:
        raw_labels = columns[label_column]
        names = tuple(class_names) if class_names is not None else tuple(sorted(set(raw_labels)))
        index = {name: k for k, name in enumerate(names)}
        unknown = sorted(set(raw_labels) - set(index))
        if unknown:
            raise IngestError(f"Unknown class label '{unknown[0]}'", source=source, column=label_column)
        if len(names) < 2:
            raise IngestError("Classification needs at least two classes", source=source, column=label_column)
        target: Target = ClassificationTarget(
            labels=np.array([index[v] for v in raw_labels], dtype=np.int64),
            n_classes=len(names),
            class_names=names,
        )
    else:
        Y = np.column_stack([np.asarray(columns[name], dtype=np.float64) for name in schema.target_columns])
        target = RegressionTarget(Y=Y, names=schema.target_columns)

    feature_names = [name for name in header if name not in schema.target_columns]
    frame = pd.DataFrame({name: columns[name] for name in feature_names}, columns=feature_names)
    meta = tuple(
        ColumnMeta(name, "categorical", tuple(sorted(set(columns[name])))) if name in categorical
        else ColumnMeta(name)
        for name in feature_names
    )
    logger.debug("CSV loaded", source=source, rows=len(frame), features=len(feature_names))
    return Dataset(frame=frame, target=target, feature_meta=meta, source=source)


# =============================================================================
# Preprocessing
# =============================================================================

def _describe_columns(names: Sequence[str]) -> str:
    return f"{len(names)} columns (" + (", ".join(names) or "none") + ")"


@dataclass(frozen=True)
class Preprocessor:
    """Train-split statistics: numeric (mean, scale), categorical levels, target scaling."""

    columns: tuple[ColumnMeta, ...]
    means: dict[str, float]
    scales: dict[str, float]
    target_mean: tuple[float, ...] | None = None
    target_scale: tuple[float, ...] | None = None
    class_names: tuple[str, ...] | None = None

    @classmethod
    def fit(cls, train: Dataset, standardize_target: bool = False) -> Preprocessor:
        means: dict[str, float] = {}
        scales: dict[str, float] = {}
        columns = []
        for meta in train.feature_meta:
            if meta.kind == "categorical":
                levels = tuple(sorted(train.frame[meta.name].astype(str).unique()))
                columns.append(ColumnMeta(meta.name, "categorical", levels))
                continue
            values = train.frame[meta.name].to_numpy(dtype=np.float64)
            std = float(values.std(ddof=0))
            means[meta.name] = float(values.mean())
            scales[meta.name] = std if std > config.FEATURE_NORM_FLOOR else 1.0
            columns.append(ColumnMeta(meta.name))

        target_mean = target_scale = None
        if standardize_target and isinstance(train.target, RegressionTarget):
            Y = train.target.Y
            sd = Y.std(axis=0)
            target_mean = tuple(float(m) for m in Y.mean(axis=0))
            target_scale = tuple(float(s) if s > config.FEATURE_NORM_FLOOR else 1.0 for s in sd)
        class_names = train.target.class_names if isinstance(train.target, ClassificationTarget) else None
        return cls(tuple(columns), means, scales, target_mean, target_scale, class_names)

    @property
    def input_columns(self) -> tuple[str, ...]:
        return tuple(meta.name for meta in self.columns)

    @property
    def output_columns(self) -> tuple[str, ...]:
        names = []
        for meta in self.columns:
            if meta.kind == "categorical":
                names.extend(f"{meta.name}={level}" for level in meta.levels)
            else:
                names.append(meta.name)
        return tuple(names)

    def transform(self, data: Dataset) -> Dataset:
        """Apply the frozen statistics to any split."""
        found = tuple(meta.name for meta in data.feature_meta)
        if found != self.input_columns:
            raise SchemaMismatch("Feature columns differ from the training data",
                                 expected=_describe_columns(self.input_columns),
                                 found=_describe_columns(found), source=data.source)
        out: dict[str, np.ndarray] = {}
        for meta in self.columns:
            col = data.frame[meta.name]
            if meta.kind == "categorical":
                as_text = col.astype(str).to_numpy()
                for level in meta.levels:
                    out[f"{meta.name}={level}"] = (as_text == level).astype(np.float64)
            else:
                values = col.to_numpy(dtype=np.float64)
                out[meta.name] = (values - self.means[meta.name]) / self.scales[meta.name]
        frame = pd.DataFrame(out, columns=list(self.output_columns))
        target = data.target
        if self.target_mean is not None and isinstance(target, RegressionTarget):
            Y = (target.Y - np.asarray(self.target_mean)) / np.asarray(self.target_scale)
            target = replace(target, Y=Y)
        meta = tuple(ColumnMeta(name) for name in self.output_columns)
        return Dataset(frame=frame, target=target, feature_meta=meta, source=data.source)

    def inverse_target(self, values: np.ndarray) -> np.ndarray:
        """Undo target standardization on regression predictions."""
        if self.target_mean is None:
            return values
        return values * np.asarray(self.target_scale) + np.asarray(self.target_mean)

    def to_dict(self) -> dict[str, Any]:
        return {
            "columns": [{"name": m.name, "kind": m.kind, "levels": list(m.levels)} for m in self.columns],
            "means": self.means,
            "scales": self.scales,
            "target_mean": None if self.target_mean is None else list(self.target_mean),
            "target_scale": None if self.target_scale is None else list(self.target_scale),
            "class_names": None if self.class_names is None else list(self.class_names),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> Preprocessor:
        columns = tuple(ColumnMeta(c["name"], c["kind"], tuple(c["levels"])) for c in doc["columns"])
        tm, ts, cn = doc.get("target_mean"), doc.get("target_scale"), doc.get("class_names")
        return cls(
            columns=columns,
            means={k: float(v) for k, v in doc["means"].items()},
            scales={k: float(v) for k, v in doc["scales"].items()},
            target_mean=None if tm is None else tuple(tm),
            target_scale=None if ts is None else tuple(ts),
            class_names=None if cn is None else tuple(cn),
        )


def preprocess(train: Dataset, others: Sequence[Dataset] = (),
               standardize_target: bool = False) -> tuple[Preprocessor, Dataset, list[Dataset]]:
    """Fit statistics on ``train`` and apply them to ``train`` and every other split."""
    prep = Preprocessor.fit(train, standardize_target=standardize_target)
    return prep, prep.transform(train), [prep.transform(d) for d in others]


def observation_cap(data: Dataset, cap: int | None, seed: int) -> Dataset:
    """Uniform subsample of at most ``cap`` rows, original order kept."""
    if cap is None or data.n <= cap:
        return data
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(data.n, size=cap, replace=False))
    logger.info("Observation cap applied", source=data.source, rows=data.n, kept=cap)
    return data.subset(keep)
