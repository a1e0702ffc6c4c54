"""Stream data model, CSV ingestion and a synthetic biased-stream generator.

CSV rows become fixed-dimension instances in [0, 1]^d. Categorical columns
are one-hot encoded, with the indicator columns ordered by the lexicographic
order of the category strings. Numeric columns are min-max normalised with
*running* extremes: the minima/maxima are updated with the current value
before it is emitted, so no future value ever influences an earlier instance
and every emitted value lands in [0, 1]. A column that has been constant so
far maps to 0.0. The sensitive column is kept as an ordinary (encoded)
feature unless the manifest sets ``drop_sensitive``.

The generator produces a stream with one proxy feature whose agreement with
the group membership is controlled by ``proxy_strength``, group-dependent
positive-label rates, and an abrupt concept change at each drift point.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields
from enum import IntEnum
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Group",
    "Instance",
    "Chunk",
    "StreamManifest",
    "IngestResult",
    "ingest",
    "dataset_discrimination",
    "GroupRates",
    "BiasStreamConfig",
    "generate_bias_stream",
    "write_stream_csv",
    "manifest_for_generated",
    "chunk_arrays",
]


class Group(IntEnum):
    """Sensitive-attribute membership tag."""

    UNPROTECTED = 0
    PROTECTED = 1


@dataclass(frozen=True)
class Instance:
    """One encoded observation."""

    features: np.ndarray
    group: Group
    label: int


@dataclass(frozen=True)
class Chunk:
    """One stream window in columnar form.

    ``features`` is (n, d) float64 with every value in [0, 1], ``groups`` and
    ``labels`` are (n,) uint8 holding 0/1. ``index`` is the 1-based window
    ordinal. Arrays are copied and frozen at construction.
    """

    features: np.ndarray
    groups: np.ndarray
    labels: np.ndarray
    index: int

    def __post_init__(self) -> None:
        f = np.array(self.features, dtype=np.float64, order="C")
        g = np.array(self.groups, dtype=np.uint8)
        y = np.array(self.labels, dtype=np.uint8)
        if f.ndim != 2 or f.shape[0] == 0 or f.shape[1] == 0:
            raise ValueError("a chunk needs a non-empty (n, d) feature matrix")
        if not (f.shape[0] == g.shape[0] == y.shape[0]):
            raise ValueError("features, groups and labels must have equal length")
        if not np.isfinite(f).all():
            raise ValueError("non-finite feature value")
        if g.max(initial=0) > 1 or y.max(initial=0) > 1:
            raise ValueError("groups and labels must be 0/1")
        if int(self.index) < 1:
            raise ValueError("window index starts at 1")
        for arr in (f, g, y):
            arr.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "groups", g)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "index", int(self.index))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def instance(self, i: int) -> Instance:
        return Instance(self.features[i], Group(int(self.groups[i])), int(self.labels[i]))

    def __iter__(self) -> Iterator[Instance]:
        return (self.instance(i) for i in range(len(self)))


def chunk_arrays(
    features: np.ndarray,
    groups: np.ndarray,
    labels: np.ndarray,
    window_size: int,
) -> list[Chunk]:
    """Split columnar arrays into consecutive windows of ``window_size``.

    Every chunk has exactly ``window_size`` instances except possibly the
    last one, which holds the remainder.
    """
    if window_size < 1:
        raise ValueError("window_size must be positive")
    n = len(labels)
    chunks = []
    for t, start in enumerate(range(0, n, window_size), start=1):
        stop = min(start + window_size, n)
        chunks.append(
            Chunk(features[start:stop], groups[start:stop], labels[start:stop], t)
        )
    return chunks


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


@dataclass
class StreamManifest:
    """Describes how to turn one CSV file into a labeled, group-tagged stream.

    ``protected_values`` / ``unprotected_values`` are the raw sensitive-column
    strings mapped to each group; they must be disjoint and non-empty. Columns
    listed in ``categorical_columns`` are one-hot encoded; all other feature
    columns must parse as numbers. The sensitive column is always treated as
    categorical when it is retained as a feature.
    """

    source: Path
    target_column: str
    positive_label: str
    sensitive_column: str
    protected_values: tuple[str, ...]
    unprotected_values: tuple[str, ...]
    categorical_columns: tuple[str, ...] = ()
    window_size: int = 1000
    drop_sensitive: bool = False

    def __post_init__(self) -> None:
        self.source = Path(self.source)
        self.protected_values = tuple(self.protected_values)
        self.unprotected_values = tuple(self.unprotected_values)
        self.categorical_columns = tuple(self.categorical_columns)

    def validate(self) -> None:
        if not self.protected_values or not self.unprotected_values:
            raise ValueError("both group value sets must be non-empty")
        overlap = set(self.protected_values) & set(self.unprotected_values)
        if overlap:
            raise ValueError(f"group value sets overlap: {sorted(overlap)}")
        if self.window_size < 10:
            raise ValueError("window_size must be at least 10")
        if not self.target_column or not self.sensitive_column:
            raise ValueError("target and sensitive column names are required")

    @classmethod
    def from_json(cls, path: str | Path) -> "StreamManifest":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
        manifest = cls(**data)
        # Relative sources resolve against the manifest's own directory.
        if not manifest.source.is_absolute():
            manifest.source = (path.parent / manifest.source).resolve()
        return manifest

    def to_json(self, path: str | Path) -> None:
        data = {
            "source": str(self.source),
            "target_column": self.target_column,
            "positive_label": self.positive_label,
            "sensitive_column": self.sensitive_column,
            "protected_values": list(self.protected_values),
            "unprotected_values": list(self.unprotected_values),
            "categorical_columns": list(self.categorical_columns),
            "window_size": self.window_size,
            "drop_sensitive": self.drop_sensitive,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")


@dataclass
class IngestResult:
    chunks: list[Chunk]
    feature_names: list[str]
    rejected_rows: int
    n_instances: int


def ingest(manifest: StreamManifest) -> IngestResult:
    """Read the manifest's CSV into encoded, normalised chunks.

    Rows are rejected (and counted) when the target or a used feature cell is
    empty, when the sensitive value belongs to neither group, or when a
    numeric cell does not parse as a finite number. Cell values are stripped
    of surrounding whitespace before any comparison.
    """
    manifest.validate()
    if not manifest.source.exists():
        raise FileNotFoundError(f"stream source not found: {manifest.source}")

    with open(manifest.source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise ValueError("empty CSV: no header row") from None
        rows = [row for row in reader]

    col_index = {name: i for i, name in enumerate(header)}
    needed = {manifest.target_column, manifest.sensitive_column, *manifest.categorical_columns}
    missing = sorted(c for c in needed if c not in col_index)
    if missing:
        raise ValueError(f"columns missing from CSV header: {missing}")

    feature_cols = [
        c
        for c in header
        if c != manifest.target_column
        and not (manifest.drop_sensitive and c == manifest.sensitive_column)
    ]
    if not feature_cols:
        raise ValueError("no feature columns left after applying the manifest")
    categorical = set(manifest.categorical_columns)
    if not manifest.drop_sensitive:
        categorical.add(manifest.sensitive_column)
    categorical &= set(feature_cols)

    protected = set(manifest.protected_values)
    unprotected = set(manifest.unprotected_values)
    t_idx = col_index[manifest.target_column]
    s_idx = col_index[manifest.sensitive_column]

    numeric_cols = [c for c in feature_cols if c not in categorical]
    num_idx = [col_index[c] for c in numeric_cols]
    cat_cols = [c for c in feature_cols if c in categorical]
    cat_idx = {c: col_index[c] for c in cat_cols}

    rejected = 0
    numeric_rows: list[list[float]] = []
    cat_values: dict[str, list[str]] = {c: [] for c in cat_cols}
    groups: list[int] = []
    labels: list[int] = []

    n_header = len(header)
    for raw in rows:
        if len(raw) != n_header:
            rejected += 1
            continue
        cells = [c.strip() for c in raw]
        target = cells[t_idx]
        if target == "":
            rejected += 1
            continue
        sens = cells[s_idx]
        if sens in protected:
            grp = 1
        elif sens in unprotected:
            grp = 0
        else:
            rejected += 1
            continue
        numeric: list[float] = []
        ok = True
        for j in num_idx:
            cell = cells[j]
            if cell == "":
                ok = False
                break
            try:
                val = float(cell)
            except ValueError:
                ok = False
                break
            if not math.isfinite(val):
                ok = False
                break
            numeric.append(val)
        if ok:
            for c in cat_cols:
                if cells[cat_idx[c]] == "":
                    ok = False
                    break
        if not ok:
            rejected += 1
            continue
        numeric_rows.append(numeric)
        for c in cat_cols:
            cat_values[c].append(cells[cat_idx[c]])
        groups.append(grp)
        labels.append(1 if target == manifest.positive_label else 0)

    n = len(labels)
    if n == 0:
        raise ValueError("no usable rows in stream source")

    # Running min-max normalisation: extremes are updated with the current
    # value first, so the current value always lands inside [0, 1].
    if numeric_cols:
        num_mat = np.asarray(numeric_rows, dtype=np.float64).reshape(n, len(numeric_cols))
        cmin = np.minimum.accumulate(num_mat, axis=0)
        cmax = np.maximum.accumulate(num_mat, axis=0)
        span = cmax - cmin
        safe = np.where(span > 0.0, span, 1.0)
        num_norm = np.where(span > 0.0, (num_mat - cmin) / safe, 0.0)
        np.clip(num_norm, 0.0, 1.0, out=num_norm)
    else:
        num_norm = np.empty((n, 0), dtype=np.float64)

    categories = {c: sorted(set(cat_values[c])) for c in cat_cols}

    blocks: list[np.ndarray] = []
    feature_names: list[str] = []
    num_pos = {c: j for j, c in enumerate(numeric_cols)}
    for c in feature_cols:
        if c in categorical:
            cats = categories[c]
            vals = np.asarray(cat_values[c], dtype=object)
            block = (vals[:, None] == np.asarray(cats, dtype=object)[None, :]).astype(np.float64)
            blocks.append(block)
            feature_names.extend(f"{c}={cat}" for cat in cats)
        else:
            blocks.append(num_norm[:, num_pos[c] : num_pos[c] + 1])
            feature_names.append(c)
    features = np.hstack(blocks)

    chunks = chunk_arrays(
        features,
        np.asarray(groups, dtype=np.uint8),
        np.asarray(labels, dtype=np.uint8),
        manifest.window_size,
    )
    return IngestResult(chunks, feature_names, rejected, n)


def dataset_discrimination(chunks: Sequence[Chunk]) -> float:
    """Positive-label rate gap between protected and unprotected instances.

    Uses the true labels of the whole stream, so the result measures the data
    itself rather than any classifier.
    """
    n_p = n_u = pos_p = pos_u = 0
    for chunk in chunks:
        prot = chunk.groups == 1
        pos = chunk.labels == 1
        n_p += int(prot.sum())
        n_u += int((~prot).sum())
        pos_p += int((prot & pos).sum())
        pos_u += int((~prot & pos).sum())
    if n_p == 0 or n_u == 0:
        raise ValueError("both groups must be present to measure discrimination")
    return pos_p / n_p - pos_u / n_u


# ---------------------------------------------------------------------------
# Synthetic biased stream
# ---------------------------------------------------------------------------

# Swing applied to the positive-label probability depending on which side of
# the active concept an instance falls (half above, half below the base rate).
_CONCEPT_EFFECT = 0.6


@dataclass
class GroupRates:
    """Positive-label base rate per group."""

    protected: float
    unprotected: float


@dataclass
class BiasStreamConfig:
    """Parameters of the synthetic biased stream.

    Feature layout: ``d_informative`` concept features, then ``d_noise``
    noise features, then one proxy feature in the last position. The proxy
    equals the group indicator with probability (1 + proxy_strength) / 2, so
    its correlation with the group is proxy_strength in expectation. Labels
    follow the group base rate shifted up or down by the active concept, and
    a fresh concept is drawn at every drift point.
    """

    n_instances: int
    d_informative: int = 5
    d_noise: int = 2
    proxy_strength: float = 0.5
    base_rates: GroupRates = field(default_factory=lambda: GroupRates(0.5, 0.5))
    drift_points: tuple[int, ...] = ()
    seed: int = 0
    window_size: int = 1000

    def __post_init__(self) -> None:
        if isinstance(self.base_rates, dict):
            self.base_rates = GroupRates(**self.base_rates)
        self.drift_points = tuple(int(p) for p in self.drift_points)

    def validate(self) -> None:
        if self.n_instances < 1:
            raise ValueError("n_instances must be positive")
        if self.d_informative < 1 or self.d_noise < 0:
            raise ValueError("need at least one informative feature, noise count >= 0")
        if not 0.0 <= self.proxy_strength <= 1.0:
            raise ValueError("proxy_strength must lie in [0, 1]")
        for rate in (self.base_rates.protected, self.base_rates.unprotected):
            if not 0.0 <= rate <= 1.0:
                raise ValueError("base rates must lie in [0, 1]")
        if list(self.drift_points) != sorted(set(self.drift_points)):
            raise ValueError("drift_points must be strictly increasing")
        if self.drift_points and not (
            0 < self.drift_points[0] and self.drift_points[-1] < self.n_instances
        ):
            raise ValueError("drift_points must fall strictly inside the stream")
        if self.window_size < 10:
            raise ValueError("window_size must be at least 10")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def n_features(self) -> int:
        return self.d_informative + self.d_noise + 1

    @classmethod
    def from_json(cls, path: str | Path) -> "BiasStreamConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown generator keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self, path: str | Path) -> None:
        data = {
            "n_instances": self.n_instances,
            "d_informative": self.d_informative,
            "d_noise": self.d_noise,
            "proxy_strength": self.proxy_strength,
            "base_rates": {
                "protected": self.base_rates.protected,
                "unprotected": self.base_rates.unprotected,
            },
            "drift_points": list(self.drift_points),
            "seed": self.seed,
            "window_size": self.window_size,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")


def generate_bias_stream(config: BiasStreamConfig) -> list[Chunk]:
    """Draw the configured stream deterministically from its seed."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n_instances

    groups = rng.integers(0, 2, n).astype(np.uint8)
    agree = rng.random(n) < (1.0 + config.proxy_strength) / 2.0
    proxy = np.where(agree, groups, 1 - groups).astype(np.float64)
    x_inf = rng.random((n, config.d_informative))
    x_noise = rng.random((n, config.d_noise))
    label_draw = rng.random(n)

    # One concept per segment: a random linear rule through the informative
    # features, thresholded at the segment median so both sides stay balanced.
    concept = np.empty(n, dtype=np.float64)
    bounds = [0, *config.drift_points, n]
    for a, b in zip(bounds[:-1], bounds[1:]):
        w = rng.standard_normal(config.d_informative)
        proj = x_inf[a:b] @ w
        concept[a:b] = (proj >= np.median(proj)).astype(np.float64)

    base = np.where(groups == 1, config.base_rates.protected, config.base_rates.unprotected)
    prob = np.clip(base + _CONCEPT_EFFECT * (concept - 0.5), 0.0, 1.0)
    labels = (label_draw < prob).astype(np.uint8)

    features = np.hstack([x_inf, x_noise, proxy[:, None]])
    return chunk_arrays(features, groups, labels, config.window_size)


def write_stream_csv(chunks: Sequence[Chunk], path: str | Path) -> None:
    """Dump chunks as a headered CSV (features, group, label)."""
    if not chunks:
        raise ValueError("nothing to write")
    d = chunks[0].n_features
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(d)] + ["group", "label"])
        for chunk in chunks:
            for i in range(len(chunk)):
                row = [repr(float(v)) for v in chunk.features[i]]
                row.append("protected" if chunk.groups[i] == 1 else "unprotected")
                row.append(str(int(chunk.labels[i])))
                writer.writerow(row)


def manifest_for_generated(config: BiasStreamConfig, csv_path: str | Path) -> StreamManifest:
    """Manifest that re-ingests a CSV produced by :func:`write_stream_csv`.

    The group column is dropped from the features to mirror the generator's
    own layout; re-ingested numeric columns go through running min-max again,
    so early values can differ slightly from the directly generated stream.
    """
    return StreamManifest(
        source=Path(csv_path),
        target_column="label",
        positive_label="1",
        sensitive_column="group",
        protected_values=("protected",),
        unprotected_values=("unprotected",),
        categorical_columns=(),
        window_size=config.window_size,
        drop_sensitive=True,
    )
