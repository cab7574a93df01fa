"""Datasets at desk scale: planted-hierarchy generation, CSV ingestion,
stream segmentation, and train/val/test splits.

Planted data realizes a ground-truth hierarchy geometrically: each tree
edge contributes a random offset vector whose magnitude shrinks with
depth, so siblings overlap more than cousins.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .treespace import Catalog, Tree, tree_from_json, tree_to_json, validate_tree


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with integer concept labels and their catalog."""

    features: np.ndarray  # (N, n) float
    labels: np.ndarray  # (N,) int
    catalog: Catalog
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if feats.ndim != 2 or feats.shape[0] < 1:
            raise ValueError("features must be a nonempty (N, n) matrix")
        if labels.shape != (feats.shape[0],):
            raise ValueError("labels must align with feature rows")
        if not np.isfinite(feats).all():
            raise ValueError("non-finite feature values")
        if labels.min() < 0 or labels.max() >= len(self.catalog):
            raise ValueError("label outside the catalog")
        feats.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def support(self) -> dict[int, int]:
        """Example count per concept id (0 for absent concepts)."""
        counts = {cid: 0 for cid in self.catalog.ids}
        ids, n = np.unique(self.labels, return_counts=True)
        counts.update(dict(zip(ids.tolist(), n.tolist())))
        return counts

    def of_concept(self, concept_id: int) -> np.ndarray:
        return self.features[self.labels == concept_id]

    def take(self, indices: np.ndarray, note: str | None = None) -> "LabeledDataset":
        prov = dict(self.provenance)
        if note:
            prov["derived"] = note
        return LabeledDataset(self.features[indices], self.labels[indices], self.catalog, prov)

    def restrict(self, concept_ids: Sequence[int]) -> "LabeledDataset":
        """Rows whose label is in concept_ids; catalog unchanged."""
        mask = np.isin(self.labels, list(concept_ids))
        return self.take(np.flatnonzero(mask), note=f"restrict{sorted(concept_ids)}")


@dataclass(frozen=True)
class PlantedSpec:
    """Ground truth for synthetic data.

    ``level_offsets[d]`` is the centroid offset magnitude of edges leaving
    depth d; magnitudes must decrease with depth so that siblings sit closer
    together than cousins.
    """

    catalog: Catalog
    tree: Tree
    feature_dim: int
    per_concept: int
    level_offsets: tuple[float, ...]
    noise: float

    def __post_init__(self) -> None:
        validate_tree(self.tree, len(self.catalog))
        if self.feature_dim < 1 or self.per_concept < 1:
            raise ValueError("feature_dim and per_concept must be positive")
        if len(self.level_offsets) < self.tree.height():
            raise ValueError("need one offset magnitude per tree level")
        if any(o <= 0 for o in self.level_offsets):
            raise ValueError("offsets must be strictly positive")
        if any(b >= a for a, b in zip(self.level_offsets, self.level_offsets[1:])):
            raise ValueError("offsets must decrease with depth")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")


def generate_planted(spec: PlantedSpec, seed: int) -> LabeledDataset:
    """Sample the planted dataset; pure in (spec, seed).

    A concept's centroid is the sum of the per-level offset vectors along its
    root-to-leaf path; examples are the centroid plus isotropic noise.
    """
    rng = np.random.default_rng(seed)
    centroids: dict[int, np.ndarray] = {}

    def walk(node: Tree, origin: np.ndarray, depth: int) -> None:
        for child in node.children:
            direction = rng.normal(size=spec.feature_dim)
            direction /= np.linalg.norm(direction)
            point = origin + spec.level_offsets[depth] * direction
            if child.is_leaf:
                centroids[child.concept] = point
            else:
                walk(child, point, depth + 1)

    if spec.tree.is_leaf:
        centroids[spec.tree.concept] = np.zeros(spec.feature_dim)
    else:
        walk(spec.tree, np.zeros(spec.feature_dim), 0)

    blocks, labels = [], []
    for cid in sorted(centroids):
        noise = rng.normal(size=(spec.per_concept, spec.feature_dim))
        blocks.append(centroids[cid] + spec.noise * noise)
        labels.extend([cid] * spec.per_concept)
    return LabeledDataset(
        np.vstack(blocks),
        np.array(labels),
        spec.catalog,
        provenance={"kind": "planted", "seed": seed, "spec": planted_spec_to_json(spec)},
    )


def planted_spec_to_json(spec: PlantedSpec) -> dict:
    return {
        "names": list(spec.catalog.names),
        "tree": tree_to_json(spec.tree, spec.catalog),
        "feature_dim": spec.feature_dim,
        "per_concept": spec.per_concept,
        "level_offsets": list(spec.level_offsets),
        "noise": spec.noise,
    }


def planted_spec_from_json(obj: dict) -> PlantedSpec:
    try:
        catalog = Catalog(tuple(obj["names"]))
        return PlantedSpec(
            catalog=catalog,
            tree=tree_from_json(obj["tree"], catalog),
            feature_dim=int(obj["feature_dim"]),
            per_concept=int(obj["per_concept"]),
            level_offsets=tuple(float(x) for x in obj["level_offsets"]),
            noise=float(obj["noise"]),
        )
    except KeyError as exc:
        raise DataError(f"planted spec missing key {exc}") from None


# ---------------------------------------------------------------------------
# CSV ingestion / export


def load_csv(
    path: str | Path,
    label_column: str = "label",
    catalog: Catalog | None = None,
) -> LabeledDataset:
    """Read a header-ed CSV with numeric feature columns and one label column.

    When no catalog is given, one is built from the sorted distinct labels.
    Errors name the offending row and column.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            if label_column not in header:
                raise DataError(f"{path}: missing label column {label_column!r}")
            label_idx = header.index(label_column)
            feature_names = [h for i, h in enumerate(header) if i != label_idx]
            rows, labels = [], []
            for row_no, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise DataError(f"{path}:{row_no}: expected {len(header)} cells, got {len(row)}")
                values = []
                for i, cell in enumerate(row):
                    if i == label_idx:
                        continue
                    try:
                        values.append(float(cell))
                    except ValueError:
                        raise DataError(
                            f"{path}:{row_no}: column {header[i]!r}: not a number: {cell!r}"
                        ) from None
                rows.append(values)
                labels.append(row[label_idx].strip())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    if catalog is None:
        catalog = Catalog(tuple(sorted(set(labels))))
    try:
        label_ids = np.array([catalog.id_of(name) for name in labels])
    except Exception:
        unknown = sorted(set(labels) - set(catalog.names))
        raise DataError(f"{path}: unknown labels {unknown}") from None
    return LabeledDataset(
        np.array(rows, dtype=float),
        label_ids,
        catalog,
        provenance={
            "kind": "csv",
            "path": str(path),
            "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            "feature_names": feature_names,
        },
    )


def save_csv(dataset: LabeledDataset, path: str | Path, label_column: str = "label") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(dataset.n_features)] + [label_column])
        for row, lab in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [dataset.catalog.name_of(int(lab))])


# ---------------------------------------------------------------------------
# stream segmentation


@dataclass(frozen=True)
class Segmented:
    dataset: LabeledDataset | None  # None when every window was dropped
    dropped: int
    positions: int


def segment_stream(
    stream: np.ndarray,
    sample_labels: np.ndarray,
    catalog: Catalog,
    window: int,
    stride: int,
    representation: str = "stats",
    purity: float = 0.5,
) -> Segmented:
    """Cut a labeled (T, channels) stream into fixed windows.

    Each window becomes one example: either per-channel mean/var/min/max
    summaries (``stats``) or the raw flattened window (``flat``). The window
    label is the majority per-sample label; windows without a unique
    majority reaching the purity fraction are dropped and counted.
    """
    stream = np.asarray(stream, dtype=float)
    sample_labels = np.asarray(sample_labels, dtype=int)
    if stream.ndim != 2:
        raise ValueError("stream must be (T, channels)")
    t = stream.shape[0]
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be positive")
    if window > t:
        raise ValueError(f"window {window} exceeds stream length {t}")
    if sample_labels.shape != (t,):
        raise ValueError("need one label per sample")
    if representation not in ("stats", "flat"):
        raise ValueError(f"unknown representation {representation!r}")

    rows, labels = [], []
    dropped = 0
    positions = 0
    for start in range(0, t - window + 1, stride):
        positions += 1
        chunk = stream[start : start + window]
        chunk_labels = sample_labels[start : start + window]
        ids, counts = np.unique(chunk_labels, return_counts=True)
        top = counts.argmax()
        is_unique_majority = (counts == counts[top]).sum() == 1
        if not (is_unique_majority and counts[top] / window >= purity):
            dropped += 1
            continue
        if representation == "stats":
            feats = np.concatenate(
                [chunk.mean(axis=0), chunk.var(axis=0), chunk.min(axis=0), chunk.max(axis=0)]
            )
        else:
            feats = chunk.ravel()
        rows.append(feats)
        labels.append(int(ids[top]))

    if not rows:
        return Segmented(dataset=None, dropped=dropped, positions=positions)
    dataset = LabeledDataset(
        np.array(rows),
        np.array(labels),
        catalog,
        provenance={
            "kind": "segmented",
            "window": window,
            "stride": stride,
            "representation": representation,
            "purity": purity,
            "dropped": dropped,
        },
    )
    return Segmented(dataset=dataset, dropped=dropped, positions=positions)


# ---------------------------------------------------------------------------
# splitting


def _allocate(n: int, fractions: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of n rows to the fractions."""
    shares = [f * n for f in fractions]
    base = [math.floor(s) for s in shares]
    left = n - sum(base)
    order = sorted(range(len(fractions)), key=lambda i: shares[i] - base[i], reverse=True)
    for i in order[:left]:
        base[i] += 1
    return base


def split(
    dataset: LabeledDataset,
    fractions: Sequence[float],
    seed: int,
    stratified: bool = False,
) -> tuple[LabeledDataset, ...]:
    """Disjoint cover of the rows in the given proportions.

    Stratified mode splits each concept's rows separately, preserving
    per-concept proportions within one example.
    """
    fractions = tuple(float(f) for f in fractions)
    if any(f <= 0 for f in fractions):
        raise ValueError("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    rng = np.random.default_rng(seed)
    parts: list[list[int]] = [[] for _ in fractions]
    if stratified:
        for cid, count in sorted(dataset.support().items()):
            if count == 0:
                continue
            if count < len(fractions):
                raise DataError(
                    f"concept {dataset.catalog.name_of(cid)!r} has {count} examples, "
                    f"fewer than {len(fractions)} splits"
                )
            idx = rng.permutation(np.flatnonzero(dataset.labels == cid))
            sizes = _allocate(count, fractions)
            pos = 0
            for part, size in zip(parts, sizes):
                part.extend(idx[pos : pos + size].tolist())
                pos += size
    else:
        idx = rng.permutation(len(dataset))
        sizes = _allocate(len(dataset), fractions)
        pos = 0
        for part, size in zip(parts, sizes):
            part.extend(idx[pos : pos + size].tolist())
            pos += size
    return tuple(
        dataset.take(np.array(sorted(p), dtype=int), note=f"split{i}")
        for i, p in enumerate(parts)
    )
