"""Graph containers, homophily measurement, structural perturbations, and file I/O.

Undirected edges are stored once in canonical (u < v) order, sorted
lexicographically; directed edges keep their given order. Graphs are
immutable after construction -- every mutating operation returns a new
graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "GraphFormatError",
    "LabeledGraph",
    "WeightedGraph",
    "canonicalize_edges",
    "edge_homophily_degree",
    "inject_structural_noise",
    "random_edge_drop",
    "load_graph",
    "load_weighted_graph",
    "save_graph",
]

# Rejection sampling budget before falling back to enumerating all non-edges.
_REJECTION_ATTEMPT_FACTOR = 100


class GraphFormatError(ValueError):
    """Malformed graph file; carries the offending path and 1-based line."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        prefix = ""
        if self.path is not None:
            prefix = self.path
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        super().__init__(prefix + message)


def canonicalize_edges(edges, num_nodes: int, directed: bool = False) -> np.ndarray:
    """Return the canonical (E, 2) int64 edge array.

    Undirected: each pair reordered to u < v, then sorted lexicographically
    and deduplicated. Directed: kept as given, exact duplicates dropped.
    Self-loops and out-of-range endpoints are rejected.
    """
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edge list must have shape (E, 2), got {arr.shape}")
    if arr.min() < 0 or arr.max() >= num_nodes:
        bad = arr[(arr < 0).any(axis=1) | (arr >= num_nodes).any(axis=1)][0]
        raise ValueError(
            f"edge ({bad[0]}, {bad[1]}) references a node outside [0, {num_nodes})"
        )
    if (arr[:, 0] == arr[:, 1]).any():
        bad = arr[arr[:, 0] == arr[:, 1]][0]
        raise ValueError(f"self-loop ({bad[0]}, {bad[0]}) is not allowed")
    if directed:
        # np.unique would reorder; dedupe while preserving first occurrence.
        seen: set[tuple[int, int]] = set()
        keep = np.empty(len(arr), dtype=bool)
        for i, (u, v) in enumerate(arr):
            pair = (int(u), int(v))
            keep[i] = pair not in seen
            seen.add(pair)
        return arr[keep]
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


def _freeze(a: np.ndarray | None) -> np.ndarray | None:
    if a is not None:
        a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledGraph:
    """Node set with edges, optional features (n x l) and optional labels.

    Labels may be absent (test graphs served to label-free operations).
    """

    num_nodes: int
    edges: np.ndarray
    directed: bool = False
    features: np.ndarray | None = None
    labels: np.ndarray | None = None
    num_classes: int | None = None

    def __post_init__(self):
        if self.num_nodes < 0:
            raise ValueError("num_nodes must be non-negative")
        edges = canonicalize_edges(self.edges, self.num_nodes, self.directed)
        object.__setattr__(self, "edges", _freeze(edges))
        if self.features is not None:
            feats = np.ascontiguousarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.num_nodes:
                raise ValueError(
                    f"features must be (num_nodes, dim), got {feats.shape} for "
                    f"{self.num_nodes} nodes"
                )
            object.__setattr__(self, "features", _freeze(feats))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.ndim != 1 or labels.shape[0] != self.num_nodes:
                raise ValueError("labels length must equal num_nodes")
            if labels.size and labels.min() < 0:
                raise ValueError("labels must be non-negative class indices")
            if self.num_classes is None:
                object.__setattr__(
                    self, "num_classes", int(labels.max()) + 1 if labels.size else 0
                )
            elif labels.size and labels.max() >= self.num_classes:
                raise ValueError(
                    f"label {labels.max()} out of range for {self.num_classes} classes"
                )
            object.__setattr__(self, "labels", _freeze(labels))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def feature_dim(self) -> int:
        if self.features is None:
            raise ValueError("graph has no features")
        return self.features.shape[1]

    def edge_pairs(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def with_edges(self, edges) -> "LabeledGraph":
        """New graph sharing nodes/features/labels with a replaced edge set."""
        return LabeledGraph(
            num_nodes=self.num_nodes,
            edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
            directed=self.directed,
            features=self.features,
            labels=self.labels,
            num_classes=self.num_classes,
        )

    def with_features(self, features: np.ndarray) -> "LabeledGraph":
        return LabeledGraph(
            num_nodes=self.num_nodes,
            edges=self.edges,
            directed=self.directed,
            features=features,
            labels=self.labels,
            num_classes=self.num_classes,
        )


@dataclass(frozen=True)
class WeightedGraph:
    """A graph plus per-edge weights in [0, 1], aligned with the edge list."""

    base: LabeledGraph
    edge_weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.edge_weights is None:
            weights = np.ones(self.base.num_edges, dtype=np.float64)
        else:
            weights = np.asarray(self.edge_weights, dtype=np.float64).reshape(-1)
        if weights.shape[0] != self.base.num_edges:
            raise ValueError(
                f"{weights.shape[0]} weights for {self.base.num_edges} edges"
            )
        if weights.size and (weights.min() < 0.0 or weights.max() > 1.0):
            raise ValueError("edge weights must lie in [0, 1]")
        object.__setattr__(self, "edge_weights", _freeze(weights))

    @property
    def num_edges(self) -> int:
        return self.base.num_edges


def edge_homophily_degree(graph: LabeledGraph) -> float:
    """Fraction of edges whose endpoints share a label."""
    if graph.labels is None:
        raise ValueError("edge homophily degree requires node labels")
    if graph.num_edges == 0:
        raise ValueError("undefined HD: graph has no edges")
    y = graph.labels
    same = y[graph.edges[:, 0]] == y[graph.edges[:, 1]]
    return float(np.count_nonzero(same)) / graph.num_edges


def _all_pairs_count(n: int, directed: bool) -> int:
    return n * (n - 1) if directed else n * (n - 1) // 2


def _sample_non_edges(
    graph: LabeledGraph, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Uniformly sample up to `count` distinct non-edges (no self-loops).

    Rejection sampling against the existing edge set, falling back to full
    complement enumeration once the attempt budget is spent. Returns fewer
    than `count` rows only when the complement pool is smaller.
    """
    n = graph.num_nodes
    existing = graph.edge_pairs()
    pool_size = _all_pairs_count(n, graph.directed) - len(existing)
    target = min(count, pool_size)
    if target <= 0:
        return np.empty((0, 2), dtype=np.int64)

    chosen: list[tuple[int, int]] = []
    chosen_set: set[tuple[int, int]] = set()
    attempts_left = _REJECTION_ATTEMPT_FACTOR * target
    while len(chosen) < target and attempts_left > 0:
        batch = min(attempts_left, max(64, target - len(chosen)))
        us = rng.integers(0, n, size=batch)
        vs = rng.integers(0, n, size=batch)
        attempts_left -= batch
        for u, v in zip(us.tolist(), vs.tolist()):
            if u == v:
                continue
            pair = (u, v) if graph.directed else (min(u, v), max(u, v))
            if pair in existing or pair in chosen_set:
                continue
            chosen.append(pair)
            chosen_set.add(pair)
            if len(chosen) == target:
                break

    if len(chosen) < target:
        # Dense graph: enumerate the complement and draw without replacement.
        complement = [
            (u, v)
            for u in range(n)
            for v in (range(n) if graph.directed else range(u + 1, n))
            if u != v and (u, v) not in existing and (u, v) not in chosen_set
        ]
        extra = rng.choice(len(complement), size=target - len(chosen), replace=False)
        chosen.extend(complement[i] for i in sorted(extra.tolist()))

    return np.asarray(chosen, dtype=np.int64).reshape(-1, 2)


def inject_structural_noise(
    graph: LabeledGraph, noise_ratio: float, seed: int
) -> LabeledGraph:
    """Remove floor(noise_ratio/2 * E) random edges and add as many random
    non-edges of the original graph (fewer if the non-edge pool runs out).

    Node set, features, and labels are untouched.
    """
    if not 0.0 <= noise_ratio <= 1.0:
        raise ValueError(f"noise_ratio must be in [0, 1], got {noise_ratio}")
    k = int(np.floor(noise_ratio / 2.0 * graph.num_edges))
    if k == 0:
        return graph
    rng = np.random.default_rng(seed)
    removed_idx = rng.choice(graph.num_edges, size=k, replace=False)
    keep = np.ones(graph.num_edges, dtype=bool)
    keep[removed_idx] = False
    added = _sample_non_edges(graph, k, rng)
    new_edges = np.concatenate([graph.edges[keep], added], axis=0)
    return graph.with_edges(new_edges)


def random_edge_drop(graph: LabeledGraph, drop_count: int, seed: int) -> LabeledGraph:
    """Uniformly remove exactly `drop_count` edges; deterministic per seed."""
    if drop_count < 0:
        raise ValueError("drop_count must be non-negative")
    if drop_count > graph.num_edges:
        raise ValueError(
            f"cannot drop {drop_count} edges from a graph with {graph.num_edges}"
        )
    if drop_count == 0:
        return graph
    rng = np.random.default_rng(seed)
    removed_idx = rng.choice(graph.num_edges, size=drop_count, replace=False)
    keep = np.ones(graph.num_edges, dtype=bool)
    keep[removed_idx] = False
    return graph.with_edges(graph.edges[keep])


# ---------------------------------------------------------------------------
# File formats
#
# "json": single container {"num_nodes", "directed", "edges", "features",
#         "labels", "num_classes"} (labels/features optional; weighted graphs
#         add "edge_weights").
# "edgelist": <prefix>.edges ("u v" per line, '#' comments),
#             <prefix>.features.csv and <prefix>.labels.csv (headerless,
#             row i = node i; labels file optional).
# ---------------------------------------------------------------------------


def save_graph(graph: LabeledGraph | WeightedGraph, path: str | Path, format: str = "json") -> None:
    if format == "json":
        _save_json(graph, Path(path))
    elif format == "edgelist":
        if isinstance(graph, WeightedGraph):
            raise ValueError("edgelist format does not carry edge weights")
        _save_edgelist(graph, Path(path))
    else:
        raise ValueError(f"unknown graph format {format!r}")


def load_graph(path: str | Path, format: str = "json", directed: bool = False) -> LabeledGraph:
    if format == "json":
        graph, _ = _load_json(Path(path))
        return graph
    if format == "edgelist":
        return _load_edgelist(Path(path), directed=directed)
    raise ValueError(f"unknown graph format {format!r}")


def load_weighted_graph(path: str | Path) -> WeightedGraph:
    """Load a JSON container; missing "edge_weights" means unit weights."""
    graph, weights = _load_json(Path(path))
    return WeightedGraph(base=graph, edge_weights=weights)


def _save_json(graph: LabeledGraph | WeightedGraph, path: Path) -> None:
    base = graph.base if isinstance(graph, WeightedGraph) else graph
    doc: dict = {
        "num_nodes": base.num_nodes,
        "directed": base.directed,
        "edges": base.edges.tolist(),
    }
    if base.features is not None:
        doc["features"] = [[float(x) for x in row] for row in base.features]
    if base.labels is not None:
        doc["labels"] = base.labels.tolist()
        doc["num_classes"] = base.num_classes
    if isinstance(graph, WeightedGraph):
        doc["edge_weights"] = [float(w) for w in graph.edge_weights]
    path.write_text(json.dumps(doc, sort_keys=True))


def _load_json(path: Path) -> tuple[LabeledGraph, np.ndarray | None]:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc.msg} at offset {exc.pos}", path) from exc
    if not isinstance(doc, dict):
        raise GraphFormatError("top-level JSON value must be an object", path)
    for key in ("num_nodes", "edges"):
        if key not in doc:
            raise GraphFormatError(f"missing required key {key!r}", path)
    try:
        graph = LabeledGraph(
            num_nodes=int(doc["num_nodes"]),
            edges=np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2),
            directed=bool(doc.get("directed", False)),
            features=np.asarray(doc["features"], dtype=np.float64)
            if "features" in doc
            else None,
            labels=np.asarray(doc["labels"], dtype=np.int64)
            if "labels" in doc
            else None,
            num_classes=doc.get("num_classes"),
        )
    except ValueError as exc:
        raise GraphFormatError(str(exc), path) from exc
    weights = None
    if "edge_weights" in doc:
        weights = np.asarray(doc["edge_weights"], dtype=np.float64)
        if weights.shape[0] != graph.num_edges:
            raise GraphFormatError(
                f"{weights.shape[0]} edge weights for {graph.num_edges} edges", path
            )
    return graph, weights


def _edge_path(prefix: Path) -> Path:
    return prefix.with_name(prefix.name + ".edges")


def _features_path(prefix: Path) -> Path:
    return prefix.with_name(prefix.name + ".features.csv")


def _labels_path(prefix: Path) -> Path:
    return prefix.with_name(prefix.name + ".labels.csv")


def _save_edgelist(graph: LabeledGraph, prefix: Path) -> None:
    if graph.features is None:
        raise ValueError("edgelist format requires node features")
    lines = [f"{u} {v}" for u, v in graph.edges]
    _edge_path(prefix).write_text("\n".join(lines) + ("\n" if lines else ""))
    rows = [",".join(repr(float(x)) for x in row) for row in graph.features]
    _features_path(prefix).write_text("\n".join(rows) + "\n")
    if graph.labels is not None:
        _labels_path(prefix).write_text(
            "\n".join(str(int(y)) for y in graph.labels) + "\n"
        )


def _load_edgelist(prefix: Path, directed: bool) -> LabeledGraph:
    fpath = _features_path(prefix)
    features_rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(fpath.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise GraphFormatError(f"bad feature value: {exc}", fpath, lineno) from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise GraphFormatError(
                f"expected {width} columns, got {len(row)}", fpath, lineno
            )
        features_rows.append(row)
    if not features_rows:
        raise GraphFormatError("feature file is empty", fpath)
    num_nodes = len(features_rows)

    epath = _edge_path(prefix)
    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(epath.read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise GraphFormatError(
                f"expected 'u v', got {line.strip()!r}", epath, lineno
            )
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphFormatError(f"bad node index: {exc}", epath, lineno) from exc
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise GraphFormatError(
                f"edge ({u}, {v}) references a node outside [0, {num_nodes})",
                epath,
                lineno,
            )
        if u == v:
            raise GraphFormatError(f"self-loop ({u}, {v})", epath, lineno)
        edges.append((u, v))

    labels = None
    lpath = _labels_path(prefix)
    if lpath.exists():
        values: list[int] = []
        for lineno, line in enumerate(lpath.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                values.append(int(line.strip()))
            except ValueError as exc:
                raise GraphFormatError(f"bad label: {exc}", lpath, lineno) from exc
        if len(values) != num_nodes:
            raise GraphFormatError(
                f"{len(values)} labels for {num_nodes} nodes", lpath, len(values)
            )
        labels = np.asarray(values, dtype=np.int64)

    return LabeledGraph(
        num_nodes=num_nodes,
        edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        directed=directed,
        features=np.asarray(features_rows, dtype=np.float64),
        labels=labels,
    )
