"""Reconstruction metrics and illness classification.

The neighborhood of a node is undirected (parent plus children). Distance
ties never count as "closer", and argmin ties break toward the smaller id,
so every metric is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ValidationError
from .geometry import distances_from
from .graph import HierarchyGraph, is_strict_ancestor, nearest_common_ancestor
from .training import EmbeddingTable

CAPACITY = "capacity"
INTRA = "intra"
INTER = "inter"


@dataclass(frozen=True)
class MetricsReport:
    map: float
    mr_paper: float
    mr_conventional: float


@dataclass(frozen=True)
class IllnessCase:
    source: int
    true_target: int
    inferred_target: int
    category: str


@dataclass(frozen=True)
class IllnessReport:
    capacity: int
    intra: int
    inter: int
    cases: list[IllnessCase]

    @property
    def total(self) -> int:
        return self.capacity + self.intra + self.inter


def _points(theta: EmbeddingTable | np.ndarray) -> np.ndarray:
    return theta.points if isinstance(theta, EmbeddingTable) else np.asarray(theta)


def rank_set(theta: EmbeddingTable, a: int, b: int) -> int:
    """Size of the smallest set containing b and everything closer to a."""
    if a == b:
        raise InputError("rank_set requires two distinct nodes")
    pts = _points(theta)
    d = distances_from(pts, a)
    closer = int(np.sum(d < d[b])) - (1 if 0.0 < d[b] else 0)  # drop a itself
    return 1 + closer


def _sorted_neighbors(d: np.ndarray, nbrs: list[int]) -> list[int]:
    return sorted(nbrs, key=lambda x: (d[x], x))


def _node_terms(d: np.ndarray, a: int, nbrs: list[int]):
    """Per-neighbor (|R|, |N ∩ R|) for node ``a`` given its distance row."""
    ordered = _sorted_neighbors(d, nbrs)
    nbr_d = np.array([d[x] for x in nbrs])
    for b in ordered:
        closer = int(np.sum(d < d[b])) - (1 if 0.0 < d[b] else 0)
        r_size = 1 + closer
        hits = 1 + int(np.sum(nbr_d < d[b]))
        yield r_size, hits


def _undirected_neighbors(g: HierarchyGraph) -> list[list[int]]:
    nbrs = [sorted(g.neighbors(v)) for v in range(len(g))]
    for v, ns in enumerate(nbrs):
        if not ns:
            raise InputError(f"isolated node {g.labels[v]!r}: metrics need deg >= 1")
    return nbrs


def map_score(theta: EmbeddingTable, g: HierarchyGraph) -> float:
    """Mean average precision of true neighbors under embedded distance."""
    pts = _points(theta)
    nbrs = _undirected_neighbors(g)
    total = 0.0
    for a in range(len(g)):
        d = distances_from(pts, a)
        ap = 0.0
        for r_size, hits in _node_terms(d, a, nbrs[a]):
            ap += hits / r_size
        total += ap / len(nbrs[a])
    return total / len(g)


def mean_rank(theta: EmbeddingTable, g: HierarchyGraph) -> tuple[float, float]:
    """(mr_paper, mr_conventional) over all (node, neighbor) pairs."""
    pts = _points(theta)
    nbrs = _undirected_neighbors(g)
    paper_total = 0.0
    conv_total = 0.0
    pairs = 0
    for a in range(len(g)):
        d = distances_from(pts, a)
        for i, (r_size, hits) in enumerate(_node_terms(d, a, nbrs[a]), start=1):
            paper_total += r_size - i
            conv_total += r_size - (hits - 1)
            pairs += 1
    return paper_total / len(g), conv_total / pairs


def metrics_report(theta: EmbeddingTable, g: HierarchyGraph) -> MetricsReport:
    mr_p, mr_c = mean_rank(theta, g)
    return MetricsReport(map=map_score(theta, g), mr_paper=mr_p, mr_conventional=mr_c)


def infer_target(theta: EmbeddingTable, a: int) -> int:
    """Nearest other node; ties break toward the smaller id."""
    pts = _points(theta)
    if pts.shape[0] < 2:
        raise InputError("infer_target needs at least two nodes")
    d = distances_from(pts, a)
    d[a] = np.inf
    return int(np.argmin(d))


def classify_illness(theta: EmbeddingTable, g: HierarchyGraph) -> IllnessReport:
    """Categorize every misinferred parent edge of a validated tree."""
    if not g.is_validated:
        raise ValidationError(
            "illness diagnostics need a validated tree; supply a backbone tree "
            "for non-tree edge sets"
        )
    pts = _points(theta)
    cases: list[IllnessCase] = []
    counts = {CAPACITY: 0, INTRA: 0, INTER: 0}
    for a in range(len(g)):
        b = g.parent_index.get(a)
        if b is None:
            continue  # root has no true target
        d = distances_from(pts, a)
        d[a] = np.inf
        b_prime = int(np.argmin(d))
        if b_prime == b:
            continue
        if g.parent_index.get(b_prime) == b:
            category = CAPACITY
        elif is_strict_ancestor(g, b, b_prime):
            category = INTRA
        else:
            # nearest common ancestor differs from B
            assert nearest_common_ancestor(g, b, b_prime) != b
            category = INTER
        counts[category] += 1
        cases.append(IllnessCase(a, b, b_prime, category))
    return IllnessReport(
        capacity=counts[CAPACITY], intra=counts[INTRA], inter=counts[INTER], cases=cases
    )


def metrics_json(metrics: MetricsReport, illness: IllnessReport) -> dict:
    """The JSON document emitted by the CLI."""
    return {
        "map": metrics.map,
        "mr_paper": metrics.mr_paper,
        "mr_conventional": metrics.mr_conventional,
        "illness": {
            "capacity": illness.capacity,
            "intra": illness.intra,
            "inter": illness.inter,
        },
    }
