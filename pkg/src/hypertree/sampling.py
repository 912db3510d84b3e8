"""Negative sampling and batch construction.

All randomness flows through an explicit numpy Generator, so a fixed seed
reproduces batches and negatives exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph import HierarchyGraph

# Above this node count negatives are drawn by rejection sampling instead
# of materializing per-node eligibility arrays.
_REJECTION_THRESHOLD = 2048


@dataclass
class Batch:
    """Weighted edges plus (once attached) per-edge negative samples."""

    edges: list[tuple[int, int, float]]
    negatives: list[list[int]] = field(default_factory=list)


def sample_negatives(
    g: HierarchyGraph,
    i: int,
    j: int,
    m: int,
    rng: np.random.Generator,
    include_closure: bool | None = None,
) -> list[int]:
    """Up to ``m`` distinct nodes outside {i, j} and i's neighborhood.

    Drawn uniformly without replacement; if fewer eligible nodes exist they
    are all returned (ascending id). Closure neighbors are excluded when the
    graph carries closure edges, unless overridden via ``include_closure``.
    """
    if m < 1:
        raise InputError(f"negative sample count must be >= 1, got {m}")
    if include_closure is None:
        include_closure = g.closure_edges is not None
    n = len(g)
    forbidden = g.neighbors(i, include_closure) | {i, j}
    n_eligible = n - len(forbidden)
    if n_eligible <= 0:
        return []
    if n_eligible <= m:
        return sorted(set(range(n)) - forbidden)

    if n <= _REJECTION_THRESHOLD:
        # the cached per-node array excludes i and its neighbors but not j
        eligible = g.eligible_negatives(i, include_closure)
        eligible = eligible[eligible != j]
        picks = rng.choice(eligible.shape[0], size=m, replace=False, shuffle=False)
        return [int(eligible[p]) for p in picks]

    # large graph: rejection sampling stays O(m) per call
    out: list[int] = []
    seen = set(forbidden)
    while len(out) < m:
        draws = rng.integers(0, n, size=2 * (m - len(out)) + 4)
        for x in draws:
            x = int(x)
            if x not in seen:
                seen.add(x)
                out.append(x)
                if len(out) == m:
                    break
    return out


def make_batches(
    edges: list[tuple[int, int, float]],
    batch_size: int,
    rng: np.random.Generator,
) -> list[Batch]:
    """Shuffle edges and split into consecutive chunks of ``batch_size``."""
    if batch_size < 1:
        raise InputError(f"batch size must be >= 1, got {batch_size}")
    if not edges:
        raise InputError("cannot build batches from an empty edge list")
    order = rng.permutation(len(edges))
    shuffled = [edges[k] for k in order]
    return [
        Batch(edges=shuffled[s : s + batch_size])
        for s in range(0, len(shuffled), batch_size)
    ]


def attach_negatives(
    batch: Batch,
    g: HierarchyGraph,
    m: int,
    rng: np.random.Generator,
    include_closure: bool | None = None,
) -> Batch:
    """Fill ``batch.negatives`` with one sample list per edge."""
    batch.negatives = [
        sample_negatives(g, i, j, m, rng, include_closure) for i, j, _ in batch.edges
    ]
    return batch
