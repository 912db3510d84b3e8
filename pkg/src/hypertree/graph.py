"""Hierarchy data model: edge lists, balanced trees, closure, ancestry.

Edges are directed child -> parent throughout. Nodes carry string labels
and dense integer ids assigned in first-appearance order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ValidationError


@dataclass
class HierarchyGraph:
    labels: list[str]
    edges: set[tuple[int, int]]
    closure_edges: set[tuple[int, int]] | None = None
    parent_index: dict[int, int] = field(default_factory=dict)
    depth_index: dict[int, int] = field(default_factory=dict)
    root: int | None = None

    # caches, built lazily
    _adjacency: list[set[int]] | None = field(default=None, repr=False)
    _adjacency_tc: list[set[int]] | None = field(default=None, repr=False)
    _eligible: dict[tuple[int, bool], np.ndarray] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def is_validated(self) -> bool:
        return self.root is not None

    def id_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown node label {label!r}") from None

    def _check_node(self, node: int) -> None:
        if not 0 <= node < len(self.labels):
            raise InputError(f"unknown node id {node}")

    def neighbors(self, node: int, include_closure: bool = False) -> set[int]:
        """Undirected neighbor set of ``node`` in E (optionally E ∪ E_tc)."""
        self._check_node(node)
        if self._adjacency is None:
            adj: list[set[int]] = [set() for _ in self.labels]
            for c, p in self.edges:
                adj[c].add(p)
                adj[p].add(c)
            self._adjacency = adj
        if not include_closure or not self.closure_edges:
            return self._adjacency[node]
        if self._adjacency_tc is None:
            adj = [set(s) for s in self._adjacency]
            for c, p in self.closure_edges:
                adj[c].add(p)
                adj[p].add(c)
            self._adjacency_tc = adj
        return self._adjacency_tc[node]

    def degree(self, node: int) -> int:
        """Undirected degree in the tree edge set (closure excluded)."""
        return len(self.neighbors(node))

    def eligible_negatives(self, node: int, include_closure: bool) -> np.ndarray:
        """Sorted ids of nodes that are neither ``node`` nor its neighbors."""
        key = (node, bool(include_closure))
        cached = self._eligible.get(key)
        if cached is None:
            forbidden = self.neighbors(node, include_closure) | {node}
            cached = np.array(
                sorted(set(range(len(self.labels))) - forbidden), dtype=np.int64
            )
            self._eligible[key] = cached
        return cached

    def invalidate_caches(self) -> None:
        self._adjacency = None
        self._adjacency_tc = None
        self._eligible = {}


def load_edge_list(path: str | os.PathLike) -> HierarchyGraph:
    """Parse a tab-separated ``child<TAB>parent`` file.

    Lines starting with '#' and blank lines are ignored. Duplicate edges
    collapse; node ids follow first appearance.
    """
    if not os.path.exists(path):
        raise InputError(f"edge list not found: {path}")
    labels: list[str] = []
    ids: dict[str, int] = {}
    edges: set[tuple[int, int]] = set()

    def intern(label: str) -> int:
        if label not in ids:
            ids[label] = len(labels)
            labels.append(label)
        return ids[label]

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise InputError(
                    f"{path}:{lineno}: expected 2 tab-separated fields, got {len(fields)}"
                )
            child, parent = fields
            if child == parent:
                raise InputError(f"{path}:{lineno}: self-loop on {child!r}")
            edges.add((intern(child), intern(parent)))
    return HierarchyGraph(labels=labels, edges=edges)


def generate_balanced_tree(branching: int, levels: int) -> HierarchyGraph:
    """Balanced tree with ``levels`` levels below the root.

    The root is labeled "0"; the children of a node append ".1" .. ".b".
    Node count is sum of branching^i for i in 0..levels.
    """
    if branching < 1 or levels < 1:
        raise InputError("branching and levels must both be >= 1")
    labels = ["0"]
    edges: set[tuple[int, int]] = set()
    frontier = [0]
    for _ in range(levels):
        next_frontier = []
        for parent in frontier:
            for i in range(1, branching + 1):
                child = len(labels)
                labels.append(f"{labels[parent]}.{i}")
                edges.add((child, parent))
                next_frontier.append(child)
        frontier = next_frontier
    g = HierarchyGraph(labels=labels, edges=edges)
    validate_tree(g)
    return g


def validate_tree(g: HierarchyGraph) -> int:
    """Check tree invariants, build parent/depth indices, return the root id."""
    n = len(g.labels)
    if n == 0:
        raise ValidationError("empty graph")
    parent: dict[int, int] = {}
    for child, par in g.edges:
        if child in parent:
            raise ValidationError(
                f"node {g.labels[child]!r} has two parents "
                f"({g.labels[parent[child]]!r} and {g.labels[par]!r})"
            )
        parent[child] = par
    roots = [v for v in range(n) if v not in parent]
    if not roots:
        raise ValidationError("no root: every node has an outgoing edge (cycle)")
    if len(roots) > 1:
        names = ", ".join(repr(g.labels[r]) for r in roots[:5])
        raise ValidationError(f"multiple roots: {names}")
    if len(g.edges) != n - 1:
        raise ValidationError(f"expected {n - 1} edges for {n} nodes, got {len(g.edges)}")
    root = roots[0]

    depth: dict[int, int] = {root: 0}
    for v in range(n):
        if v in depth:
            continue
        chain = []
        cur = v
        while cur not in depth:
            chain.append(cur)
            if cur not in parent:
                raise ValidationError(f"disconnected component at {g.labels[v]!r}")
            cur = parent[cur]
            if cur == v:
                raise ValidationError(f"cycle through {g.labels[v]!r}")
        base = depth[cur]
        for i, node in enumerate(reversed(chain), start=1):
            depth[node] = base + i
    if len(depth) != n:
        missing = next(v for v in range(n) if v not in depth)
        raise ValidationError(f"disconnected node {g.labels[missing]!r}")

    g.parent_index = parent
    g.depth_index = depth
    g.root = root
    return root


def _require_tree(g: HierarchyGraph) -> None:
    if not g.is_validated:
        validate_tree(g)


def transitive_closure(g: HierarchyGraph) -> set[tuple[int, int]]:
    """Edges from each node to every strict non-parent ancestor."""
    _require_tree(g)
    closure: set[tuple[int, int]] = set()
    for v in range(len(g.labels)):
        anc = g.parent_index.get(v)
        if anc is None:
            continue
        anc = g.parent_index.get(anc)
        while anc is not None:
            closure.add((v, anc))
            anc = g.parent_index.get(anc)
    return closure


def attach_closure(g: HierarchyGraph) -> HierarchyGraph:
    """Compute and store E_tc on the graph, returning it for chaining."""
    g.closure_edges = transitive_closure(g)
    g.invalidate_caches()
    return g


def nearest_common_ancestor(g: HierarchyGraph, b: int, b2: int) -> int:
    """Deepest ancestor-or-self common to ``b`` and ``b2``."""
    _require_tree(g)
    g._check_node(b)
    g._check_node(b2)
    da, db = g.depth_index[b], g.depth_index[b2]
    while da > db:
        b = g.parent_index[b]
        da -= 1
    while db > da:
        b2 = g.parent_index[b2]
        db -= 1
    while b != b2:
        b = g.parent_index[b]
        b2 = g.parent_index[b2]
    return b


def is_strict_ancestor(g: HierarchyGraph, anc: int, node: int) -> bool:
    """True when ``anc`` is a proper ancestor of ``node`` in the tree."""
    _require_tree(g)
    cur = g.parent_index.get(node)
    while cur is not None:
        if cur == anc:
            return True
        cur = g.parent_index.get(cur)
    return False


def write_edge_list(g_or_edges, labels: list[str] | None, path: str | os.PathLike) -> None:
    """Write edges as ``child<TAB>parent`` lines, sorted by node id."""
    if isinstance(g_or_edges, HierarchyGraph):
        edges, labels = g_or_edges.edges, g_or_edges.labels
    else:
        edges = g_or_edges
        if labels is None:
            raise InputError("labels required when writing a raw edge set")
    with open(path, "w", encoding="utf-8") as fh:
        for c, p in sorted(edges):
            fh.write(f"{labels[c]}\t{labels[p]}\n")
