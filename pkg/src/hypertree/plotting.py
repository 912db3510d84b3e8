"""SVG export of 2-d embeddings: unit circle, edges, nodes.

Ground-truth edges whose child node is misinferred are drawn in red.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InputError
from .evaluation import classify_illness
from .graph import HierarchyGraph
from .training import EmbeddingTable

_SIZE = 600
_MARGIN = 20


def _to_px(xy: np.ndarray) -> tuple[float, float]:
    r = _SIZE / 2 - _MARGIN
    cx = cy = _SIZE / 2
    return cx + r * float(xy[0]), cy - r * float(xy[1])


def render_svg(theta: EmbeddingTable, g: HierarchyGraph, path: str | os.PathLike) -> None:
    """Write the embedding picture; requires a 2-d table and a validated tree."""
    if theta.dim != 2:
        raise InputError(f"plotting requires a 2-d checkpoint, got dim {theta.dim}")
    illness = classify_illness(theta, g)
    ill_edges = {(c.source, c.true_target) for c in illness.cases}

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}" '
        f'viewBox="0 0 {_SIZE} {_SIZE}">',
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
        f'<circle cx="{_SIZE / 2}" cy="{_SIZE / 2}" r="{_SIZE / 2 - _MARGIN}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for child, parent in sorted(g.edges):
        x1, y1 = _to_px(theta.points[child])
        x2, y2 = _to_px(theta.points[parent])
        color = "#d62728" if (child, parent) in ill_edges else "#999999"
        parts.append(
            f'<line class="edge" x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" '
            f'y2="{y2:.2f}" stroke="{color}" stroke-width="0.8"/>'
        )
    for row in theta.points:
        x, y = _to_px(row)
        parts.append(f'<circle class="node" cx="{x:.2f}" cy="{y:.2f}" r="2" fill="#1f77b4"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
