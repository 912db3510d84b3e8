"""Local-capacity bounds and the dilation trigger.

A node offends when its tree degree exceeds the guaranteed (lower-bound)
capacity of the ball of radius r_A around it, where r_A is the distance
to its deg-th nearest embedded neighbor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import distances_from
from .graph import HierarchyGraph

_LOG_2_OVER_SQRT3 = math.log(2.0 / math.sqrt(3.0))


def packing_angle(r: float) -> float:
    """Minimum origin angle separating two radius-r points by more than r."""
    if r < 0:
        raise InputError(f"radius must be non-negative, got {r}")
    return 2.0 * math.asin(1.0 / (2.0 * math.cosh(r / 2.0)))


def capacity_lower_bound(d: int, r: float) -> float:
    """Guaranteed packing count for dimension ``d`` and radius ``r``."""
    _check_dim_radius(d, r)
    if d == 2:
        return math.pi * math.exp(r / 2.0)
    if d <= 16:
        return math.sqrt(2.0 * math.pi * d) * 2.0 ** (1 - d) * math.exp((d - 1) * r / 2.0)
    return (
        math.sqrt(2.0 * math.pi)
        * _LOG_2_OVER_SQRT3
        * d**1.5
        * 2.0 ** (1 - d)
        * math.exp((d - 1) * r / 2.0)
    )


def capacity_upper_bound(d: int, r: float) -> float:
    """Upper estimate of the packing count."""
    _check_dim_radius(d, r)
    if d == 2:
        return math.pi * math.exp(r / 2.0)
    return 2.0**d * math.exp(d * r / 2.0)


def _check_dim_radius(d: int, r: float) -> None:
    if d < 2:
        raise InputError(f"dimension must be >= 2, got {d}")
    if r < 0:
        raise InputError(f"radius must be non-negative, got {r}")


@dataclass(frozen=True)
class CapacityEstimate:
    dim: int
    radius: float
    packing_angle: float
    lower_bound: float
    upper_bound: float

    def __post_init__(self):
        if not self.lower_bound <= self.upper_bound:
            raise InputError(
                f"lower bound {self.lower_bound} exceeds upper bound {self.upper_bound}"
            )
        if not 0.0 < self.packing_angle <= math.pi / 3.0 + 1e-12:
            raise InputError(f"packing angle {self.packing_angle} out of range")


def estimate_capacity(d: int, r: float) -> CapacityEstimate:
    return CapacityEstimate(
        dim=d,
        radius=r,
        packing_angle=packing_angle(r),
        lower_bound=capacity_lower_bound(d, r),
        upper_bound=capacity_upper_bound(d, r),
    )


@dataclass(frozen=True)
class CapacityOffender:
    node: int
    degree: int
    radius: float
    lower_bound: float


def node_radius(node: int, points: np.ndarray, graph: HierarchyGraph) -> float:
    """Distance from ``node`` to its deg(node)-th nearest other embedding."""
    if len(graph) < 2:
        raise InputError("node_radius needs a graph with at least two nodes")
    k = graph.degree(node)
    if len(graph) < k + 1:
        raise InputError(f"graph has fewer than deg+1 = {k + 1} nodes")
    dists = distances_from(points, node)
    others = np.delete(dists, node)
    # k-th smallest (1-based) among the other nodes
    return float(np.partition(others, k - 1)[k - 1])


def capacity_check(points: np.ndarray, graph: HierarchyGraph, d: int) -> list[CapacityOffender]:
    """Nodes whose degree exceeds the lower capacity bound at their radius.

    Returned in ascending node id order; empty means sufficient capacity.
    """
    offenders = []
    for node in range(len(graph)):
        deg = graph.degree(node)
        if deg == 0:
            continue
        r = node_radius(node, points, graph)
        bound = capacity_lower_bound(d, r)
        if deg > bound:
            offenders.append(
                CapacityOffender(node=node, degree=deg, radius=r, lower_bound=bound)
            )
    return offenders
