import math

import numpy as np
import pytest

from hypertree.capacity import (
    CapacityEstimate,
    capacity_check,
    capacity_lower_bound,
    capacity_upper_bound,
    estimate_capacity,
    node_radius,
    packing_angle,
)
from hypertree.errors import InputError
from hypertree.graph import HierarchyGraph, generate_balanced_tree


class TestPackingAngle:
    def test_zero_radius(self):
        assert packing_angle(0.0) == pytest.approx(math.pi / 3.0, abs=1e-15)

    def test_radius_two(self):
        expected = 2.0 * math.asin(1.0 / (2.0 * math.cosh(1.0)))
        assert packing_angle(2.0) == pytest.approx(expected, abs=1e-15)
        assert packing_angle(2.0) == pytest.approx(0.66006, abs=1e-4)

    def test_large_radius_asymptotic(self):
        # for large r the angle approaches 2 exp(-r/2)
        assert packing_angle(20.0) == pytest.approx(2.0 * math.exp(-10.0), rel=0.01)

    def test_strictly_decreasing(self):
        grid = np.linspace(0.0, 20.0, 200)
        vals = [packing_angle(r) for r in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert all(v <= math.pi / 3.0 + 1e-12 for v in vals)
        assert vals[0] == pytest.approx(math.pi / 3.0)

    def test_negative_radius_rejected(self):
        with pytest.raises(InputError):
            packing_angle(-0.1)


class TestBounds:
    def test_lower_d2(self):
        assert capacity_lower_bound(2, 2.0) == pytest.approx(math.pi * math.e, abs=1e-9)
        assert capacity_lower_bound(2, 0.0) == pytest.approx(math.pi, abs=1e-12)

    def test_lower_d5(self):
        expected = math.sqrt(10.0 * math.pi) * 2.0**-4 * math.exp(4.0)
        assert capacity_lower_bound(5, 2.0) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(19.13, abs=0.01)

    def test_lower_high_dim_branch(self):
        expected = (
            math.sqrt(2.0 * math.pi)
            * math.log(2.0 / math.sqrt(3.0))
            * 17.0**1.5
            * 2.0**-16
            * math.exp(8.0 * 1.5)
        )
        assert capacity_lower_bound(17, 1.5) == pytest.approx(expected, rel=1e-12)

    def test_upper_values(self):
        assert capacity_upper_bound(3, 2.0) == pytest.approx(8.0 * math.e**3, abs=1e-9)
        assert capacity_upper_bound(2, 2.0) == pytest.approx(math.pi * math.e, abs=1e-9)
        assert capacity_upper_bound(10, 0.0) == 1024.0

    def test_bad_dimension(self):
        with pytest.raises(InputError):
            capacity_lower_bound(1, 1.0)
        with pytest.raises(InputError):
            capacity_upper_bound(1, 1.0)

    def test_lower_below_upper_on_grid(self):
        for d in range(2, 31):
            for r in np.arange(0.0, 20.5, 0.5):
                assert capacity_lower_bound(d, float(r)) <= capacity_upper_bound(d, float(r))

    def test_monotone_in_radius(self):
        for d in (2, 3, 16, 17, 30):
            grid = np.arange(0.0, 20.5, 0.5)
            lows = [capacity_lower_bound(d, float(r)) for r in grid]
            highs = [capacity_upper_bound(d, float(r)) for r in grid]
            assert all(a <= b for a, b in zip(lows, lows[1:]))
            assert all(a <= b for a, b in zip(highs, highs[1:]))

    def test_estimate_construction(self):
        est = estimate_capacity(4, 3.0)
        assert est.lower_bound <= est.upper_bound
        assert 0 < est.packing_angle <= math.pi / 3.0

    def test_estimate_rejects_inconsistent(self):
        with pytest.raises(InputError):
            CapacityEstimate(dim=2, radius=1.0, packing_angle=0.5, lower_bound=5.0, upper_bound=1.0)


def star_graph(leaves: int) -> HierarchyGraph:
    labels = ["hub"] + [f"leaf{i}" for i in range(leaves)]
    edges = {(i, 0) for i in range(1, leaves + 1)}
    return HierarchyGraph(labels=labels, edges=edges)


def ring_points(center_first: int, radius_euclid: float, dim: int = 2) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * math.pi, center_first, endpoint=False)
    pts = np.zeros((center_first + 1, dim))
    pts[1:, 0] = radius_euclid * np.cos(angles)
    pts[1:, 1] = radius_euclid * np.sin(angles)
    return pts


class TestNodeRadius:
    def test_degree_one(self):
        g = star_graph(1)
        pts = np.array([[0.0, 0.0], [math.tanh(0.35), 0.0]])
        assert node_radius(1, pts, g) == pytest.approx(0.7, abs=1e-12)

    def test_third_order_statistic(self):
        g = star_graph(4)  # hub degree 4... use degree-3 node instead
        g = HierarchyGraph(
            labels=["a", "b", "c", "d", "e"],
            edges={(1, 0), (2, 0), (3, 0), (4, 3)},
        )
        # node 0 has degree 3; place others at hyperbolic distances .2 .5 .9 1.4
        radii = [math.tanh(x / 2.0) for x in (0.2, 0.5, 0.9, 1.4)]
        pts = np.zeros((5, 2))
        dirs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        for i, (r, (dx, dy)) in enumerate(zip(radii, dirs), start=1):
            pts[i] = [r * dx, r * dy]
        assert node_radius(0, pts, g) == pytest.approx(0.9, abs=1e-12)

    def test_coincident_points(self):
        g = star_graph(3)
        pts = np.zeros((4, 2))
        assert node_radius(0, pts, g) == 0.0

    def test_single_node_graph(self):
        g = HierarchyGraph(labels=["only"], edges=set())
        with pytest.raises(InputError):
            node_radius(0, np.zeros((1, 2)), g)


class TestCapacityCheck:
    def test_moderate_degree_not_offender(self):
        # hub degree 4 with all leaves at hyperbolic radius 2: bound ~ 8.54
        g = star_graph(4)
        pts = ring_points(4, math.tanh(1.0))
        assert capacity_check(pts, g, 2) == []

    def test_high_degree_offender(self):
        g = star_graph(20)
        pts = ring_points(20, math.tanh(1.0))
        offenders = [o for o in capacity_check(pts, g, 2) if o.node == 0]
        assert len(offenders) == 1
        off = offenders[0]
        assert off.degree == 20
        assert off.degree > off.lower_bound
        assert off.lower_bound == pytest.approx(math.pi * math.e, rel=1e-6)

    def test_two_node_path(self):
        g = HierarchyGraph(labels=["a", "b"], edges={(0, 1)})
        pts = np.array([[0.1, 0.0], [0.0, 0.2]])
        assert capacity_check(pts, g, 2) == []

    def test_empty_when_bound_dominates(self, rng):
        g = generate_balanced_tree(2, 3)
        # spread points far apart so every r_A is large
        pts = ring_points(len(g.labels) - 1, 0.999)
        pts = np.vstack([pts[:1], pts[1:]])
        offenders = capacity_check(pts, g, 2)
        from hypertree.capacity import capacity_lower_bound as lb
        from hypertree.capacity import node_radius as nr

        max_deg = max(g.degree(v) for v in range(len(g.labels)))
        if all(lb(2, nr(v, pts, g)) >= max_deg for v in range(len(g.labels))):
            assert offenders == []

    def test_sorted_by_node_id(self):
        g = star_graph(20)
        # two offender hubs impossible in a star; check ordering on the list anyway
        offs = capacity_check(ring_points(20, 0.05), g, 2)
        ids = [o.node for o in offs]
        assert ids == sorted(ids)
