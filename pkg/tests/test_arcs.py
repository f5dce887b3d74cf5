import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wetcluster.arcs import (
    ArcChain,
    CircArc,
    GeometryError,
    Point2,
    arc_length,
    boundary_arcs,
    chain_area,
    circle_chain,
    curvilinear_triangle,
    endpoint_tangent,
    is_simple,
    polygon_chain,
    segment_area,
)

coord = st.floats(-2, 2, allow_nan=False)


def test_segment_has_zero_bulge():
    a = CircArc((0, 0), (1, 0))
    assert arc_length(a) == 1.0
    assert segment_area(a) == 0.0
    assert a.radius == math.inf


def test_half_circle():
    a = CircArc((-1, 0), (1, 0), 1.0)
    assert math.isclose(arc_length(a), math.pi, rel_tol=1e-12)
    assert math.isclose(abs(segment_area(a)), math.pi / 2, rel_tol=1e-12)


def test_chord_longer_than_diameter_rejected():
    with pytest.raises(GeometryError):
        CircArc((0, 0), (3, 0), 1.0)


def test_nonfinite_rejected():
    with pytest.raises(GeometryError):
        CircArc((0, math.nan), (1, 0))


def test_unit_circle_chain():
    c = circle_chain((0.3, -0.2), 0.5)
    assert math.isclose(chain_area(c), math.pi * 0.25, rel_tol=1e-12)
    assert math.isclose(c.length(), math.pi, rel_tol=1e-12)


def test_square_chain():
    sq = polygon_chain([(0, 0), (2, 0), (2, 1), (0, 1)])
    assert sq.signed_area() == 2.0
    assert sq.reversed().signed_area() == -2.0
    assert sq.length() == 6.0


def test_disconnected_chain_rejected():
    with pytest.raises(GeometryError):
        ArcChain((CircArc((0, 0), (1, 0)), CircArc((2, 0), (0, 0))))


def test_bowtie_not_simple():
    assert not is_simple(polygon_chain([(0, 0), (1, 1), (1, 0), (0, 1)]))
    with pytest.raises(GeometryError):
        chain_area(polygon_chain([(0, 0), (1, 1), (1, 0), (0, 1)]), check_simple=True)


def test_boundary_arcs_cover_the_circle():
    arcs = boundary_arcs(0.0, 2 * math.pi)
    assert math.isclose(sum(map(arc_length, arcs)), 2 * math.pi, rel_tol=1e-12)
    assert math.isclose(ArcChain(tuple(arcs)).signed_area(), math.pi, rel_tol=1e-12)


def test_triangle_closed_forms():
    t = curvilinear_triangle(0.5)
    assert math.isclose(chain_area(t.chain), (math.sqrt(3) - math.pi / 2) * 0.25, rel_tol=1e-12)
    for a in t.chain:
        assert math.isclose(arc_length(a), math.pi / 6, rel_tol=1e-12)
    # cusps sit r/sqrt(3) from the center, circle centers 2r/sqrt(3)
    for p in t.cusps:
        assert math.isclose((p - t.center).norm(), 0.5 / math.sqrt(3), rel_tol=1e-12)
    for c in t.circle_centers:
        assert math.isclose((c - t.center).norm(), 1.0 / math.sqrt(3), rel_tol=1e-12)


def test_triangle_arcs_meet_tangentially():
    t = curvilinear_triangle(1.0, rotation=0.3)
    arcs = t.chain.arcs
    for a, b in zip(arcs, arcs[1:] + arcs[:1]):
        out = endpoint_tangent(a, at_start=False)
        inn = endpoint_tangent(b, at_start=True)
        # consecutive arcs reverse direction at a cusp
        assert math.isclose(out.x * inn.x + out.y * inn.y, -1.0, abs_tol=1e-12)


def test_degenerate_triangle():
    t = curvilinear_triangle(0.0, center=(0.2, 0.1))
    assert t.area == 0.0
    assert t.chain is None


@settings(max_examples=200, deadline=None)
@given(x0=coord, y0=coord, x1=coord, y1=coord, s=st.floats(-0.999, 0.999))
def test_arc_reversal_flips_signed_bulge(x0, y0, x1, y1, s):
    c = math.hypot(x1 - x0, y1 - y0)
    if c < 1e-6:
        return
    a = CircArc((x0, y0), (x1, y1), s * 2 / c)
    b = a.reversed()
    assert math.isclose(arc_length(a), arc_length(b), rel_tol=1e-12)
    assert math.isclose(segment_area(a), -segment_area(b), rel_tol=1e-12, abs_tol=1e-15)
    assert arc_length(a) >= c * (1 - 1e-12)


@settings(max_examples=100, deadline=None)
@given(x0=coord, y0=coord, x1=coord, y1=coord, s=st.floats(-0.99, 0.99))
def test_sampled_points_lie_on_the_circle(x0, y0, x1, y1, s):
    c = math.hypot(x1 - x0, y1 - y0)
    if c < 1e-3 or abs(s) < 1e-3:
        return
    a = CircArc((x0, y0), (x1, y1), s * 2 / c)
    pts = a.sample(16)
    ctr = a.center()
    d = np.hypot(pts[:, 0] - ctr.x, pts[:, 1] - ctr.y)
    assert np.allclose(d, a.radius, rtol=1e-9)
    assert np.allclose(pts[0], a.start) and np.allclose(pts[-1], a.end)


@settings(max_examples=100, deadline=None)
@given(k=st.floats(1e-9, 1e-5), c=st.floats(0.01, 1.0))
def test_series_branch_is_continuous(k, c):
    a = CircArc((0, 0), (c, 0), k)
    th = 2 * math.asin(k * c / 2)
    assert math.isclose(arc_length(a), th / k, rel_tol=1e-10)
    # th - sin th cancels badly here, so compare with its series
    assert math.isclose(segment_area(a), (th**3 / 6 - th**5 / 120) / (2 * k * k), rel_tol=1e-6)


def test_point2_helpers():
    p = Point2(3, 4)
    assert p.norm() == 5.0
    q = p.rotate(math.pi / 2)
    assert math.isclose(q.x, -4) and math.isclose(q.y, 3)
