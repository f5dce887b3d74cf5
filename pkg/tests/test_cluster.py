import json
import math

import numpy as np
import pytest

from wetcluster.arcs import ArcChain, polygon_chain
from wetcluster.cluster import (
    G,
    ArcCluster,
    BoundaryTrace,
    ClusterError,
    InstanceSpec,
    Interface,
    Region,
    SpecError,
    Weights,
    check_triangle,
    constant_cluster,
    energy,
    points_in_polygon,
    segment_interface,
    validate,
)


def test_weights_reject_nonpositive():
    with pytest.raises(SpecError):
        Weights((1.0, 0.0))
    with pytest.raises(SpecError):
        Weights((1.0,))


def test_weights_pair_costs():
    w = Weights((1.0, 2.0, 3.0))
    assert w.pair(1, 2) == 5.0
    assert w.pair(1, G) == 2.0
    assert w.pair(2, 2) == 0.0
    assert not w.equal
    assert Weights.uniform(3).equal


def test_triangle_holds_for_positive_weights():
    assert check_triangle([0.2, 1.0, 7.0]).ok


def test_trace_validation():
    with pytest.raises(SpecError):
        BoundaryTrace(((1.0, 1), (0.5, 2)))
    with pytest.raises(SpecError):
        BoundaryTrace(((0.0, 1), (1.0, 1)))
    with pytest.raises(SpecError):
        BoundaryTrace(((7.0, 1),))
    t = BoundaryTrace(((0.0, 1), (math.pi, 2)))
    assert t.n_jumps == 2
    assert t.label_at(1.0) == 1 and t.label_at(4.0) == 2 and t.label_at(-0.1) == 2


def test_constant_trace():
    t = BoundaryTrace(((0.3, 2),))
    assert t.n_jumps == 0
    assert t.arcs()[0].end - t.arcs()[0].start == pytest.approx(2 * math.pi)
    cl = constant_cluster(t)
    assert cl.regions[0].area() == pytest.approx(math.pi, rel=1e-12)


def test_trace_rotation_keeps_labels_cyclic():
    t = BoundaryTrace(((0.0, 1), (2.0, 2), (4.0, 3)))
    r = t.rotated(3.0)
    for a in np.linspace(0, 6, 13):
        assert r.label_at(a + 3.0) == t.label_at(a)


def test_in_segment_is_the_cap():
    t = BoundaryTrace(((0.0, 1), (math.pi / 2, 2)))
    arc = t.arcs()[0]
    assert t.in_segment(np.array([0.7]), np.array([0.6]), arc)[0]
    assert not t.in_segment(np.array([0.2]), np.array([0.2]), arc)[0]


def test_spec_roundtrip(y_spec):
    again = InstanceSpec.from_json(y_spec.to_json())
    assert again == y_spec


@pytest.mark.parametrize(
    "doc, where",
    [
        ({"weights": [1, 1]}, "domain"),
        ({"domain": "ball", "weights": [1, -1], "trace": [{"angle": 0, "label": 1}]}, "weights"),
        ({"domain": "ball", "weights": [1, 1], "trace": [{"angle": 0}]}, "trace[0]"),
        ({"domain": "ball", "weights": [1, 1], "delta": -1, "trace": [{"angle": 0, "label": 1}]}, "delta"),
        ({"domain": "plane", "weights": [1, 1, 1], "masses": [0.3]}, "masses"),
        ({"domain": "ball", "weights": [1, 1], "trace": [{"angle": 0, "label": 3}]}, "trace"),
    ],
)
def test_spec_errors_name_the_field(doc, where):
    with pytest.raises(SpecError) as e:
        InstanceSpec.from_dict(doc)
    assert e.value.where == where


def test_boundary_constant(y_spec):
    assert y_spec.boundary_constant() == pytest.approx(4 * math.pi)


def test_energy_of_a_chord():
    p, q = (1.0, 0.0), (-1.0, 0.0)
    cl = ArcCluster((segment_interface(p, q, 1, 2),))
    assert energy(cl, Weights((1.0, 1.0, 2.0))) == pytest.approx(6.0)


def test_energy_rejects_self_interface():
    cl = ArcCluster((segment_interface((0, 0), (1, 0), 1, 1),))
    with pytest.raises(ClusterError):
        energy(cl, Weights.uniform(2))


def test_wet_area_counts_g_regions():
    sq = polygon_chain([(0, 0), (0.1, 0), (0.1, 0.1), (0, 0.1)])
    cl = ArcCluster((), (), (Region(G, sq),))
    assert cl.wet_area() == pytest.approx(0.01)


def test_points_in_polygon():
    sq = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], float)
    got = points_in_polygon(sq, np.array([0.5, 1.5, 0.2]), np.array([0.5, 0.5, 0.9]))
    assert got.tolist() == [True, False, True]


def test_validate_flags_excess_wet_area(y_spec):
    from wetcluster.dry import best_dry
    from wetcluster.wetting import build_wetted

    wc = build_wetted(best_dry(y_spec.with_delta(0)).best, 0.02)
    rep = validate(wc.assembled, y_spec)
    assert not rep["wet_area"]
    assert validate(wc.assembled, y_spec.with_delta(0.02)).ok


def test_validate_plane_masses():
    spec = InstanceSpec.from_dict({"domain": "plane", "weights": [1, 1], "masses": [1.0]})
    sq = polygon_chain([(0, 0), (1, 0), (1, 1), (0, 1)])
    open_sq = ArcChain(sq.arcs, closed=False)
    cl = ArcCluster((Interface(open_sq, 1, 0),), (), (Region(1, sq),))
    assert validate(cl, spec).ok
    bad = InstanceSpec.from_dict({"domain": "plane", "weights": [1, 1], "masses": [1.5]})
    assert not validate(cl, bad)["masses"]
