import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wetcluster.cluster import InfeasibleError, InstanceSpec, validate
from wetcluster.dry import best_dry, enumerate_topologies, is_convex_chain, sine_law_residual

from conftest import make_spec, y_trace


def _jumps(angles_labels):
    return [{"angle": a, "label": l} for a, l in angles_labels]


def test_two_jumps_give_the_chord():
    spec = make_spec(_jumps([(0.4, 1), (2.0, 2)]), [1, 1, 1])
    net = best_dry(spec).best
    chord = 2 * math.sin((2.0 - 0.4) / 2)
    assert net.energy == pytest.approx(2 * chord, abs=1e-12)
    assert not net.junctions


def test_symmetric_y():
    net = best_dry(make_spec(y_trace(), [1, 1, 1, 1])).best
    assert net.energy == pytest.approx(6.0, abs=1e-9)
    assert abs(net.junctions[0].norm()) < 1e-9
    for _, th in net.junction_angles(0):
        assert th == pytest.approx(2 * math.pi / 3, abs=1e-8)


def test_general_weights_satisfy_the_sine_law(general_spec):
    net = best_dry(general_spec).best
    assert len(net.junctions) == 1
    assert sine_law_residual(net, 0) < 1e-8


def test_obtuse_triangle_uses_a_boundary_junction():
    spec = make_spec(_jumps([(0.0, 1), (0.3, 2), (0.6, 3)]), [1, 1, 1, 1])
    net = best_dry(spec).best
    assert not net.junctions
    assert net.topology.boundary_junctions == (1,)
    # two chords from the middle jump point
    p = [(math.cos(a), math.sin(a)) for a in (0.0, 0.3, 0.6)]
    expect = 2 * (math.dist(p[0], p[1]) + math.dist(p[1], p[2]))
    assert net.energy == pytest.approx(expect, abs=1e-12)


def test_four_labels_two_junctions():
    spec = make_spec(_jumps([(0.1, 1), (1.6, 2), (3.2, 3), (4.7, 4)]), [1] * 5)
    res = best_dry(spec)
    assert len(res.best.junctions) == 2
    assert res.convex
    assert validate(res.best.to_cluster(), spec).ok
    for k in range(2):
        assert sine_law_residual(res.best, k) < 1e-8


def test_repeated_label_prefers_chords():
    spec = make_spec(_jumps([(0.0, 1), (1.5, 2), (3.2, 1), (4.7, 2)]), [1, 1, 1])
    res = best_dry(spec)
    assert not res.best.junctions
    for alt in res.runners_up:
        assert alt.energy >= res.best.energy


def test_plane_is_rejected():
    spec = InstanceSpec.from_dict({"domain": "plane", "weights": [1, 1], "masses": [1.0]})
    with pytest.raises(InfeasibleError):
        best_dry(spec)


def test_max_junctions_limits_enumeration():
    spec = make_spec(_jumps([(0.1, 1), (1.6, 2), (3.2, 3), (4.7, 4)]), [1] * 5)
    tops = enumerate_topologies(spec.trace, max_junctions=0)
    assert all(t.n_junctions == 0 for t in tops)
    assert best_dry(spec, max_junctions=0).best.energy > best_dry(spec).best.energy


@settings(max_examples=25, deadline=None)
@given(
    gaps=st.lists(st.floats(0.3, 3.0), min_size=3, max_size=3),
    w=st.lists(st.floats(0.6, 1.6), min_size=3, max_size=3),
    phi=st.floats(0, 6.28),
)
def test_three_jump_minimizers_are_admissible(gaps, w, phi):
    tot = sum(gaps)
    angles = [phi]
    for g in gaps[:-1]:
        angles.append(angles[-1] + g * 2 * math.pi / tot)
    pairs = sorted(((a % (2 * math.pi)), k + 1) for k, a in enumerate(angles))
    spec = make_spec(_jumps(pairs), [1.0] + w)
    res = best_dry(spec)
    net = res.best
    assert validate(net.to_cluster(), spec).ok
    for k in range(len(net.junctions)):
        assert sine_law_residual(net, k) < 1e-8
    # never worse than connecting the jumps pairwise by chords alone
    for alt in res.runners_up:
        assert alt.energy >= net.energy - 1e-12
    for r in net.to_cluster().regions:
        assert is_convex_chain(r.boundary)
