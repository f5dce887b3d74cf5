import dataclasses
import json
import math

import numpy as np
import pytest

from wetcluster.arcs import ArcChain, CircArc, Point2, polygon_chain
from wetcluster.cluster import G, ArcCluster, Interface, Region
from wetcluster.dry import best_dry
from wetcluster.lattice.anneal import rasterize, sector_field
from wetcluster.lattice.field import LabelField, grid_for
from wetcluster.verify import (
    CheckEntry,
    SweepPoint,
    VerificationReport,
    check_convexity,
    check_curvature_condition,
    check_cusp_tangency,
    check_saturation,
    check_straight_interfaces,
    convergence_sweep,
    verify_cluster,
    verify_field,
)
from wetcluster.wetting import build_wetted


@pytest.fixture(scope="module")
def wetted():
    from conftest import make_spec, y_trace

    spec = make_spec(y_trace(), [1, 1, 1, 1], 0.01)
    return spec, build_wetted(best_dry(spec.with_delta(0)).best, 0.01)


def _tilt_dry_segments(cl: ArcCluster, angle: float) -> ArcCluster:
    """Rotate every dry segment that starts or ends at a cusp about that cusp."""
    cusps = [j.point for j in cl.junctions if j.kind == "interior-cusp"]
    out = []
    for itf in cl.interfaces:
        a = itf.chain.arcs[0]
        if G not in (itf.left, itf.right) and len(itf.chain.arcs) == 1:
            for c in cusps:
                if (a.start - c).norm() < 1e-12:
                    a = CircArc(a.start, c + (a.end - c).rotate(angle), 0.0)
                elif (a.end - c).norm() < 1e-12:
                    a = CircArc(c + (a.start - c).rotate(angle), a.end, 0.0)
            itf = Interface(ArcChain((a,), closed=False), itf.left, itf.right)
        out.append(itf)
    return dataclasses.replace(cl, interfaces=tuple(out))


def test_wetted_cluster_passes(wetted):
    spec, wc = wetted
    rep = verify_cluster(wc.assembled, spec)
    assert rep.ok
    cur = rep.entries[0]
    assert cur.tier == "exact" and cur.measured["relative_spread"] < 1e-9
    assert check_curvature_condition(wc.assembled, spec.weights, expected=1 / wc.params.r).status == "pass"


def test_tilted_cusp_is_caught(wetted):
    _, wc = wetted
    e = check_cusp_tangency(_tilt_dry_segments(wc.assembled, 0.01))
    assert e.status == "fail"
    assert e.measured["max_angle"] == pytest.approx(0.01, abs=1e-9)
    assert e.evidence


def test_dry_cluster_skips_wet_checks(wetted):
    spec, wc = wetted
    rep = verify_cluster(wc.base.to_cluster(), spec)
    assert rep.ok
    assert {e.name: e.status for e in rep.entries}["curvature_condition"] == "skipped"


def test_nonconvex_region_fails():
    blob = polygon_chain([(0, 0), (1, 0), (0.3, 0.3), (0, 1)])
    cl = ArcCluster((Interface(ArcChain(blob.arcs, closed=False), 1, 2),), (), (Region(1, blob),))
    assert check_convexity(cl).status == "fail"


def test_curved_chamber_interface_fails():
    itf = Interface(ArcChain((CircArc((-0.5, 0), (0.5, 0), 0.5),), closed=False), 1, 2)
    assert check_straight_interfaces(ArcCluster((itf,))).status == "fail"
    assert check_straight_interfaces(ArcCluster((itf,)), "plane").status == "skipped"


def test_nonconvex_raster_blob():
    o, c, s = grid_for("plane", 32)
    lab = np.zeros(s, np.uint8)
    lab[10:40, 10:40] = 1
    lab[25:40, 25:40] = 0
    assert check_convexity(LabelField(o, c, lab, 1, "plane")).status == "fail"


def test_field_of_the_wetted_cluster(wetted):
    spec, wc = wetted
    f = rasterize(wc.assembled, spec, 128)
    rep = verify_field(f, spec)
    st = {e.name: e for e in rep.entries}
    assert st["convexity"].status == "pass"
    assert st["curvature_condition"].status == "pass"
    assert st["curvature_condition"].tier == "raster"


def test_saturation_modes(y_spec):
    f = sector_field(y_spec, 32)
    assert check_saturation(f, 0.01).status == "fail"
    assert check_saturation(f, 0.01, sigma_empty=True).status == "pass"
    lab = np.array(f.labels)
    ii, jj = np.nonzero(f.domain)
    lab[ii[:5], jj[:5]] = f.g_label
    assert check_saturation(f.with_labels(lab), 0.01, sigma_empty=True).status == "fail"
    n = int(0.01 / f.cell**2)
    lab = np.array(f.labels)
    lab[ii[:n], jj[:n]] = f.g_label
    assert check_saturation(f.with_labels(lab), 0.01).status == "pass"


def test_report_serialization():
    rep = VerificationReport("x")
    rep.add(CheckEntry("a", "p", "exact", "pass", {"v": np.float64(1.5), "w": math.inf}, 1e-9))
    rep.add(CheckEntry("b", "q", "raster", "fail", {}, None, [], "why"))
    d = json.loads(rep.to_json())
    assert d["ok"] is False
    assert d["checks"][0]["measured"] == {"v": 1.5, "w": "inf"}
    text = rep.to_text()
    assert text.splitlines()[-1] == "result: FAIL" and "why" in text


def _points(hc, hg, energies, deltas=(0.04, 0.02, 0.01, 0.005), converged=None):
    conv = converged or [True] * len(deltas)
    return [
        SweepPoint(d, e, None, d, a, b, 1.0, 0, None, ok)
        for d, a, b, e, ok in zip(deltas, hc, hg, energies, conv)
    ]


def _sqrt_law(k):
    return [k * math.sqrt(d) for d in (0.04, 0.02, 0.01, 0.005)]


def test_convergence_sweep_accepts_square_root_law():
    pts = _points(_sqrt_law(1.0), _sqrt_law(1.5), [5.8, 5.85, 5.9, 5.93])
    e = convergence_sweep(pts, 1 / 256)
    assert e.status == "pass"
    assert e.measured["exponent_chambers"] == pytest.approx(0.5)


def test_convergence_sweep_rejects_linear_law_and_energy_increase():
    lin = [10 * d for d in (0.04, 0.02, 0.01, 0.005)]
    assert convergence_sweep(_points(lin, lin, [5.8, 5.85, 5.9, 5.93]), 1 / 256).status == "fail"
    bad_e = [5.95, 5.85, 5.9, 5.93]
    assert convergence_sweep(_points(_sqrt_law(1), _sqrt_law(1), bad_e), 1 / 256).status == "fail"


def test_convergence_sweep_drops_unconverged_runs():
    pts = _points(_sqrt_law(1.0), _sqrt_law(1.0), [5.8, 5.85, 5.9, 5.93], converged=[True, True, True, False])
    e = convergence_sweep(pts, 1 / 256)
    assert "excluded" in e.note and len(e.measured["deltas"]) == 3
    pts = _points(_sqrt_law(1.0), _sqrt_law(1.0), [5.8, 5.85, 5.9, 5.93], converged=[True, True, False, False])
    assert convergence_sweep(pts, 1 / 256).status == "skipped"
