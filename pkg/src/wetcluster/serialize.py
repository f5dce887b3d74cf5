"""JSON documents for networks and (wetted) clusters."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .arcs import ArcChain, CircArc, Point2
from .cluster import G, ArcCluster, ClusterError, InstanceSpec, Interface, Junction, Region, energy
from .dry import JunctionNetwork
from .wetting import WettedCluster

FORMAT_TAG = "wetcluster-cluster"
VERSION = 1


def _label_out(label):
    return "G" if label == G else int(label)


def _label_in(value):
    if value == "G":
        return G
    if isinstance(value, bool) or not isinstance(value, int):
        raise ClusterError(f"bad label {value!r}")
    return value


def _pt(p) -> list[float]:
    return [float(p[0]), float(p[1])]


def arc_to_dict(a: CircArc) -> dict:
    return {"start": _pt(a.start), "end": _pt(a.end), "curvature": a.curvature}


def arc_from_dict(d: dict) -> CircArc:
    return CircArc(Point2(*d["start"]), Point2(*d["end"]), float(d["curvature"]))


def chain_to_dict(c: ArcChain) -> dict:
    return {"closed": c.closed, "arcs": [arc_to_dict(a) for a in c.arcs]}


def chain_from_dict(d: dict) -> ArcChain:
    return ArcChain(tuple(arc_from_dict(a) for a in d["arcs"]), closed=bool(d.get("closed", True)))


def cluster_to_dict(cl: ArcCluster) -> dict:
    return {
        "interfaces": [
            {
                "left": _label_out(i.left),
                "right": _label_out(i.right),
                "wet": G in (i.left, i.right),
                "chain": chain_to_dict(i.chain),
            }
            for i in cl.interfaces
        ],
        "junctions": [{"point": _pt(j.point), "kind": j.kind, "incident": list(j.incident)} for j in cl.junctions],
        "regions": [
            {"label": _label_out(r.label), "wet": r.label == G, "boundary": chain_to_dict(r.boundary)}
            for r in cl.regions
        ],
        "tags": dict(cl.tags),
    }


def cluster_from_dict(d: dict) -> ArcCluster:
    try:
        itfs = tuple(
            Interface(chain_from_dict(i["chain"]), _label_in(i["left"]), _label_in(i["right"])) for i in d["interfaces"]
        )
        juncs = tuple(Junction(Point2(*j["point"]), j["kind"], tuple(j["incident"])) for j in d.get("junctions", []))
        regs = tuple(Region(_label_in(r["label"]), chain_from_dict(r["boundary"])) for r in d.get("regions", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ClusterError(f"malformed cluster document: {exc}") from None
    return ArcCluster(itfs, juncs, regs, dict(d.get("tags", {})))


def network_to_dict(net: JunctionNetwork) -> dict:
    return {
        "topology": net.topology.describe(),
        "junctions": [_pt(p) for p in net.junctions],
        "boundary_junctions": list(net.topology.boundary_junctions),
        "segments": [
            {"start": _pt(p), "end": _pt(q), "right": r, "left": l} for p, q, r, l in net.segments()
        ],
        "energy": net.energy,
        "angle_residual": net.angle_residual,
        "force_residual": net.force_residual,
        "converged": net.converged,
        "notes": list(net.notes),
    }


def network_document(net: JunctionNetwork, spec: InstanceSpec, extra: dict | None = None) -> dict:
    cl = net.to_cluster()
    doc = {
        "format": FORMAT_TAG,
        "version": VERSION,
        "kind": "network",
        "spec": spec.to_dict(),
        "energy": net.energy,
        "network": network_to_dict(net),
        **cluster_to_dict(cl),
    }
    if extra:
        doc.update(extra)
    return doc


def wetted_document(wc: WettedCluster, spec: InstanceSpec) -> dict:
    p = wc.params
    pieces = []
    for pc in wc.pieces:
        pieces.append(
            {
                "node": list(pc.node),
                "area": pc.area,
                "cusps": {str(k): _pt(v) for k, v in sorted(pc.cusps.items())},
                "radii": {str(k): v for k, v in sorted(pc.radii.items())},
                "corner": None if pc.corner is None else _pt(pc.corner),
            }
        )
    return {
        "format": FORMAT_TAG,
        "version": VERSION,
        "kind": "wetted",
        "spec": spec.to_dict(),
        "energy": wc.predicted_energy,
        "network": network_to_dict(wc.base),
        "wetting": {
            "delta": p.delta,
            "r": p.r,
            "kappa": None if math.isinf(p.kappa) else p.kappa,
            "n_interior": p.n_interior,
            "n_boundary": p.n_boundary,
            "pieces": pieces,
            "notes": list(wc.notes),
        },
        **cluster_to_dict(wc.assembled),
    }


def write_document(doc: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return path


def read_document(path: str | Path) -> tuple[dict, ArcCluster, InstanceSpec | None]:
    """Parse a cluster document; returns the raw dict, the cluster and its instance (if recorded)."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise ClusterError(f"{path}: not a {FORMAT_TAG} document")
    spec = InstanceSpec.from_dict(doc["spec"]) if "spec" in doc else None
    return doc, cluster_from_dict(doc), spec


def recomputed_energy(cl: ArcCluster, spec: InstanceSpec) -> float:
    return energy(cl, spec.weights, spec.domain)
