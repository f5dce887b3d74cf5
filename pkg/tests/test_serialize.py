import json

import pytest

from wetcluster.cluster import G, ClusterError, energy
from wetcluster.dry import best_dry
from wetcluster.serialize import (
    FORMAT_TAG,
    cluster_from_dict,
    cluster_to_dict,
    network_document,
    read_document,
    recomputed_energy,
    wetted_document,
    write_document,
)
from wetcluster.wetting import build_wetted


def test_wetted_roundtrip(tmp_path, y_spec):
    wc = build_wetted(best_dry(y_spec.with_delta(0)).best, 0.01)
    p = write_document(wetted_document(wc, y_spec), tmp_path / "w.json")
    doc, cl, spec = read_document(p)
    assert doc["format"] == FORMAT_TAG and doc["kind"] == "wetted"
    assert spec == y_spec
    assert cl == wc.assembled
    assert recomputed_energy(cl, spec) == pytest.approx(doc["energy"], abs=1e-12)
    assert doc["wetting"]["r"] == wc.params.r
    assert any(i["wet"] for i in doc["interfaces"]) and any(r["label"] == "G" for r in doc["regions"])


def test_network_document(tmp_path, general_spec):
    net = best_dry(general_spec).best
    doc = network_document(net, general_spec, {"ties": 1})
    assert doc["kind"] == "network" and doc["ties"] == 1
    assert doc["network"]["energy"] == net.energy
    _, cl, _ = read_document(write_document(doc, tmp_path / "n.json"))
    assert energy(cl, general_spec.weights) == pytest.approx(net.energy, abs=1e-12)


def test_labels_are_encoded():
    wc_dict = {"interfaces": [{"left": "G", "right": 1, "chain": {"closed": False, "arcs": [
        {"start": [0, 0], "end": [1, 0], "curvature": 0.0}]}}]}
    cl = cluster_from_dict(wc_dict)
    assert cl.interfaces[0].left == G
    assert cluster_to_dict(cl)["interfaces"][0]["left"] == "G"


@pytest.mark.parametrize("bad", [{"interfaces": [{"left": 1}]}, {"interfaces": [{"left": "x", "right": 1, "chain": {}}]},
                                 {"interfaces": [{"left": True, "right": 1, "chain": {"arcs": []}}]}])
def test_malformed_cluster(bad):
    with pytest.raises(ClusterError):
        cluster_from_dict(bad)


def test_wrong_format_rejected(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"format": "other"}))
    with pytest.raises(ClusterError):
        read_document(p)
