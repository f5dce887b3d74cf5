"""Command line: ``wetcluster <command> [options]``.

Exit status: 0 success, 1 verification failure, 2 malformed input,
3 infeasible instance.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .arcs import GeometryError
from .cluster import ClusterError, InfeasibleError, InstanceSpec, SpecError
from .dry import best_dry
from .lattice.anneal import OracleConfig, optimize
from .lattice.field import FieldFormatError, LabelField, write_trace_csv
from .render import render_cluster, render_path
from .serialize import FORMAT_TAG, network_document, read_document, wetted_document, write_document
from .verify import VerificationReport, convergence_sweep, run_sweep_points, verify_cluster, verify_field
from .wetting import build_wetted

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3
SUMMARY_COLUMNS = ("delta", "energy_oracle", "energy_predicted", "wet_area", "hausdorff_chambers",
                   "hausdorff_G_sigma", "seed")
DEFAULT_DELTAS = "0.04,0.02,0.01,0.005"


class InputError(Exception):
    """Malformed input file; the message carries path, line and field."""


@dataclass
class RunManifest:
    command: str
    instance: str | None
    overrides: dict
    seed: int | None
    out: str
    version: str = __version__
    wall_clock: float = 0.0
    argv: list = field(default_factory=list)
    instance_document: dict | None = None

    def write(self, directory: Path) -> Path:
        p = directory / "manifest.json"
        p.write_text(json.dumps(asdict(self), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return p


# ---------------------------------------------------------------------------
# input


def _line_of(text: str, where: str) -> int | None:
    """Line of the first occurrence of the JSON key named in ``where``."""
    m = re.match(r"line (\d+)", where)
    if m:
        return int(m.group(1))
    key = re.split(r"[\[.]", where)[0]
    if not key:
        return None
    idx = text.find(f'"{key}"')
    if idx < 0:
        return None
    line = text.count("\n", 0, idx) + 1
    m = re.search(r"\[(\d+)\]", where)
    if m:
        # step to the n-th object of the list
        k = int(m.group(1))
        pos = idx
        for _ in range(k + 1):
            nxt = text.find("{", pos + 1)
            if nxt < 0:
                break
            pos = nxt
        line = text.count("\n", 0, pos) + 1
    return line


def load_instance(path: str, delta: float | None = None) -> tuple[InstanceSpec, dict]:
    """Instance from a spec file or from the ``spec`` block of a cluster document."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    doc = raw.get("spec") if isinstance(raw, dict) and raw.get("format") == FORMAT_TAG else raw
    try:
        spec = InstanceSpec.from_dict(doc)
    except SpecError as exc:
        line = _line_of(text, exc.where)
        loc = f"{path}:{line}" if line else path
        field_name = exc.where or "(document)"
        raise InputError(f"{loc}: field {field_name}: {str(exc).split(': ', 1)[-1]}") from None
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if delta is not None:
        if delta < 0:
            raise InputError("--delta must be non-negative")
        spec = spec.with_delta(delta)
    return spec, spec.to_dict()


# ---------------------------------------------------------------------------
# commands


def _out(args) -> Path:
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(args, spec_doc, out: Path, t0: float, overrides: dict) -> None:
    RunManifest(
        command=args.command,
        instance=getattr(args, "instance", None),
        overrides=overrides,
        seed=getattr(args, "seed", None),
        out=str(out),
        wall_clock=time.perf_counter() - t0,
        argv=list(args.argv),
        instance_document=spec_doc,
    ).write(out)


def _overrides(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def cmd_solve_dry(args) -> int:
    t0 = time.perf_counter()
    spec, spec_doc = load_instance(args.instance, args.delta)
    res = best_dry(spec.with_delta(0.0), args.max_junctions)
    out = _out(args)
    extra = {"diagnostics": res.diagnostics, "ties": len(res.ties),
             "runners_up": [n.energy for n in res.runners_up[:5]]}
    write_document(network_document(res.best, spec, extra), out / "network.json")
    (out / "network.svg").write_text(render_cluster(res.best.to_cluster(), spec.domain))
    _manifest(args, spec_doc, out, t0, _overrides(args, ("delta", "max_junctions")))
    print(f"dry energy {res.best.energy:.9f}  topology {res.best.topology.describe()}")
    return EXIT_OK


def cmd_wet(args) -> int:
    t0 = time.perf_counter()
    spec, spec_doc = load_instance(args.instance, args.delta)
    dry = best_dry(spec.with_delta(0.0), args.max_junctions).best
    wc = build_wetted(dry, spec.delta)
    out = _out(args)
    write_document(wetted_document(wc, spec), out / "wetted.json")
    (out / "wetted.svg").write_text(render_cluster(wc.assembled, spec.domain))
    _manifest(args, spec_doc, out, t0, _overrides(args, ("delta", "max_junctions")))
    print(f"wetted energy {wc.predicted_energy:.9f}  r {wc.params.r:.9f}  wet area {wc.assembled.wet_area():.9f}")
    return EXIT_OK


def _oracle_cfg(args) -> OracleConfig:
    return OracleConfig(resolution=args.resolution, stencil=args.stencil, seed=args.seed,
                        **({"sweeps": args.sweeps} if args.sweeps is not None else {}))


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    spec, spec_doc = load_instance(args.instance, args.delta)
    res = optimize(spec, _oracle_cfg(args))
    out = _out(args)
    res.field.save(out / "field.pgm")
    write_trace_csv(res.trace, out / "trace.csv")
    _manifest(args, spec_doc, out, t0, _overrides(args, ("delta", "resolution", "stencil", "sweeps")))
    print(f"oracle energy {res.energy:.9f}  wet area {res.wet_area:.9g}  backend {res.backend}  {res.wall:.1f}s")
    for n in res.notes:
        print(f"note: {n}")
    return EXIT_OK


def _verify_artifact(path: str, args) -> VerificationReport:
    p = Path(path)
    with open(p, "rb") as fh:
        head = fh.read(2)
    if head == b"P5":
        f = LabelField.load(p)
        if args.instance:
            spec, _ = load_instance(args.instance, args.delta)
        elif "spec" in f.meta:
            spec = InstanceSpec.from_dict(f.meta["spec"])
        else:
            raise InputError(f"{path}: field carries no instance; pass --instance")
        return verify_field(f, spec, subject=str(p), max_junctions=args.max_junctions)
    try:
        _, cl, spec = read_document(p)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if spec is None:
        if not args.instance:
            raise InputError(f"{path}: document carries no instance; pass --instance")
        spec, _ = load_instance(args.instance, args.delta)
    return verify_cluster(cl, spec, subject=str(p))


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    rep = _verify_artifact(args.artifact, args)
    print(rep.to_text())
    if args.out:
        out = _out(args)
        (out / "report.json").write_text(rep.to_json() + "\n")
        (out / "report.txt").write_text(rep.to_text() + "\n")
        _manifest(args, None, out, t0, {})
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    spec, spec_doc = load_instance(args.instance)
    try:
        deltas = [float(x) for x in args.deltas.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--deltas: expected comma-separated numbers, got {args.deltas!r}") from None
    if args.delta is not None:
        deltas = [args.delta]
    cfg = _oracle_cfg(args)
    points = run_sweep_points(spec, deltas, cfg, args.workers, args.max_junctions)
    out = _out(args)
    for p, d in zip(points, deltas):
        sub = out / f"delta_{d:g}"
        sub.mkdir(exist_ok=True)
        p.oracle_field.save(sub / "field.pgm")
        write_trace_csv(p.trace, sub / "trace.csv")
        sargs = argparse.Namespace(**{**vars(args), "command": "oracle", "delta": d})
        _manifest(sargs, spec.with_delta(d).to_dict(), sub, t0, {"delta": d})
    with open(out / "summary.csv", "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        wr.writeheader()
        for p in points:
            row = p.summary_row()
            wr.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    rep = VerificationReport(f"sweep {args.instance}")
    if len(deltas) >= 3:
        rep.add(convergence_sweep(points, cfg_cell(cfg)))
    (out / "report.json").write_text(rep.to_json() + "\n")
    _manifest(args, spec_doc, out, t0, _overrides(args, ("deltas", "resolution", "stencil", "sweeps")))
    print(rep.to_text())
    return EXIT_OK if rep.ok else EXIT_FAIL


def cfg_cell(cfg: OracleConfig) -> float:
    return 1.0 / cfg.resolution


def cmd_render(args) -> int:
    try:
        svg = render_path(args.artifact)
    except (OSError, json.JSONDecodeError, FieldFormatError, ClusterError) as exc:
        raise InputError(f"{args.artifact}: cannot render ({exc})") from None
    target = Path(args.out) if args.out else Path(str(args.artifact) + ".svg")
    if target.is_dir():
        target = target / (Path(args.artifact).name + ".svg")
    target.write_text(svg)
    print(target)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wetcluster", description="Wetted cluster solver and verifier.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, instance=True, oracle=False):
        if instance:
            p.add_argument("--instance", required=True, metavar="PATH")
        p.add_argument("--delta", type=float, metavar="X")
        p.add_argument("--out", default=".", metavar="DIR")
        p.add_argument("--max-junctions", type=int, metavar="N", dest="max_junctions")
        if oracle:
            p.add_argument("--resolution", type=int, default=256, metavar="N")
            p.add_argument("--seed", type=int, default=0, metavar="N")
            p.add_argument("--stencil", type=int, choices=(8, 16), default=16)
            p.add_argument("--sweeps", type=int, metavar="N")

    common(sub.add_parser("solve-dry", help="straight-segment minimizer"))
    common(sub.add_parser("wet", help="wetted cluster for a given delta"))
    common(sub.add_parser("oracle", help="lattice annealing"), oracle=True)
    p = sub.add_parser("verify", help="structure checks on a cluster document or field")
    p.add_argument("artifact")
    p.add_argument("--instance", metavar="PATH")
    p.add_argument("--delta", type=float, metavar="X")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--max-junctions", type=int, metavar="N", dest="max_junctions")
    p = sub.add_parser("sweep", help="oracle runs over several deltas")
    common(p, oracle=True)
    p.add_argument("--deltas", default=DEFAULT_DELTAS)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p = sub.add_parser("render", help="SVG from any artifact")
    p.add_argument("artifact")
    p.add_argument("--out", metavar="PATH")
    return ap


COMMANDS = {
    "solve-dry": cmd_solve_dry,
    "wet": cmd_wet,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "render": cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ClusterError, FieldFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleError, GeometryError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
