"""Label rasters and their file formats.

A field is written as a binary greyscale image (``P5``) whose header
comments carry the cell size and origin, followed by one label byte per
cell with row 0 at the bottom (y increasing), plus a JSON sidecar with
everything needed to interpret the labels.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..arcs import Point2
from ..cluster import Weights
from ..grid import GridSet
from .crofton import crofton_mask_perimeter, labels_energy, pair_cost_matrix

FORMAT_TAG = "wetcluster-labelfield"
TRACE_COLUMNS = ("sweep", "temperature", "energy", "wet_area")


class FieldFormatError(ValueError):
    pass


def domain_mask(kind: str, origin: Point2, cell: float, shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    if kind == "plane":
        return np.ones(shape, dtype=bool)
    xs = origin[0] + (np.arange(w) + 0.5) * cell
    ys = origin[1] + (np.arange(h) + 0.5) * cell
    X, Y = np.meshgrid(xs, ys)
    return X * X + Y * Y < 1.0


@dataclass(frozen=True)
class LabelField:
    origin: Point2
    cell: float
    labels: np.ndarray
    n_chambers: int
    kind: str = "ball"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lab = np.array(self.labels, dtype=np.uint8)
        if lab.ndim != 2:
            raise ValueError("labels must be 2-D")
        if self.kind not in ("ball", "plane"):
            raise ValueError("kind must be 'ball' or 'plane'")
        if lab.max(initial=0) > self.n_chambers + 1:
            raise ValueError("label out of range")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "origin", Point2(*self.origin))

    @property
    def g_label(self) -> int:
        return self.n_chambers + 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def resolution(self) -> float:
        return 1.0 / self.cell

    @property
    def domain(self) -> np.ndarray:
        return domain_mask(self.kind, self.origin, self.cell, self.shape)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        h, w = self.shape
        return (self.origin.x + (np.arange(w) + 0.5) * self.cell, self.origin.y + (np.arange(h) + 0.5) * self.cell)

    def mask(self, label: int) -> np.ndarray:
        m = self.labels == label
        return m & self.domain if label == 0 and self.kind == "ball" else m

    def count(self, label: int) -> int:
        return int(np.count_nonzero(self.mask(label)))

    def area(self, label: int) -> float:
        return self.count(label) * self.cell**2

    @property
    def wet_count(self) -> int:
        return self.count(self.g_label)

    @property
    def wet_area(self) -> float:
        return self.area(self.g_label)

    def gridset(self, label: int) -> GridSet:
        return GridSet(self.origin, self.cell, self.mask(label))

    def with_labels(self, labels: np.ndarray, **meta) -> "LabelField":
        return LabelField(self.origin, self.cell, labels, self.n_chambers, self.kind, {**self.meta, **meta})

    # ------------------------------------------------------------------
    def crofton_perimeter(self, label: int, stencil: int = 16, interior_only: bool = False) -> float:
        return crofton_mask_perimeter(self.mask(label), self.cell, stencil, self.domain if interior_only else None)

    def energy(self, w: Weights, stencil: int = 16) -> float:
        """Weighted Crofton energy; pairs reaching outside the disk are ignored on the ball."""
        cost = pair_cost_matrix(w.c, self.n_chambers + 2, self.g_label)
        dom = self.domain if self.kind == "ball" else None
        return labels_energy(self.labels, cost, self.cell, stencil, dom)

    # ------------------------------------------------------------------
    def save(self, path: str | Path) -> Path:
        path = Path(path)
        h, w = self.shape
        header = (
            f"P5\n# {FORMAT_TAG}\n# cell {self.cell!r}\n# origin {self.origin.x!r} {self.origin.y!r}\n"
            f"# rows bottom-to-top\n{w} {h}\n255\n"
        )
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(np.ascontiguousarray(self.labels).tobytes())
        side = {
            "format": FORMAT_TAG,
            "kind": self.kind,
            "n_chambers": self.n_chambers,
            "g_label": self.g_label,
            "cell": self.cell,
            "origin": [self.origin.x, self.origin.y],
            "shape": [h, w],
            "meta": self.meta,
        }
        sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True))
        return path

    @classmethod
    def load(cls, path: str | Path) -> "LabelField":
        path = Path(path)
        raw = path.read_bytes()
        lines = []
        pos = 0
        # magic, comments, dims, maxval
        while len([l for l in lines if not l.startswith("#")]) < 3:
            end = raw.index(b"\n", pos)
            lines.append(raw[pos:end].decode("ascii").strip())
            pos = end + 1
        body_lines = [l for l in lines if not l.startswith("#")]
        if body_lines[0] != "P5":
            raise FieldFormatError(f"{path}: not a P5 label image")
        w, h = (int(v) for v in body_lines[1].split())
        data = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=pos).reshape(h, w)
        side_file = sidecar_path(path)
        if not side_file.exists():
            raise FieldFormatError(f"{path}: missing sidecar {side_file.name}")
        side = json.loads(side_file.read_text())
        if side.get("format") != FORMAT_TAG or list(side["shape"]) != [h, w]:
            raise FieldFormatError(f"{side_file}: sidecar does not describe this image")
        return cls(Point2(*side["origin"]), float(side["cell"]), data.copy(), int(side["n_chambers"]), side["kind"], side.get("meta", {}))


def sidecar_path(path: Path) -> Path:
    return Path(str(path) + ".json")


def write_trace_csv(rows, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(TRACE_COLUMNS)
        for r in rows:
            wr.writerow([r[0], repr(float(r[1])), repr(float(r[2])), repr(float(r[3]))])
    return path


def read_trace_csv(path: str | Path) -> list[tuple[int, float, float, float]]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        head = next(rd)
        if tuple(head) != TRACE_COLUMNS:
            raise FieldFormatError(f"{path}: unexpected columns {head}")
        return [(int(a), float(b), float(c), float(d)) for a, b, c, d in rd]


def grid_for(kind: str, resolution: int) -> tuple[Point2, float, tuple[int, int]]:
    """Origin, cell and shape covering [-1, 1]^2 (ball) or [-1.1, 1.1]^2 (plane)."""
    half = 1.0 if kind == "ball" else 1.1
    n = int(math.ceil(2 * half * resolution))
    cell = 1.0 / resolution
    o = -n * cell / 2
    return Point2(o, o), cell, (n, n)
