"""Kernel selection: the compiled sweep when it was built, else the Python twin."""

from __future__ import annotations

import os

import numpy as np

from . import _pykernel

try:
    from . import _kernel as _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKEND = "cython" if _ckernel is not None and not os.environ.get("WETCLUSTER_PURE_PYTHON") else "python"


def available() -> list[str]:
    return ["python"] + (["cython"] if _ckernel is not None else [])


def run_sweep(state: dict, rand: dict, temp: float, p_exchange: float, p_swap: float, p_g: float,
              flip_mode: int, backend: str | None = None):
    """Run one sweep in place on ``state``; returns (energy change, accepted moves).

    ``state`` holds the flat label array and G bookkeeping, ``rand`` the
    pregenerated random draws for this sweep.
    """
    backend = backend or BACKEND
    s = state
    args_static = (s["mobile"], s["is_mobile"], s["cost"], s["off"], s["w"], s["nb8"], s["nb4"])
    if backend == "cython":
        if _ckernel is None:
            raise RuntimeError("compiled kernel is not available")
        d, gcount, acc = _ckernel.run_sweep(
            s["lab"], *args_static, s["gidx"], s["gpos"], s["gcount"], s["g"], s["void"], s["cap"],
            rand["pick"], rand["pick2"], rand["kind"], rand["choice"], rand["accept"],
            temp, p_exchange, p_swap, p_g, flip_mode,
        )
    elif backend == "python":
        lab = s["lab"].tolist()
        gidx = s["gidx"].tolist()
        gpos = s["gpos"].tolist()
        d, gcount, acc = _pykernel.run_sweep(
            lab, *(a.tolist() for a in args_static),
            gidx, gpos, s["gcount"], s["g"], s["void"], s["cap"],
            *(rand[k].tolist() for k in ("pick", "pick2", "kind", "choice", "accept")),
            temp, p_exchange, p_swap, p_g, flip_mode,
        )
        s["lab"][:] = lab
        s["gidx"][:] = gidx
        s["gpos"][:] = gpos
    else:
        raise ValueError(f"unknown backend {backend!r}")
    s["gcount"] = int(gcount)
    return float(d), int(acc)
