"""Wetted multi-phase clusters in the disk: dry solver, wetting construction, lattice oracle."""

__version__ = "0.1.0"
