"""Build hook for the optional compiled annealing kernel."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("WETCLUSTER_NO_EXT"):
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("wetcluster.lattice._kernel", ["src/wetcluster/lattice/_kernel.pyx"], extra_compile_args=["-O3"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
