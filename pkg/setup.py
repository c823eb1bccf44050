"""Builds the optional Cython kernel; the package works without it."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("NBLSAT_NO_EXTENSION"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "nblsat._ckernel",
                    ["src/nblsat/_ckernel.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
