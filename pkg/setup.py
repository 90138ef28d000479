"""Build script for the compiled membership kernels.

The package works without the extension (a numpy fallback is selected at
import time), so the build is best-effort: set IEL_SKIP_EXTENSION=1 to
install pure-Python only.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("IEL_SKIP_EXTENSION"):
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "inverse_entropy._core",
                ["src/inverse_entropy/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps the C arithmetic bit-identical to
                # the numpy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )

setup(ext_modules=ext_modules)
