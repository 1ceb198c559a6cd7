"""Build script: compiles the optional Cython sampling kernels.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here is non-fatal.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "planedx._kernels_cy",
                ["src/planedx/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps results bit-identical to the
                # numpy fallback (no fused multiply-add reassociation).
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"planedx: skipping Cython extension ({exc}); using numpy fallback",
          file=sys.stderr)

setup(ext_modules=ext_modules)
