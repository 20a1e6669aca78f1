"""Build script: compiles the optional Cython kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); set VLPL_DISABLE_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("VLPL_DISABLE_EXT") != "1":
    try:
        from Cython.Build import cythonize

        # -ffast-math lets gcc vectorize the log10-heavy loops through
        # libmvec; kernel outputs stay within a few ulp of the NumPy backend.
        ext_modules = cythonize(
            [Extension("vlpl._core_cy", ["src/vlpl/_core_cy.pyx"],
                       extra_compile_args=["-O3", "-ffast-math",
                                           "-march=native"],
                       extra_link_args=["-lmvec", "-lm"])],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"vlpl: building without compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
