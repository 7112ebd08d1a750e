"""Build script: compiles the optional extension core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compilation only costs speed. Set
WFDENSITY_NO_EXT=1 to skip the extension build entirely.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if not os.environ.get("WFDENSITY_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "wfdensity._core",
                    ["src/wfdensity/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover
        sys.stderr.write(
            "wfdensity: extension build skipped (%s); using pure-python backend\n" % exc
        )
        ext_modules = []

setup(ext_modules=ext_modules)
