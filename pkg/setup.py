"""Build script: compiles the optional LCS speedup extension.

The package works without the extension (a pure-Python kernel is selected
at import time), so a failed compile only costs speed, not correctness.
"""

from setuptools import setup

extensions = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "redpen._native._speedups",
                ["src/redpen/_native/_speedups.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=extensions)
