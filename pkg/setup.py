"""Build script for the optional compiled kernels.

The package works without the extension (a pure-Python fallback is
selected at import time), so a missing compiler or Cython only costs
speed, never functionality.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "epicast._kernels._fastloops",
                ["src/epicast/_kernels/_fastloops.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
