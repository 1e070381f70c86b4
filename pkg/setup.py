"""Build script for the compiled trajectory kernels.

The package works without the extension (a pure-Python mirror of the
kernels is selected at import time), but the compiled version is orders
of magnitude faster and is what makes the upsilon-grid search practical.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/rfunravel/kernels/_sse.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
