import os

from setuptools import Extension, setup

# The compiled kernel is an optional speedup: when Cython or a C compiler is
# unavailable the package falls back to the pure-Python kernels at import time.
ext_modules = []
if os.environ.get("DPNILM_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext = Extension(
            "dpnilm._kernels",
            ["src/dpnilm/_kernels.pyx"],
            optional=True,
        )
        ext_modules = cythonize([ext], language_level="3")
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
