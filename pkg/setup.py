# Builds the compiled merge kernels. The package works without them (a pure
# Python fallback is selected at import), so a failed extension build is not
# fatal: `python setup.py build_ext --inplace` or a plain pip install both
# produce a working tree.
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "polarforge._kernels._core",
                sources=["src/polarforge/_kernels/_core.pyx"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
