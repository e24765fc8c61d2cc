import os

from setuptools import Extension, setup

# The compiled PPM kernel is optional: the package falls back to the pure
# Python implementation when the extension is absent. Set HITSBENCH_NO_EXT=1
# to skip compilation entirely.
ext_modules = []
if os.environ.get("HITSBENCH_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "hitsbench._kernels._ppm_cy",
                    sources=["src/hitsbench/_kernels/_ppm_cy.pyx"],
                    language="c++",
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
