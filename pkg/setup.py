"""Build the optional compiled quadrature kernels.

Without Cython or a C compiler the package still installs and runs on the
pure-Python kernels (standard precision only).
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("STAIRCASE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "staircase.sc._ckernels",
                    ["src/staircase/sc/_ckernels.pyx"],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
