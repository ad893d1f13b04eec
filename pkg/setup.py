"""Build the optional Cython kernels; the package falls back to pure Python without them."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ACTGUARD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        # Bit-identical agreement with the Python path needs strict IEEE doubles:
        # no fast-math, no FMA contraction.
        compile_args = ["-O2", "-fno-fast-math", "-ffp-contract=off"]
        ext_modules = cythonize(
            [
                Extension(
                    "actguard._ckernels",
                    ["src/actguard/_ckernels.pyx"],
                    extra_compile_args=compile_args,
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
