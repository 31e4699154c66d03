import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernel must stay bitwise-identical to the pure Python
# fallback: no FMA contraction, and no fusing of adjacent cos/sin calls into
# glibc sincos (whose cos can differ from plain cos by one ulp; the fusion
# pass ignores -fno-builtin-sincos, so cos/sin must be non-builtin).
ext = Extension(
    "mll._core",
    sources=["src/mll/_core.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=[
        "-O3",
        "-ffp-contract=off",
        "-fno-builtin-cos",
        "-fno-builtin-sin",
    ],
)

setup(ext_modules=cythonize([ext], language_level="3"))
