import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off (no FMA contraction) and -fno-builtin-sin/-cos (no fused
# sincos, which rounds differently from separate libm sin/cos) keep the
# compiled kernels bit-identical to the pure Python fallback.
ext = Extension(
    "tendonlab._core._kernels",
    ["src/tendonlab/_core/_kernels.pyx"],
    extra_compile_args=["-O2", "-ffp-contract=off",
                        "-fno-builtin-sin", "-fno-builtin-cos"],
    include_dirs=[numpy.get_include()],
)

setup(ext_modules=cythonize([ext], language_level=3))
