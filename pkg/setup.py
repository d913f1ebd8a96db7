import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    # -ffp-contract=off (no FMA fusion) and -fno-builtin-sin/-cos (no sincos
    # pairing, which differs from scalar libm by 1 ulp) keep the compiled
    # arithmetic bitwise-identical to the Python fallback for the RNG.
    compile_args = (
        []
        if sys.platform == "win32"
        else ["-O3", "-ffp-contract=off", "-fno-builtin-sin", "-fno-builtin-cos"]
    )
    ext_modules = cythonize(
        [
            Extension(
                "rsvdkit._kernels",
                ["src/rsvdkit/_kernels.pyx"],
                extra_compile_args=compile_args,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
