"""Build script for the compiled simulation kernel.

The extension is optional: if compilation fails (no C toolchain), the
package falls back to the pure-Python kernel at import time. Float
contraction is disabled so the compiled kernel is bit-identical to the
pure-Python one.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "factoryledger.sim._speed",
                sources=["src/factoryledger/sim/_speed.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
