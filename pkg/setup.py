"""Build script for the optional compiled kernels.

The extension needs Cython, NumPy and the GMP headers. When any of them is
missing, or compilation fails, the package installs without it and falls
back to the pure-Python kernels at import time.
"""
import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        if os.environ.get("POLARBER_REQUIRE_EXTENSION"):
            raise exc
        sys.stderr.write(f"warning: compiled kernels not built ({exc}); using pure Python\n")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "polarber._ccore",
        sources=["src/polarber/_ccore.pyx"],
        include_dirs=[numpy.get_include(), "src/polarber"],
        libraries=["gmp"],
        language="c++",
        extra_compile_args=["-O3", "-std=c++17"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
