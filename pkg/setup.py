"""Build script: compiles the optional GF(q) kernel extension.

The package is fully functional without the extension (a pure-Python
implementation of the same kernels is selected at import time), so any
failure to build it only costs speed.  Set PMSR_NO_EXT=1 to skip the
extension entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(f"WARNING: building pmsr._kernels failed ({exc}); "
              "falling back to the pure-Python kernels")


ext_modules = []
if not os.environ.get("PMSR_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("pmsr._kernels", ["src/pmsr/_kernels.pyx"])],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        print("WARNING: Cython not available; building without pmsr._kernels")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
