"""Build script: compiles the optional Cython solver kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time); the compiled core only speeds up the hot OMP/IHT loops.
If Cython or a C compiler is unavailable the build degrades to pure Python
instead of failing.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "csbench.kernels._core",
        ["src/csbench/kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"] if sys.platform != "win32" else ["/O2"],
    )
    return cythonize([ext], language_level="3")


class optional_build_ext(build_ext):
    """Skip the extension (with a warning) when compilation fails."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing / misconfigured
            print(f"WARNING: compiled kernels skipped ({exc}); "
                  "using pure-Python fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"WARNING: building {ext.name} failed ({exc}); "
                  "using pure-Python fallback", file=sys.stderr)


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
