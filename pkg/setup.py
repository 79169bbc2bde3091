"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure NumPy/Python fallback is
selected at import time), so any failure to compile is downgraded to a
warning.  Set SESID_NO_EXTENSION=1 to skip the build entirely.
"""
import os
import sys

from setuptools import setup

ext_modules = []
cmdclass = {}

if not os.environ.get("SESID_NO_EXTENSION"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
        from setuptools.command.build_ext import build_ext

        class optional_build_ext(build_ext):
            """build_ext that degrades to the pure-Python fallback on failure."""

            def run(self):
                try:
                    super().run()
                except Exception as exc:  # compiler missing, etc.
                    sys.stderr.write(
                        f"warning: compiled kernels skipped ({exc!r}); "
                        "sesid will use the pure-Python backend\n"
                    )

            def build_extension(self, ext):
                try:
                    super().build_extension(ext)
                except Exception as exc:
                    sys.stderr.write(
                        f"warning: building {ext.name} failed ({exc!r}); "
                        "sesid will use the pure-Python backend\n"
                    )

        ext_modules = cythonize(
            [
                Extension(
                    "sesid._kernels._core",
                    ["src/sesid/_kernels/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError as exc:
        sys.stderr.write(
            f"warning: Cython/NumPy unavailable at build time ({exc}); "
            "sesid will use the pure-Python backend\n"
        )

setup(ext_modules=ext_modules, cmdclass=cmdclass)
