"""Build script: compiles the optional SGNS inner-loop extension.

The package works without the extension; ``diachron.embed`` falls back to a
pure numpy kernel when the compiled module is absent.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise install pure Python."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            self._warn(exc)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print("*" * 72)
        print("WARNING: compiled SGNS kernel could not be built (%s)." % exc)
        print("Falling back to the pure numpy training kernel.")
        print("*" * 72)


def extensions():
    if os.environ.get("DIACHRON_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - build env dependent
        return []
    ext = Extension(
        "diachron.embed._sgns_inner",
        sources=["src/diachron/embed/_sgns_inner.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
