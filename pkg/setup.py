"""Build the optional compiled simulation kernel.

The package is fully functional without it (a pure numpy kernel is selected
at import); the extension only accelerates the compress-bin trial loop.  If
Cython or a C compiler is missing, the build degrades to pure Python with a
warning instead of failing.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler: fall back to pure python
            warnings.warn(f"compiled kernel skipped ({exc}); using the pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernel skipped ({exc}); using the pure-Python fallback")


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        ["src/compbcast/_binning.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython unavailable; building without the compiled kernel")
    extensions = []

setup(
    ext_modules=extensions,
    cmdclass={"build_ext": OptionalBuildExt},
)
