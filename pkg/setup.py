"""Build script: compiles the optional FFTW-backed stepping kernel.

The extension is a pure accelerator. If FFTW headers or a C compiler are
missing the build falls through and the package installs with the numpy
kernel only (selected automatically at import).
"""

import sys

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernel skipped ({exc}); "
                  "falling back to the numpy kernel", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to the numpy kernel", file=sys.stderr)


extensions = [
    Extension(
        "ptkho._kernel",
        ["src/ptkho/_kernel.pyx"],
        libraries=["fftw3"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
]

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
