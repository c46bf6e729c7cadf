"""Builds the optional Cython kernels; the package works without them."""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using the pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using the pure-Python fallback")


def extensions():
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    try:
        return cythonize(
            [Extension("greenconstraints._kernels", ["src/greenconstraints/_kernels.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # noqa: BLE001
        print(f"warning: cannot cythonize kernels ({exc}); using the pure-Python fallback")
        return []


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
