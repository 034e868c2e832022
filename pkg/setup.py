"""Builds the optional compiled kernel extension.

The package works without it: pvbatsim._kernels falls back to the pure-Python
implementation when the extension is missing or when PVBATSIM_PURE=1.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "pvbatsim._kernels._core",
                ["src/pvbatsim/_kernels/_core.pyx"],
                libraries=["m"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
