import os

from setuptools import setup

ext_modules = []
if os.environ.get("INSIGHTLOOP_NO_EXT") != "1":
    # The compiled kernels are an optional speedup; the package falls back to
    # the pure NumPy implementations when the extension is absent.
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "insightloop.kernels._native",
                    ["src/insightloop/kernels/_native.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
