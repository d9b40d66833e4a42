"""Build hook for the optional compiled sampling kernel.

The package is fully functional without the extension: the Monte Carlo
module falls back to a vectorized numpy kernel when the compiled one is
missing, so any failure here downgrades the install instead of breaking it.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "goalrisk.montecarlo._ckernel",
                ["src/goalrisk/montecarlo/_ckernel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
