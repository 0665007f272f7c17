"""Build script: compiles the optional Cython kernels.

The package is fully functional without the extension (a pure NumPy
fallback is selected at import time), so the build is marked optional
and failures degrade to the fallback instead of aborting the install.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "topicomm._kernels._native",
                ["src/topicomm/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
