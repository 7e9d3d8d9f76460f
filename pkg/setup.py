"""Build script for the optional compiled kernels.

The package is pure Python plus one small Cython extension holding the hot
kernels (budget-box projection, pairwise squared distances). The extension is
marked optional: if it cannot be built the install still succeeds and the
package falls back to the numpy implementations in ``netgame._accel.pure``.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "netgame._accel._kernels",
                ["src/netgame/_accel/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
