import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # The compiled smoother kernels are optional; the package falls back to
    # the pure-Python implementation in dwrflow._kernels_py.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "dwrflow._kernels",
                ["src/dwrflow/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
