import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    extensions = cythonize(
        [
            Extension(
                "saropt.nn.kernels._native",
                ["src/saropt/nn/kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Building without Cython leaves only the pure-numpy kernel backend;
    # saropt.nn.kernels falls back automatically at import time.
    extensions = []

setup(ext_modules=extensions)
