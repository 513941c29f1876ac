import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-python install: looc.kernels falls back to the numpy backend.
    ext_modules = []
else:
    ext_modules = cythonize(
        Extension(
            "looc._kernels",
            ["src/looc/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"],
        ),
        language_level=3,
    )

setup(ext_modules=ext_modules)
