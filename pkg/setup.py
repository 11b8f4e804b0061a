import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext = Extension(
    "hriesz._kernels",
    ["src/hriesz/_kernels.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3", "-fopenmp"],
    extra_link_args=["-fopenmp"],
)

if cythonize is not None:
    setup(ext_modules=cythonize([ext], language_level=3))
else:
    # Pure-python fallback is selected at import time when the extension
    # is missing, so an extension-less install is still functional.
    setup()
