import sys

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

if sys.platform.startswith("win"):
    openmp_args = ["/openmp"]
else:
    openmp_args = ["-fopenmp"]

ext_modules = [
    Extension(
        "sigaudit._native",
        ["src/sigaudit/_native.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"] + openmp_args,
        extra_link_args=openmp_args,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
