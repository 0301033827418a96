import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fuzzyfrac._kernels._core",
                ["src/fuzzyfrac/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # the package still works on the pure-numpy kernel
    ext_modules = []

setup(ext_modules=ext_modules)
