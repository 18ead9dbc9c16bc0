"""Build the optional compiled kernels.

The extension is marked optional: if Cython or a C compiler is missing the
package installs without it and ergolab falls back to the numpy kernels.
"""
from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ergolab._kernels._core",
                ["src/ergolab/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # no -ffast-math: the kernels rely on exact IEEE error-free transforms
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
