"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure numpy/Python backend is
selected at import time), so the extension is marked optional: a failed
compile degrades to the fallback instead of breaking the install.

-ffp-contract=off is required: the compiled kernels must produce outputs
bit-identical to the pure backend, so the compiler must not fuse
multiply-adds.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "forgebench._kernels",
                ["src/forgebench/_kernels.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.optional = True

setup(ext_modules=ext_modules)
