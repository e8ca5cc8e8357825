"""Build script: compiles the hot-loop extension when Cython and a C compiler
are available.  The package works without it (a pure NumPy fallback is
selected at import), so the extension is strictly optional."""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "smoothtrack._chains",
                ["src/smoothtrack/_chains.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
