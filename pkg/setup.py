import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build the pure-Python package only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "taylorlp._ckernels",
                ["src/taylorlp/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # keep libm calls separate (no sincos fusion, no FMA) so streams match the fallback bit for bit
                extra_compile_args=["-O3", "-fno-builtin", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
