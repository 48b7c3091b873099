import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "stale_momentum._kernels",
                ["src/stale_momentum/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off: the pure-Python backend must produce
                # bit-identical results, so no FMA contraction here.
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
