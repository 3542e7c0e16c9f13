import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "dbel._kernel",
        ["src/dbel/_kernel.pyx"],
        include_dirs=[np.get_include()],
        language="c",
        # no FMA contraction: the kernel must round exactly like numpy
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
