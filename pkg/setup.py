import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/cdna_market/kernels/_engine.pyx",
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # Pure-python kernel backend is used when the extension is unavailable.
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
