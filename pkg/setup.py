"""Builds the optional compiled coordinate-descent kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed build here is not fatal: run
``python setup.py build_ext --inplace`` or a plain ``pip install`` to get
the fast kernel, or skip it entirely.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "perfmodel._cdkernel",
                ["src/perfmodel/_cdkernel.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
