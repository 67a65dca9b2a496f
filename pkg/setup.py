import os

from setuptools import setup

ext_modules = []
if os.environ.get("TVPOMDP_NO_EXT", "") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/tvpomdp/_kernels_c.pyx",
        language_level=3,
    )

setup(ext_modules=ext_modules)
