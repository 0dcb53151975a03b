import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SEDKIT_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(["src/sedkit/_kernels/_ckernels.pyx"])
    except ImportError:
        # No Cython available: install with the pure-python kernels only.
        pass

setup(ext_modules=ext_modules)
