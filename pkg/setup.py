import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        "src/steamcast/_kernels_cy.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # pure-python kernels are selected at import when the extension is absent
    ext_modules = []

setup(ext_modules=ext_modules, include_dirs=[numpy.get_include()])
