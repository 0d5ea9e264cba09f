"""Build script: compiles the optional evaluation kernel.

The compiled kernel is an accelerator only; if the extension cannot be
built the package still installs and falls back to the pure-Python
evaluator at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "sectionhdl.evalcore._kernel",
                ["src/sectionhdl/evalcore/_kernel.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
