from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("microrelease._fastkernels",
                   ["src/microrelease/_fastkernels.pyx"],
                   extra_compile_args=["-O3"])],
        language_level=3)
except ImportError:
    # no Cython: the package falls back to the NumPy kernels at import
    ext_modules = []

setup(ext_modules=ext_modules)
