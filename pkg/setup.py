from setuptools import Extension, setup

# the compiled poset kernel is optional; envycake.poset falls back to pure Python
try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("envycake._poset", ["src/envycake/_poset.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
