import os
import tempfile

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

# Inline complex multiply/divide instead of the NaN-careful library calls.
OPTIONAL_FLAGS = ["-O3", "-fcx-limited-range"]


def _accepts(compiler, flag):
    with tempfile.TemporaryDirectory() as tmp:
        src = os.path.join(tmp, "probe.c")
        with open(src, "w") as fh:
            fh.write("int main(void) { return 0; }\n")
        try:
            compiler.compile([src], output_dir=tmp, extra_postargs=[flag])
        except Exception:
            return False
    return True


class BuildExt(build_ext):
    def build_extensions(self):
        if self.compiler.compiler_type == "unix":
            flags = [f for f in OPTIONAL_FLAGS if _accepts(self.compiler, f)]
            for ext in self.extensions:
                ext.extra_compile_args = list(ext.extra_compile_args) + flags
        super().build_extensions()


ext_modules = []
if not os.environ.get("GFCOMB_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("gfcomb._kernel", ["src/gfcomb/_kernel.pyx"],
                       include_dirs=[np.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": BuildExt})
