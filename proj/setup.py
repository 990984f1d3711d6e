"""Builds the _dynmap pybind11 extension by delegating to the CMake build."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DPython_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_dynmap",
             "-j", str(os.cpu_count() or 1)],
            check=True,
        )

        produced = list(build_dir.glob("_dynmap*.so"))
        if not produced:
            raise RuntimeError(f"cmake did not produce the _dynmap module in {build_dir}")
        dest = Path(self.get_ext_fullpath(ext.name)).resolve()
        dest.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(produced[0]), str(dest))


setup(
    ext_modules=[CMakeExtension("_dynmap")],
    cmdclass={"build_ext": CMakeBuild},
)
