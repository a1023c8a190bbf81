#!/usr/bin/env python

import sys
from os import path, system
from pathlib import Path

import setuptools

from fdehydro.const import __version__

if sys.argv[-1] == "publish":
    system("python setup.py sdist upload")
    sys.exit()


this_directory = path.abspath(path.dirname(__file__))
long_description = Path(path.join(this_directory, "README.md")).read_text(
    encoding="utf-8"
)

setuptools.setup(
    name="fdehydro",
    version=__version__,
    packages=["fdehydro"],
    description="Zero-range process simulation and numerical checks of its fast diffusion limit",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="",
    author_email="",
    license="Apache Software License",
    install_requires=[
        "uvloop>=0.21.0",
        "typeguard>=4.1.5",
        "numpy>=1.26",
        "numba>=0.59",
        "scipy>=1.11",
        "pandas>=2.1",
        "matplotlib>=3.8",
    ],
    entry_points={"console_scripts": ["fdehydro=fdehydro.cli:main"]},
    keywords=["zero-range process", "fast diffusion", "hydrodynamic limit", "monte carlo"],
    zip_safe=True,
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
)
