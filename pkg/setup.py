#!/usr/bin/env python3
"""
Setup script for ChiralSim - chiral molecules in a harmonic environment
"""

from setuptools import setup, find_packages
import os

# Read the README file
def read_readme():
    readme_path = os.path.join('docs', 'README_chiralsim.md')
    if os.path.exists(readme_path):
        with open(readme_path, 'r', encoding='utf-8') as f:
            return f.read()
    return "ChiralSim - chiral molecules in a harmonic environment"

setup(
    name="chiralsim",
    version="1.0.0",
    author="ChiralSim Team",
    description="Tunneling, racemization and localization of chiral molecules in a bath",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["src.tests", "src.examples"]),
    py_modules=["main"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Physics",
        "Topic :: Scientific/Engineering :: Chemistry",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.8",
        "tqdm>=4.60",
    ],
    extras_require={
        "dev": [
            "pytest>=6.0",
            "black>=21.0",
            "flake8>=3.8",
        ],
    },
    entry_points={
        "console_scripts": [
            "chiralsim=main:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
