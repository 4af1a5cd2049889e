#!/usr/bin/env python
"""
.. codeauthor:: bygrad developers
"""
import os
from typing import List
from setuptools import setup, find_packages

here = os.path.abspath(os.path.dirname(__file__))

req = [
    'numpy>=1.22.3',
    'scipy>=1.8',
    'pyyaml',
    'matplotlib>=3.5',
    'joblib>=1.1',
    'sympy',
]

dev_req = [
    'pytest',
    'pytest-cov',
    'flake8',
]

docs_req = [
    'sphinx',
    'sphinx_rtd_theme',
    'sphinx-autorun',
]

# Get the long description from the README file
with open(os.path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

# presets shipped next to the package
data_folders = [
    'cfg'
]


def package_files(directory: str) -> List[str]:
    """
    Every file below directory, relative to the package

    :param directory: folder to walk
    :type directory: str
    :return: paths relative to the package directory
    :rtype: List[str]
    """
    paths: List[str] = []
    for (pathhere, _, filenames) in os.walk(directory):
        for filename in filenames:
            paths.append(os.path.join('..', pathhere, filename))
    return paths


extra_files = []
for data_folder in data_folders:
    extra_files += package_files(data_folder)

setup(
    name='bygrad',

    version='0.1.0',

    description='Bygrad - Byzantine-robust distributed training with cyclic gradient coding',

    long_description=long_description,

    long_description_content_type='text/markdown',

    license='BSD-3-Clause',

    classifiers=[
        'Development Status :: 3 - Alpha',

        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',

        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],

    python_requires='>=3.8',

    keywords='python distributed-learning byzantine-robustness gradient-coding' \
             ' robust-aggregation compression simulation',

    packages=find_packages(exclude=['tests']),
    package_data={'bygrad': extra_files},

    include_package_data=True,

    install_requires=req,

    extras_require={
        'dev': dev_req,
        'docs': docs_req
    },

    entry_points={
        'console_scripts': ['bygrad=bygrad.cli:main'],
    }
)
