#!/usr/bin/env python
# -*- coding: utf-8 -*-

import os
import sys
import importlib.util

from setuptools import find_packages


try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


if sys.argv[-1] == 'publish':
    os.system('python setup.py sdist upload')
    sys.exit()

with open(os.path.join(os.path.dirname(__file__), 'README.rst')) as f:
    readme = f.read()

# Avoiding import so we don't execute __init__.py, which has imports
# that aren't installed until after installation.
_spec = importlib.util.spec_from_file_location(
    '_meta', os.path.join(os.path.dirname(__file__), 'onlineridge', '__meta__.py'))
_meta = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(_meta)

packages = find_packages(exclude=['test', 'test.*', 'examples', 'examples.*'])


classifiers = [
    'Development Status :: 4 - Beta',
    'Intended Audience :: Science/Research',
    'License :: OSI Approved :: MIT License',
    'Operating System :: OS Independent',
    'Programming Language :: Python',
    'Programming Language :: Python :: 3',
    'Topic :: Scientific/Engineering :: Mathematics',
]

setup(
    name='onlineridge',
    version=_meta.__version__,
    description='Online Ridge Regression and Bayesian Ridge Regression, with loss bound verification',
    long_description=readme,
    packages=packages,
    install_requires=[
        'numpy',
        'scipy',
        'tabulate',
        'LiveStats',
    ],

    author=_meta.__author__,
    author_email='eric@civicknowledge.com',
    license='MIT',
    classifiers=classifiers,
    test_suite='test',
    entry_points={
        'console_scripts': [
            'ridgebounds=onlineridge.cli:main',
        ],
    },
)
