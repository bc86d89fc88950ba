import os, sys
from setuptools import setup


try:
    with open('README', 'rt') as readme:
        description = '\n' + readme.read()
except IOError:
    # maybe running setup.py from some other dir
    description = ''


setup(
    # metadata
    name='snapmix',
    description='Learning mixtures of discrete distributions from snapshots',
    long_description=description,
    license='Public domain',
    version='0.1',
    platforms='Cross Platform',
    classifiers = [
        'Programming Language :: Python :: 3',
        ],

    python_requires='>=3.8',
    install_requires=['numpy >= 1.17'],
    extras_require={'test': ['hypothesis']},

    # All packages and sub-packages must be listed here
    packages=[
        'snapmix',
        'snapmix.common',
        'snapmix.mixture',
        'snapmix.onedim',
        ],

    scripts=['scripts/snapmix.py']
)
