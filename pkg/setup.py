from setuptools import find_packages, setup
from glob import glob

classes = """
    Development Status :: 3 - Alpha
    License :: OSI Approved :: BSD License
    Topic :: Software Development :: Libraries
    Topic :: Scientific/Engineering
    Topic :: Scientific/Engineering :: Mathematics
    Programming Language :: Python :: 3
    Programming Language :: Python :: 3 :: Only
    Programming Language :: Python :: 3.8
    Programming Language :: Python :: 3.9
    Programming Language :: Python :: 3.10
    Programming Language :: Python :: 3.11
    Operating System :: Unix
    Operating System :: POSIX
    Operating System :: MacOS :: MacOS X
"""
classifiers = [s.strip() for s in classes.split('\n') if s]

description = ('Differentially private shuffled gradient methods '
               'with public data.')


setup(name='shufflepriv',
      version='0.1.0',
      license='BSD-3-Clause',
      description=description,
      packages=find_packages(),
      python_requires='>=3.8',
      install_requires=[
          'numpy>=1.17',
          'scipy',
          'pandas>=1.5',
          'xarray'
      ],
      extras_require={
          'test': ['pytest']
      },
      entry_points={
          'console_scripts': ['shufflepriv=shufflepriv._cli:main']
      },
      package_data={
          "shufflepriv": ['tests/data/*'],
      },
      scripts=glob('scripts/*.py'),
      classifiers=classifiers)
