from setuptools import find_packages, setup

requirements = [
    'numpy>=1.17.0',
    'scipy>=1.6.0',
    'pandas>=1.5',
    'pytest>=4.4.0',
    'hypothesis>=5.0',
    'networkx>=2.4',
]

setup(name='attsync',
      version='0.0.0a0',
      description=("Finite-time attitude synchronization of rigid bodies in axis-angle coordinates"),
      license="Apache License 2.0",
      keywords="attitude-synchronization consensus filippov sliding-mode",
      python_requires=">=3.8",
      packages=find_packages(include=["attsync",
                                      "attsync.*"]),
      install_requires=requirements,
      package_data={"": ["attsyncrc"]},
      include_package_data=True,
      entry_points={'console_scripts': ['attsync=attsync.cli:main']},
      classifiers=[
          'License :: OSI Approved :: Apache Software License',
          'Natural Language :: English',
          'Operating System :: MacOS :: MacOS X',
          'Operating System :: Microsoft :: Windows',
          'Operating System :: POSIX :: Linux',
          'Programming Language :: Python :: 3.8',
          'Topic :: Scientific/Engineering :: Mathematics'
      ])
