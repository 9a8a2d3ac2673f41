from setuptools import setup, find_packages

setup(
    name="dynsbm",
    version="0.1.0",
    description="Simulation, exact likelihood and variational EM for dynamic stochastic block models",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    license="LGPLv3",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.26.4",
        "h5py>=3.11.0",
        "scipy>=1.11",
        "pandas>=2.0",
        "joblib>=1.3",
    ],
    extras_require={
        "test": ["pytest>=7.4"],
    },
    entry_points={
        "console_scripts": [
            "dynsbm=dynsbm.cli:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU Lesser General Public License v3 (LGPLv3)",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
)
