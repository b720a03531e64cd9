from pathlib import Path

from setuptools import find_packages, setup

readme = Path("docs/README.md")
long_description = readme.read_text(encoding="utf-8") if readme.exists() else ""

setup(
    name="zonal-curvature-lab",
    version="0.1.0",
    description="zclab computes the Misiolek curvature of zonal flows on the surfaces M_s, with and without the Coriolis central extension, and searches for perturbations with positive curvature.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=2.2",
        "pandas>=2.2",
        "scipy>=1.15",
        "toml>=0.10.2",
    ],
    extras_require={
        "dev": [
            "pytest>=8.3",
            "pytest-asyncio>=0.24",
            "pytest-timeout>=2.3.1",
        ],
    },
    entry_points={
        "console_scripts": [
            "zclab=zclab.cli:cli",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.10,<3.13",
)
