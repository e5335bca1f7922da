#:!/usr/bin/env python
from setuptools import find_packages, setup

VERSION = "0.1.0"

# add the README.md file to the long_description
with open("README.md", "r") as fh:
    long_description = fh.read()


install_requires = [
    "hydra-core==1.3.2",
    "jsonschema==4.17.3",
    "numpy>=1.24,<2.0",
    "omegaconf>=2.3",
    "pandas==2.0.1",
    "pytest==7.3.1",
    "pyyaml>=6.0",
    "scipy==1.10.1",
    "torch>=2.0",
    "torchtyping==0.1.5",
    "typeguard>=2.11.1,<3",
]

# tools for developers, not imported by the package
extras_require = {
    "dev": [
        "black==23.3.0",
    ],
}


setup(
    name="convex-truncation",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"convex_truncation": ["schemas/*.json"]},
    version=VERSION,
    description="Testers, samplers and lower-bound experiments for convex truncations of Gaussians.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    install_requires=install_requires,
    extras_require=extras_require,
    keywords=["statistics", "property testing", "truncated gaussian", "monte carlo"],
)
