#
# For licensing see accompanying LICENSE file.
#

from setuptools import find_packages, setup

with open('requirements.txt') as f:
    requirements = [line.strip() for line in f if line.strip() and not line.startswith('pytest')]

setup(
    name="qme",
    version="0.1.0",
    packages=find_packages(include=["qme", "qme.*"]),
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={
        "console_scripts": ["qme=qme.cli:main"],
    },
)
