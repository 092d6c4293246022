import setuptools

setuptools.setup(
    name="gengap",
    version="2026.10.0",
    description="Minimal numbers of generators of induced modules over free products of groups, with verifiable generating sets",
    python_requires=">=3.9",
    install_requires=[
        "click",
        "loguru",
        "numpy",
        "sympy",
    ],
    extras_require={"test": ["pytest", "hypothesis"]},
    entry_points={"console_scripts": ["gengap=gengap.cli:cli"]},
    packages=setuptools.find_packages(exclude=["test"]),
)
