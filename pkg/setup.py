from setuptools import setup

setup(
    name="qudit-subgroup-testing",
    version="0.1.0",
    description="Identity, Pauli and Clifford subgroup testing for qudit Clifford circuits",
    packages=["src"],
    python_requires=">=3.10",
    install_requires=["numpy", "pandas", "scipy", "galois"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["qsub=src.main:main"]},
)
