"""Agent toolchain for setting up RASPA adsorption simulations."""

__version__ = "0.1.0"
