"""Bound states of a three-body exciton model with Keldysh-type interactions."""

__version__ = "0.1.0"
