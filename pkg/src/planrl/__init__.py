"""Tree planning and demonstration-bootstrapped off-policy learning for
planar manipulation tasks."""

__version__ = "0.1.0"
