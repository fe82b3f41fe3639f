"""Numerical toolkit for the (A,B,C) nonlinear wave equation via its twistor construction."""
__version__ = "0.1.0"
