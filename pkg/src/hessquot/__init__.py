"""Numerical verification toolkit for Hessian quotient equations.

Modules
-------
symfunc    elementary symmetric functions, their derivatives, cone tests, inequalities
fields     finite-difference calculus on sampled fields and pointwise identity checks
pfunc      P-functions and the linearized operator applied to them
integral   star-domain quadrature and integral-identity ledgers
radial     radial reductions, radial solver, closed-form ball solutions
dirichlet  2D Newton solver for the Dirichlet problem and rigidity scans
cli        command-line entry point
"""
from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
