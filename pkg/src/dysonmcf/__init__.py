"""Dyson Brownian motion as projected matrix Brownian motion.

Simulates the projected Hermitian matrix process, the Dyson eigenvalue SDE,
the Coulomb flow and its mean-curvature interpretation, with a tridiagonal
beta-ensemble oracle and statistical tools for comparing them.
"""

__version__ = "0.1.0"
