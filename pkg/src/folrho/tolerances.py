"""Numerical thresholds shared by every module.

Thresholds are read at call time so that the command line can rescale
them once (``--tolerance``) without threading a parameter everywhere.
"""

import os

#: absolute cutoff below which Fourier coefficients are discarded
DROP_TOL = 1e-14

#: minimal certified modulus of a denominator
DEN_MARGIN = 1e-6

#: sup-norm threshold for deciding that a form vanishes
ZERO_TOL = 1e-9

#: residual threshold for integrability of a frame
INTEGRABILITY_TOL = 1e-9

#: agreement threshold of successive trapezoid refinements
QUAD_TOL = 1e-10

#: hard cap on quadrature points (all axes together)
QUAD_MAX_POINTS = 2 ** 20

_DEFAULT_MAX_GRID = 2 ** 16

_scale = 1.0


def set_scale(factor):
    """Rescale all verification thresholds by ``factor``."""
    global _scale
    if not factor > 0:
        raise ValueError("tolerance scale must be positive")
    _scale = float(factor)


def get_scale():
    return _scale


def tol(base):
    return base * _scale


def max_grid():
    """Cap on the number of verification grid points (env ``FOLRHO_MAX_GRID``)."""
    raw = os.environ.get("FOLRHO_MAX_GRID")
    if raw is None:
        return _DEFAULT_MAX_GRID
    value = int(raw)
    if value < 1:
        raise ValueError("FOLRHO_MAX_GRID must be a positive integer")
    return value
