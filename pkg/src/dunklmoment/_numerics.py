"""Small numerical helpers shared across modules."""

import math

import numpy as np


def csum(values):
    """Correctly rounded sum of complex (or real) values via ``math.fsum``."""
    arr = np.asarray(values)
    if not np.iscomplexobj(arr):
        return math.fsum(arr.tolist())
    return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))


def csum_rows(matrix):
    """Column-wise :func:`csum` of a 2-D array (sums over axis 0)."""
    matrix = np.asarray(matrix, dtype=complex)
    out = np.empty(matrix.shape[1], dtype=complex)
    for j in range(matrix.shape[1]):
        out[j] = csum(matrix[:, j])
    return out


def as_complex_array(values):
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


def least_squares_line(x, y):
    """Return ``(slope, intercept, rms_residual)`` of a straight-line fit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))
