"""Compensated summation used by the series kernels."""

import math

import numpy as np


def compensated_sum(terms, axis=-1):
    """Sum ``terms`` along ``axis`` with error-free transformations.

    Pairwise cascade: each level adds neighbouring entries with TwoSum and the
    rounding errors are collected separately, so the result is about as
    accurate as a plain sum in twice the working precision.  Term order is
    fixed by position, which makes the result deterministic.
    """
    a = np.moveaxis(np.asarray(terms, dtype=float), axis, -1)
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-1])
    err = np.zeros(a.shape[:-1])
    while a.shape[-1] > 1:
        if a.shape[-1] % 2:
            pad = np.zeros(a.shape[:-1] + (1,))
            a = np.concatenate([a, pad], axis=-1)
        x = a[..., 0::2]
        y = a[..., 1::2]
        s = x + y
        bp = s - x
        err = err + ((x - (s - bp)) + (y - bp)).sum(axis=-1)
        a = s
    return a[..., 0] + err


def fsum(values):
    """Correctly rounded sum of a 1-D sequence (thin wrapper on math.fsum)."""
    return math.fsum(np.asarray(values, dtype=float).tolist())
