"""Normalized geometry of two equal spheres separated by a small gap.

The internal frame always has unit radius, centers on the x-axis at
``(-1-delta, 0, 0)`` and ``(1+delta, 0, 0)`` and the gap midpoint at the
origin.  A physical configuration with radius ``r`` maps into this frame by
``x -> x / r``; gradients map back by multiplying with ``1 / r``.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_point, check_points
from .errors import NonPositiveGeometry, SingularPoint


@dataclass(frozen=True)
class SphereConfig:
    """Two unit spheres with half-gap ``delta`` (so the gap is ``eps = 2 delta``).

    ``scale`` is the physical radius the configuration was built from and is
    only used when mapping points or gradients in and out of the frame.
    """

    delta: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise NonPositiveGeometry(f"delta must be positive, got {self.delta}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise NonPositiveGeometry(f"scale must be positive, got {self.scale}")

    radius = 1.0

    @property
    def eps(self):
        return 2.0 * self.delta

    @property
    def c1(self):
        return np.array([-1.0 - self.delta, 0.0, 0.0])

    @property
    def c2(self):
        return np.array([1.0 + self.delta, 0.0, 0.0])

    def center(self, j):
        if j == 1:
            return self.c1
        if j == 2:
            return self.c2
        raise ValueError(f"sphere index must be 1 or 2, got {j}")

    def to_frame(self, X):
        """Map physical points into the unit-radius frame."""
        return np.asarray(X, dtype=float) / self.scale

    def gradient_from_frame(self, G):
        """Map a gradient computed in the frame back to physical units."""
        return np.asarray(G, dtype=float) / self.scale


def make_config(radius, gap):
    """Build the normalized configuration for spheres of ``radius`` at distance ``gap``."""
    radius = float(radius)
    gap = float(gap)
    if not radius > 0:
        raise NonPositiveGeometry(f"radius must be positive, got {radius}")
    if not gap > 0:
        raise NonPositiveGeometry(f"gap must be positive, got {gap}")
    return SphereConfig(delta=(gap / radius) / 2.0, scale=radius)


def config_from_delta(delta):
    return SphereConfig(delta=float(delta))


def reflect(config, j, y):
    """Inversion of ``y`` in the unit sphere about center ``c_j``."""
    y = check_point(y, name="y")
    c = config.center(j)
    d = y - c
    r2 = float(d @ d)
    if r2 == 0.0:
        raise SingularPoint(f"cannot reflect the center of sphere {j}")
    return c + d / r2


def rho(x):
    """Distance to the x-axis; accepts a single point or an (n, 3) array."""
    x = np.asarray(x, dtype=float)
    return np.hypot(x[..., 1], x[..., 2])


def distance_to_centers(config, X):
    """Distances of points to ``c1`` and ``c2`` as two arrays."""
    X = check_points(X)
    d = config.delta
    yz2 = X[:, 1] ** 2 + X[:, 2] ** 2
    d1 = np.sqrt((X[:, 0] + 1.0 + d) ** 2 + yz2)
    d2 = np.sqrt((X[:, 0] - 1.0 - d) ** 2 + yz2)
    return d1, d2


# points within this distance inside a sphere are taken to lie on it, so
# surface nodes that round inward are still accepted
BOUNDARY_SLACK = 1e-12


def is_exterior(config, X):
    """True for points outside both open balls (boundary counts as outside)."""
    d1, d2 = distance_to_centers(config, X)
    lim = 1.0 - BOUNDARY_SLACK
    return (d1 >= lim) & (d2 >= lim)


def gap_region_radius(delta):
    """Radial extent ``|ln delta|^-2`` of the gap region."""
    return abs(math.log(delta)) ** -2


def in_gap_region(config, x):
    x = check_point(x)
    if not bool(is_exterior(config, x)[0]):
        return False
    return bool(rho(x) <= gap_region_radius(config.delta) * (1.0 + BOUNDARY_SLACK))
