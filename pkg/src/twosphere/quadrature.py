"""Sphere-surface quadrature for flux integrals of the singular function.

A rule lives on the unit sphere with its polar axis along +x.  When applied
to sphere ``j`` the pole is turned to face the gap, which is where the
normal derivative of ``h`` peaks.

Plain rules are Gauss-Legendre in ``u = cos(theta)`` times the trapezoid rule
in azimuth.  Graded rules substitute ``1 - u = exp(s) - c`` with ``c`` the
half-gap and apply Gauss-Legendre in ``s``: the normal derivative behaves
like ``1 / (c + (1 - u))`` near the pole, which becomes smooth in ``s``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from ._summation import compensated_sum
from .background import eval_H
from .errors import UnsupportedOrder
from .singular import evaluate_batch

MIN_ORDER = 6
MAX_ORDER = 128


@dataclass(frozen=True, eq=False)
class SurfaceRule:
    """Tensor rule; ``nodes``/``weights`` are the full product grid.

    ``polar`` and ``polar_weights`` hold the 1-D rule in ``u = cos(theta)``
    with the azimuthal weight already summed in (factor ``2 pi``), for
    integrands that do not depend on azimuth.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    polar: np.ndarray
    polar_weights: np.ndarray
    n_azimuth: int
    grading: float = None

    def __len__(self):
        return len(self.weights)


def _polar_rule(order, grading):
    x, w = roots_legendre(order)
    if grading is None:
        return x, w
    c = float(grading)
    a, b = math.log(c), math.log(2.0 + c)
    s = 0.5 * (b - a) * x + 0.5 * (b + a)
    es = np.exp(s)
    u = 1.0 - (es - c)
    wu = w * es * 0.5 * (b - a)
    # exact sum 2 (the u-length of [-1, 1]); corrects ~1e-13 drift at high order
    return u, wu * (2.0 / math.fsum(wu.tolist()))


def make_rule(order, grading=None):
    """Build a rule with ``order`` polar nodes and ``2 * order`` azimuthal nodes.

    The plain rule integrates polynomials up to degree ``2 * order - 1`` in
    each of ``cos(theta)`` and the azimuthal harmonics.  Passing ``grading``
    (a positive length, normally the half-gap) clusters the polar nodes at
    the pole.
    """
    if int(order) != order or not (MIN_ORDER <= order <= MAX_ORDER) or order % 2:
        raise UnsupportedOrder(
            f"order must be an even integer in [{MIN_ORDER}, {MAX_ORDER}], got {order}"
        )
    order = int(order)
    if grading is not None and not grading > 0:
        raise ValueError(f"grading must be positive, got {grading}")
    u, wu = _polar_rule(order, grading)
    n_az = 2 * order
    phi = 2.0 * math.pi * np.arange(n_az) / n_az
    wphi = 2.0 * math.pi / n_az
    sin_t = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    nodes = np.stack(
        [
            np.repeat(u, n_az),
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
        ],
        axis=1,
    )
    weights = np.repeat(wu * wphi, n_az)
    return SurfaceRule(
        nodes=nodes,
        weights=weights,
        order=order,
        polar=u,
        polar_weights=2.0 * math.pi * wu,
        n_azimuth=n_az,
        grading=grading,
    )


def integrate_sphere(rule, values):
    """Apply the rule to function values at ``rule.nodes``."""
    return float(compensated_sum(np.asarray(values) * rule.weights))


def _orient(config, j, unit):
    """Map unit-sphere directions (pole on +x) to sphere ``j`` with the pole facing the gap."""
    unit = np.asarray(unit, dtype=float)
    normal = unit.copy()
    if j == 2:
        normal[..., 0] = -normal[..., 0]
    return config.center(j) + normal, normal


def surface_points(config, j, rule):
    """Points and outward normals of ``rule`` placed on sphere ``j``."""
    return _orient(config, j, rule.nodes)


def _meridian(config, j, rule):
    u = rule.polar
    unit = np.stack([u, np.sqrt(np.clip(1.0 - u * u, 0.0, None)), np.zeros_like(u)], axis=1)
    return _orient(config, j, unit)


def _normal_derivatives(config, seq, j, rule, components=False):
    # grad h . nu is axisymmetric, so one meridian suffices
    pts, nu = _meridian(config, j, rule)
    batch = evaluate_batch(config, seq, pts, components=components)
    dh = np.einsum("ij,ij->i", batch.grad_h, nu)
    if not components:
        return dh
    return dh, np.einsum("ij,ij->i", batch.grad_h1, nu), np.einsum("ij,ij->i", batch.grad_h2, nu)


def flux_h(config, seq, j, rule):
    """Outward flux of ``grad h`` through sphere ``j``."""
    dh = _normal_derivatives(config, seq, j, rule)
    return float(compensated_sum(dh * rule.polar_weights))


def flux_components(config, seq, j, rule):
    """Fluxes of ``h1``, ``h2`` and ``h`` through sphere ``j`` as a dict."""
    dh, dh1, dh2 = _normal_derivatives(config, seq, j, rule, components=True)
    w = rule.polar_weights
    return {
        "h": float(compensated_sum(dh * w)),
        "h1": float(compensated_sum(dh1 * w)),
        "h2": float(compensated_sum(dh2 * w)),
    }


def weighted_flux(config, seq, H, rule):
    """Quadrature estimate of the potential jump ``u|dD2 - u|dD1``.

    Computes ``-(int_{dD1} H dh/dnu + int_{dD2} H dh/dnu)``.
    """
    total = []
    n_az = rule.n_azimuth
    for j in (1, 2):
        dh = _normal_derivatives(config, seq, j, rule)
        pts, _ = surface_points(config, j, rule)
        Hv = eval_H(H, pts).reshape(-1, n_az)
        # azimuthal mean of H on each polar ring
        ring = compensated_sum(Hv) / n_az
        total.append(compensated_sum(ring * dh * rule.polar_weights))
    return -float(compensated_sum(np.array(total)))


def boundary_nodes(config, j, n_nodes=200):
    """About ``n_nodes`` plain-rule nodes on sphere ``j`` (for constancy checks)."""
    order = max(MIN_ORDER, 2 * int(round(math.sqrt(n_nodes / 2.0) / 2.0)))
    rule = make_rule(order)
    pts, _ = surface_points(config, j, rule)
    return pts
