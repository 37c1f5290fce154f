"""Singular functions ``h1, h2, h, v`` from the image-charge series.

With ``r- = |x - p_n e1|`` and ``r+ = |x + p_n e1|`` each antisymmetric pair
is formed analytically,

    1/r- - 1/r+            = 4 x p_n / (r- r+ (r- + r+))
    1/r+^3 - 1/r-^3 = D    = -4 x p_n (r-^2 + r- r+ + r+^2) / ((r- + r+) r-^3 r+^3)
    grad(1/r- - 1/r+)      = (p_n (1/r-^3 + 1/r+^3) + x D, y D, z D)

so nothing cancels on or near the axis, and the pair sums are accumulated
with compensated summation in increasing ``n``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._summation import compensated_sum
from ._validation import check_point, check_points
from .errors import PointInsideInclusion, QuadratureFailure
from .geometry import is_exterior

FOUR_PI = 4.0 * math.pi
# entries per (points x terms) block
_BLOCK = 1 << 20


@dataclass(frozen=True)
class FieldEvaluation:
    """Values and gradients at one point.

    ``trunc_err`` bounds the error in both ``h`` and each component of
    ``grad_h`` caused by dropping images beyond ``M``.
    """

    point: np.ndarray
    h1: float
    h2: float
    h: float
    v: float
    grad_h: np.ndarray
    grad_v: np.ndarray
    trunc_err: float


@dataclass(frozen=True, eq=False)
class FieldBatch:
    points: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h: np.ndarray
    v: np.ndarray
    grad_h: np.ndarray
    grad_v: np.ndarray
    trunc_err: np.ndarray
    grad_h1: np.ndarray = None
    grad_h2: np.ndarray = None

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, i):
        return FieldEvaluation(
            point=self.points[i],
            h1=float(self.h1[i]),
            h2=float(self.h2[i]),
            h=float(self.h[i]),
            v=float(self.v[i]),
            grad_h=self.grad_h[i],
            grad_v=self.grad_v[i],
            trunc_err=float(self.trunc_err[i]),
        )


def _check_exterior(config, X):
    inside = ~is_exterior(config, X)
    if inside.any():
        i = int(np.argmax(inside))
        raise PointInsideInclusion(f"point {X[i].tolist()} lies inside an inclusion")


def _pair_terms(x, rho2, pn):
    """Per-image pair value and gradient factors; shapes broadcast (P, M)."""
    rm = np.sqrt((x - pn) ** 2 + rho2)
    rp = np.sqrt((x + pn) ** 2 + rho2)
    rs = rm + rp
    rm3 = rm * rm * rm
    rp3 = rp * rp * rp
    val = 4.0 * x * pn / (rm * rp * rs)
    D = -4.0 * x * pn * (rm * rm + rm * rp + rp * rp) / (rs * rm3 * rp3)
    gx = pn * (1.0 / rm3 + 1.0 / rp3) + x * D
    return rm, rp, val, gx, D


def _truncation_bound(config, seq, X, v, gv_norm):
    """Bounds on |h| and |grad h| errors from the omitted images and normalization."""
    tail = seq.q_tail_bound
    if tail == 0.0:
        return np.zeros(X.shape[0])
    a, b = seq.p, seq.p_n[-1]
    ax = np.abs(X[:, 0])
    dx = np.maximum(np.maximum(a - ax, ax - b), 0.0)
    dist = np.sqrt(dx * dx + X[:, 1] ** 2 + X[:, 2] ** 2)
    with np.errstate(divide="ignore"):
        dv = tail / dist
        dg = 2.0 * tail / dist**2
    S = seq.q_sum
    # h = v / (4 pi S); the true S exceeds the truncated one by at most `tail`
    err_h = (dv + np.abs(v) * tail / S) / (FOUR_PI * S)
    err_g = (dg + gv_norm * tail / S) / (FOUR_PI * S)
    return np.maximum(err_h, err_g)


def evaluate_batch(config, seq, X, components=False):
    """Evaluate the singular functions at many exterior points.

    Set ``components`` to also return the gradients of ``h1`` and ``h2``.
    """
    X = check_points(X)
    _check_exterior(config, X)
    n_pts = X.shape[0]
    M1 = seq.M + 1
    q = seq.q_n
    pn_all = seq.p_n
    sign = np.where(np.arange(M1) % 2 == 0, 1.0, -1.0)

    v = np.empty(n_pts)
    h1 = np.empty(n_pts)
    h2 = np.empty(n_pts)
    gv = np.empty((n_pts, 3))
    gh1 = np.empty((n_pts, 3)) if components else None
    gh2 = np.empty((n_pts, 3)) if components else None

    step = max(1, _BLOCK // M1)
    for lo in range(0, n_pts, step):
        hi = min(n_pts, lo + step)
        x = X[lo:hi, 0:1]
        y = X[lo:hi, 1:2]
        z = X[lo:hi, 2:3]
        rho2 = y * y + z * z
        pn = pn_all[None, :]
        rm, rp, val, gx, D = _pair_terms(x, rho2, pn)
        v[lo:hi] = compensated_sum(q * val)
        gv[lo:hi, 0] = compensated_sum(q * gx)
        gD = compensated_sum(q * D)
        gv[lo:hi, 1] = y[:, 0] * gD
        gv[lo:hi, 2] = z[:, 0] * gD
        # h1: +q_n/r+ for even n, -q_n/r- for odd n; h2 mirrors it
        sq = sign * q
        even = sign > 0
        h1[lo:hi] = compensated_sum(np.where(even, sq / rp, sq / rm))
        h2[lo:hi] = compensated_sum(np.where(even, sq / rm, sq / rp))
        if components:
            # grad(1/|x - a|) = -(x - a)/|x - a|^3
            inv_m3 = 1.0 / (rm * rm * rm)
            inv_p3 = 1.0 / (rp * rp * rp)
            for out, w_plus, w_minus in (
                (gh1, np.where(even, sq, 0.0), np.where(even, 0.0, sq)),
                (gh2, np.where(even, 0.0, sq), np.where(even, sq, 0.0)),
            ):
                # w_plus multiplies 1/r+, w_minus multiplies 1/r-
                out[lo:hi, 0] = compensated_sum(
                    -w_plus * (x + pn) * inv_p3 - w_minus * (x - pn) * inv_m3
                )
                ry = compensated_sum(-w_plus * inv_p3 - w_minus * inv_m3)
                out[lo:hi, 1] = y[:, 0] * ry
                out[lo:hi, 2] = z[:, 0] * ry

    norm = 1.0 / (FOUR_PI * seq.q_sum)
    gv_norm = np.linalg.norm(gv, axis=1)
    return FieldBatch(
        points=X,
        h1=h1,
        h2=h2,
        h=v * norm,
        v=v,
        grad_h=gv * norm,
        grad_v=gv,
        trunc_err=_truncation_bound(config, seq, X, v, gv_norm),
        grad_h1=gh1,
        grad_h2=gh2,
    )


def eval_singular(config, seq, x):
    """Evaluate ``h1, h2, h, v`` and the gradients of ``h`` and ``v`` at ``x``."""
    x = check_point(x)
    return evaluate_batch(config, seq, x[None, :])[0]


def grad_v(config, seq, X):
    return evaluate_batch(config, seq, X).grad_v


def grad_fd_oracle(f, x, step):
    """Central-difference gradient of a scalar field ``f`` at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


@dataclass(frozen=True)
class V0Result:
    """``dx`` is the x-derivative of the comparison integral; the two
    ``truncated_*`` values are the inner integral up to ``upper`` computed in
    closed form and by quadrature."""

    dx: float
    abserr: float
    upper: float
    truncated_closed_form: float
    truncated_quadrature: float


def truncated_inner_closed_form(p, rho_value, upper):
    """``int_p^T t (t^2+rho^2)^{-3/2} (t^2-p^2)^{-1/2} dt`` in closed form."""
    T2, p2, r2 = upper * upper, p * p, rho_value * rho_value
    return math.sqrt((T2 - p2) / (T2 + r2)) / (p2 + r2)


def _quad(f, a, b, points, epsabs, epsrel, limit=500):
    pts = sorted(s for s in points if a < s < b)
    val, err, info = integrate.quad(
        f, a, b, points=pts or None, epsabs=epsabs, epsrel=epsrel, limit=limit,
        full_output=True,
    )[:3]
    return val, err


def eval_v0_dx(config, x, p=None, epsabs=1e-10, epsrel=1e-10):
    """x-derivative of the comparison integral over ``[p, 1]`` with weight ``(t^2-p^2)^{-1/2}``.

    The endpoint singularity is removed by ``t = sqrt(s^2 + p^2)``, which
    turns ``dt / sqrt(t^2 - p^2)`` into ``ds / t``.
    """
    x = check_point(x)
    _check_exterior(config, x[None, :])
    delta = config.delta
    if p is None:
        p = math.sqrt(delta * (2.0 + delta))
    x0 = float(x[0])
    r2 = float(x[1] ** 2 + x[2] ** 2)
    r = math.sqrt(r2)

    def integrand(s):
        t = math.sqrt(s * s + p * p)
        rm = math.sqrt((x0 - t) ** 2 + r2)
        rp = math.sqrt((x0 + t) ** 2 + r2)
        rs = rm + rp
        rm3, rp3 = rm**3, rp**3
        D = -4.0 * x0 * t * (rm * rm + rm * rp + rp * rp) / (rs * rm3 * rp3)
        return (t * (1.0 / rm3 + 1.0 / rp3) + x0 * D) / t

    s_max = math.sqrt(1.0 - p * p)
    # breakpoints at the length scales of the kernel
    scales = [p, r, math.sqrt(delta), abs(x0)]
    pts = [c * s for s in scales if s > 0 for c in (0.5, 1.0, 2.0, 8.0)]
    pts += list(np.geomspace(max(p, 1e-8) * 16, s_max, 6)[:-1])
    val, err = _quad(integrand, 0.0, s_max, pts, epsabs, epsrel)
    if not err <= max(epsabs, epsrel * abs(val)) * 10.0:
        raise QuadratureFailure(
            f"v0 quadrature reached error {err:.3g} for |value| {abs(val):.3g}"
        )

    upper = 1.0 / abs(math.log(delta))
    closed = truncated_inner_closed_form(p, r, upper)
    # same inner integral by quadrature after the substitution: (s^2 + p^2 + rho^2)^{-3/2}
    c2 = p * p + r2
    s_up = math.sqrt(upper * upper - p * p)
    inner, inner_err = _quad(
        lambda s: (s * s + c2) ** -1.5, 0.0, s_up,
        [math.sqrt(c2) * k for k in (0.5, 1.0, 2.0, 8.0)], 0.0, 1e-12,
    )
    return V0Result(
        dx=val, abserr=err, upper=upper,
        truncated_closed_form=closed, truncated_quadrature=inner,
    )
