"""Asymptotic experiments on the gap field: residual maps, sweeps, fits."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_point
from .coefficients import c_h_eps, c_h_limit, singular_coefficient
from .errors import ConvergenceFailure, DegenerateFit, OutsideGapRegion
from .geometry import config_from_delta, gap_region_radius, in_gap_region, rho
from .background import lipschitz_on_axis
from .sequences import build_sequence
from .singular import evaluate_batch

E1 = np.array([1.0, 0.0, 0.0])


def profile_scale(delta, X):
    """``(2 delta + rho^2) / 2``: the reciprocal of the model gap-field magnitude."""
    return 0.5 * (2.0 * delta + rho(X) ** 2)


def residual_eta(config, seq, x):
    """``(2 delta + rho^2)/2 * grad v(x) - e1`` at a point of the gap region."""
    x = check_point(x)
    if not in_gap_region(config, x):
        raise OutsideGapRegion(f"point {x.tolist()} is outside the gap region")
    gv = evaluate_batch(config, seq, x[None, :]).grad_v[0]
    return profile_scale(config.delta, x) * gv - E1


def residuals(config, seq, X):
    """Vectorized :func:`residual_eta` without the region check; returns (n, 3)."""
    gv = evaluate_batch(config, seq, X).grad_v
    return profile_scale(config.delta, X)[:, None] * gv - E1, gv


def transverse_ratio(delta, X, gv):
    """``(|dv/dy| + |dv/dz|) (sqrt(delta) + rho) / (1 + ln(1 + rho^2/delta))``."""
    r = rho(X)
    return (np.abs(gv[:, 1]) + np.abs(gv[:, 2])) * (math.sqrt(delta) + r) / (
        1.0 + np.log1p(r * r / delta)
    )


def gap_sample_points(config, n_radial=5, n_azimuth=8, x_fractions=(0.0, 0.5)):
    """Sample grid in the gap region.

    Radial levels ``rho = k/(n_radial-1) * |ln delta|^-2``, ``n_azimuth``
    angles per nonzero level (the axis contributes a single point), and for
    each ``(rho, angle)`` the abscissas ``x = f * w(rho)`` where ``w`` is the
    half-width of the gap at that radius.
    """
    R = gap_region_radius(config.delta)
    d = config.delta
    pts = []
    for k in range(n_radial):
        r = R * k / max(n_radial - 1, 1)
        # sphere surfaces at x = +-(1 + d - sqrt(1 - r^2))
        w = d + r * r / (1.0 + math.sqrt(1.0 - r * r))
        angles = [0.0] if r == 0.0 else 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
        for a in angles:
            for f in x_fractions:
                pts.append((f * w, r * math.cos(a), r * math.sin(a)))
    return np.array(pts)


def fit_rate(xs, ys):
    """Least-squares line through ``(ln x, ln y)``; returns ``(slope, intercept)``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-D arrays of equal length")
    if len(xs) < 3:
        raise ValueError("need at least 3 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("xs and ys must be positive")
    lx, ly = np.log(xs), np.log(ys)
    lx_c = lx - lx.mean()
    sxx = float(lx_c @ lx_c)
    if sxx == 0.0:
        raise DegenerateFit("all abscissas are equal")
    slope = float(lx_c @ (ly - ly.mean())) / sxx
    return slope, float(ly.mean() - slope * lx.mean())


@dataclass(frozen=True)
class SweepRow:
    eps: float
    delta: float
    M: int
    q_sum: float
    q_tail: float
    c_h_eps: float
    c_h_eps_tail: float
    c_h: float
    potential_diff: float
    grad_axis: float
    grad_axis_x: float
    grad_axis_y: float
    grad_axis_z: float
    blowup_product: float
    eta_max: float
    transverse_max: float


@dataclass
class AsymptoticReport:
    background: str
    tol: float
    records: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def as_dict(self):
        return {
            "background": self.background,
            "tol": self.tol,
            "records": [asdict(r) for r in self.records],
            "fits": dict(self.fits),
        }


def _row(H, eps, tol, c_h, n_radial, n_azimuth, x_fractions):
    delta = eps / 2.0
    config = config_from_delta(delta)
    # tighten the image tolerance so the C_H^eps tail is below `tol` as well
    L = lipschitz_on_axis(H, 1.0 + delta, odd_only=True)
    seq = build_sequence(delta, tol / max(1.0, 4.0 * (1.0 + delta) * L))
    ce, ce_tail = c_h_eps(seq, H)
    if seq.q_tail_bound >= tol or ce_tail >= tol:
        raise ConvergenceFailure(f"series tails exceed tol={tol} at eps={eps}")

    X = gap_sample_points(config, n_radial, n_azimuth, x_fractions)
    res, gv = residuals(config, seq, X)
    g0 = evaluate_batch(config, seq, np.zeros((1, 3))).grad_v[0]
    coeff = singular_coefficient(seq, H)
    product = eps * abs(math.log(eps)) * abs(coeff) * float(np.linalg.norm(g0))
    return SweepRow(
        eps=eps,
        delta=delta,
        M=seq.M,
        q_sum=seq.q_sum,
        q_tail=seq.q_tail_bound,
        c_h_eps=ce,
        c_h_eps_tail=ce_tail,
        c_h=c_h,
        potential_diff=ce / (2.0 * seq.q_sum),
        grad_axis=float(np.linalg.norm(g0)),
        grad_axis_x=float(g0[0]),
        grad_axis_y=float(g0[1]),
        grad_axis_z=float(g0[2]),
        blowup_product=product,
        eta_max=float(np.max(np.linalg.norm(res, axis=1))),
        transverse_max=float(np.max(transverse_ratio(delta, X, gv))),
    )


def blowup_sweep(
    H,
    eps_list,
    tol=1e-10,
    n_radial=5,
    n_azimuth=8,
    x_fractions=(0.0, 0.5),
    n_max=10**6,
    threads=None,
):
    """Run the per-gap experiments for each ``eps`` and fit the asymptotic rates."""
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ValueError("eps_list is empty")
    for e in eps_list:
        if not (0.0 < e <= 0.1):
            raise ValueError(f"eps values must lie in (0, 0.1], got {e}")
    c_h, c_h_tail = c_h_limit(H, n_max)
    if c_h_tail >= tol:
        raise ConvergenceFailure(f"C_H tail bound {c_h_tail:.3g} exceeds tol={tol}")

    def work(e):
        return _row(H, e, tol, c_h, n_radial, n_azimuth, x_fractions)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, eps_list))
    else:
        rows = [work(e) for e in eps_list]
    rows.sort(key=lambda r: -r.eps)

    report = AsymptoticReport(background=str(H), tol=tol, records=rows)
    eps = report.column("eps")
    scale = np.sqrt(eps) * np.abs(np.log(eps))
    report.fits["rate_const_thm12"] = float(
        np.max(np.abs(report.column("c_h_eps") - c_h) / scale)
    )
    eta = report.column("eta_max")
    if len(rows) >= 3 and np.all(eta > 0):
        slope, _ = fit_rate(1.0 / np.abs(np.log(eps)), eta)
        report.fits["eta_decay_slope"] = slope
    else:
        report.fits["eta_decay_slope"] = None
    return report


CSV_COLUMNS = (
    "eps",
    "q_sum",
    "c_h_eps",
    "c_h",
    "potential_diff",
    "grad_axis",
    "blowup_product",
    "eta_max",
)
