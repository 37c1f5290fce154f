"""Image points and image charges generated by alternating sphere inversions.

For half-gap ``delta`` the images of the two centers sit at ``+-p_n`` on the
x-axis with weights ``q_n``; ``p_n`` decreases to the fixed point ``p`` of the
combined reflection and ``q_n`` decays geometrically beyond ``n ~ 1/p``.

The recursion is run on the offset ``d_n = p_n - p`` rather than on ``p_n``
itself.  Using ``(1+delta+p)(1+delta-p) = 1`` the map becomes

    d_{n+1} = d_n * (1 + delta - p) / (1 + delta + p_n),

which carries no cancellation, so ``p_n - p`` stays accurate long after
``p_n`` and ``p`` agree to every printed digit.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._summation import fsum
from ._validation import check_tolerance
from .errors import NonPositiveGeometry, TruncationOverflow

DEFAULT_MAX_TERMS = 10**8


def _check_delta(delta):
    delta = float(delta)
    if not (delta > 0 and math.isfinite(delta)):
        raise NonPositiveGeometry(f"delta must be positive, got {delta}")
    return delta


def fixed_point(delta):
    """Positive fixed point ``p = sqrt((1+delta)^2 - 1)`` of the combined reflection."""
    delta = _check_delta(delta)
    return math.sqrt(delta * (2.0 + delta))


def contraction_ratio(delta):
    """``A = (1+delta+p) / (1+delta-p)``; governs how fast ``p_n -> p``."""
    p = fixed_point(delta)
    return (1.0 + delta + p) / (1.0 + delta - p)


def landmarks(delta):
    """Landmark indices ``(N0, N, N1)`` using natural logarithms."""
    delta = _check_delta(delta)
    L = abs(math.log(delta))
    return (
        int(math.floor(L)),
        int(math.floor(1.0 / math.sqrt(delta))),
        int(math.floor(1.0 / (delta * L))),
    )


def closed_form_positions(delta, n):
    """``p_n = p (A^{n+1}+1)/(A^{n+1}-1)`` evaluated without forming ``A^{n+1}``."""
    delta = _check_delta(delta)
    p = fixed_point(delta)
    n = np.asarray(n, dtype=float)
    log_a = math.log1p(2.0 * p / (1.0 + delta - p))
    return p + 2.0 * p / np.expm1((n + 1.0) * log_a)


@dataclass(frozen=True, eq=False)
class ImageSequence:
    """Truncated image data ``p_n, q_n`` for ``n = 0..M``.

    ``mu_n[n] = 1/(1+delta+p_{n-1})`` for ``n >= 1`` so that
    ``q_n = prod_{j<=n} mu_j``; ``mu_n[0]`` is 1 (empty product).
    ``gap_n`` holds ``p_n - p`` computed without cancellation.
    """

    delta: float
    p: float
    A: float
    p_n: np.ndarray
    q_n: np.ndarray
    mu_n: np.ndarray
    gap_n: np.ndarray
    q_sum: float
    q_tail_bound: float
    tol: float
    N0: int
    N: int
    N1: int

    @property
    def M(self):
        return len(self.p_n) - 1

    @property
    def ratio(self):
        """Geometric decay bound ``q_{n+1} <= ratio * q_n``."""
        return 1.0 + self.delta - self.p

    @property
    def even(self):
        return slice(0, None, 2)

    @property
    def odd(self):
        return slice(1, None, 2)


def _tail_bound(q_last, r, p, delta):
    # sum_{n>M} q_n <= q_M * r / (1 - r) with r = 1 + delta - p
    return q_last * r / (p - delta)


def build_sequence(delta, tol=1e-10, max_terms=DEFAULT_MAX_TERMS):
    """Generate images until the certified tail ``sum_{n>M} q_n`` drops below ``tol``."""
    delta = _check_delta(delta)
    tol = check_tolerance(tol)
    p = fixed_point(delta)
    r = 1.0 + delta - p
    one_d = 1.0 + delta

    gaps = [one_d - p]
    qs = [1.0]
    mus = [1.0]
    d = gaps[0]
    q = 1.0
    pn = one_d
    while _tail_bound(q, r, p, delta) >= tol:
        if len(qs) > max_terms:
            raise TruncationOverflow(
                f"more than {max_terms} image terms needed for delta={delta}, tol={tol}"
            )
        denom = one_d + pn
        mu = 1.0 / denom
        d = d * r / denom
        q = q / denom
        pn = p + d
        gaps.append(d)
        qs.append(q)
        mus.append(mu)

    gap_n = np.array(gaps)
    p_n = p + gap_n
    p_n[0] = one_d
    q_n = np.array(qs)
    N0, N, N1 = landmarks(delta)
    return ImageSequence(
        delta=delta,
        p=p,
        A=(one_d + p) / (one_d - p),
        p_n=p_n,
        q_n=q_n,
        mu_n=np.array(mus),
        gap_n=gap_n,
        q_sum=fsum(q_n),
        q_tail_bound=_tail_bound(q_n[-1], r, p, delta),
        tol=tol,
        N0=N0,
        N=N,
        N1=N1,
    )


def q_sum_certified(seq):
    """Return ``(sum_{n<=M} q_n, bound on the omitted tail)``."""
    return seq.q_sum, seq.q_tail_bound


@dataclass(frozen=True, eq=False)
class LogProfile:
    """Sequence data in log form, valid far past the point where ``q_n`` underflows."""

    delta: float
    p: float
    p_n: np.ndarray
    log_gap: np.ndarray
    log_q: np.ndarray

    @property
    def n(self):
        return np.arange(len(self.p_n))

    @property
    def log_step(self):
        """``log(p_n - p_{n+1})`` via ``p_n - p_{n+1} = d_n (p_n + p)/(1+delta+p_n)``."""
        return (
            self.log_gap
            + np.log(self.p_n + self.p)
            - np.log1p(self.delta + self.p_n)
        )


def log_profile(delta, n_max):
    """Run the same recursion as :func:`build_sequence` in log form up to ``n_max``.

    Once ``p_n - p`` falls below the resolution of ``p`` the step no longer
    changes in double precision, and the remaining indices follow an exact
    arithmetic progression, which is filled in vectorized.
    """
    delta = _check_delta(delta)
    p = fixed_point(delta)
    one_d = 1.0 + delta
    log_r = math.log1p(delta - p)

    log_gap = [math.log(one_d - p)]
    log_q = [0.0]
    pns = [one_d]
    lg, lq, pn = log_gap[0], 0.0, one_d
    n = 0
    while n < n_max:
        ld = math.log1p(delta + pn)
        lg = lg + log_r - ld
        lq = lq - ld
        pn = p + math.exp(lg)
        n += 1
        log_gap.append(lg)
        log_q.append(lq)
        pns.append(pn)
        if pn == p:
            break

    log_gap = np.array(log_gap)
    log_q = np.array(log_q)
    pns = np.array(pns)
    rest = n_max - n
    if rest > 0:
        k = np.arange(1, rest + 1, dtype=float)
        ld = math.log1p(delta + p)
        log_gap = np.concatenate([log_gap, lg + k * (log_r - ld)])
        log_q = np.concatenate([log_q, lq - k * ld])
        pns = np.concatenate([pns, np.full(rest, p)])
    return LogProfile(delta=delta, p=p, p_n=pns, log_gap=log_gap, log_q=log_q)
