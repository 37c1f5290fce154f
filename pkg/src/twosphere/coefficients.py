"""Blow-up coefficients and the potential jump across the two spheres.

``C_H^eps = 2 sum_n q_n (H(p_n e1) - H(-p_n e1))`` only sees ``H`` on the
axis, so everything here works with the axis restriction
``t -> H(t, 0, 0) = sum_k a_k t^k``; only odd ``k`` survive the difference.
"""

from dataclasses import dataclass

import numpy as np

from ._summation import fsum
from .background import lipschitz_on_axis
from .singular import evaluate_batch, _check_exterior
from ._validation import check_points


def _odd_difference(H, t):
    """``H(t e1) - H(-t e1)`` for an array of abscissas ``t``."""
    a = H.odd_axis_coefficients()
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    # Horner on the odd part; even coefficients are zero
    for coef in a[::-1]:
        out = out * t + coef
    return 2.0 * out


def c_h_eps(seq, H):
    """Return ``(C_H^eps truncated at M, bound on the omitted tail)``."""
    diff = _odd_difference(H, seq.p_n)
    value = 2.0 * fsum(seq.q_n * diff)
    # |H(t) - H(-t)| <= 2 t L for |t| <= p_0, with L a Lipschitz bound of the odd part
    L = lipschitz_on_axis(H, seq.p_n[0], odd_only=True)
    tail = 2.0 * seq.q_tail_bound * 2.0 * seq.p_n[-1] * L
    return value, tail


def _zeta_tail(s, N):
    """Euler-Maclaurin estimate of ``sum_{n>N} n^-s`` and a bound on its error."""
    N = float(N)
    est = (
        N ** (1.0 - s) / (s - 1.0)
        - 0.5 * N ** (-s)
        + s * N ** (-s - 1.0) / 12.0
        - s * (s + 1) * (s + 2) * N ** (-s - 3.0) / 720.0
    )
    nxt = s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * N ** (-s - 5.0) / 30240.0
    return est, 2.0 * nxt


def c_h_limit(H, n_max=10**6):
    """Limit coefficient ``2 sum_{n>=1} (1/n)(H(e1/n) - H(-e1/n))``.

    Summed directly to ``n_max`` and closed with a per-monomial p-series tail.
    The sum starts at ``n = 1``; an ``n = 0`` term would be undefined.
    """
    n_max = int(n_max)
    if n_max < 1000:
        raise ValueError(f"n_max must be at least 1000, got {n_max}")
    n = np.arange(1, n_max + 1, dtype=float)
    inv = 1.0 / n
    terms = inv * _odd_difference(H, inv)
    head = 2.0 * fsum(terms)
    a = H.odd_axis_coefficients()
    tail = 0.0
    tail_err = 0.0
    for k, coef in enumerate(a):
        if coef == 0.0:
            continue
        # 2 * (1/n) * 2 a_k n^-k  ->  4 a_k n^-(k+1)
        est, err = _zeta_tail(k + 1.0, n_max)
        tail += 4.0 * coef * est
        tail_err += 4.0 * abs(coef) * err
    value = head + tail
    # each term carries a few roundings (reciprocal, Horner, product); fsum adds one more
    n_ops = len(a) + 3
    tail_err += 2.0 * n_ops * np.finfo(float).eps * fsum(np.abs(terms)) + np.finfo(float).eps * abs(value)
    return value, tail_err


def potential_difference(seq, H):
    """``u|dD2 - u|dD1 = C_H^eps / (2 sum q_n)``."""
    value, _ = c_h_eps(seq, H)
    return value / (2.0 * seq.q_sum)


def singular_coefficient(seq, H):
    """Multiplier of ``v`` in ``u = coeff * v + g``."""
    return 0.5 * potential_difference(seq, H)


def singular_field(config, seq, H, x):
    """Gradient of the singular part ``coeff * v``: the field up to a bounded remainder.

    Accepts one point (returns shape (3,)) or an (n, 3) array.
    """
    single = np.ndim(x) == 1
    X = check_points(x)
    _check_exterior(config, X)
    coeff = singular_coefficient(seq, H)
    if coeff == 0.0:
        G = np.zeros_like(X)
    else:
        G = coeff * evaluate_batch(config, seq, X).grad_v
    return G[0] if single else G


@dataclass(frozen=True)
class CoefficientReport:
    c_h_eps: float
    c_h_eps_tail: float
    c_h: float
    c_h_tail: float
    q_sum: float
    q_sum_tail: float
    potential_diff: float
    singular_coeff: float

    def as_dict(self):
        return {
            "c_h_eps": self.c_h_eps,
            "c_h_eps_tail": self.c_h_eps_tail,
            "c_h": self.c_h,
            "c_h_tail": self.c_h_tail,
            "q_sum": self.q_sum,
            "potential_diff": self.potential_diff,
            "singular_coeff": self.singular_coeff,
        }


def coefficient_report(seq, H, n_max=10**6):
    ce, ce_tail = c_h_eps(seq, H)
    cl, cl_tail = c_h_limit(H, n_max)
    pd = ce / (2.0 * seq.q_sum)
    return CoefficientReport(
        c_h_eps=ce,
        c_h_eps_tail=ce_tail,
        c_h=cl,
        c_h_tail=cl_tail,
        q_sum=seq.q_sum,
        q_sum_tail=seq.q_tail_bound,
        potential_diff=pd,
        singular_coeff=0.5 * pd,
    )
