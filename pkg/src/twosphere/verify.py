"""Self-checks of the image series against exact identities.

Each check compares a measured quantity with its exact value and records
the residual; :func:`run_checks` drives the CLI ``verify`` subcommand.
"""

from dataclasses import dataclass

import numpy as np

from . import _io
from ._summation import fsum
from .coefficients import potential_difference
from .geometry import config_from_delta
from .quadrature import (
    MAX_ORDER,
    boundary_nodes,
    flux_components,
    flux_h,
    make_rule,
    weighted_flux,
)
from .sequences import build_sequence
from .singular import FOUR_PI, evaluate_batch


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    expected: float
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def as_dict(self):
        return {
            "name": self.name,
            "measured": self.measured,
            "expected": self.expected,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _check(name, measured, expected, tolerance):
    return Check(name, float(measured), float(expected), abs(float(measured) - float(expected)), tolerance)


def run_checks(delta, H, tol=1e-12, order=64, n_nodes=200):
    config = config_from_delta(delta)
    seq = build_sequence(delta, tol)
    rule = make_rule(order, grading=delta)
    checks = []

    b1 = evaluate_batch(config, seq, boundary_nodes(config, 1, n_nodes))
    b2 = evaluate_batch(config, seq, boundary_nodes(config, 2, n_nodes))
    worst = lambda a, target: float(np.max(np.abs(a - target)))  # noqa: E731
    checks.append(Check("h1 = 1 on dD1 (max dev)", worst(b1.h1, 1.0), 0.0, worst(b1.h1, 1.0), 1e-8))
    checks.append(Check("h1 = 0 on dD2 (max dev)", worst(b2.h1, 0.0), 0.0, worst(b2.h1, 0.0), 1e-8))
    checks.append(Check("h2 = 0 on dD1 (max dev)", worst(b1.h2, 0.0), 0.0, worst(b1.h2, 0.0), 1e-8))
    checks.append(Check("h2 = 1 on dD2 (max dev)", worst(b2.h2, 1.0), 0.0, worst(b2.h2, 1.0), 1e-8))
    checks.append(_check("h jump dD2 - dD1", b2.h.mean() - b1.h.mean(),
                         2.0 / (FOUR_PI * seq.q_sum), 1e-10))

    f1 = flux_components(config, seq, 1, rule)
    f2 = flux_components(config, seq, 2, rule)
    checks.append(_check("flux h through dD1", f1["h"], 1.0, 1e-6))
    checks.append(_check("flux h through dD2", f2["h"], -1.0, 1e-6))
    q_even = fsum(seq.q_n[0::2])
    q_odd = fsum(seq.q_n[1::2])
    checks.append(_check("flux h1 through dD1 / 4pi", f1["h1"] / FOUR_PI, -q_even, 1e-6))
    checks.append(_check("flux h1 through dD2 / 4pi", f2["h1"] / FOUR_PI, q_odd, 1e-6))
    checks.append(_check("flux h2 through dD1 / 4pi", f1["h2"] / FOUR_PI, q_odd, 1e-6))
    checks.append(_check("flux h2 through dD2 / 4pi", f2["h2"] / FOUR_PI, -q_even, 1e-6))

    if 2 * order <= MAX_ORDER:
        fine = flux_h(config, seq, 1, make_rule(2 * order, grading=delta))
        checks.append(_check("flux dD1, order doubled", fine, f1["h"], 1e-6))

    pd = potential_difference(seq, H)
    wf = weighted_flux(config, seq, H, rule)
    checks.append(_check("potential jump: quadrature vs series", wf, pd, 1e-5 * (1.0 + abs(pd))))
    return checks


def format_table(checks):
    header = ("check", "measured", "expected", "residual", "tolerance", "status")
    rows = [
        (c.name, _io.fmt(c.measured), _io.fmt(c.expected), f"{c.residual:.3e}",
         f"{c.tolerance:.1e}", "PASS" if c.passed else "FAIL")
        for c in checks
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    line = lambda r: "  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip()  # noqa: E731
    out = [line(header), line(tuple("-" * w for w in widths))]
    out += [line(r) for r in rows]
    n_fail = sum(not c.passed for c in checks)
    out.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(out) + "\n"
