import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import calibration as cal
from conftest import cached_sequence, random_exterior_points
from twosphere.analysis import gap_sample_points, residual_eta, residuals, transverse_ratio
from twosphere.errors import PointInsideInclusion
from twosphere.geometry import config_from_delta
from twosphere.quadrature import boundary_nodes
from twosphere.sequences import build_sequence
from twosphere.singular import (
    FOUR_PI,
    eval_singular,
    eval_v0_dx,
    evaluate_batch,
    grad_fd_oracle,
    truncated_inner_closed_form,
)

DELTA_SWEEP = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


@pytest.mark.parametrize("delta", [1e-3, 1e-4, 1e-5])
def test_boundary_constancy(delta):
    cfg = config_from_delta(delta)
    seq = cached_sequence(delta)
    b1 = evaluate_batch(cfg, seq, boundary_nodes(cfg, 1, 200))
    b2 = evaluate_batch(cfg, seq, boundary_nodes(cfg, 2, 200))
    assert len(b1.h1) == 200
    assert np.std(b1.h1) <= 1e-8 and abs(np.mean(b1.h1) - 1.0) <= 1e-8
    assert np.max(np.abs(b1.h1 - 1.0)) <= 1e-8
    assert np.max(np.abs(b2.h1)) <= 1e-8
    assert np.max(np.abs(b1.h2)) <= 1e-8
    assert np.max(np.abs(b2.h2 - 1.0)) <= 1e-8


def test_potential_jump(setup):
    cfg, seq = setup
    b1 = evaluate_batch(cfg, seq, boundary_nodes(cfg, 1, 200))
    b2 = evaluate_batch(cfg, seq, boundary_nodes(cfg, 2, 200))
    jump = b2.h.mean() - b1.h.mean()
    assert jump == pytest.approx(2.0 / (FOUR_PI * seq.q_sum), abs=1e-10)


def test_v_is_scaled_h(setup, rng):
    cfg, seq = setup
    X = random_exterior_points(cfg, rng, 50)
    b = evaluate_batch(cfg, seq, X)
    assert_allclose(b.v, FOUR_PI * seq.q_sum * b.h, rtol=1e-14, atol=1e-16)
    assert_allclose(b.grad_v, FOUR_PI * seq.q_sum * b.grad_h, rtol=1e-14, atol=1e-16)


def test_symmetries(setup, rng):
    cfg, seq = setup
    X = random_exterior_points(cfg, rng, 40)
    mirror = X * [-1.0, 1.0, 1.0]
    a = evaluate_batch(cfg, seq, X)
    b = evaluate_batch(cfg, seq, mirror)
    assert_allclose(b.h, -a.h, rtol=1e-13, atol=1e-15)
    assert_allclose(b.h1, a.h2, rtol=1e-13, atol=1e-15)
    # rotation about the axis
    c, s = math.cos(0.7), math.sin(0.7)
    R = np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    r = evaluate_batch(cfg, seq, X @ R.T)
    assert_allclose(r.h, a.h, rtol=1e-13, atol=1e-15)
    assert_allclose(r.grad_h, a.grad_h @ R.T, rtol=1e-12, atol=1e-14)


def test_gradient_against_differences(rng):
    cfg = config_from_delta(1e-3)
    seq = cached_sequence(1e-3)
    X = random_exterior_points(cfg, rng, 100)
    b = evaluate_batch(cfg, seq, X)
    for x, g in zip(X, b.grad_h):
        fd = grad_fd_oracle(lambda y: eval_singular(cfg, seq, y).h, x, 1e-6)
        assert np.linalg.norm(fd - g) <= 1e-5 * (1.0 + np.linalg.norm(g))


def test_component_gradients_against_differences(rng):
    cfg = config_from_delta(1e-2)
    seq = cached_sequence(1e-2)
    X = random_exterior_points(cfg, rng, 20)
    b = evaluate_batch(cfg, seq, X, components=True)
    for i, x in enumerate(X):
        for name, g in (("h1", b.grad_h1[i]), ("h2", b.grad_h2[i])):
            f = lambda y, name=name: getattr(evaluate_batch(cfg, seq, y[None, :])[0], name)  # noqa: E731
            fd = grad_fd_oracle(f, x, 1e-6)
            assert np.linalg.norm(fd - g) <= 1e-6 * (1.0 + np.linalg.norm(g))


def test_fd_oracle_linear_exact():
    a = np.array([0.3, -1.2, 2.5])
    g = grad_fd_oracle(lambda y: a @ y + 4.0, np.array([0.1, 0.2, 0.3]), 1e-3)
    assert_allclose(g, a, rtol=1e-12)


def test_fd_oracle_coulomb():
    x = np.array([0.6, -0.8, 1.2])
    r = np.linalg.norm(x)
    for step in (1e-2, 1e-3):
        g = grad_fd_oracle(lambda y: 1.0 / np.linalg.norm(y), x, step)
        err = np.linalg.norm(g + x / r**3)
        # second-order stencil: error ~ step^2 times third derivatives (~1 here)
        assert err <= 5.0 * step**2


def test_discrete_laplacian(rng):
    cfg = config_from_delta(1e-3)
    seq = cached_sequence(1e-3)
    X = random_exterior_points(cfg, rng, 30, box=2.5)
    h = 1e-4
    E = np.eye(3) * h
    centre = evaluate_batch(cfg, seq, X)
    lap = -6.0 * centre.v
    for e in E:
        lap += evaluate_batch(cfg, seq, X + e).v + evaluate_batch(cfg, seq, X - e).v
    lap /= h * h
    # images sit at +-p_n on the axis
    r = np.hypot(X[:, 1], X[:, 2])[:, None]
    dist = np.hypot(np.abs(np.abs(X[:, :1]) - seq.p_n[None, :]), r).min(axis=1)
    gnorm = np.linalg.norm(centre.grad_v, axis=1)
    assert np.all(np.abs(lap) <= 1e-2 * gnorm / dist)


def test_far_field_decay():
    cfg = config_from_delta(1e-3)
    seq = cached_sequence(1e-3)
    X = 100.0 * np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0.6, 0.8, 0], [-0.6, 0, 0.8]])
    b = evaluate_batch(cfg, seq, X)
    assert np.all(np.linalg.norm(b.grad_h, axis=1) <= cal.FAR_FIELD_BOUND)


def test_inside_raises():
    cfg = config_from_delta(1e-3)
    seq = cached_sequence(1e-3)
    with pytest.raises(PointInsideInclusion):
        eval_singular(cfg, seq, cfg.c1)
    with pytest.raises(PointInsideInclusion):
        evaluate_batch(cfg, seq, np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]]))


def test_axis_evaluation_in_gap():
    cfg = config_from_delta(1e-4)
    seq = cached_sequence(1e-4)
    e = eval_singular(cfg, seq, [0.0, 0.0, 0.0])
    assert e.h == 0.0 or abs(e.h) < 1e-15
    assert e.grad_v[1] == 0.0 and e.grad_v[2] == 0.0
    assert e.grad_v[0] > 0.0


def test_truncation_bound_is_conservative(rng):
    cfg = config_from_delta(1e-3)
    short = build_sequence(1e-3, 1e-5)
    ref = cached_sequence(1e-3, 1e-15)
    X = np.vstack([random_exterior_points(cfg, rng, 40), gap_sample_points(cfg)])
    a = evaluate_batch(cfg, short, X)
    b = evaluate_batch(cfg, ref, X)
    assert np.all(np.abs(a.h - b.h) <= a.trunc_err)
    assert np.all(np.linalg.norm(a.grad_h - b.grad_h, axis=1) <= a.trunc_err)


# gap-region asymptotics


@pytest.mark.parametrize("delta", DELTA_SWEEP)
def test_gap_profile_residual(delta):
    cfg = config_from_delta(delta)
    seq = cached_sequence(delta)
    res, gv = residuals(cfg, seq, gap_sample_points(cfg))
    L = abs(math.log(delta))
    assert np.max(np.linalg.norm(res, axis=1)) <= cal.ETA_BOUND / L


def test_gap_residual_at_origin_example():
    cfg = config_from_delta(1e-4)
    eta = residual_eta(cfg, cached_sequence(1e-4), [0.0, 0.0, 0.0])
    assert np.linalg.norm(eta) <= 20.0 / abs(math.log(1e-4))


def test_gap_residual_decreases_with_delta():
    norms = [
        np.linalg.norm(residual_eta(config_from_delta(d), cached_sequence(d), [0.0, 0.0, 0.0]))
        for d in DELTA_SWEEP
    ]
    for a, b in zip(norms, norms[1:]):
        assert b <= (1.0 + cal.JITTER) * a


@pytest.mark.parametrize("delta", DELTA_SWEEP)
def test_transverse_envelope(delta):
    cfg = config_from_delta(delta)
    X = gap_sample_points(cfg)
    res, gv = residuals(cfg, cached_sequence(delta), X)
    assert np.max(transverse_ratio(delta, X, gv)) <= cal.TRANSVERSE_BOUND
    # same bound written on the residual's y component
    r = np.hypot(X[:, 1], X[:, 2])
    env = (2 * delta + r**2) * (1 + np.log1p(r**2 / delta)) / (2 * (math.sqrt(delta) + r))
    assert np.all(np.abs(res[:, 1]) <= cal.TRANSVERSE_BOUND * env)


@pytest.mark.parametrize("delta", DELTA_SWEEP)
def test_v0_matches_series(delta):
    cfg = config_from_delta(delta)
    X = gap_sample_points(cfg)
    gv = evaluate_batch(cfg, cached_sequence(delta), X).grad_v[:, 0]
    v0 = np.array([eval_v0_dx(cfg, x).dx for x in X])
    assert np.max(np.abs(gv - v0) / np.abs(v0)) <= cal.V0_MATCH_BOUND / abs(math.log(delta))


@pytest.mark.parametrize("delta", DELTA_SWEEP)
def test_v0_on_axis(delta):
    cfg = config_from_delta(delta)
    r = eval_v0_dx(cfg, [0.0, 0.0, 0.0])
    assert abs(r.dx * delta - 1.0) <= cal.V0_AXIS_BOUND / abs(math.log(delta))


@pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
def test_v0_closed_form_vs_quadrature(delta):
    cfg = config_from_delta(delta)
    R = abs(math.log(delta)) ** -2
    for rho_ in (0.0, 0.3 * R, R):
        r = eval_v0_dx(cfg, [0.0, rho_, 0.0])
        assert r.upper == pytest.approx(1.0 / abs(math.log(delta)))
        assert r.truncated_quadrature == pytest.approx(r.truncated_closed_form, rel=1e-8)


def test_v0_closed_form_formula():
    p, rho_, T = 0.01, 0.003, 0.2
    expected = math.sqrt((T * T - p * p) / (T * T + rho_ * rho_)) / (p * p + rho_ * rho_)
    assert truncated_inner_closed_form(p, rho_, T) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("delta", [1e-3, 1e-5])
def test_v0_decreasing_in_rho(delta):
    cfg = config_from_delta(delta)
    R = abs(math.log(delta)) ** -2
    vals = [eval_v0_dx(cfg, [0.0, r, 0.0]).dx for r in np.linspace(0.0, R, 8)]
    assert np.all(np.diff(vals) < 0)
