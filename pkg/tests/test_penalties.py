import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mcgl import penalties
from mcgl.graph_core import apply_L, apply_L_adjoint, num_edges
from mcgl.penalties import (
    EigenDecompositionError,
    PenaltyParams,
    grad_F,
    huber_envelope,
    mc_penalty,
    objective_P2,
    project_nonneg,
    prox_G,
    prox_H_conjugate,
    prox_neg_logdet_shifted,
    smooth_part,
    smooth_part_box_form,
    soft_threshold,
)
from oracles import huber_variational, p2_objective

finite = st.floats(-50, 50, allow_nan=False)


def random_symmetric(rng, n, scale=1.0):
    A = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (A + A.T)


def J(n):
    return np.full((n, n), 1.0 / n)


# ---- params ---------------------------------------------------------------

def test_penalty_params_validation_and_convex_flag():
    with pytest.raises(ValueError):
        PenaltyParams(-1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        PenaltyParams(1.0, 0.0, math.inf)
    p = PenaltyParams(1e-4, 2.5e-4, 2.25)
    assert p.convex_mode
    assert not PenaltyParams(0.01, 0.0, 2.25).convex_mode
    assert PenaltyParams(0.1, 0.225, 2.25).convex_mode
    assert PenaltyParams(0.1, 0.0, 0.0).gamma == math.inf


# ---- Huber / MC -----------------------------------------------------------

def test_huber_examples():
    assert huber_envelope([0.0, 0.0], 0.7) == 0.0
    for g in (0.1, 1.0, 4.0):
        assert huber_envelope([g], g) == pytest.approx(g / 2)
    assert huber_envelope([3.0], 1.0) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        huber_envelope([1.0], 0.0)


@pytest.mark.parametrize("t, gamma", [(3.0, 1.0), (0.3, 1.0), (-2.0, 0.5), (0.1, 2.0)])
def test_huber_matches_variational_definition(t, gamma):
    assert huber_envelope([t], gamma) == pytest.approx(huber_variational(t, gamma), abs=1e-8)


def test_mc_examples():
    assert mc_penalty(np.zeros(3), 1.0) == 0.0
    assert mc_penalty([10.0], 1.0) == pytest.approx(0.5)
    for g in (0.2, 1.0, 3.0):
        assert mc_penalty([g / 2], g) == pytest.approx(3 * g / 8)
    with pytest.raises(ValueError):
        mc_penalty([1.0], -1.0)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 8), elements=finite), st.floats(0.05, 5))
def test_mc_is_l1_minus_huber_and_bounded(w, gamma):
    mc = mc_penalty(w, gamma)
    l1 = float(np.abs(w).sum())
    assert mc == pytest.approx(l1 - huber_envelope(w, gamma), abs=1e-9 * (1 + l1))
    assert -1e-12 <= mc <= l1 + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10), st.floats(0.01, 10), st.floats(1.0001, 100))
def test_mc_saturates_exactly(count, gamma, factor):
    w = np.full(count, gamma * factor)
    w[::2] *= -1
    for t in w:
        assert mc_penalty([t], gamma) == gamma / 2
    assert mc_penalty(w, gamma) == pytest.approx(count * gamma / 2, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 20), st.floats(0, 20), st.floats(0.05, 5))
def test_mc_monotone_in_magnitude(a, b, gamma):
    lo, hi = sorted((a, b))
    assert mc_penalty([lo], gamma) <= mc_penalty([hi], gamma) + 1e-15


# ---- simple proxes --------------------------------------------------------

def test_soft_threshold_examples():
    np.testing.assert_array_equal(soft_threshold([3.0, -3.0, 0.5], np.ones(3)), [2, -2, 0])
    np.testing.assert_array_equal(soft_threshold([0.2, -0.4], [0.5, 0.5]), [0, 0])
    np.testing.assert_array_equal(soft_threshold([1.0], [1.0]), [0.0])
    with pytest.raises(ValueError):
        soft_threshold([1.0, 2.0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        soft_threshold([1.0], [0.0])


def test_project_nonneg_examples():
    np.testing.assert_array_equal(project_nonneg([1, -2, 0]), [1, 0, 0])
    w = np.array([0.0, 2.5, 7.0])
    np.testing.assert_array_equal(project_nonneg(w), w)
    np.testing.assert_array_equal(project_nonneg([-5.0]), [0.0])


def test_prox_G_examples():
    w = np.array([1.0, -2.0, 0.3])
    np.testing.assert_array_equal(prox_G(w, 0.5, 0.0, np.zeros(3)), project_nonneg(w))
    tau, lam, Ls = 0.7, 0.2, np.array([1.0, 2.0, -0.5])
    np.testing.assert_allclose(prox_G(tau * (lam + Ls), tau, lam, Ls), np.zeros(3), atol=1e-15)
    with pytest.raises(ValueError):
        prox_G(w, 0.0, 0.1, np.zeros(3))


def _G(y, lam, Ls):
    return math.inf if np.any(y < 0) else lam * float(np.abs(y).sum()) + float(Ls @ y)


def test_prox_G_against_grid_search_n4():
    rng = np.random.default_rng(11)
    n = 4
    S = random_symmetric(rng, n)
    S = S @ S.T
    Ls = apply_L_adjoint(S)
    tau, lam = 0.3, 0.5
    w = rng.normal(scale=2.0, size=num_edges(n))
    y_star = prox_G(w, tau, lam, Ls)
    # separable objective: 2-variable joint grid on the first pair, 1-D grids elsewhere
    def obj(y, i):
        return tau * (lam * y + Ls[i] * y) + 0.5 * (w[i] - y) ** 2
    grid = np.linspace(0.0, 10.0, 2001)
    a, b = np.meshgrid(grid, grid, indexing="ij")
    joint = obj(a, 0) + obj(b, 1)
    i, j = np.unravel_index(np.argmin(joint), joint.shape)
    fine = np.linspace(0.0, 10.0, 2_000_001)
    brute = [grid[i], grid[j]] + [fine[np.argmin(obj(fine, k))] for k in range(2, 6)]
    np.testing.assert_allclose(y_star[:2], brute[:2], atol=5e-3)
    np.testing.assert_allclose(y_star[2:], brute[2:], atol=1e-5)
    f_star = sum(obj(y_star[k], k) for k in range(6))
    f_brute = sum(obj(fine[np.argmin(obj(fine, k))], k) for k in range(6))
    assert f_star <= f_brute + 1e-6


def test_prox_G_beats_random_probes():
    rng = np.random.default_rng(2)
    Ls = rng.normal(size=10)
    w = rng.normal(size=10)
    tau, lam = 0.8, 0.3
    y = prox_G(w, tau, lam, Ls)
    best = tau * _G(y, lam, Ls) + 0.5 * float((w - y) @ (w - y))
    for _ in range(100):
        probe = project_nonneg(y + rng.normal(scale=0.3, size=10))
        val = tau * _G(probe, lam, Ls) + 0.5 * float((w - probe) @ (w - probe))
        assert best <= val + 1e-12


# ---- logdet prox ----------------------------------------------------------

def test_prox_logdet_identity_n2():
    X = prox_neg_logdet_shifted(np.eye(2), 1.0)
    expected = np.array([[1.516123775561495, -0.10191021318839999],
                         [-0.10191021318839999, 1.516123775561495]])
    np.testing.assert_allclose(X, expected, atol=1e-14)
    np.testing.assert_allclose(np.linalg.eigvalsh(X + J(2)),
                               [(1 + math.sqrt(5)) / 2, 1 + math.sqrt(2)], atol=1e-14)
    residual = (X - np.eye(2)) - np.linalg.inv(X + J(2))
    assert np.linalg.norm(residual) <= 1e-8 * 2


def test_prox_logdet_scalar():
    X = prox_neg_logdet_shifted(np.zeros((1, 1)), 1.0)
    assert X[0, 0] == pytest.approx(0.6180339887498949, abs=1e-15)


@pytest.mark.parametrize("sigma", [0.05, 1.0, 10.0])
def test_prox_logdet_optimality_residual_indefinite_inputs(sigma):
    rng = np.random.default_rng(int(sigma * 100))
    for n in (2, 5, 12):
        W = random_symmetric(rng, n, scale=3.0)
        X = prox_neg_logdet_shifted(W, sigma)
        assert np.all(np.linalg.eigvalsh(X + J(n)) > 0)
        res = sigma * (X - W) - np.linalg.inv(X + J(n))
        assert np.linalg.norm(res) <= 1e-8 * n


def test_prox_logdet_beats_random_probes():
    rng = np.random.default_rng(9)
    n, sigma = 5, 0.7
    W = random_symmetric(rng, n)
    X = prox_neg_logdet_shifted(W, sigma)

    def value(Y):
        sign, logdet = np.linalg.slogdet(Y + J(n))
        if sign <= 0:
            return math.inf
        return -logdet / sigma + 0.5 * np.sum((Y - W) ** 2)

    best = value(X)
    for _ in range(100):
        assert best <= value(X + random_symmetric(rng, n, scale=0.05)) + 1e-12


def test_prox_logdet_errors(monkeypatch):
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        prox_neg_logdet_shifted(A, 1.0)
    with pytest.raises(ValueError):
        prox_neg_logdet_shifted(np.eye(2), 0.0)

    def broken(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(penalties.np.linalg, "eigh", broken)
    with pytest.raises(EigenDecompositionError):
        prox_neg_logdet_shifted(np.eye(2), 1.0)


def test_prox_conjugate_examples():
    P_I = prox_neg_logdet_shifted(np.eye(2), 1.0)
    np.testing.assert_allclose(prox_H_conjugate(np.eye(2), 1.0), np.eye(2) - P_I, atol=1e-14)
    expected = -np.array([[0.8090169943749475, -0.19098300562505255],
                          [-0.19098300562505255, 0.8090169943749475]])
    np.testing.assert_allclose(prox_H_conjugate(np.zeros((2, 2)), 1.0), expected, atol=1e-14)


@pytest.mark.parametrize("sigma", [0.01, 0.5, 3.0])
def test_moreau_decomposition_residual(sigma):
    rng = np.random.default_rng(4)
    for n in (2, 6, 15):
        U = random_symmetric(rng, n, scale=2.0)
        lhs = prox_H_conjugate(U, sigma) + sigma * prox_neg_logdet_shifted(U / sigma, sigma)
        assert np.linalg.norm(lhs - U) <= 1e-12 * np.linalg.norm(U)


# ---- smooth part ----------------------------------------------------------

def test_grad_F_examples():
    p = PenaltyParams(0.3, 0.9, 2.25)
    np.testing.assert_array_equal(grad_F(np.zeros(4), p), np.zeros(4))
    np.testing.assert_allclose(grad_F([2.0, -1.0], PenaltyParams(1.0, 0.5, 0.0)), [1.0, -0.5])


def _central_diff(f, w, h=1e-6):
    g = np.empty_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (f(w + e) - f(w - e)) / (2 * h)
    return g


def _away_from(w, points, gap):
    return all(np.all(np.abs(np.abs(w) - p) > gap) for p in points)


@pytest.mark.parametrize("params", [
    PenaltyParams(0.3, 0.675, 2.25),
    PenaltyParams(0.01, 0.0, 2.25),
    PenaltyParams(1.0, 0.2, 0.5),
    PenaltyParams(0.5, 0.1, 0.0),
])
def test_grad_F_finite_differences(params):
    rng = np.random.default_rng(1)
    kinks = [1.0] + ([params.gamma] if params.gamma_inv else [])
    checked = 0
    while checked < 25:
        w = rng.uniform(-3, 3, size=6)
        if not _away_from(w, kinks, 1e-3):
            continue
        fd = _central_diff(lambda v: smooth_part(v, params), w)
        g = grad_F(w, params)
        assert np.linalg.norm(fd - g) <= 1e-5 * max(np.linalg.norm(g), 1e-8)
        checked += 1


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2), st.floats(0.01, 5), st.floats(0, 3), st.integers(0, 2**32 - 1))
def test_grad_F_lipschitz_in_convex_mode(lam1, gamma_inv, extra, seed):
    p = PenaltyParams(lam1, gamma_inv * lam1 + extra, gamma_inv)
    rng = np.random.default_rng(seed)
    w, v = rng.normal(scale=3, size=(2, 7))
    lhs = np.linalg.norm(grad_F(w, p) - grad_F(v, p))
    assert lhs <= p.lambda2 * np.linalg.norm(w - v) * (1 + 1e-12) + 1e-14


def test_box_form_matches_huber_form():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = PenaltyParams(*rng.uniform(0, 2, 2), rng.uniform(0.1, 4))
        w = rng.normal(scale=2, size=8)
        assert smooth_part(w, p) == pytest.approx(smooth_part_box_form(w, p), abs=1e-10)


# ---- objective ------------------------------------------------------------

def test_objective_examples():
    p = PenaltyParams(0.0, 0.0, 0.0)
    assert objective_P2([-0.1, 1.0, 1.0], np.eye(3), p) == math.inf
    assert objective_P2([1.0], np.eye(2), p) == pytest.approx(2 - math.log(2), abs=1e-12)
    assert objective_P2([1.0], np.eye(2), p) == pytest.approx(1.306853, abs=1e-6)
    # disconnected graph: L(w) + J singular
    assert objective_P2([1.0, 0.0, 0.0], np.eye(3), p) == math.inf


def test_objective_matches_dense_oracle():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        w = rng.uniform(0.05, 2, num_edges(n))
        X = rng.normal(size=(30, n))
        S = X.T @ X / 30
        lam1, lam2, gi = rng.uniform(0, 1), rng.uniform(0, 1), float(rng.choice([0, 0.5, 2.25]))
        p = PenaltyParams(lam1, lam2, gi)
        assert objective_P2(w, S, p) == pytest.approx(p2_objective(w, S, lam1, lam2, gi),
                                                      rel=1e-10, abs=1e-10)


def test_l1_limit_is_p0_plus_tikhonov():
    rng = np.random.default_rng(12)
    n = 5
    w = rng.uniform(0.1, 1, num_edges(n))
    S = np.cov(rng.normal(size=(n, 40)))
    lam1, lam2 = 0.3, 0.2
    theta = apply_L(w)
    p0 = (-np.linalg.slogdet(theta + J(n))[1] + np.sum(S * theta)
          + lam1 * np.abs(w).sum())
    value = objective_P2(w, S, PenaltyParams(lam1, lam2, 0.0))
    assert value == pytest.approx(p0 + 0.5 * lam2 * w @ w, rel=1e-12)
