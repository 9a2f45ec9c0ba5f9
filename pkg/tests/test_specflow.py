"""Tests for spectral flow of symmetric-matrix paths.

Oracle: the net count of sorted-eigenvalue branches crossing the shifted
counting line on a dense grid.  Zero endpoint eigenvalues sit below the
line, so a branch departing upward from zero counts +1 and a branch
arriving at zero from above counts -1; branches that stay on one side
contribute nothing.
"""

import numpy as np
import pytest

from swflow import specflow as sf


def branch_crossing_oracle(values, delta):
    """Net signed crossings of the level `delta` by sorted eigenvalue
    branches sampled on a dense grid (counts transitions per interval)."""
    eigs = np.array([np.linalg.eigvalsh(v) for v in values])
    below = eigs < delta
    # +1 when a branch leaves the lower half-plane, -1 when it enters
    trans = below[:-1].astype(int) - below[1:].astype(int)
    return int(trans.sum())


def affine(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    b = rng.standard_normal((n, n))
    return sf.HermitianPath.affine(scale * (a + a.T), b + b.T, -1.0, 1.0)


# ----------------------------------------------------- frozen examples


def test_single_upward_crossing():
    path = sf.HermitianPath.affine(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]), -1.0, 1.0)
    rep = sf.spectral_flow(path)
    assert rep.sf == 1
    assert len(rep.crossings) == 1
    rec = rep.crossings[0]
    assert rec.kernel_dim == 1
    assert rec.crossing_signature == 1
    assert rec.crossing_det_sign == 1
    # the shifted eigenvalue t crosses the line at t = delta
    assert abs(rec.t - rep.delta_used) < 1e-8


def test_opposite_crossings_cancel():
    path = sf.HermitianPath.affine(np.zeros((2, 2)), np.diag([1.0, -1.0]), -1.0, 1.0)
    rep = sf.spectral_flow(path)
    assert rep.sf == 0
    sigs = [r.crossing_signature for r in sorted(rep.crossings, key=lambda r: r.t)]
    assert sigs == [-1, 1]


def test_constant_families_have_zero_flow():
    for mat in [np.zeros((3, 3)), np.diag([1.0, -2.0, 3.0])]:
        path = sf.HermitianPath.affine(mat, np.zeros((3, 3)), 0.0, 1.0)
        rep = sf.spectral_flow(path)
        assert rep.sf == 0
        assert rep.crossings == []


def test_zero_endpoint_convention_quartet():
    # eigenvalues starting or ending exactly at zero pin the convention:
    # zero counts as below the line
    one = np.eye(1)

    def run(a0, b0):
        path = sf.HermitianPath.affine(a0 * one, b0 * one, 0.0, 1.0)
        return sf.spectral_flow(path).sf

    assert run(0.0, 1.0) == 1  # departs zero upward
    assert run(0.0, -1.0) == 0  # departs zero downward
    assert run(1.0, -1.0) == -1  # arrives at zero from above
    assert run(-1.0, 1.0) == 0  # arrives at zero from below


def test_identity_risers_count_dimension():
    for n in range(1, 5):
        path = sf.HermitianPath.affine(np.zeros((n, n)), np.eye(n), 0.0, 1.0)
        assert sf.spectral_flow(path).sf == n


def test_degenerate_double_crossing():
    path = sf.HermitianPath.affine(np.zeros((2, 2)), np.eye(2), -1.0, 1.0)
    rep = sf.spectral_flow(path)
    assert rep.sf == 2


# ----------------------------------------------------- oracle agreement


def test_engine_matches_branch_oracle_on_random_paths():
    rng = np.random.default_rng(40)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        c = rng.standard_normal((n, n))

        def f(t, a=a, b=b, c=c):
            m = a + t * b + np.sin(2.0 * t) * c
            return m + m.T

        path = sf.HermitianPath.from_callable(f, -1.0, 1.0, num_samples=21)
        rep = sf.spectral_flow(path)
        dense = np.linspace(-1.0, 1.0, 801)
        want = branch_crossing_oracle([f(t) for t in dense], rep.delta_used)
        assert rep.sf == want
        assert rep.sf == sum(r.crossing_signature for r in rep.crossings)


def test_flow_independent_of_delta_cap_and_grid():
    rng = np.random.default_rng(41)
    for _ in range(10):
        a = rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4))
        base = sf.HermitianPath.affine(a + a.T, b + b.T, -1.0, 1.0)
        rep = sf.spectral_flow(base)
        for cap in [0.3, 0.05, 0.007]:
            cfg = sf.SpectralFlowConfig(delta_cap=cap)
            assert sf.spectral_flow(base, cfg).sf == rep.sf
        dense = sf.HermitianPath.from_callable(
            lambda t: base.evaluate(t), -1.0, 1.0, num_samples=67
        )
        assert sf.spectral_flow(dense).sf == rep.sf


def test_endpoint_count_mode_matches_engine():
    rng = np.random.default_rng(42)
    cfg = sf.SpectralFlowConfig(endpoint_count_only=True)
    for _ in range(20):
        path = affine(rng, int(rng.integers(2, 8)))
        fast = sf.spectral_flow(path, cfg)
        full = sf.spectral_flow(path)
        assert fast.sf == full.sf
        assert fast.crossings == []
        assert fast.method == "endpoint-count"
        assert full.method == "crossing"


# ------------------------------------------------------------- axioms


def test_direct_sum_example_and_additivity():
    p1 = sf.HermitianPath.affine(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]), -1.0, 1.0)
    p2 = sf.HermitianPath.affine(np.diag([0.0, 1.0]), np.diag([-1.0, 0.0]), -1.0, 1.0)
    assert sf.spectral_flow(p1).sf == 1
    assert sf.spectral_flow(p2).sf == -1
    assert sf.sf_direct_sum(p1, p2) == 0

    rng = np.random.default_rng(43)
    for _ in range(10):
        q1 = affine(rng, 3)
        q2 = affine(rng, 4)
        total = sf.sf_direct_sum(q1, q2)
        assert total == sf.spectral_flow(q1).sf + sf.spectral_flow(q2).sf


def test_direct_sum_with_constant_block():
    rng = np.random.default_rng(44)
    p1 = affine(rng, 3)
    c = rng.standard_normal((2, 2))
    p2 = sf.HermitianPath.affine(c + c.T + 3.0 * np.eye(2), np.zeros((2, 2)), -1.0, 1.0)
    assert sf.sf_direct_sum(p1, p2) == sf.spectral_flow(p1).sf


def test_concatenation_additive_and_reversal_cancels():
    rng = np.random.default_rng(45)
    for _ in range(10):
        a = rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4))
        c = rng.standard_normal((4, 4))
        a, b, c = a + a.T, b + b.T, c + c.T
        p1 = sf.HermitianPath.affine(a, b, 0.0, 1.0)
        p2 = sf.HermitianPath.affine(a + b, c, 0.0, 1.0)
        joined = sf.sf_concat(p1, p2)
        assert joined == sf.spectral_flow(p1).sf + sf.spectral_flow(p2).sf
    p = affine(rng, 4)
    back = sf.HermitianPath.from_callable(
        lambda t: p.evaluate(p.t_samples[0] + p.t_samples[-1] - t),
        p.t_samples[0],
        p.t_samples[-1],
    )
    assert sf.sf_concat(p, back) == 0


def test_concat_rejects_endpoint_mismatch():
    p1 = sf.HermitianPath.affine(np.eye(2), np.eye(2), 0.0, 1.0)
    p2 = sf.HermitianPath.affine(np.eye(2), np.eye(2), 0.0, 1.0)
    with pytest.raises(ValueError):
        sf.sf_concat(p1, p2)


def test_homotopy_invariance_random():
    rng = np.random.default_rng(46)
    for _ in range(10):
        n = 4
        a = rng.standard_normal((n, n))
        b = rng.standard_normal((n, n))
        c = rng.standard_normal((n, n))
        a, b, c = a + a.T, b + b.T, c + c.T

        def edge(s):
            def f(t):
                return a + t * b + s * t * (1.0 - t) * c

            return sf.HermitianPath.from_callable(f, 0.0, 1.0)

        assert sf.spectral_flow(edge(0.0)).sf == sf.spectral_flow(edge(1.0)).sf


# ------------------------------------------------- realified complex


def test_realified_path_doubles_flow_and_is_even():
    t_grid = np.linspace(-1.0, 1.0, 21)
    vals = np.array([np.diag([t + 0.0j, 1.0 + 0.0j]) for t in t_grid])
    path = sf.HermitianPath.from_samples(t_grid, vals)
    assert path.realified
    assert path.values.shape == (21, 4, 4)
    assert sf.spectral_flow(path).sf == 2

    rng = np.random.default_rng(47)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a = a + a.conj().T
        b = b + b.conj().T
        grid = np.linspace(-1.0, 1.0, 33)
        vals = np.array([a + t * b for t in grid])
        rep = sf.spectral_flow(sf.HermitianPath.from_samples(grid, vals))
        assert rep.sf % 2 == 0


def test_rejects_asymmetric_samples():
    grid = np.array([0.0, 1.0])
    vals = np.array([np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]])])
    with pytest.raises(ValueError):
        sf.HermitianPath.from_samples(grid, vals)


# ---------------------------------------------------- crossing operator


def test_crossing_operator_examples():
    p = sf.HermitianPath.affine(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]), -1.0, 1.0)
    c = sf.crossing_operator(p, 0.0, tol=1e-8)
    assert c.shape == (1, 1)
    assert c[0, 0] == pytest.approx(1.0, abs=1e-8)

    q = sf.HermitianPath.affine(np.zeros((2, 2)), np.diag([1.0, -1.0]), -1.0, 1.0)
    cq = sf.crossing_operator(q, 0.0, tol=1e-8)
    assert sorted(np.linalg.eigvalsh(cq).round(8)) == [-1.0, 1.0]

    r = sf.HermitianPath.affine(np.eye(2), np.zeros((2, 2)), -1.0, 1.0)
    assert sf.crossing_operator(r, 0.5, tol=1e-8).shape == (0, 0)


# ------------------------------------------------ degenerate tracking


def test_track_linear_branches():
    path = sf.HermitianPath.affine(np.zeros((2, 2)), np.diag([1.0, 2.0]), -0.5, 0.5)
    out = sf.track_degenerate_eigenvalue(path)
    i = np.argmin(np.abs(out.t_samples))
    assert np.allclose(out.eigenvalues[i], [0.0, 0.0], atol=1e-12)
    for j, slope in enumerate([1.0, 2.0]):
        assert np.allclose(out.eigenvalues[:, j], slope * out.t_samples, atol=1e-10)
    assert np.allclose(out.second_derivatives, [0.0, 0.0], atol=1e-6)


def test_track_rotating_family_follows_branches_through_zero():
    # conjugation by a rotation keeps the eigenvalues at exactly +-t, so
    # the tracked branches must stay linear through the crossing and the
    # curvatures must vanish
    def f(t):
        c, s = np.cos(3.0 * t), np.sin(3.0 * t)
        r = np.array([[c, -s], [s, c]])
        return t * (r.T @ np.diag([1.0, -1.0]) @ r)

    path = sf.HermitianPath.from_callable(f, -0.4, 0.4, num_samples=81)
    out = sf.track_degenerate_eigenvalue(path)
    order = np.argsort(out.eigenvalue_slopes)
    assert np.allclose(out.eigenvalue_slopes[order], [-1.0, 1.0], atol=1e-8)
    for j, slope in zip(order, [-1.0, 1.0]):
        assert np.allclose(out.eigenvalues[:, j], slope * out.t_samples, atol=1e-8)
    assert np.max(np.abs(out.second_derivatives)) < 1e-4


def test_track_second_derivative_analytic_oracle():
    # for A(t) = t B + t^2 C with B = diag(b) simple, perturbation theory
    # gives the exact curvature 2 C_jj of branch j
    rng = np.random.default_rng(48)
    b = np.diag([1.0, -0.5, 2.0])
    c = rng.standard_normal((3, 3))
    c = c + c.T
    path = sf.HermitianPath.from_callable(
        lambda t: t * b + t * t * c, -0.3, 0.3, num_samples=121
    )
    out = sf.track_degenerate_eigenvalue(path)
    want = 2.0 * np.diag(c)[np.argsort(np.diag(b))]
    assert np.allclose(out.second_derivatives, want, atol=1e-4)


def test_track_flat_branch_curvature():
    path = sf.HermitianPath.from_callable(
        lambda t: np.diag([t**2, t]), -0.5, 0.5, num_samples=101
    )
    out = sf.track_degenerate_eigenvalue(path)
    # branch ordering follows the slopes of the derivative at zero
    slopes = out.eigenvalue_slopes
    flat = int(np.argmin(np.abs(slopes)))
    assert abs(out.second_derivatives[flat] - 2.0) < 1e-4
    assert abs(out.second_derivatives[1 - flat]) < 1e-4


def test_track_requires_zero_start_and_simple_derivative():
    bad = sf.HermitianPath.affine(np.eye(2), np.eye(2), -0.5, 0.5)
    with pytest.raises(ValueError):
        sf.track_degenerate_eigenvalue(bad)
    degenerate = sf.HermitianPath.affine(np.zeros((2, 2)), np.eye(2), -0.5, 0.5)
    with pytest.raises(ValueError):
        sf.track_degenerate_eigenvalue(degenerate)
