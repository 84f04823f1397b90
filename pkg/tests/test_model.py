import math
from fractions import Fraction

import numpy as np
import pytest

from qhahn_polymer.model import (
    HeightRequest,
    PathConfiguration,
    QHahnModel,
    Welford,
    _split_size_among_colors,
    base_case_product,
    boundary_pmf,
    enumerate_exact,
    estimate_qmoment,
    height_field,
    sample_grid,
    sample_vertex,
    vertex_outcome_table,
)
from qhahn_polymer.qtools import Permutation, comp_interval, q_pochhammer_inf, spawn_rng


def small_model(q=0.55, n_rows=2, colors=(1, 1)):
    mu = tuple(2.0 + 0.15 * i for i in range(n_rows + 1))
    kappa = tuple(1.1 + 0.1 * j for j in range(n_rows))
    lam = tuple(0.2 + 0.05 * d for d in range(n_rows))
    return QHahnModel(q=q, mu=mu, kappa=kappa, lam=lam, colors=colors)


def test_model_validates_ordering():
    with pytest.raises(ValueError):
        QHahnModel(q=0.5, mu=(1.0, 1.0), kappa=(1.2,), lam=(0.1,), colors=(1,))


def test_boundary_pmf_normalizes_and_p0():
    m = small_model()
    for j in (1, 2):
        pmf = boundary_pmf(m, j, 200)
        assert abs(pmf.sum() - 1.0) < 1e-12
        p0 = q_pochhammer_inf(m.kappa_of(j) / m.mu_of(0), m.q) / q_pochhammer_inf(
            m.lam_of(j) / m.mu_of(0), m.q
        )
        assert abs(pmf[0] - p0) < 1e-12


def test_boundary_concentrates_when_lam_近_kappa():
    m = QHahnModel(q=0.5, mu=(2.0, 2.1, 2.2), kappa=(1.0, 1.05), lam=(0.9999999, 0.999999), colors=(1, 1))
    pmf = boundary_pmf(m, 1, 50)
    assert pmf[0] > 0.999999


def test_sample_vertex_trivial_when_A_zero():
    m = small_model()
    rng = spawn_rng(1)
    C, D = sample_vertex((0, 0), (3, 1), 1, 2, m, rng)
    assert C == (3, 1) and D == (0, 0)


def test_vertex_table_hand_case_n1():
    m = small_model(colors=(2,), n_rows=2)
    i, j = 1, 2
    tt, ss = m.spin_params(i, j)
    outcomes, cum = vertex_outcome_table(m, i, j, (1,))
    probs = np.diff(np.concatenate([[0.0], cum]))
    table = dict(zip(outcomes, probs))
    p1 = (ss / tt) * (1 - tt) / (1 - ss)
    p0 = (1 - ss / tt) / (1 - ss)
    assert abs(table[(1,)] - p1) < 1e-12
    assert abs(table[(0,)] - p0) < 1e-12


def test_vertex_tables_nonnegative_normalized():
    m = small_model(colors=(1, 1), n_rows=2)
    for A in [(0, 1), (2, 1), (3, 2)]:
        outcomes, cum = vertex_outcome_table(m, 1, 2, A)
        assert abs(cum[-1] - 1.0) < 1e-12


def test_sequential_sampler_matches_table_frequencies():
    # force the sequential path and compare against the outcome table at 4 sigma
    m = small_model(colors=(1, 1, 1), n_rows=3)
    A = (2, 1, 2)
    i, j = 1, 3
    tt, ss = m.spin_params(i, j)
    outcomes, cum = vertex_outcome_table(m, i, j, A)
    probs = np.diff(np.concatenate([[0.0], cum]))
    rng = spawn_rng(7)
    from qhahn_polymer.model import _sample_size_marginal

    counts = {}
    n_draws = 40000
    for _ in range(n_draws):
        d = _sample_size_marginal(sum(A), m.q, tt, ss, rng)
        D = _split_size_among_colors(A, d, m.q, rng)
        counts[D] = counts.get(D, 0) + 1
    for D, p in zip(outcomes, probs):
        if p < 1e-4:
            continue
        emp = counts.get(D, 0) / n_draws
        sigma = math.sqrt(p * (1 - p) / n_draws)
        assert abs(emp - p) < 4.5 * sigma + 1e-12


def test_sample_grid_conservation_and_interior():
    m = small_model(q=0.45, n_rows=3, colors=(1, 2))
    rng = spawn_rng(3)
    cfg = sample_grid(m, rng)
    cfg.check_conservation()
    N = m.size
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i > j:
                assert cfg.A[(i, j)] == (0, 0)
                assert cfg.B[(i, j)] == (0, 0)
    # per-color path count across the anti-diagonal cut is conserved
    for c in range(m.n_colors):
        entered = sum(cfg.B[(0, j)][c] for j in range(1, N + 1))
        exited = sum(cfg.A[(i, N)][c] for i in range(1, N + 1))
        assert entered == exited


def test_sample_grid_deterministic_under_seed():
    m = small_model(n_rows=3, colors=(3,))
    cfg1 = sample_grid(m, spawn_rng(99))
    cfg2 = sample_grid(m, spawn_rng(99))
    assert cfg1.A == cfg2.A and cfg1.B == cfg2.B


def figure_configuration():
    """Hand-checked configuration with I = (1, 2, 1), N = 4, n = 3."""
    z = (0, 0, 0)
    A = {(i, j): z for i in range(1, 5) for j in range(0, 5)}
    B = {(i, j): z for i in range(0, 5) for j in range(1, 5)}
    A.update({
        (1, 1): (2, 0, 0), (1, 2): (1, 3, 0), (1, 3): (1, 2, 0), (1, 4): (0, 1, 1),
        (2, 2): (1, 0, 0), (2, 3): (0, 2, 0), (2, 4): (1, 2, 0),
        (3, 3): (1, 0, 0), (3, 4): (0, 1, 0), (4, 4): (1, 0, 0),
    })
    B.update({
        (0, 1): (2, 0, 0), (0, 2): (0, 3, 0), (0, 3): (0, 1, 0), (0, 4): (0, 0, 1),
        (1, 2): (1, 0, 0), (1, 3): (0, 2, 0), (1, 4): (1, 1, 0),
        (2, 3): (1, 0, 0), (2, 4): (0, 1, 0), (3, 4): (1, 0, 0),
    })
    return PathConfiguration(n=3, size=4, A=A, B=B)


def test_height_field_reproduces_annotated_grid():
    cfg = figure_configuration()
    cfg.check_conservation()
    H = height_field(cfg, 2)
    expected_cols = {
        0: [0, 0, 3, 4, 5],
        1: [0, 0, 0, 2, 3],
        2: [0, 0, 0, 0, 1],
        3: [0, 0, 0, 0, 0],
        4: [0, 0, 0, 0, 0],
    }
    for ix, col in expected_cols.items():
        assert list(H[ix, :]) == col


def test_height_field_propagation_order_free():
    cfg = figure_configuration()
    n, N = cfg.n, cfg.size
    for c in (1, 2, 3):
        H = height_field(cfg, c)
        # row-major reconstruction: go right along y = 1/2 first, then up
        H2 = np.zeros_like(H)
        for ix in range(1, N + 1):
            H2[ix, 0] = H2[ix - 1, 0] - comp_interval(cfg.A[(ix, 0)], c, n)
        for iy in range(1, N + 1):
            for ix in range(0, N + 1):
                H2[ix, iy] = H2[ix, iy - 1] + comp_interval(cfg.B[(ix, iy)], c, n)
        assert np.array_equal(H, H2)


def test_height_zero_below_diagonal_band():
    m = small_model(q=0.4, n_rows=3, colors=(1, 1, 1))
    rng = spawn_rng(21)
    for _ in range(20):
        cfg = sample_grid(m, rng)
        for c in (1, 2, 3):
            H = height_field(cfg, c)
            for ix in range(4):
                for iy in range(4):
                    if iy - ix < c:
                        assert H[ix, iy] == 0
    # h_{>=1} on the left boundary equals the partial sums of b_j
    cfg = sample_grid(m, rng)
    H1 = height_field(cfg, 1)
    acc = 0
    for iy in range(1, 4):
        acc += sum(cfg.B[(0, iy)])
        assert H1[0, iy] == acc


def test_height_nonincreasing_in_color():
    m = small_model(q=0.5, n_rows=3, colors=(1, 1, 1))
    rng = spawn_rng(33)
    for _ in range(10):
        cfg = sample_grid(m, rng)
        fields = [height_field(cfg, c) for c in (1, 2, 3)]
        for lo, hi in zip(fields[1:], fields[:-1]):
            assert (lo <= hi).all()


def test_qmoment_diagonal_is_one():
    m = small_model(n_rows=2, colors=(2,))
    req = HeightRequest.make([1.5, 1.5], [1.5, 1.5], [1, 1], Permutation.identity(2))
    mean, se = estimate_qmoment(m, req, 50, spawn_rng(5))
    assert mean == 1.0 and se == 0.0


def test_qmoment_base_case_mc_vs_product():
    m = small_model(q=0.5, n_rows=2, colors=(1, 1))
    req = HeightRequest.make([0.5], [2.5], [1], Permutation.identity(1))
    target = base_case_product(m, req)
    mean, se = estimate_qmoment(m, req, 20000, spawn_rng(11))
    assert abs(mean - target) < 4 * se


def test_enumerate_exact_1x1_hand_case():
    q = Fraction(1, 2)
    m = QHahnModel(q=q, mu=(Fraction(2), Fraction(3)), kappa=(Fraction(1),),
                   lam=(Fraction(1, 4),), colors=(1,))
    req = HeightRequest.make([0.5], [1.5], [1], Permutation.identity(1))
    val, tail = enumerate_exact(m, req, b_cap=220)
    # E[q^{b_1}] = (1 - kappa/mu0)/(1 - lam/mu0) by the closed product
    expect = (1 - Fraction(1, 2)) / (1 - Fraction(1, 8))
    assert isinstance(val, Fraction)
    assert abs(float(val - expect)) < 1e-25
    assert tail < 1e-20


def test_enumerate_exact_matches_mc_2x2():
    m = small_model(q=0.5, n_rows=2, colors=(1, 1))
    req = HeightRequest.make([0.5, 1.5], [2.5, 1.5], [1, 2], Permutation.identity(2))
    val, tail = enumerate_exact(m, req, tol=1e-10)
    assert tail < 1e-9
    mean, se = estimate_qmoment(m, req, 30000, spawn_rng(13))
    assert abs(mean - val) < 4 * se


def test_request_validation():
    m = small_model(n_rows=2, colors=(1, 1))
    with pytest.raises(ValueError):
        HeightRequest.make([1.5, 0.5], [2.5, 2.5], [1, 1])  # x not ascending
    with pytest.raises(ValueError):
        HeightRequest.make([0.5], [2.5], [5]).validate_against(m)  # bad color
    with pytest.raises(ValueError):
        HeightRequest.make([0.5], [1.0], [1])  # not a half-integer


def test_welford_merge_matches_numpy():
    rng = np.random.default_rng(2)
    xs = rng.normal(size=1000)
    w1, w2 = Welford(), Welford()
    for x in xs[:400]:
        w1.add(float(x))
    for x in xs[400:]:
        w2.add(float(x))
    w1.merge(w2)
    assert abs(w1.mean - xs.mean()) < 1e-12
    assert abs(w1.variance - xs.var(ddof=1)) < 1e-12
