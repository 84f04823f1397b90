"""The stochastic q-Hahn grid model with parameters on columns, rows, and diagonals.

An N x N grid of vertices samples colored paths sequentially: boundary
multiplicities enter on the left edge row by row, then every vertex converts
its incoming pair (A, B) into an outgoing pair (C, D) with the q-Hahn weights
evaluated at (tt, ss) = (lam_{j-i}/kappa_j, lam_{j-i}/mu_i).  Colored height
functions count paths of color >= c below a facet, normalized to vanish at
(1/2, 1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as _iproduct

import numpy as np

from .qtools import comp_add, comp_interval, comp_sub, iter_box, q_pochhammer
from .weights import qhahn_weight

__all__ = [
    "QHahnModel",
    "HeightRequest",
    "PathConfiguration",
    "sample_boundary",
    "sample_vertex",
    "sample_grid",
    "height_field",
    "qmoment_statistic",
    "estimate_qmoment",
    "enumerate_exact",
    "base_case_product",
    "verify_shift_invariance",
    "Welford",
]

_BOX_CAP = 64  # outcome-table fast path bound on prod(A_c + 1)


@dataclass
class QHahnModel:
    """Grid parameters; mu has N+1 entries (column 0 drives the boundary law)."""

    q: float
    mu: tuple
    kappa: tuple
    lam: tuple
    colors: tuple  # boundary composition I with |I| = N

    _vertex_tables: dict = field(default_factory=dict, repr=False, compare=False)
    _boundary_tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.mu = tuple(self.mu)
        self.kappa = tuple(self.kappa)
        self.lam = tuple(self.lam)
        self.colors = tuple(int(c) for c in self.colors)
        n_rows = sum(self.colors)
        if len(self.mu) != n_rows + 1 or len(self.kappa) != n_rows or len(self.lam) != n_rows:
            raise ValueError("need len(mu) = N+1, len(kappa) = N, len(lam) = N with N = |I|")
        if not (0 < self.q < 1):
            raise ValueError("q must lie in (0, 1)")
        for lam_d in self.lam:
            for kap_j in self.kappa:
                for mu_i in self.mu:
                    if not (0 < lam_d < kap_j < mu_i):
                        raise ValueError("parameters must satisfy 0 < lam_d < kappa_j < mu_i")

    @property
    def size(self):
        return sum(self.colors)

    @property
    def n_colors(self):
        return len(self.colors)

    def mu_of(self, i):
        return self.mu[i]

    def kappa_of(self, j):
        return self.kappa[j - 1]

    def lam_of(self, d):
        return self.lam[d - 1]

    def row_color(self, j):
        """Color of the incoming left edge at row j (1-indexed)."""
        acc = 0
        for c, mult in enumerate(self.colors, start=1):
            acc += mult
            if j <= acc:
                return c
        raise ValueError(f"row {j} outside the grid")

    def spin_params(self, i, j):
        lam = self.lam_of(j - i)
        return lam / self.kappa_of(j), lam / self.mu_of(i)


@dataclass(frozen=True)
class HeightRequest:
    """Evaluation facets (x_a, y_a), sorted colors c_a, and the pairing permutation."""

    x2: tuple  # doubled half-integer coordinates (odd ints)
    y2: tuple
    colors: tuple
    tau: object  # Permutation

    @classmethod
    def make(cls, xs, ys, colors, tau=None):
        from .qtools import Permutation

        x2 = tuple(int(round(2 * float(x))) for x in xs)
        y2 = tuple(int(round(2 * float(y))) for y in ys)
        colors = tuple(int(c) for c in colors)
        k = len(x2)
        if tau is None:
            tau = Permutation.identity(k)
        req = cls(x2, y2, colors, tau)
        req.validate_shape()
        return req

    @property
    def k(self):
        return len(self.x2)

    def validate_shape(self):
        if not (len(self.x2) == len(self.y2) == len(self.colors) == self.tau.rank):
            raise ValueError("request components must have equal length")
        if any(v % 2 == 0 or v < 1 for v in self.x2 + self.y2):
            raise ValueError("coordinates must be positive half-integers")
        if list(self.x2) != sorted(self.x2) or list(self.y2) != sorted(self.y2, reverse=True):
            raise ValueError("need x ascending and y descending")
        if any(x > y for x, y in zip(self.x2, self.y2)):
            raise ValueError("need x_a <= y_a")
        if list(self.colors) != sorted(self.colors) or any(c < 1 for c in self.colors):
            raise ValueError("colors must be >= 1 and ascending")

    def validate_against(self, model):
        self.validate_shape()
        n_rows = model.size
        if max(self.y2) > 2 * n_rows + 1:
            raise ValueError("facet outside the sampled grid")
        if max(self.colors) > model.n_colors:
            raise ValueError("color beyond those present in the boundary composition")

    def cutoffs(self, model):
        """l_a = I_{[1, c_a - 1]}."""
        return tuple(comp_interval(model.colors, 1, c - 1) for c in self.colors)


# ---------------------------------------------------------------------------
# Boundary sampling.


def _boundary_table(model, j, tol=1e-14, cap=200000):
    key = (j, tol)
    if key in model._boundary_tables:
        return model._boundary_tables[key]
    q = model.q
    x = model.kappa_of(j) / model.mu_of(0)
    y = model.lam_of(j) / model.kappa_of(j)
    w = 1.0
    weights = [w]
    b = 0
    while b < cap:
        ratio = x * (1.0 - y * q**b) / (1.0 - q ** (b + 1))
        w *= ratio
        weights.append(w)
        b += 1
        # geometric tail bound, valid only once the ratio majorant drops below 1
        rho_bar = max(ratio, x / (1.0 - q ** (b + 1)))
        if rho_bar < 1.0 and w * rho_bar / (1.0 - rho_bar) < tol:
            break
    arr = np.array(weights)
    if (arr < 0).any():
        raise ValueError("boundary distribution has negative weights (parameter violation)")
    cum = np.cumsum(arr)
    model._boundary_tables[key] = (arr / cum[-1], cum / cum[-1])
    return model._boundary_tables[key]


def sample_boundary(model, rng):
    """Independent draws b_1..b_N of the left-boundary multiplicities."""
    out = np.empty(model.size, dtype=np.int64)
    for j in range(1, model.size + 1):
        _, cum = _boundary_table(model, j)
        out[j - 1] = int(np.searchsorted(cum, rng.random(), side="right"))
    return out


def boundary_pmf(model, j, b_max):
    probs, _ = _boundary_table(model, j)
    out = np.zeros(b_max + 1)
    upto = min(b_max + 1, len(probs))
    out[:upto] = probs[:upto]
    return out


# ---------------------------------------------------------------------------
# Vertex sampling.


def vertex_outcome_table(model, i, j, A):
    """Cumulative outgoing table for small incoming boxes (weights over D <= A)."""
    key = (i, j, A)
    tab = model._vertex_tables.get(key)
    if tab is None:
        tt, ss = model.spin_params(i, j)
        zero = tuple(0 for _ in A)
        outcomes = []
        probs = []
        for D in iter_box(A):
            w = qhahn_weight(A, zero, comp_sub(A, D), D, model.q, tt, ss)
            if w > 0:
                outcomes.append(D)
                probs.append(w)
        cum = np.cumsum(probs)
        if abs(cum[-1] - 1.0) > 1e-9:
            raise ValueError("vertex weights do not normalize (parameter violation)")
        tab = (outcomes, cum / cum[-1])
        model._vertex_tables[key] = tab
    return tab


def _sample_size_marginal(m, q, tt, ss, rng):
    """|D| ~ one-color q-Hahn law on {0..m} via a multiplicative recurrence."""
    if m == 0:
        return 0
    r = ss / tt
    p = 1.0
    for i in range(m):
        p *= (1.0 - r * q**i) / (1.0 - ss * q**i)
    table = np.empty(m + 1)
    table[0] = p
    for d in range(m):
        p *= r * (1.0 - tt * q**d) * (1.0 - q ** (m - d)) / ((1.0 - r * q ** (m - d - 1)) * (1.0 - q ** (d + 1)))
        table[d + 1] = p
    total = table.sum()
    if not (0.999999 < total < 1.000001) or (table < -1e-12).any():
        raise ValueError("size marginal fails to normalize (parameter violation)")
    return int(np.searchsorted(np.cumsum(table / total), rng.random(), side="right"))


def _split_size_among_colors(A, d, q, rng):
    """Distribute |D| = d over colors with the q-Vandermonde conditionals."""
    n = len(A)
    D = [0] * n
    rest = sum(A)
    for c in range(n):
        rest -= A[c]
        if d == 0:
            break
        lo = max(0, d - rest)
        hi = min(A[c], d)
        if lo == hi:
            u = lo
        else:
            g = np.empty(hi - lo + 1)
            g[0] = 1.0
            val = 1.0
            for u in range(lo, hi):
                val *= (1.0 - q ** (A[c] - u)) / (1.0 - q ** (u + 1))
                val *= (1.0 - q ** (d - u)) / (1.0 - q ** (rest - d + u + 1))
                val *= q ** (rest - d + 2 * u + 1)
                g[u - lo + 1] = val
            cum = np.cumsum(g)
            u = lo + int(np.searchsorted(cum / cum[-1], rng.random(), side="right"))
        D[c] = u
        d -= u
    if d != 0:
        raise RuntimeError("color split failed to exhaust |D|")
    return tuple(D)


def sample_vertex(A, B, i, j, model, rng):
    """One stochastic vertex update: returns (C, D) with C = A + B - D."""
    A = tuple(A)
    B = tuple(B)
    if sum(A) == 0:
        return B, tuple(0 for _ in A)
    box = 1
    for a in A:
        box *= a + 1
    if box <= _BOX_CAP:
        outcomes, cum = vertex_outcome_table(model, i, j, A)
        D = outcomes[int(np.searchsorted(cum, rng.random(), side="right"))]
    else:
        tt, ss = model.spin_params(i, j)
        d = _sample_size_marginal(sum(A), model.q, tt, ss, rng)
        D = _split_size_among_colors(A, d, model.q, rng)
    return comp_add(comp_sub(A, D), B), D


@dataclass
class PathConfiguration:
    """Edge compositions: A[(i, j)] vertical (i,j)->(i,j+1); B[(i, j)] horizontal."""

    n: int
    size: int
    A: dict
    B: dict

    def check_conservation(self):
        for i in range(1, self.size + 1):
            for j in range(1, self.size + 1):
                inflow = comp_add(self.A[(i, j - 1)], self.B[(i - 1, j)])
                outflow = comp_add(self.A[(i, j)], self.B[(i, j)])
                if inflow != outflow:
                    raise AssertionError(f"conservation violated at vertex {(i, j)}")
        return True


def sample_grid(model, rng):
    """Sample a full configuration: boundary first, then vertices in lex order."""
    N, n = model.size, model.n_colors
    b = sample_boundary(model, rng)
    A = {}
    B = {}
    zero = tuple(0 for _ in range(n))
    for j in range(1, N + 1):
        comp = list(zero)
        comp[model.row_color(j) - 1] = int(b[j - 1])
        B[(0, j)] = tuple(comp)
    for i in range(1, N + 1):
        A[(i, 0)] = zero
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            C, D = sample_vertex(A[(i, j - 1)], B[(i - 1, j)], i, j, model, rng)
            A[(i, j)] = C
            B[(i, j)] = D
    return PathConfiguration(n=n, size=N, A=A, B=B)


def height_field(cfg, c):
    """h_{>=c} on all facets; H[ix, iy] is the value at (ix + 1/2, iy + 1/2)."""
    N, n = cfg.size, cfg.n
    H = np.zeros((N + 1, N + 1), dtype=np.int64)
    for iy in range(1, N + 1):
        H[0, iy] = H[0, iy - 1] + comp_interval(cfg.B[(0, iy)], c, n)
    for ix in range(1, N + 1):
        for iy in range(0, N + 1):
            H[ix, iy] = H[ix - 1, iy] - comp_interval(cfg.A[(ix, iy)], c, n)
    return H


def qmoment_statistic(model, cfg, req):
    """prod_a q^{h_{>= c_{tau^{-1}(a)}}(x_a, y_a)} for one configuration."""
    fields = {c: height_field(cfg, c) for c in set(req.colors)}
    val = 1.0
    for a in range(1, req.k + 1):
        c = req.colors[req.tau.inv(a) - 1]
        ix = (req.x2[a - 1] - 1) // 2
        iy = (req.y2[a - 1] - 1) // 2
        val *= model.q ** fields[c][ix, iy]
    return val


class Welford:
    """Streaming mean/variance with an associative merge."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, x):
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    def add_many(self, xs):
        xs = np.asarray(xs, dtype=float)
        if xs.size == 0:
            return self
        other = Welford()
        other.n = xs.size
        other.mean = float(xs.mean())
        other.m2 = float(((xs - other.mean) ** 2).sum())
        return self.merge(other)

    def merge(self, other):
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return self
        n = self.n + other.n
        d = other.mean - self.mean
        self.mean += d * other.n / n
        self.m2 += other.m2 + d * d * self.n * other.n / n
        self.n = n
        return self

    @property
    def variance(self):
        return self.m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def stderr(self):
        return math.sqrt(self.variance / self.n) if self.n > 1 else 0.0


def estimate_qmoment(model, req, samples, rng):
    """Monte Carlo estimate (mean, stderr) of the joint q-moment observable."""
    req.validate_against(model)
    acc = Welford()
    for _ in range(samples):
        cfg = sample_grid(model, rng)
        acc.add(qmoment_statistic(model, cfg, req))
    return acc.mean, acc.stderr


# ---------------------------------------------------------------------------
# Exact enumeration (brute-force oracle) and the closed-form base case.


def base_case_product(model, req):
    """Closed product for requests with all x_a = 1/2 (exact for Fraction q)."""
    ell = req.cutoffs(model)
    p = tuple((y2 - 1) // 2 for y2 in req.y2)
    q = model.q
    val = 1.0 if not isinstance(q, Fraction) else Fraction(1)
    for j in range(1, model.size + 1):
        r_j = sum(1 for a in range(1, req.k + 1) if ell[req.tau.inv(a) - 1] < j <= p[a - 1])
        val *= q_pochhammer(model.kappa_of(j) / model.mu_of(0), q, r_j)
        val /= q_pochhammer(model.lam_of(j) / model.mu_of(0), q, r_j)
    return val


def _boundary_weights_raw(model, j, b_cap):
    """Unnormalized boundary weights w_b (without the infinite-product constant)."""
    q, x, y = model.q, model.kappa_of(j) / model.mu_of(0), model.lam_of(j) / model.kappa_of(j)
    w = [x**0]
    for b in range(b_cap):
        w.append(w[-1] * x * (1 - y * q**b) / (1 - q ** (b + 1)))
    ratio = x / (1 - q ** (b_cap + 1))
    if ratio >= 1:
        raise ValueError("boundary tail not geometric at this cap; raise b_cap")
    tail = w[-1] * ratio / (1 - ratio)
    return w, tail


def enumerate_exact(model, req, b_cap=None, tol=1e-10, leaf_guard=10_000_000):
    """Exact expectation of the q-moment restricted to b_j <= b_cap, plus a tail bound.

    All arithmetic follows the scalar type of the model parameters: Fraction
    parameters give an exact rational conditional expectation.
    """
    req.validate_against(model)
    N, n = model.size, model.n_colors
    q = model.q

    rows = []
    tail_total = 0.0
    for j in range(1, N + 1):
        cap = b_cap
        if cap is None:
            cap = 4
            while True:
                w, tail = _boundary_weights_raw(model, j, cap)
                if tail / float(sum(w)) < tol / (2 * N):
                    break
                cap *= 2
                if cap > 4096:
                    raise ValueError("boundary truncation cap exceeded")
        else:
            w, tail = _boundary_weights_raw(model, j, cap)
        rows.append(w)
        tail_total += float(tail) / float(sum(w))

    colors_needed = sorted(set(req.colors))
    facets = [((req.x2[a] - 1) // 2, (req.y2[a] - 1) // 2) for a in range(req.k)]
    stat_colors = [req.colors[req.tau.inv(a) - 1] for a in range(1, req.k + 1)]

    zero = tuple(0 for _ in range(n))
    tables = {}

    def outgoing(i, j, A):
        key = (i, j, A)
        tab = tables.get(key)
        if tab is None:
            tt, ss = model.spin_params(i, j)
            tab = []
            for D in iter_box(A):
                wgt = qhahn_weight(A, zero, comp_sub(A, D), D, q, tt, ss)
                if wgt != 0:
                    tab.append((D, wgt))
            tables[key] = tab
        return tab

    total_weight = 0
    total_value = 0

    b_ranges = [range(len(w)) for w in rows]
    est_leaves = 1
    for r in b_ranges:
        est_leaves *= len(r)
    if est_leaves > leaf_guard:
        raise ValueError("enumeration guard exceeded; shrink the grid or b_cap")

    A_edges = {}
    B_edges = {}

    def q_statistic():
        fields = {}
        for c in colors_needed:
            H = np.zeros((N + 1, N + 1), dtype=object)
            for iy in range(1, N + 1):
                H[0, iy] = H[0, iy - 1] + comp_interval(B_edges[(0, iy)], c, n)
            for ix in range(1, N + 1):
                for iy in range(0, N + 1):
                    H[ix, iy] = H[ix - 1, iy] - comp_interval(A_edges[(ix, iy)], c, n)
            fields[c] = H
        val = 1 if not isinstance(q, float) else 1.0
        for a in range(req.k):
            ix, iy = facets[a]
            val = val * q ** int(fields[stat_colors[a]][ix, iy])
        return val

    def recurse(idx, prob):
        nonlocal total_weight, total_value
        if idx == N * N:
            total_weight += prob
            total_value += prob * q_statistic()
            return
        i, j = divmod(idx, N)
        i, j = i + 1, j + 1
        A = A_edges[(i, j - 1)]
        B = B_edges[(i - 1, j)]
        if sum(A) == 0:
            A_edges[(i, j)] = B
            B_edges[(i, j)] = zero
            recurse(idx + 1, prob)
            return
        for D, wgt in outgoing(i, j, A):
            A_edges[(i, j)] = comp_add(comp_sub(A, D), B)
            B_edges[(i, j)] = D
            recurse(idx + 1, prob * wgt)

    for i in range(1, N + 1):
        A_edges[(i, 0)] = zero
    for bvec in _iproduct(*b_ranges):
        wprod = 1
        for j, b in enumerate(bvec, start=1):
            wprod = wprod * rows[j - 1][b]
            comp = list(zero)
            comp[model.row_color(j) - 1] = b
            B_edges[(0, j)] = tuple(comp)
        recurse(0, wprod)

    return total_value / total_weight, 2.0 * tail_total


# ---------------------------------------------------------------------------
# Shift invariance.


@dataclass
class ShiftReport:
    hypotheses_ok: bool
    detail: str
    joint: tuple  # ((mean, se) model A, (mean, se) model B)
    joint_zscore: float
    marginals: list  # per a: ((mean, se), (mean, se), z)
    integral_a: complex
    integral_b: complex

    @property
    def integral_diff(self):
        return abs(self.integral_a - self.integral_b)


def _signature_classes(intervals, universe):
    classes = {}
    for idx in universe:
        sig = frozenset(a for a, (lo, hi) in enumerate(intervals) if lo <= idx <= hi)
        classes.setdefault(sig, []).append(idx)
    return classes


def _class_check(intervals_a, params_a, intervals_b, params_b, universe_a, universe_b):
    ca = _signature_classes(intervals_a, universe_a)
    cb = _signature_classes(intervals_b, universe_b)
    if set(ca) != set(cb):
        return False, "interval signature classes differ"
    for sig in ca:
        va = sorted(params_a[i] for i in ca[sig])
        vb = sorted(params_b[i] for i in cb[sig])
        if len(va) != len(vb) or any(abs(x - y) > 1e-12 for x, y in zip(va, vb)):
            return False, f"parameter multiset mismatch on class {sorted(sig)}"
    return True, "ok"


def validate_shift_hypotheses(model_a, req_a, model_b, req_b):
    """Check the interval-bijection hypotheses for a pair of (model, request)."""
    for model, req in ((model_a, req_a), (model_b, req_b)):
        if any(c != 1 for c in model.colors):
            return False, "left boundary must carry distinct colors (I = (1,...,1))"
        req.validate_against(model)
        for a in range(1, req.k + 1):
            if (req.y2[req.tau(a) - 1] - req.x2[req.tau(a) - 1]) // 2 < req.colors[a - 1]:
                return False, f"hypothesis y_tau(a) - x_tau(a) >= c_a fails at a={a}"
    if req_a.k != req_b.k:
        return False, "request sizes differ"
    N = model_a.size
    if model_b.size != N:
        return False, "grid sizes differ"

    def intervals(model, req):
        rows, cols, diags = [], [], []
        for a in range(1, req.k + 1):
            c = req.colors[a - 1]
            x2 = req.x2[req.tau(a) - 1]
            y2 = req.y2[req.tau(a) - 1]
            rows.append((c, (y2 - 1) // 2))
            cols.append((0, (x2 - 1) // 2))
            diags.append((c, (y2 - x2) // 2))
        return rows, cols, diags

    ra, ca_, da = intervals(model_a, req_a)
    rb, cb_, db = intervals(model_b, req_b)
    checks = [
        _class_check(ra, {j: model_a.kappa_of(j) for j in range(1, N + 1)}, rb,
                     {j: model_b.kappa_of(j) for j in range(1, N + 1)},
                     range(1, N + 1), range(1, N + 1)),
        _class_check(ca_, {i: model_a.mu_of(i) for i in range(0, N + 1)}, cb_,
                     {i: model_b.mu_of(i) for i in range(0, N + 1)},
                     range(0, N + 1), range(0, N + 1)),
        _class_check(da, {d: model_a.lam_of(d) for d in range(1, N + 1)}, db,
                     {d: model_b.lam_of(d) for d in range(1, N + 1)},
                     range(1, N + 1), range(1, N + 1)),
    ]
    for ok, msg in checks:
        if not ok:
            return False, msg
    return True, "ok"


def verify_shift_invariance(model_a, req_a, model_b, req_b, samples, rng, nodes=64):
    """Empirical joint q-moments plus the two contour-integral values."""
    ok, msg = validate_shift_hypotheses(model_a, req_a, model_b, req_b)
    if not ok:
        raise ValueError(f"shift-invariance hypotheses fail: {msg}")

    def run(model, req):
        joint = Welford()
        margins = [Welford() for _ in range(req.k)]
        colors_needed = sorted(set(req.colors))
        for _ in range(samples):
            cfg = sample_grid(model, rng)
            fields = {c: height_field(cfg, c) for c in colors_needed}
            prod = 1.0
            for a in range(1, req.k + 1):
                c = req.colors[a - 1]
                ix = (req.x2[req.tau(a) - 1] - 1) // 2
                iy = (req.y2[req.tau(a) - 1] - 1) // 2
                v = model.q ** fields[c][ix, iy]
                margins[a - 1].add(v)
                prod *= v
            joint.add(prod)
        return joint, margins

    ja, margins_a = run(model_a, req_a)
    jb, margins_b = run(model_b, req_b)
    ma, sa, mb, sb = ja.mean, ja.stderr, jb.mean, jb.stderr
    z_joint = abs(ma - mb) / math.hypot(sa, sb) if (sa or sb) else 0.0
    marginals = []
    for wa, wb in zip(margins_a, margins_b):
        z = abs(wa.mean - wb.mean) / math.hypot(wa.stderr, wb.stderr) if (wa.stderr or wb.stderr) else 0.0
        marginals.append(((wa.mean, wa.stderr), (wb.mean, wb.stderr), z))

    from .moments import build_contours, qmoment_integral

    ia = qmoment_integral(model_a, req_a, build_contours(model_a, req_a.k), nodes=nodes)
    ib = qmoment_integral(model_b, req_b, build_contours(model_b, req_b.k), nodes=nodes)

    return ShiftReport(
        hypotheses_ok=True,
        detail=msg,
        joint=((ma, sa), (mb, sb)),
        joint_zscore=z_joint,
        marginals=marginals,
        integral_a=ia,
        integral_b=ib,
    )
