import math

import numpy as np
import pytest

from dwvertex.arctic import (
    DensityProfile,
    GapSpec,
    assemble_arctic,
    beta_ranges,
    branch_NILP,
    branch_SE,
    branch_SW,
    density_from_endpoints,
    endpoints_from_density,
    find_tstar,
    gap_branches,
    geodesic,
    limit_point,
    moments_q,
    nilp_point,
    q_branches,
    shear_point,
    tangent_geodesic,
    tropical_curve,
    x0,
    x0_q,
)
from dwvertex.model import DomainError

UNIFORM = DensityProfile.uniform()
GAPPED = DensityProfile.with_gaps([(0.25, 1.0)])
TWO_GAPS = DensityProfile.with_gaps([(0.25, 1.0), (0.5, 1.0)])
FROZEN = DensityProfile.frozen_ends(1 / 16, 1 / 4)


def off_pole_grid(alpha, q=1.0, n=100, margin=1e-3):
    ranges = beta_ranges(alpha, q)
    top = max(hi for _, hi in ranges)
    cand = np.linspace(-3.0, 2.0 * top + 3.0, 20 * n)
    ok = [t for t in cand if all(not (lo - margin <= t <= hi + margin) for lo, hi in ranges)]
    step = max(1, len(ok) // n)
    return ok[::step][:n]


# ---------------------------------------------------------------- profiles


def test_profile_queries():
    assert GAPPED(0.25) == 1.25 and GAPPED.left(0.25) == 0.25
    assert GAPPED.gaps() == [GapSpec(0.25, 1.0)]
    assert GAPPED.total == 2.0
    assert GAPPED.integral() == pytest.approx(0.5 + 0.75)
    assert FROZEN.plateaus() == [(0.0, 1 / 16, 0.0), (0.75, 1.0, 0.6875)]
    d = FROZEN.reflected()
    for u in np.linspace(0, 1, 17):
        assert d(u) == pytest.approx(FROZEN.total - FROZEN.left(1 - u), abs=1e-15)


@pytest.mark.parametrize(
    "points",
    [
        [(0, 0), (0.5, 0.7), (0.4, 0.9)],  # abscissae go back
        [(0, 0.1), (1, 1)],  # alpha(0) != 0
        [(0, 0), (0.5, 0.5), (1, 0.2)],  # decreasing
        [(0, 0), (1, 1), (1, 2)],  # jump at the right end
    ],
)
def test_invalid_profiles(points):
    with pytest.raises(DomainError):
        DensityProfile.piecewise_linear(points)


def test_gapspec_validation():
    with pytest.raises(DomainError):
        GapSpec(0.0, 1.0)
    with pytest.raises(DomainError):
        GapSpec(0.5, 0.0)


def test_density_from_endpoints_examples():
    a = [2 * i for i in range(9)]
    prof = density_from_endpoints(a)
    assert len(prof.segments) == 1 and prof.segments[0].slope == pytest.approx(2.0)
    n, k, m = 8, 2, 8
    a = [i for i in range(k + 1)] + [k + m + i for i in range(1, n - k + 1)]
    prof = density_from_endpoints(a)
    assert len(prof.segments) == 2
    assert prof.gaps() == [GapSpec(k / n, m / n)]
    single = density_from_endpoints([0, 3])
    assert single(0.5) == 1.5 and single.total == 3.0


def test_endpoints_from_density():
    assert endpoints_from_density(UNIFORM, 4) == (0, 1, 2, 3, 4)
    a = endpoints_from_density(FROZEN, 16)
    assert a[:2] == (0, 0) and a.count(a[-1]) == 5
    assert all(y >= x for x, y in zip(a, a[1:]))
    n = 40
    assert endpoints_from_density(GAPPED, n)[10:12] == (10, 51)


@pytest.mark.parametrize("alpha", [UNIFORM, GAPPED, TWO_GAPS, FROZEN, DensityProfile.clump(0.25, 0.25, 0.25)])
def test_density_round_trip(alpha):
    for n in (20, 80, 320):
        back = density_from_endpoints(endpoints_from_density(alpha, n), n)
        us = np.linspace(0, 1, 1001)
        err = max(abs(back(u) - alpha(u)) for u in us if all(abs(u - g.kappa) > 1.5 / n for g in alpha.gaps()))
        assert err <= 2.0 / n


# ---------------------------------------------------------------- x0


CLOSED_Q1 = [
    (UNIFORM, lambda t: math.sqrt(1 - 2 / t)),
    (DensityProfile.uniform(2), lambda t: float(np.cbrt(1 - 3 / t))),
    (GAPPED, lambda t: math.sqrt((1 - 0.5 / t) / (1 - 1.5 / (3 - t)))),
    (
        TWO_GAPS,
        lambda t: math.prod(
            math.sqrt((1 + 2 * k1 / (M - t)) / (1 + 2 * k0 / (M - t)))
            for k0, k1, M in ((0, 0.25, 0), (0.25, 0.5, 1), (0.5, 1, 2))
        ),
    ),
    (
        FROZEN,
        lambda t, k=1 / 16, l=1 / 4: (1 - k / t)
        * (t - 2 + l + k)
        / (t - 2 + 2 * l + k)
        * math.sqrt((t - 2 + 2 * l + k) / (t - k)),
    ),
]


@pytest.mark.parametrize("case", range(len(CLOSED_Q1)))
def test_x0_closed_forms(case):
    alpha, f = CLOSED_Q1[case]
    grid = off_pole_grid(alpha)
    for t in grid:
        assert x0(alpha, t)[0] == pytest.approx(f(t), rel=1e-9)


def test_x0_quadrature_path_matches_closed_form():
    smooth = DensityProfile.from_function(lambda u: u)
    smooth_gap = DensityProfile.from_function(lambda u: u if u < 0.25 else u + 1.0, breaks=(0.25,))
    for prof, ref in ((smooth, UNIFORM), (smooth_gap, GAPPED)):
        for t in off_pole_grid(ref, n=20, margin=0.05):
            assert x0(prof, t)[0] == pytest.approx(x0(ref, t)[0], rel=1e-9)
        for t in off_pole_grid(ref, 2.0, n=20, margin=0.05):
            assert x0_q(prof, t, 2.0)[0] == pytest.approx(x0_q(ref, t, 2.0)[0], rel=1e-9)


def test_x0_pole_crossing():
    for t in (0.0, 1.0, 2.0):
        with pytest.raises(DomainError):
            x0(UNIFORM, t)
    with pytest.raises(DomainError):
        x0(GAPPED, 0.4)
    with pytest.raises(DomainError):
        x0_q(UNIFORM, 2.0, 2.0)


def _fd_check(f, t, h):
    v, d = f(t)
    fd = (f(t + h)[0] - f(t - h)[0]) / (2 * h)
    assert d == pytest.approx(fd, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("alpha", [UNIFORM, GAPPED, TWO_GAPS, FROZEN])
def test_derivatives_match_finite_differences(alpha):
    for t in off_pole_grid(alpha, n=30, margin=0.05):
        _fd_check(lambda s: x0(alpha, s), t, 1e-5)
    for q in (0.5, 2.0, 5.0):
        for t in off_pole_grid(alpha, q, n=30, margin=0.05):
            _fd_check(lambda s: x0_q(alpha, s, q), t, 1e-6 * max(1.0, abs(t)))


K, L, MU = 0.25, 0.25, 1.0
CLOSED_Q = [
    (UNIFORM, lambda t, q: math.sqrt((1 - t / q**2) / (1 - t))),
    (
        GAPPED,
        lambda t, q: math.sqrt((1 - t * q ** (-2 * K)) / (1 - t) * (1 - t * q ** (-2 - MU)) / (1 - t * q ** (-2 * K - MU))),
    ),
    (
        DensityProfile.clump(K, L),
        lambda t, q: math.sqrt(
            (1 - q ** (-2 * K - L) * t) / (1 - t) * (1 - q ** (-2 + L) * t) / (1 - q ** (-2 * K) * t)
        ),
    ),
    (
        DensityProfile.clump(K, L, 0.25),
        lambda t, q, m=0.25: (1 - q ** (-2 * K - L) * t)
        / (1 - q ** (-2 * K) * t)
        * math.sqrt((1 - q ** (-2 * K) * t) / (1 - t) * (1 - q ** (-2 + L - m) * t) / (1 - q ** (-2 * K - L - m) * t)),
    ),
]


@pytest.mark.parametrize("case", range(len(CLOSED_Q)))
@pytest.mark.parametrize("q", [0.2, 0.5, 2.0, 5.0])
def test_x0_q_closed_forms(case, q):
    alpha, f = CLOSED_Q[case]
    grid = off_pole_grid(alpha, q)
    assert len(grid) == 100
    for t in grid:
        assert x0_q(alpha, t, q)[0] == pytest.approx(f(t, q), rel=1e-9)


def test_moment_identity_and_small_t_series():
    for q in (0.3, 2.0, 7.0):
        for t in (-2.0, -1e-3, 0.0, 1e-3, 0.2, 60.0):
            if any(lo <= t <= hi for lo, hi in beta_ranges(GAPPED, q)):
                continue
            i1, i2, j = moments_q(GAPPED, t, q)
            assert j == pytest.approx(i1 - t * i2, rel=1e-10, abs=1e-14)
    # the series and the closed form agree where both apply
    a = moments_q(UNIFORM, 0.49, 2.0)
    b = moments_q(UNIFORM, 0.51, 2.0)
    assert a[0] == pytest.approx(b[0], rel=0.05)


def test_x0_q_tends_to_x0():
    errs = []
    for k in (6, 10, 14, 18):
        q = 1 + 2.0**-k
        errs.append(max(abs(x0_q(GAPPED, q**th, q)[0] - x0(GAPPED, th)[0]) for th in (-3.0, -0.5, 0.6, 1.0, 5.0)))
    assert errs[-1] < 1e-5
    assert all(b < a for a, b in zip(errs, errs[1:]))


# ---------------------------------------------------------------- q = 1 branches


def P1(x, y):
    return (y + 2 * x) ** 2 - 4 * (y + 1)


def P2(x, y):
    return (y - 2 * x + 2) ** 2 - 4 * (y + 1)


def Q1(x, y):
    a = 3 * x**2 - 3 * x * y + y**2 - 9 * x + 2 * y
    return a**2 - 4 * y * a + 4 * y**2 * (y + 1)


def Q2(x, y):
    a = 3 * x**2 + 3 * x * y + y**2 - 3 * x - 4 * y - 6
    return a**2 - 4 * y * a + 4 * y**2 * (y + 1)


def test_parabolas_p1():
    sw, se = branch_SW(UNIFORM), branch_SE(UNIFORM)
    assert np.abs(P1(se.X, se.Y)).max() < 1e-8
    assert np.abs(P2(sw.X, sw.Y)).max() < 1e-8
    assert sw.X.min() >= 0 and sw.X.max() <= 0.5 + 1e-12
    assert se.X.min() >= 0.5 - 1e-12 and se.X.max() <= 1


def test_quartics_p2():
    p2 = DensityProfile.uniform(2)
    sw, se = branch_SW(p2), branch_SE(p2)
    assert np.abs(Q1(sw.X, sw.Y)).max() < 1e-6
    assert np.abs(Q2(se.X, se.Y)).max() < 1e-6
    assert np.allclose(Q2(se.X, se.Y), Q1(2 - se.X, se.Y), atol=1e-9)


def test_uniform_p_parametrization():
    # after t = (p+1)/(1-u^(p+1)) the right-hand branch is rational in u,
    # and the left-hand branch is its mirror image about x = p/2
    for p in (1, 2, 3):
        prof = DensityProfile.uniform(p)
        sw = branch_SW(prof, points=512)
        for u in np.linspace(0.05, 0.95, 19):
            t = (p + 1) / (1 - u ** (p + 1))
            xn, yn = nilp_point(prof, t)
            y = -(((p + 1) * (1 - u) / (1 - u ** (p + 1))) ** 2) * u**p
            x = t * (1 - (p + 1) * (1 - u) * u ** (p + 1) / (1 - u ** (p + 1))) - 1
            assert (xn - 1, yn) == pytest.approx((x, y), abs=1e-12)
            k = np.argmin(np.abs(sw.Y - y))
            assert sw.X[k] == pytest.approx(p - x, abs=0.02)


def test_tstar_values():
    assert find_tstar(GAPPED, GapSpec(0.25, 1.0)) == pytest.approx(0.75, abs=1e-10)
    for kappa, mu in ((0.75, 1.0), (0.4, 0.3), (0.6, 2.5)):
        prof = DensityProfile.with_gaps([(kappa, mu)])
        assert find_tstar(prof, GapSpec(kappa, mu)) == pytest.approx(kappa * (2 + mu), abs=1e-10)
    g1, g2 = TWO_GAPS.gaps()
    assert find_tstar(TWO_GAPS, g1) == pytest.approx((13 - math.sqrt(41)) / 8, abs=1e-10)
    assert find_tstar(TWO_GAPS, g2) == pytest.approx((13 + math.sqrt(41)) / 8, abs=1e-10)
    # a profile symmetric under reflection puts t* at the middle of the gap
    sym = DensityProfile.with_gaps([(0.5, 1.0)])
    assert find_tstar(sym, GapSpec(0.5, 1.0)) == pytest.approx(1.5, abs=1e-10)
    with pytest.raises(DomainError):
        find_tstar(GAPPED, GapSpec(0.5, 1.0))


def test_gappedex_y_closed_form():
    k, mu = 0.25, 1.0
    ts = k * (2 + mu)
    for t in np.linspace(2 * k + 1e-3, 2 * k + mu - 1e-3, 50):
        a = math.sqrt(1 - 2 * k / t)
        b = math.sqrt(1 - 2 * (1 - k) / (2 + mu - t))
        y = -4 * (t - ts) ** 2 / (t * t - 2 * t * ts + ts * (2 * k + mu)) * a * b / (a + b) ** 2
        assert nilp_point(GAPPED, t)[1] == pytest.approx(y, abs=1e-12)


def test_frozen_example_endpoints():
    k, lam = 1 / 16, 1 / 4
    sw, se = assemble_arctic(FROZEN)
    assert (sw.X[0], sw.Y[0]) == pytest.approx((209 / 512, -1.0), abs=1e-10)
    assert (se.X[-1], se.Y[-1]) == pytest.approx((209 / 512, -1.0), abs=1e-10)
    assert limit_point(FROZEN) == pytest.approx((0.5 * (1 - k - lam) * (1 - k + lam), -1.0), abs=1e-12)
    # the SW branch ends on the left wall, the SE branch on the right plateau
    assert sw.X[-1] == pytest.approx(0.0, abs=1e-9)
    assert sw.Y[-1] == pytest.approx(-(2 - k - lam) * math.sqrt(k / (2 - k - 2 * lam)), abs=1e-9)
    assert se.X[0] == pytest.approx(1 - k - lam, abs=1e-9)
    assert se.Y[0] == pytest.approx(-(2 - k - lam) * math.sqrt(lam / (2 - 2 * k - lam)), abs=1e-9)


def _branch_by(branches, label, kappa=None):
    return [b for b in branches if b.label == label and (kappa is None or b.meta.get("kappa") == kappa)][0]


PROFILES = {"none": UNIFORM, "one": GAPPED, "two": TWO_GAPS}


@pytest.mark.parametrize("name", PROFILES)
def test_translation_and_shear_identities_q1(name):
    alpha = PROFILES[name]
    top = alpha.total
    # SW in the x1 parametrization against the shear of the continued NILP curve
    sw = branch_SW(alpha, parametrization="x1")
    for t, X, Y in zip(sw.t[:-1], sw.X[:-1], sw.Y[:-1]):
        if t == alpha.total + 1.0:
            continue
        xn, yn = nilp_point(alpha, top + 1 - t)
        assert X - xn - yn == pytest.approx(0.0, abs=1e-9)
        assert Y - yn == pytest.approx(0.0, abs=1e-9)
    sw2 = branch_SW(alpha)
    assert len(sw.t) == len(sw2.t) == 256
    # the two parametrizations trace the same curve, in opposite directions
    assert np.allclose(sw.X[::-1][1:-1], [shear_point(alpha, top + 1 - t)[0] for t in sw.t[::-1][1:-1]], atol=1e-9)
    # SE is the NILP branch moved one unit left
    se = branch_SE(alpha)
    nilp = branch_NILP(alpha, "SE")
    assert np.allclose(se.X, nilp.X - 1, atol=1e-9) and np.allclose(se.Y, nilp.Y, atol=1e-9)
    # gap branches
    for g in alpha.gaps():
        left, right = gap_branches(alpha, g)
        for t, X, Y in zip(left.t[1:], left.X[1:], left.Y[1:]):
            xn, yn = nilp_point(alpha, t)
            assert (X, Y) == pytest.approx((xn - g.kappa, yn), abs=1e-9)
        for t, X, Y in zip(right.t[:-1], right.X[:-1], right.Y[:-1]):
            xn, yn = nilp_point(alpha, t)
            assert (X, Y) == pytest.approx((xn + yn - g.kappa, yn), abs=1e-9)
        assert abs(left.Y[-1]) < 1e-8 and abs(right.Y[0]) < 1e-8
        assert left.X[-1] == pytest.approx(right.X[0], abs=1e-9)


def test_branch_invariants():
    for alpha in (UNIFORM, GAPPED, TWO_GAPS, FROZEN, DensityProfile.clump(0.25, 0.25)):
        for q in (None, 2.0, 5.0, 0.5):
            for b in assemble_arctic(alpha, q):
                assert b.Y.max() <= 1e-12, (b, q)
                assert b.X.min() >= -1e-9 and b.X.max() <= alpha.total + 1e-9, (b, q)
                assert len(b) == 256


def test_assembly_shapes():
    assert [b.label for b in assemble_arctic(UNIFORM)] == ["SW", "SE"]
    two = assemble_arctic(TWO_GAPS)
    assert [b.label for b in two] == ["SW", "gap-SW", "gap-SE", "gap-SW", "gap-SE", "SE"]
    assert [b.transform for b in two] == [
        "shear",
        "translate(-0.25)",
        "shear+translate(-0.25)",
        "translate(-0.5)",
        "shear+translate(-0.5)",
        "translate(-1)",
    ]
    assert two[1].t_range[0] == pytest.approx(0.5) and two[2].t_range[1] == pytest.approx(1.5)
    assert two[3].t_range[0] == pytest.approx(2.0) and two[4].t_range[1] == pytest.approx(3.0)
    plain = assemble_arctic(FROZEN)
    flagged = assemble_arctic(FROZEN, conjectural=True)
    assert len(plain) == 2 and len(flagged) == 4
    verts = [b for b in flagged if b.label == "conjectural-vertical"]
    assert all(b.conjectural and not b.meta["normative"] for b in verts)
    assert sorted(b.X[0] for b in verts) == pytest.approx([0.0, 0.6875])
    assert sorted(b.Y[-1] for b in verts) == pytest.approx(sorted([plain[0].Y[-1], plain[1].Y[0]]), abs=1e-8)


def test_infinite_gap_limit():
    # a leading gap that grows while kappa shrinks turns the gap-SE branch into the plain SW branch
    errs = []
    for mu in (50.0, 400.0, 3200.0):
        kappa = 1.0 / mu
        big = DensityProfile.with_gaps([(kappa, mu)])
        e = 0.0
        for s in (-0.05, -0.5, -2.0, -8.0):
            xn, yn = nilp_point(big, mu + s)
            x, y = shear_point(UNIFORM, s)
            e = max(e, abs(xn + yn - kappa - mu - x), abs(yn - y))
        errs.append(e)
    assert errs[0] > 4 * errs[1] > 16 * errs[2] and errs[2] < 3e-3


def test_gap_errors():
    with pytest.raises(DomainError):
        gap_branches(UNIFORM, GapSpec(0.5, 1.0))
    with pytest.raises(DomainError):
        q_branches(TWO_GAPS, 2.0, gaps=[GapSpec(0.25, 1.0), GapSpec(0.25, 1.0)])
    with pytest.raises(DomainError):
        q_branches(UNIFORM, 1.0)


# ---------------------------------------------------------------- q branches


def _qgap_literal(alpha, t, q, kappa, side):
    """Gap formulas written with x0 for the left part and x1 = 1/x0 for the right part."""
    v, d = x0_q(alpha, t, q)
    if side == "SW":
        qx = q**-kappa * t * t * d / (t * d + v * (1 - v))
        qy = (t * d + v * (1 - v)) / (t * d + 1 - v)
    else:
        w, e = 1 / v, -d / (v * v)
        qx = q**-kappa * t * t * e / (t * e + w * (1 - w))
        qy = (t * e + 1 - w) / (t * e + w * (1 - w))
    return math.log(qx, q), math.log(qy, q)


@pytest.mark.parametrize("name", PROFILES)
@pytest.mark.parametrize("q", [2.0, 5.0])
def test_translation_and_shear_identities_q(name, q):
    alpha = PROFILES[name]
    branches = q_branches(alpha, q)
    for b in branches:
        inner = range(1, len(b) - 1)
        if b.label == "SE":
            for i in inner:
                xn, yn = nilp_point(alpha, b.t[i], q)
                assert (b.X[i], b.Y[i]) == pytest.approx((xn - 1, yn), abs=1e-9)
        elif b.label == "SW":
            for i in inner:
                xn, yn = nilp_point(alpha, b.t[i], q)
                assert (b.X[i], b.Y[i]) == pytest.approx((xn + yn, yn), abs=1e-9)
        else:
            k = b.meta["kappa"]
            for i in inner:
                t = b.t[i]
                sw = _qgap_literal(alpha, t, q, k, "SW")
                se = _qgap_literal(alpha, t, q, k, "SE")
                # same t: the right-hand formula is the shear of the left-hand one
                assert se[0] == pytest.approx(sw[0] + sw[1], abs=1e-9)
                assert se[1] == pytest.approx(sw[1], abs=1e-9)
                assert (b.X[i], b.Y[i]) == pytest.approx(sw if b.label == "gap-SW" else se, abs=1e-9)


def test_q_branches_endpoints_uniform():
    for q in (0.2, 0.5, 2.0, 5.0):
        sw, se = q_branches(UNIFORM, q)
        meet = limit_point(UNIFORM, q)
        for b, corner in ((sw, (0.0, 0.0)), (se, (1.0, 0.0))):
            ends = {(round(b.X[0], 9), round(b.Y[0], 9)), (round(b.X[-1], 9), round(b.Y[-1], 9))}
            assert ends == {corner, (round(meet[0], 9), -1.0)}
    # the meeting point moves right as q grows, symmetrically under q -> 1/q
    meets = [limit_point(UNIFORM, q)[0] for q in (0.2, 0.5, 2.0, 5.0)]
    assert meets == sorted(meets)
    assert meets[2] == pytest.approx(1 - meets[1], abs=1e-12)
    assert meets[2] == pytest.approx(math.log2(3) - 1, abs=1e-12)


def test_q_branches_tend_to_q1():
    alpha = GAPPED
    errs = []
    for k in (8, 12, 16):
        q = 1 + 2.0**-k
        e = 0.0
        for th in (-4.0, -1.0, -0.2):
            a, b = shear_point(alpha, q**th, q), shear_point(alpha, th)
            e = max(e, abs(a[0] - b[0]), abs(a[1] - b[1]))
        for th in (0.55, 0.7, 3.2, 6.0):
            a, b = nilp_point(alpha, q**th, q), nilp_point(alpha, th)
            e = max(e, abs(a[0] - b[0]), abs(a[1] - b[1]))
        errs.append(e)
    assert errs[-1] < 1e-4 and errs[0] > errs[1] > errs[2]
    assert limit_point(alpha, 1 + 1e-7)[0] == pytest.approx(limit_point(alpha)[0], abs=1e-6)


def test_q_tstar_solves_x0_equal_one():
    for q in (2.0, 5.0, 0.5):
        ts = find_tstar(GAPPED, GapSpec(0.25, 1.0), q)
        assert x0_q(GAPPED, ts, q)[0] == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------- geodesics


def test_geodesic_endpoints_and_q1_limit():
    for q in (0.3, 1.0, 2.0, 9.0):
        x, y = geodesic(0.7, 1.3, q)
        assert (x[0], y[0]) == (0.0, 0.0) and (x[-1], y[-1]) == (0.7, 1.3)
        assert np.all(np.diff(y) >= 0)
    x, y = geodesic(0.7, 1.3, 1 + 1e-7)
    assert np.allclose(y, 1.3 * x / 0.7, atol=1e-6)
    with pytest.raises(DomainError):
        geodesic(0.0, 1.0, 2.0)


@pytest.mark.parametrize("q", [1.0, 2.0, 5.0])
def test_tangent_geodesic_touches_branch(q):
    left, _ = gap_branches(GAPPED, GapSpec(0.25, 1.0), q=q)
    for i in (40, 128, 200):
        t, X, Y = left.t[i], left.X[i], left.Y[i]
        xs = X + np.linspace(-1e-3, 1e-3, 2001)
        gx, gy = tangent_geodesic(GAPPED, t, q, kappa=0.25, x=xs)
        assert np.hypot(gx - X, gy - Y).min() < 1e-6
        # same slope as the branch: the geodesic is tangent, not transversal
        slope_g = np.gradient(gy, gx)[len(gx) // 2]
        slope_b = (left.Y[i + 1] - left.Y[i - 1]) / (left.X[i + 1] - left.X[i - 1])
        assert slope_g == pytest.approx(slope_b, rel=2e-2, abs=2e-2)


# ---------------------------------------------------------------- tropical


def test_tropical_curve():
    c = tropical_curve(UNIFORM)
    assert (c.X[0], c.Y[0], c.X[-1], c.Y[-1]) == (0.0, 0.0, 1.0, -1.0)
    prof = DensityProfile.piecewise_linear([(0, 0), (0.3, 0.6), (0.3, 0.9), (0.7, 1.0), (1, 2.2)])
    c = tropical_curve(prof)
    knots = {0.0: [0.0], 0.3: [0.6, 0.9], 0.7: [1.0], 1.0: [2.2]}
    for u, vals in knots.items():
        got = [x for x, t in zip(c.X, c.t) if t == u]
        assert got == vals
    for s in prof.segments:
        idx = [i for i, t in enumerate(c.t) if s.u0 <= t <= s.u1 and s.a0 <= c.X[i] <= s.a1]
        xs, ys = c.X[idx], c.Y[idx]
        slopes = np.diff(ys) / np.diff(xs)
        assert np.allclose(slopes[np.isfinite(slopes)], -1.0 / s.slope)
    sine = DensityProfile.from_function(lambda u: (400 * u + 20 * math.sin(20 * u)) / (400 + math.sin(20)))
    c = tropical_curve(sine)
    assert np.allclose(c.X, [(400 * u + 20 * math.sin(20 * u)) / (400 + math.sin(20)) for u in c.t], atol=1e-12)
