from collections import Counter, deque

import numpy as np
import pytest
from scipy import stats

from dwvertex import _kernels as K
from dwvertex.exact import enumerate_configs
from dwvertex.model import BoundarySpec, ColoredConfig, WeightParams, config_weight
from dwvertex.sampler import (
    ChainState,
    Flip,
    Swap,
    acceptance_ratio,
    apply,
    find_color_swap,
    flip_bounds,
    initial_config,
    propose,
    proposal_distribution,
    run,
    step,
    step_from_uniforms,
)
from dwvertex.sampler import _Engine


def transition_matrix(b, params):
    states = [ChainState.from_config(c) for c in enumerate_configs(b)]
    weights = np.array([float(config_weight(s.config(), params)) for s in states])
    keep = weights > 0
    states = [s for s, k in zip(states, keep) if k]
    weights = weights[keep]
    index = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for i, s in enumerate(states):
        for p, prob in proposal_distribution(s).items():
            a = acceptance_ratio(s, p, params)
            j = index[apply(s, p)] if p is not None else i
            P[i, j] += prob * a
            P[i, i] += prob * (1 - a)
    return states, weights / weights.sum(), P


# ---------------------------------------------------------------- moves


def test_initial_config():
    s = initial_config(BoundarySpec.from_columns([3]))
    assert s.config().heights == ((1, 1),)
    s = initial_config(BoundarySpec.dwbc(3))
    assert s.config().heights == ((), (2,), (3, 3))
    for cols in ([1, 3, 3], [2, 5, 6, 6]):
        b = BoundarySpec.from_columns(cols)
        initial_config(b).config().validate(b)


def test_flip_bounds():
    s = ChainState.from_config(ColoredConfig(3, 4, ((1,), (2, 1), (3, 2, 2))))
    assert flip_bounds(s, 3, 1) == (2, 3)  # first column: upper bound is the entry row
    assert flip_bounds(s, 3, 2) == (2, 3)
    assert flip_bounds(s, 3, 3) == (1, 2)  # next column is the exit column
    assert flip_bounds(s, 1, 2) is None
    assert flip_bounds(s, 2, 3) is None


def test_color_swap_detection():
    # colors 2 and 3 share vertex (2, 1): 3 turns east, 2 continues north
    s = ChainState.from_config(ColoredConfig(3, 3, ((), (1, 1), (2,))))
    sw = find_color_swap(s, 3, 1, -1)
    assert isinstance(sw, Swap) and (sw.row, sw.east, sw.north) == (2, 3, 2)
    assert sw.meet == 2  # 3 climbs to 2's entry height in column 2
    assert find_color_swap(s, 2, 1, 1) == Swap(2, 3, 1, 2, 3, 2, 2)
    # colors 1 and 3 are not partners, 1 and 2 do not split in column 3
    assert find_color_swap(s, 1, 2, 1) is None
    assert find_color_swap(s, 3, 1, 1) is None


def test_swap_to_boundary_changes_coloring():
    s = ChainState.from_config(ColoredConfig(2, 2, ((), (1,))))
    sw = find_color_swap(s, 1, 1, 1)
    assert sw.meet == 0
    after = apply(s, sw)
    assert after.config().exits == (2, 1)
    assert apply(after, find_color_swap(after, 1, 1, 1)) == s


def test_local_ratio_matches_global():
    for b, params in [
        (BoundarySpec.dwbc(3), WeightParams((1.0, 2.0, 1.5), 0.5, 1.3)),
        (BoundarySpec.dwbc(3), WeightParams((0.6, 1.0, 2.5), 2.0, 0.7)),
        (BoundarySpec.from_columns([1, 3, 3]), WeightParams((1.0, 1.2, 0.9), 0.3, 1.1)),
        (BoundarySpec.dwbc(3), WeightParams((1.0, 2.0, 1.5), 0.0, 1.3)),
    ]:
        for cfg in enumerate_configs(b):
            s = ChainState.from_config(cfg)
            w0 = float(config_weight(cfg, params))
            if w0 == 0:
                continue
            for p in proposal_distribution(s):
                if p is None:
                    continue
                w1 = float(config_weight(apply(s, p).config(), params))
                assert acceptance_ratio(s, p, params) == pytest.approx(min(1.0, w1 / w0), abs=1e-12)


def test_unit_ratio_for_neutral_flip():
    s = initial_config(BoundarySpec.dwbc(3))
    assert acceptance_ratio(s, Flip(3, 2, 3), WeightParams.uniform(3, 0.4)) == 1.0


def test_swap_ratio():
    s = ChainState.from_config(ColoredConfig(2, 2, ((), (1,))))
    sw = find_color_swap(s, 1, 1, 1)
    # afterwards the smaller color leaves east: one extra power of t
    assert acceptance_ratio(s, sw, WeightParams.uniform(2, 0.3)) == pytest.approx(0.3)
    assert acceptance_ratio(s, sw, WeightParams.uniform(2, 0.0)) == 0.0
    back = apply(s, sw)
    assert acceptance_ratio(back, find_color_swap(back, 1, 1, 1), WeightParams.uniform(2, 0.3)) == 1.0


# ---------------------------------------------------------------- exact chain properties

N2 = (BoundarySpec.dwbc(2), WeightParams((1.0, 2.0), 0.5, 1.3))


def test_exact_stationarity_and_detailed_balance():
    _, pi, P = transition_matrix(*N2)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-14)
    assert np.abs(pi @ P - pi).max() < 1e-12
    flow = pi[:, None] * P
    assert np.abs(flow - flow.T).max() < 1e-12


def test_stationarity_n3():
    _, pi, P = transition_matrix(BoundarySpec.dwbc(3), WeightParams((1.0, 2.0, 1.5), 0.5, 1.3))
    assert np.abs(pi @ P - pi).max() < 1e-12


def test_proposal_symmetry():
    for b in (BoundarySpec.dwbc(2), BoundarySpec.dwbc(3)):
        prob = {}
        for cfg in enumerate_configs(b):
            s = ChainState.from_config(cfg)
            for p, pr in proposal_distribution(s).items():
                if p is not None:
                    key = (s, apply(s, p))
                    prob[key] = prob.get(key, 0.0) + pr
        for (a, c), pr in prob.items():
            assert prob[(c, a)] == pytest.approx(pr, abs=1e-15)


def test_irreducible_n3():
    b = BoundarySpec.dwbc(3)
    everything = {ChainState.from_config(c) for c in enumerate_configs(b)}
    start = initial_config(b)
    seen = {start}
    todo = deque([start])
    while todo:
        s = todo.popleft()
        for p in proposal_distribution(s):
            if p is not None:
                nxt = apply(s, p)
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    assert seen == everything


# ---------------------------------------------------------------- proposal statistics


def test_proposal_marginals():
    b = BoundarySpec.dwbc(4)
    rng = np.random.Generator(np.random.Philox(3))
    s = initial_config(b)
    colors, cols, heights = Counter(), Counter(), Counter()
    for _ in range(30000):
        u = rng.random(5)
        colors[min(int(u[0] * 4) + 1, 4)] += 1
        cols[min(int(u[1] * 4) + 1, 4)] += 1
    for counts in (colors, cols):
        assert stats.chisquare([counts[i] for i in range(1, 5)]).pvalue > 1e-3
    # h' is uniform on [h0, h1] given a flip of color 4 in column 1 (bounds 3..4)
    s = ChainState.from_config(ColoredConfig(4, 4, ((), (2,), (3, 3), (3, 3, 3))))
    for _ in range(20000):
        p = propose(s, rng)
        if isinstance(p, Flip) and (p.c, p.k) == (4, 1):
            heights[p.h_new] += 1
    assert set(heights) == {3, 4}
    assert stats.chisquare([heights[3], heights[4]]).pvalue > 1e-3


def test_noop_when_no_east_step():
    s = initial_config(BoundarySpec.dwbc(3))
    # color 1 exits in column 1; the flip branch has nothing to move
    u = np.array([0.0, 0.0, 0.0, 0.5, 0.5])
    assert step_from_uniforms(s, WeightParams.uniform(3), u) == s


# ---------------------------------------------------------------- compiled loop


@pytest.mark.parametrize("t", [0.0, 0.6, 1.0])
def test_kernel_matches_reference(t):
    b = BoundarySpec.dwbc(5)
    params = WeightParams((1.0, 2.0, 1.5, 0.7, 1.1), t, 1.2)
    U = np.random.Generator(np.random.Philox(5)).random((4000, 5))
    ref = initial_config(b)
    for u in U:
        ref = step_from_uniforms(ref, params, u)
    eng = _Engine(b, params, 0, None, 1000)
    st = eng.state
    K.run_block(st.H, st.E, eng.P, eng.EM, eng.xh, eng.qpow, eng.t, False, U, eng.stats, 5, 5)
    assert st == ref


def test_masks_stay_consistent_many_colors():
    n = 70
    b = BoundarySpec.dwbc(n)
    eng = _Engine(b, WeightParams.uniform(n, 0.5), 2, None, 1 << 14)
    eng.advance(40 * n * n)
    P, EM = np.zeros_like(eng.P), np.zeros_like(eng.EM)
    K.build_masks(eng.state.H, eng.state.E, P, EM, n)
    assert (P == eng.P).all() and (EM == eng.EM).all()
    cfg = eng.state.config()
    cfg.validate(b)
    assert eng.chain_stats().swaps_accepted > 0


def test_run_zero_sweeps_returns_initial():
    b = BoundarySpec.dwbc(4)
    res = run(b, WeightParams.uniform(4, 0.5), sweeps=0)
    assert res.state == initial_config(b)


def test_run_reproducible():
    b = BoundarySpec.dwbc(8)
    params = WeightParams.uniform(8, 0.5, 0.9)
    r1 = run(b, params, 50, 10, seed=9, snapshot_every=10, trace_every=5)
    r2 = run(b, params, 50, 10, seed=9, snapshot_every=10, trace_every=5)
    assert r1.state == r2.state
    assert r1.snapshots == r2.snapshots and len(r1.snapshots) == 5
    assert np.array_equal(r1.vertical, r2.vertical)
    assert np.array_equal(r1.traces, r2.traces)
    r3 = run(b, params, 50, 10, seed=10)
    assert r3.state != r1.state or not np.array_equal(r3.vertical, r1.vertical)
    for cfg in r1.snapshots:
        cfg.validate(b)


def test_occupancy_conserves_paths():
    n = 6
    b = BoundarySpec.dwbc(n)
    res = run(b, WeightParams.uniform(n, 0.0), 30, 5, seed=1)
    v, h = res.occupancy()
    # one path crosses the top of every column, and every row below
    assert np.allclose(v[0], 1.0)
    for r in range(n):
        for j in range(n):
            nw = h[r, j - 1] if j else 1.0
            ns = v[r + 1, j] if r + 1 < n else 0.0
            assert nw + ns == pytest.approx(v[r, j] + h[r, j])


def test_step_with_generator():
    b = BoundarySpec.dwbc(3)
    rng = np.random.Generator(np.random.Philox(0))
    s = initial_config(b)
    for _ in range(200):
        s = step(s, WeightParams.uniform(3, 0.5), rng)
        s.config().validate(b)


# ---------------------------------------------------------------- empirical distribution


def gibbs_chisquare(b, params, steps, seed):
    states, pi, P = transition_matrix(b, params)
    lam = np.sort(np.abs(np.linalg.eigvals(P)))[-2]
    thin = int(np.ceil(np.log(1e-3) / np.log(lam)))
    eng = _Engine(b, params, seed, None, 1 << 14)
    index = {s: i for i, s in enumerate(states)}
    counts = np.zeros(len(states))
    for _ in range(steps // thin):
        eng.advance(thin)
        counts[index[eng.state]] += 1
    expected = pi * counts.sum()
    # pool rare states so every bin expects at least five visits
    order = np.argsort(expected)
    obs_bins, exp_bins, acc_o, acc_e = [], [], 0.0, 0.0
    for i in order:
        acc_o += counts[i]
        acc_e += expected[i]
        if acc_e >= 5:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    obs_bins[-1] += acc_o
    exp_bins[-1] += acc_e
    return stats.chisquare(obs_bins, exp_bins).pvalue, thin


def test_empirical_gibbs_n3():
    pvalue, _ = gibbs_chisquare(BoundarySpec.dwbc(3), WeightParams((1.0, 2.0, 1.5), 0.5, 1.3), 10**6, 2024)
    assert pvalue > 1e-3
