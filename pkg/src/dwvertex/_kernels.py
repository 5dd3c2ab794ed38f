"""Compiled inner loop of the Metropolis chain.

State layout (1-based, padded):

* ``H[c, j]`` is the height at which path ``c`` leaves column ``j`` eastwards,
  for ``1 <= j < E[c]``; ``H[c, 0] = c`` is the entry height, other entries 0.
* ``E[c]`` is the exit column of path ``c``.
* ``P[r, j, w]`` / ``EM[r, j, w]`` are bitmask words of the colors present at
  vertex ``(r, j)`` and of those leaving it eastwards.  Color ``c`` is bit
  ``(c - 1) % 64`` of word ``(c - 1) // 64``.  They are only maintained when
  ``t > 0``.

Each step consumes one row of five uniforms: color, column, move kind,
new height, acceptance.
"""

import numpy as np
from numba import njit

KIND_FLIP = 0
KIND_SWAP_UP = 1  # partner c + 1
KIND_SWAP_DOWN = 2  # partner c - 1

# counters in the stats vector
ST_FLIP_PROPOSED = 0
ST_FLIP_ACCEPTED = 1
ST_SWAP_PROPOSED = 2
ST_SWAP_ACCEPTED = 3
ST_NOOP = 4
N_STATS = 5


@njit(cache=True)
def _popcount(v):
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((v * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, inline="always")
def span(H, E, c, j):
    """Return (lo, hi, east); lo = 0 when path c is absent from column j."""
    if j < 1 or j > E[c]:
        return 0, 0, False
    hi = H[c, j - 1]
    if j == E[c]:
        return 1, hi, False
    return H[c, j], hi, True


@njit(cache=True)
def _set_col(H, E, P, EM, c, j, on):
    lo, hi, east = span(H, E, c, j)
    if lo == 0:
        return
    w = (c - 1) // 64
    bit = np.uint64(1) << np.uint64((c - 1) % 64)
    for r in range(lo, hi + 1):
        if on:
            P[r, j, w] |= bit
        else:
            P[r, j, w] &= ~bit
    if east:
        if on:
            EM[lo, j, w] |= bit
        else:
            EM[lo, j, w] &= ~bit


@njit(cache=True)
def build_masks(H, E, P, EM, n):
    P[:] = 0
    EM[:] = 0
    for c in range(1, n + 1):
        for j in range(1, E[c] + 1):
            _set_col(H, E, P, EM, c, j, True)


@njit(cache=True)
def _others(P, EM, r, j, c, nwords):
    # (# east colors below c, # present colors above c), c itself excluded
    w = (c - 1) // 64
    b = (c - 1) % 64
    low_e = 0
    high_p = 0
    for i in range(nwords):
        if i < w:
            low_e += _popcount(EM[r, j, i])
        elif i > w:
            high_p += _popcount(P[r, j, i])
    below = (np.uint64(1) << np.uint64(b)) - np.uint64(1)
    low_e += _popcount(EM[r, j, w] & below)
    if b < 63:
        above = ~((np.uint64(1) << np.uint64(b + 1)) - np.uint64(1))
        high_p += _popcount(P[r, j, w] & above)
    return low_e, high_p


@njit(cache=True)
def flip_delta(P, EM, nwords, c, k, h, hp, h1, h0):
    """Change in the power of t when path c moves its column-k east step from h to hp.

    Before: column k spans [h, h1] east at h, column k+1 spans [h0, h].
    After: the same with h replaced by hp.
    """
    a = min(h, hp)
    b = max(h, hp)
    delta = 0
    for j in (k, k + 1):
        for r in range(a, b + 1):
            low_e, high_p = _others(P, EM, r, j, c, nwords)
            if j == k:
                pres0 = h <= r <= h1
                east0 = r == h
                pres1 = hp <= r <= h1
                east1 = r == hp
            else:
                pres0 = h0 <= r <= h
                pres1 = h0 <= r <= hp
                east0 = False
                east1 = False
            before = (low_e if pres0 else 0) + (high_p if east0 else 0)
            after = (low_e if pres1 else 0) + (high_p if east1 else 0)
            delta += after - before
    return delta


@njit(cache=True)
def t_power(t, d):
    if d == 0:
        return 1.0
    if t == 0.0:
        return 0.0 if d > 0 else np.inf
    return t ** d


@njit(cache=True, inline="always")
def find_split(H, E, c, d, k):
    """Split vertex of paths c and d in column k.

    Returns (row, east_path, north_path) or (0, 0, 0) when the paths do not
    meet there with one leaving east and the other north.
    """
    lo_c, hi_c, east_c = span(H, E, c, k)
    lo_d, hi_d, east_d = span(H, E, d, k)
    if lo_c == 0 or lo_d == 0 or (lo_c == lo_d and east_c == east_d):
        return 0, 0, 0
    # the east-bound path leaves at the lower of the two departure rows
    if lo_c > lo_d or (lo_c == lo_d and east_c):
        r, a, bpath, east_a, hi_b = lo_c, c, d, east_c, hi_d
    else:
        r, a, bpath, east_a, hi_b = lo_d, d, c, east_d, hi_c
    if not east_a or r > hi_b:
        return 0, 0, 0
    return r, a, bpath


@njit(cache=True)
def find_meet(H, E, a, bpath, k, m):
    """First column after k where the two paths meet again, or 0 if never."""
    for ell in range(k + 1, m + 1):
        lo_a, hi_a, _ = span(H, E, a, ell)
        lo_b, hi_b, _ = span(H, E, bpath, ell)
        if lo_a == 0 or lo_b == 0:
            return 0
        # bpath runs above a here: meeting when a climbs to bpath's entry row
        if lo_a <= hi_b:
            return ell
    return 0


@njit(cache=True)
def apply_swap(H, E, P, EM, use_masks, a, bpath, k, ell, m):
    last = m if ell == 0 else ell
    if use_masks:
        for j in range(k, last + 1):
            _set_col(H, E, P, EM, a, j, False)
            _set_col(H, E, P, EM, bpath, j, False)
    stop = m if ell == 0 else ell - 1
    for j in range(k, stop + 1):
        tmp = H[a, j]
        H[a, j] = H[bpath, j]
        H[bpath, j] = tmp
    if ell == 0:
        tmp = E[a]
        E[a] = E[bpath]
        E[bpath] = tmp
    if use_masks:
        for j in range(k, last + 1):
            _set_col(H, E, P, EM, a, j, True)
            _set_col(H, E, P, EM, bpath, j, True)


@njit(cache=True)
def run_block(H, E, P, EM, xh, qpow, t, fixed, U, stats, n, m):
    use_masks = t > 0.0
    nwords = P.shape[2]
    for s in range(U.shape[0]):
        c = min(int(U[s, 0] * n) + 1, n)
        k = min(int(U[s, 1] * m) + 1, m)
        kind = min(int(U[s, 2] * 3), 2)
        if kind == KIND_FLIP:
            e = E[c]
            if k >= e:
                stats[ST_NOOP] += 1
                continue
            stats[ST_FLIP_PROPOSED] += 1
            h = H[c, k]
            h1 = H[c, k - 1]
            h0 = H[c, k + 1] if k + 1 < e else 1
            hp = h0 + min(int(U[s, 3] * (h1 - h0 + 1)), h1 - h0)
            if hp == h:
                stats[ST_FLIP_ACCEPTED] += 1
                continue
            ratio = xh[hp] / xh[h] * qpow[hp - h + n]
            if use_masks:
                ratio *= t_power(t, flip_delta(P, EM, nwords, c, k, h, hp, h1, h0))
            else:
                # zero weight unless the paths stay strictly ordered
                if c > 1 and k < E[c - 1] and hp <= H[c - 1, k]:
                    ratio = 0.0
                if c < n and k < E[c + 1] and hp >= H[c + 1, k]:
                    ratio = 0.0
            if U[s, 4] < ratio:
                if use_masks:
                    _set_col(H, E, P, EM, c, k, False)
                    _set_col(H, E, P, EM, c, k + 1, False)
                H[c, k] = hp
                if use_masks:
                    _set_col(H, E, P, EM, c, k, True)
                    _set_col(H, E, P, EM, c, k + 1, True)
                stats[ST_FLIP_ACCEPTED] += 1
        else:
            d = c + 1 if kind == KIND_SWAP_UP else c - 1
            if d < 1 or d > n:
                stats[ST_NOOP] += 1
                continue
            r, a, bpath = find_split(H, E, c, d, k)
            if r == 0:
                stats[ST_NOOP] += 1
                continue
            stats[ST_SWAP_PROPOSED] += 1
            ratio = t_power(t, 1 if bpath < a else -1)
            if not U[s, 4] < ratio:
                continue
            ell = find_meet(H, E, a, bpath, k, m)
            if fixed and ell == 0:
                continue
            apply_swap(H, E, P, EM, use_masks, a, bpath, k, ell, m)
            stats[ST_SWAP_ACCEPTED] += 1


@njit(cache=True)
def observe(H, E, V, Hz, n):
    """Add current vertical and horizontal edge occupancies."""
    for c in range(1, n + 1):
        e = E[c]
        for j in range(1, e + 1):
            lo, hi, east = span(H, E, c, j)
            start = lo + 1 if east else lo
            for r in range(start, hi + 1):
                V[r, j] += 1
            if east:
                Hz[lo, j] += 1


@njit(cache=True)
def color_areas(H, E, n, out):
    for c in range(1, n + 1):
        a = 0
        for j in range(1, E[c] + 1):
            lo, hi, _ = span(H, E, c, j)
            a += (j - 1) * (hi - lo)
        out[c - 1] = a
