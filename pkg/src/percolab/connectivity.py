"""Open-path connectivity, dual windows and the traversable height sigma_N.

Dual windows are addressed by integer dual coordinates: the pair (a, b)
stands for the dual vertex (a + 1/2, b + 1/2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit, prange

from .lattice import Region
from .rng import bond_uniform, replica_key, row_key
from .sampler import BondConfig, RowSamplerState
from .unionfind import sets_connected, uf_find, uf_reset, uf_union, work_arrays


@njit(cache=True)
def dual_grids(hor, ver, x0, y0, a0, b0, w, h, dh, dv):
    """Dual-open grids for the dual window a in [a0, a0+w), b in [b0, b0+h).

    Dual edges crossing a primal bond outside the primal grid are absent.
    """
    PH = hor.shape[0]
    PW = hor.shape[1] + 1
    for bb in range(h):
        y = b0 + bb - y0
        for aa in range(w - 1):
            x = a0 + aa + 1 - x0
            if 0 <= x < PW and 0 <= y < PH - 1:
                dh[bb, aa] = 1 - ver[y, x]
            else:
                dh[bb, aa] = 0
    for bb in range(h - 1):
        y = b0 + bb + 1 - y0
        for aa in range(w):
            x = a0 + aa - x0
            if 0 <= x < PW - 1 and 0 <= y < PH:
                dv[bb, aa] = 1 - hor[y, x]
            else:
                dv[bb, aa] = 0


def _mask(shape, cells, origin) -> np.ndarray:
    m = np.zeros(shape, np.uint8)
    ox, oy = origin
    for x, y in cells:
        i, j = x - ox, y - oy
        if 0 <= j < shape[0] and 0 <= i < shape[1]:
            m[j, i] = 1
    return m


def _subgrid(cfg: BondConfig, within: Region):
    r = cfg.region
    if not (r.x_min <= within.x_min and within.x_max <= r.x_max
            and r.y_min <= within.y_min and within.y_max <= r.y_max):
        raise ValueError(f"{within} exceeds the sampled region {r}")
    i0, j0 = within.x_min - r.x_min, within.y_min - r.y_min
    W, H = within.width, within.height
    return (np.ascontiguousarray(cfg.hor[j0 : j0 + H, i0 : i0 + W - 1]),
            np.ascontiguousarray(cfg.ver[j0 : j0 + H - 1, i0 : i0 + W]))


def crossing(cfg: BondConfig, from_: Iterable, to: Iterable, within: Region | None = None,
             stats: dict | None = None) -> bool:
    """Is some vertex of ``from_`` joined to some vertex of ``to`` by an open path in ``within``?

    Vertices outside ``within`` are ignored.  ``stats['work']`` receives the
    union-find work units when a dict is passed.
    """
    within = cfg.region if within is None else within
    hor, ver = _subgrid(cfg, within)
    shape = (within.height, within.width)
    origin = (within.x_min, within.y_min)
    src, dst = _mask(shape, from_, origin), _mask(shape, to, origin)
    parent, size, mark = work_arrays(shape[0] * shape[1])
    ok, work = sets_connected(hor, ver, src, dst, parent, size, mark)
    if stats is not None:
        stats["work"] = int(work)
        stats["bonds"] = int(hor.size + ver.size)
    return bool(ok)


def dual_window_grids(cfg: BondConfig, a_range: tuple[int, int], b_range: tuple[int, int],
                      strict: bool = True):
    """Dual-open grids of the dual window [a_lo, a_hi] x [b_lo, b_hi].

    With ``strict`` the primal bonds crossed by the window must all have been
    sampled; otherwise missing bonds simply contribute no dual edge.
    """
    (a_lo, a_hi), (b_lo, b_hi) = a_range, b_range
    r = cfg.region
    if strict and not (r.x_min <= a_lo and a_hi + 1 <= r.x_max
                       and r.y_min <= b_lo and b_hi + 1 <= r.y_max):
        raise ValueError(f"dual window {a_range}x{b_range} needs primal bonds outside {r}")
    w, h = a_hi - a_lo + 1, b_hi - b_lo + 1
    dh = np.empty((h, w - 1), np.uint8)
    dv = np.empty((h - 1, w), np.uint8)
    dual_grids(cfg.hor, cfg.ver, r.x_min, r.y_min, a_lo, b_lo, w, h, dh, dv)
    return dh, dv


def dual_connected(cfg: BondConfig, from_: Iterable, to: Iterable,
                   a_range: tuple[int, int], b_range: tuple[int, int], strict: bool = True) -> bool:
    """Dual open path inside the dual window between two sets of dual vertices (a, b)."""
    dh, dv = dual_window_grids(cfg, a_range, b_range, strict)
    shape = dh.shape[0], dh.shape[1] + 1
    origin = (a_range[0], b_range[0])
    src, dst = _mask(shape, from_, origin), _mask(shape, to, origin)
    parent, size, mark = work_arrays(shape[0] * shape[1])
    ok, _ = sets_connected(dh, dv, src, dst, parent, size, mark)
    return bool(ok)


def bottom_top(cfg: BondConfig) -> bool:
    r = cfg.region
    return crossing(cfg, [(x, r.y_min) for x in range(r.x_min, r.x_max + 1)],
                    [(x, r.y_max) for x in range(r.x_min, r.x_max + 1)])


def left_right_dual(cfg: BondConfig) -> bool:
    """Dual crossing between the two vertical sides of a rectangle.

    The dual window spans the columns just outside the rectangle; only dual
    bonds crossing the rectangle's own bonds take part.
    """
    r = cfg.region
    a_lo, a_hi = r.x_min - 1, r.x_max
    b_lo, b_hi = r.y_min, r.y_max - 1
    if b_hi < b_lo:
        return False
    left = [(a_lo, b) for b in range(b_lo, b_hi + 1)]
    right = [(a_hi, b) for b in range(b_lo, b_hi + 1)]
    return dual_connected(cfg, left, right, (a_lo, a_hi), (b_lo, b_hi), strict=False)


# --- traversable height ----------------------------------------------------

@dataclass(frozen=True)
class SigmaResult:
    value: int
    censored: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("sigma is nonnegative")


@njit(cache=True)
def frontier_step(lab, vert, hor, parent, size, newlab, remap):
    """Advance the frontier by one row.

    ``lab[x]`` is 0 when frontier vertex x is joined to I_N and otherwise a
    class id in 1..N shared by vertices joined below.  Returns whether any
    vertex of the new row is joined to I_N.
    """
    N = lab.shape[0]
    uf_reset(parent, size, 2 * N + 1)
    for x in range(N):
        if vert[x]:
            uf_union(parent, size, lab[x], N + 1 + x)
    for x in range(N - 1):
        if hor[x]:
            uf_union(parent, size, N + 1 + x, N + 2 + x)
    src, _ = uf_find(parent, 0)
    for i in range(2 * N + 1):
        remap[i] = -1
    nxt = 1
    alive = False
    for x in range(N):
        r, _ = uf_find(parent, N + 1 + x)
        if r == src:
            newlab[x] = 0
            alive = True
        else:
            if remap[r] < 0:
                remap[r] = nxt
                nxt += 1
            newlab[x] = remap[r]
    for x in range(N):
        lab[x] = newlab[x]
    return alive


@njit(cache=True, inline="always")
def _root(par, a):
    while par[a] != a:
        par[a] = par[par[a]]
        a = par[a]
    return a


@njit(cache=True)
def _sigma_rng(rkey, ph, pv, cap):
    """sigma of one replica with bonds drawn on the fly.

    Same labelling as frontier_step, organised by horizontal runs of the new
    row: a run inherits the union of the classes feeding it from below, so
    only the N+1 old labels need a union-find.
    """
    N = pv.shape[0]
    lab = np.zeros(N, np.int32)
    par = np.empty(N + 1, np.int32)
    remap = np.empty(N + 1, np.int32)
    runrep = np.empty(N, np.int32)  # root feeding each run, -1 if none
    runend = np.empty(N, np.int32)
    n = 0
    while n < cap:
        rv = row_key(rkey, n)
        rh = row_key(rkey, n + 1)
        for i in range(N + 1):
            par[i] = i
            remap[i] = -1
        a = 0
        nruns = 0
        while a < N:
            b = a
            while b < N - 1 and bond_uniform(rh, 1 + b, 0) < ph[b]:
                b += 1
            first = -1
            for x in range(a, b + 1):
                if bond_uniform(rv, 1 + x, 1) < pv[x]:
                    r = _root(par, lab[x])
                    if first < 0:
                        first = r
                    elif r != first:
                        # smaller root wins so class 0 stays its own root
                        if r < first:
                            par[first] = r
                            first = r
                        else:
                            par[r] = first
            runrep[nruns] = first
            runend[nruns] = b
            nruns += 1
            a = b + 1
        src = _root(par, 0)
        alive = False
        nxt = 1
        a = 0
        for k in range(nruns):
            f = runrep[k]
            if f < 0:
                v = nxt
                nxt += 1
            else:
                r = _root(par, f)
                if r == src:
                    v = 0
                    alive = True
                else:
                    if remap[r] < 0:
                        remap[r] = nxt
                        nxt += 1
                    v = remap[r]
            for x in range(a, runend[k] + 1):
                lab[x] = v
            a = runend[k] + 1
        if not alive:
            return n
        n += 1
    return cap


@njit(cache=True, parallel=True)
def sigma_batch(seed, rep0, R, ph, pv, cap):
    """sigma for replicas rep0 .. rep0+R-1; a value equal to cap means censored."""
    out = np.empty(R, np.int64)
    for r in prange(R):
        out[r] = _sigma_rng(replica_key(seed, rep0 + r), ph, pv, cap)
    return out


@njit(cache=True)
def _sigma_grid(hor, ver, cap):
    N = ver.shape[1]
    lab = np.zeros(N, np.int64)
    parent = np.empty(2 * N + 1, np.int64)
    size = np.empty(2 * N + 1, np.int64)
    newlab = np.empty(N, np.int64)
    remap = np.empty(2 * N + 1, np.int64)
    n = 0
    while n < cap:
        if not frontier_step(lab, ver[n], hor[n + 1], parent, size, newlab, remap):
            return n
        n += 1
    return cap


class FrontierState:
    """Frontier of the slab explored so far; O(N) memory at any height."""

    def __init__(self, N: int):
        self.N = N
        self.n = 0
        self.lab = np.zeros(N, np.int64)
        self.alive = True
        self._parent = np.empty(2 * N + 1, np.int64)
        self._size = np.empty(2 * N + 1, np.int64)
        self._newlab = np.empty(N, np.int64)
        self._remap = np.empty(2 * N + 1, np.int64)

    def step(self, vert, hor) -> bool:
        if not self.alive:
            raise RuntimeError("frontier already disconnected from I_N")
        vert = np.asarray(vert, np.uint8)
        hor = np.asarray(hor, np.uint8)
        self.alive = bool(frontier_step(self.lab, vert, hor, self._parent, self._size,
                                        self._newlab, self._remap))
        if self.alive:
            self.n += 1
        return self.alive


def sigma(stream, N: int, cap: int) -> SigmaResult:
    """Highest row n <= cap joined to I_N = {1..N} x {0} inside [1, N] x R_+.

    ``stream`` is a :class:`RowSamplerState` (run by the compiled kernel) or
    any iterable of ``(vertical, horizontal)`` row pairs as produced by
    :func:`~percolab.sampler.sample_row`.  sup of the empty set is 0.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if isinstance(stream, RowSamplerState):
        if stream.N != N or stream.y != 0:
            raise ValueError("row stream must start at row 0 of the width-N strip")
        v = int(_sigma_rng(stream.seed.key, np.asarray(stream.ph), np.asarray(stream.pv), cap))
        return SigmaResult(v, v == cap)
    state = FrontierState(N)
    for vert, hor in stream:
        if state.n >= cap:
            break
        if not state.step(vert, hor):
            return SigmaResult(state.n, False)
    if state.n < cap:
        raise ValueError("row stream ended before the cap")
    return SigmaResult(cap, True)


def sigma_of_config(cfg: BondConfig, cap: int | None = None) -> SigmaResult:
    """sigma on a sampled slab [x_min, x_max] x [y_min, y_max]; cap defaults to its height."""
    r = cfg.region
    cap = r.height - 1 if cap is None else cap
    if cap > r.height - 1 or cap < 1:
        raise ValueError("cap must lie in [1, slab height]")
    v = int(_sigma_grid(cfg.hor, cfg.ver, cap))
    return SigmaResult(v, v == cap)


@njit(cache=True)
def _sigma_dual(hor, ver, cap):
    N = ver.shape[1]
    stride = N + 1
    n_slots = stride * cap + 2
    L, R = n_slots - 2, n_slots - 1
    parent = np.empty(n_slots, np.int64)
    size = np.empty(n_slots, np.int64)
    uf_reset(parent, size, n_slots)
    for b in range(cap):
        base = b * stride
        uf_union(parent, size, L, base)
        uf_union(parent, size, R, base + N)
        # dual edge (a, b)-(a+1, b) crosses the primal vertical at column a+1
        for a in range(N):
            if ver[b, a] == 0:
                uf_union(parent, size, base + a, base + a + 1)
        # dual edge (a, b-1)-(a, b) crosses the primal horizontal {(a, b), (a+1, b)}
        if b > 0:
            for a in range(1, N):
                if hor[b, a - 1] == 0:
                    uf_union(parent, size, base - stride + a, base + a)
        rl, _ = uf_find(parent, L)
        rr, _ = uf_find(parent, R)
        if rl == rr:
            return b
    return cap


def sigma_via_duality(cfg: BondConfig, N: int | None = None, cap: int | None = None) -> SigmaResult:
    """sigma as the height of the lowest wall-to-wall dual crossing.

    The dual window of height n has dual rows b + 1/2 for b < n and runs from
    the left wall x = 1/2 to the right wall x = N + 1/2; the first n with a
    crossing gives sigma = n - 1.
    """
    r = cfg.region
    if N is not None and N != r.width:
        raise ValueError("slab width does not match N")
    cap = r.height - 1 if cap is None else cap
    if cap > r.height - 1 or cap < 1:
        raise ValueError("cap must lie in [1, slab height]")
    v = int(_sigma_dual(cfg.hor, cfg.ver, cap))
    return SigmaResult(v, v == cap)
