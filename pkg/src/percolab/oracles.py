"""Brute-force reference implementations.

Everything here is plain Python written from the event definitions, with
breadth-first search over explicit vertex sets and the dual map of
:mod:`percolab.lattice`.  It shares no code with the compiled detectors and
is only meant for small windows.
"""
from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction

from .lattice import HORIZONTAL, VERTICAL, Bond, DualBond, DualVertex, Region, primal


def bfs_reach(adj: dict, sources) -> set:
    seen = set(sources)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def _adjacency(edges) -> dict:
    adj: dict = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    return adj


# --- primal -------------------------------------------------------------

def primal_edges(x_lo, x_hi, y_lo, y_hi):
    """Bonds with both endpoints in the window, as (Bond, u, v)."""
    out = []
    for y in range(y_lo, y_hi + 1):
        for x in range(x_lo, x_hi + 1):
            if x < x_hi:
                out.append((Bond(x, y, HORIZONTAL), (x, y), (x + 1, y)))
            if y < y_hi:
                out.append((Bond(x, y, VERTICAL), (x, y), (x, y + 1)))
    return out


def connected(state, edges, src, dst) -> bool:
    """``state(bond) -> 0/1``; is some vertex of src joined to dst by open edges?"""
    src, dst = set(src), set(dst)
    if not src or not dst:
        return False
    adj = _adjacency((u, v) for b, u, v in edges if state(b))
    return bool(bfs_reach(adj, src) & dst)


# --- dual ----------------------------------------------------------------

def dual_edges(a_lo, a_hi, b_lo, b_hi):
    """Dual bonds between dual vertices (a+1/2, b+1/2) of the given index box.

    Returned as (primal bond crossed, u, v) with u, v in doubled coordinates.
    """
    out = []
    for b in range(b_lo, b_hi + 1):
        for a in range(a_lo, a_hi + 1):
            u = DualVertex(2 * a + 1, 2 * b + 1)
            if a < a_hi:
                v = DualVertex(2 * a + 3, 2 * b + 1)
                out.append((primal(DualBond(u, v)), u, v))
            if b < b_hi:
                v = DualVertex(2 * a + 1, 2 * b + 3)
                out.append((primal(DualBond(u, v)), u, v))
    return out


def dual_connected(state, edges, src, dst) -> bool:
    """Dual bonds are open iff the primal bond they cross is closed."""
    return connected(lambda b: 1 - state(b), edges, src, dst)


def dv(x: Fraction | float, y: Fraction | float) -> DualVertex:
    return DualVertex.at(x, y)


_H = Fraction(1, 2)


# --- events, from their definitions -------------------------------------

def event_graph(spec):
    """(edges, src, dst, dual, negate) for an EventSpec, built from scratch."""
    N, kind = spec.N, spec.kind
    if kind == "A":
        M, pad = spec.M, N if spec.pad is None else spec.pad
        lo, hi = 1 - pad, N + pad
        edges = primal_edges(lo, hi, 0, M)
        src = [(x, 0) for x in range(1, N + 1)]
        dst = [(x, M) for x in range(lo, hi + 1)] + [(x, y) for y in range(M + 1) for x in (lo, hi)]
        return edges, src, dst, False, True
    if kind in ("T", "grimmett"):
        H = spec.tube_height
        return (primal_edges(1, N, 0, H), [(x, 0) for x in range(1, N + 1)],
                [(x, H) for x in range(1, N + 1)], False, False)
    if kind == "Dtilde":
        top = 2 * N ** spec.m - 1
        return (primal_edges(0, N, 0, top), [(0, y) for y in range(top + 1)],
                [(N, y) for y in range(top + 1)], False, False)
    if kind == "alpha":
        W = N if spec.W is None else spec.W
        return primal_edges(0, N, -W, W), [(0, 0)], [(N, y) for y in range(-W, W + 1)], False, False
    M = spec.height
    if kind == "B":
        # R_N^+(M) = [1/2, N+1/2] x [1/2, M-1/2]
        edges = dual_edges(0, N, 0, M - 1)
        return edges, [dv(_H, _H)], [dv(N + _H, _H)], True, False
    if kind in ("C", "D", "E"):
        edges = dual_edges(0, N, -M, M - 1)
        ys = [b + _H for b in range(-M, M)]
        if kind == "E":
            return edges, [dv(_H, _H)], [dv(N + _H, _H)], True, False
        if kind == "C":
            tgt = [dv(N + _H, spec.k + _H)] if spec.k is not None else [dv(N + _H, y) for y in ys]
            return edges, [dv(_H, _H)], tgt, True, False
        return edges, [dv(_H, y) for y in ys], [dv(N + _H, y) for y in ys], True, False
    if kind == "dual2pt":
        d = spec.d
        w = max(2, d) if spec.W is None else spec.W
        return dual_edges(-w, d + w, -w, w), [dv(_H, _H)], [dv(d + _H, _H)], True, False
    raise ValueError(f"no oracle for {kind}")


def oracle_event(cfg, spec) -> bool:
    edges, src, dst, dual, negate = event_graph(spec)
    state = cfg.__getitem__
    hit = dual_connected(state, edges, src, dst) if dual else connected(state, edges, src, dst)
    return hit != negate


def oracle_event_prob(spec, p: float) -> float:
    """Exact probability by summing over every state of the edges the event reads."""
    edges, src, dst, dual, negate = event_graph(spec)
    bonds = sorted({b for b, _, _ in edges}, key=lambda b: (b.y, b.x, b.orient))
    total = 0.0
    for states in itertools.product((0, 1), repeat=len(bonds)):
        table = dict(zip(bonds, states))
        st = table.__getitem__
        hit = dual_connected(st, edges, src, dst) if dual else connected(st, edges, src, dst)
        if hit != negate:
            k = sum(states)
            total += p ** k * (1 - p) ** (len(bonds) - k)
    return total


def oracle_sigma(cfg, cap: int | None = None) -> int:
    """Highest row the cluster of the bottom row reaches inside the slab, capped."""
    r = cfg.region
    cap = r.height - 1 if cap is None else cap
    top = r.y_min + cap
    edges = primal_edges(r.x_min, r.x_max, r.y_min, top)
    adj = _adjacency((u, v) for b, u, v in edges if cfg[b])
    reach = bfs_reach(adj, [(x, r.y_min) for x in range(r.x_min, r.x_max + 1)])
    return max(y for _, y in reach) - r.y_min


def oracle_bottom_top(cfg) -> bool:
    r = cfg.region
    return connected(cfg.__getitem__, primal_edges(r.x_min, r.x_max, r.y_min, r.y_max),
                     [(x, r.y_min) for x in range(r.x_min, r.x_max + 1)],
                     [(x, r.y_max) for x in range(r.x_min, r.x_max + 1)])


def oracle_left_right_dual(cfg) -> bool:
    """Dual crossing between the left and right sides of the region.

    The dual graph is the one whose edges cross exactly the region's vertical
    bonds and interior horizontal bonds: dual vertices (a+1/2, b+1/2) for
    a in [x_min-1, x_max], b in [y_min, y_max-1], without the edges that would
    run along the outside of the left and right columns.
    """
    r = cfg.region
    a_lo, a_hi, b_lo, b_hi = r.x_min - 1, r.x_max, r.y_min, r.y_max - 1
    if b_hi < b_lo:
        return False
    edges = [(b, u, v) for b, u, v in dual_edges(a_lo, a_hi, b_lo, b_hi) if r.contains_bond(b)]
    return dual_connected(cfg.__getitem__, edges,
                          [dv(a_lo + _H, b + _H) for b in range(b_lo, b_hi + 1)],
                          [dv(a_hi + _H, b + _H) for b in range(b_lo, b_hi + 1)])


def oracle_crossing(cfg, from_, to, within: Region | None = None) -> bool:
    r = within or cfg.region
    return connected(cfg.__getitem__, primal_edges(r.x_min, r.x_max, r.y_min, r.y_max),
                     [tuple(v) for v in from_], [tuple(v) for v in to])


def all_configs(region: Region):
    """Every BondConfig of a small region, in binary counting order."""
    from .sampler import BondConfig

    n = region.n_bonds
    if n > 20:
        raise ValueError("too many bonds to enumerate")
    import numpy as np

    for code in range(1 << n):
        bits = np.array([(code >> e) & 1 for e in range(n)], np.uint8)
        yield BondConfig.from_bits(region, bits)


def oracle_sigma_distribution(N: int, cap: int, p: float) -> dict:
    """Exact law of sigma on the slab [1, N] x [0, cap]."""
    region = Region(1, N, 0, cap)
    n = region.n_bonds
    law: dict = {}
    for cfg in all_configs(region):
        k = cfg.n_open
        s = oracle_sigma(cfg, cap)
        law[s] = law.get(s, 0.0) + p ** k * (1 - p) ** (n - k)
    return dict(sorted(law.items()))
