"""Random-cluster measures on rectangular volumes.

Boundary conditions are applied through a ghost vertex: under ``wired`` every
vertex on the rectangle's perimeter is joined to the ghost, under
``semicyl`` only the left and right columns and the top row are (the bottom
row stays free), and under ``free`` nothing is.  The cluster count of a
configuration is the number of components of the boundary-completed open
graph that meet the volume.

Sampling is single-edge heat bath in fixed bond-index order.  Uniforms come
from the same counter-based generator as the Bernoulli sampler, keyed by
(seed, replica, sweep, bond index), so two chains fed the same key share their
randomness; started from all-open and all-closed they form a monotone
sandwich (q >= 1).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import DensityProfile, Region
from .rng import indexed_uniform, key_for, sweep_key
from .sampler import BondConfig, column_thresholds
from .unionfind import uf_find, uf_reset, uf_union

BOUNDARIES = ("wired", "free", "semicyl")
EXACT_MAX_BONDS = 20
DC_KNOWN_Q_MIN = 25.72


def p_sd(q: float) -> float:
    """Self-dual point sqrt(q) / (1 + sqrt(q))."""
    if q <= 0:
        raise ValueError("q must be positive")
    s = math.sqrt(q)
    return s / (1.0 + s)


def dc_known(q: float, p_min: float) -> bool:
    """Is exponential decay of dual connectivity known for these weights?"""
    return (q in (1, 2) or q >= DC_KNOWN_Q_MIN) and p_min > p_sd(q)


@dataclass(frozen=True)
class RCMParams:
    q: float
    prof: DensityProfile
    N: int
    boundary: str
    volume: Region

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        if not self.volume.bounded:
            raise ValueError("volume must be bounded")
        if not self.prof.interior:
            raise ValueError("edge weights must lie in (0, 1)")

    @classmethod
    def homogeneous(cls, q: float, p: float, volume: Region, boundary: str = "free") -> "RCMParams":
        return cls(q, DensityProfile.homogeneous(p), volume.width, boundary, volume)

    def check_supercritical(self) -> bool:
        """Warn unless every strip weight sits where decay of dual connectivity is known."""
        ok = dc_known(self.q, min(self.prof.p))
        if not ok:
            warnings.warn(f"(DC) is assumed, not known, for q={self.q}, p={self.prof.p}",
                          stacklevel=2)
        return ok


@dataclass(frozen=True)
class ClusterCount:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("cluster count is positive")

    def __int__(self):
        return self.k


class _Geometry:
    """Bond-index tables of a volume used by the compiled kernels."""

    def __init__(self, params: RCMParams):
        vol = params.volume
        self.W, self.H = vol.width, vol.height
        W, H = self.W, self.H
        stride = 2 * W - 1
        eh = np.full((H, max(W - 1, 0)), -1, np.int64)
        ev = np.full((max(H - 1, 0), W), -1, np.int64)
        for j in range(H):
            for i in range(W - 1):
                eh[j, i] = j * stride + (2 * i if j < H - 1 else i)
        for j in range(H - 1):
            for i in range(W):
                ev[j, i] = j * stride + (2 * i + 1 if i < W - 1 else 2 * i)
        self.eh, self.ev = eh, ev
        n = vol.n_bonds
        self.n_bonds = n
        eu = np.empty(n, np.int64)
        ew = np.empty(n, np.int64)
        for j in range(H):
            for i in range(W - 1):
                eu[eh[j, i]], ew[eh[j, i]] = j * W + i, j * W + i + 1
        for j in range(H - 1):
            for i in range(W):
                eu[ev[j, i]], ew[ev[j, i]] = j * W + i, (j + 1) * W + i
        self.eu, self.ew = eu, ew
        ph, pv = column_thresholds(vol, params.prof, params.N)
        pe = np.empty(n, np.float64)
        for j in range(H):
            for i in range(W - 1):
                pe[eh[j, i]] = ph[i]
            if j < H - 1:
                for i in range(W):
                    pe[ev[j, i]] = pv[i]
        self.pe = pe
        bnd = np.zeros(W * H, np.uint8)
        if params.boundary == "wired":
            for j in range(H):
                for i in range(W):
                    if i in (0, W - 1) or j in (0, H - 1):
                        bnd[j * W + i] = 1
        elif params.boundary == "semicyl":
            for j in range(H):
                for i in range(W):
                    if i in (0, W - 1) or j == H - 1:
                        bnd[j * W + i] = 1
        self.bnd = bnd


_GEOMETRY_CACHE: dict = {}


def _geometry(params: RCMParams) -> _Geometry:
    g = _GEOMETRY_CACHE.get(params)
    if g is None:
        if len(_GEOMETRY_CACHE) > 64:
            _GEOMETRY_CACHE.clear()
        g = _GEOMETRY_CACHE[params] = _Geometry(params)
    return g


@njit(cache=True)
def _count_clusters(state, eu, ew, bnd, n_vertices, parent, size):
    ghost = n_vertices
    uf_reset(parent, size, n_vertices + 1)
    for v in range(n_vertices):
        if bnd[v]:
            uf_union(parent, size, v, ghost)
    for e in range(state.shape[0]):
        if state[e]:
            uf_union(parent, size, eu[e], ew[e])
    k = 0
    g, _ = uf_find(parent, ghost)
    ghost_used = False
    for v in range(n_vertices):
        r, _ = uf_find(parent, v)
        if r == v and r != g:
            k += 1
        if r == g:
            ghost_used = True
    if ghost_used:
        k += 1
    return k


@njit(cache=True)
def _expand(v, W, H, state, eh, ev, e_skip, seen, my, other, queue, tail):
    """Push the unseen open neighbours of v; return (new tail, met other side)."""
    j, i = v // W, v % W
    met = False
    for k in range(4):
        if k == 0:
            if i + 1 >= W:
                continue
            e, nv = eh[j, i], v + 1
        elif k == 1:
            if i == 0:
                continue
            e, nv = eh[j, i - 1], v - 1
        elif k == 2:
            if j + 1 >= H:
                continue
            e, nv = ev[j, i], v + W
        else:
            if j == 0:
                continue
            e, nv = ev[j - 1, i], v - W
        if e == e_skip or not state[e]:
            continue
        if seen[nv] == other:
            met = True
            break
        if seen[nv] != my:
            seen[nv] = my
            queue[tail] = nv
            tail += 1
    return tail, met


@njit(cache=True)
def _connected_off(u, v, e_skip, W, H, state, eh, ev, bnd, seen, stamp, qu, qv):
    """Are u and v joined in the boundary-completed graph without edge e_skip?

    Alternating breadth-first search from both ends; ``seen`` holds
    stamp (u side) and stamp+1 (v side) marks, so no clearing is needed.
    """
    su, sv = stamp, stamp + 1
    seen[u] = su
    seen[v] = sv
    hu, tu, hv, tv = 0, 1, 0, 1
    qu[0] = u
    qv[0] = v
    gu = bnd[u] == 1
    gv = bnd[v] == 1
    while True:
        if gu and gv:
            return True
        u_live = hu < tu
        v_live = hv < tv
        if not u_live and not gu:
            return False
        if not v_live and not gv:
            return False
        if not u_live and not v_live:
            return False
        if u_live:
            x = qu[hu]
            hu += 1
            tu, met = _expand(x, W, H, state, eh, ev, e_skip, seen, su, sv, qu, tu)
            if met:
                return True
            for t in range(hu, tu):
                if bnd[qu[t]]:
                    gu = True
                    break
        if v_live:
            x = qv[hv]
            hv += 1
            tv, met = _expand(x, W, H, state, eh, ev, e_skip, seen, sv, su, qv, tv)
            if met:
                return True
            for t in range(hv, tv):
                if bnd[qv[t]]:
                    gv = True
                    break


@njit(cache=True, inline="always")
def _p_eff(p, q, connected):
    return p if connected else p / (p + (1.0 - p) * q)


@njit(cache=True)
def _sweep(state, key, q, pe, eu, ew, W, H, eh, ev, bnd, seen, stamp, qu, qv):
    for e in range(state.shape[0]):
        c = _connected_off(eu[e], ew[e], e, W, H, state, eh, ev, bnd, seen, stamp, qu, qv)
        stamp += 2
        state[e] = 1 if indexed_uniform(key, e) < _p_eff(pe[e], q, c) else 0
    return stamp


def _buffers(g: _Geometry):
    nv = g.W * g.H
    return np.zeros(nv, np.int64), np.empty(nv, np.int64), np.empty(nv, np.int64)


@njit(cache=True)
def _run_chain(state, rkey, sweep0, sweeps, q, pe, eu, ew, W, H, eh, ev, bnd, seen, qu, qv):
    stamp = 1
    for s in range(sweeps):
        stamp = _sweep(state, sweep_key(rkey, sweep0 + s), q, pe, eu, ew, W, H, eh, ev, bnd,
                       seen, stamp, qu, qv)
        if stamp > 1 << 60:
            seen[:] = 0
            stamp = 1


def _start_state(g: _Geometry, boundary: str, start: str | None) -> np.ndarray:
    start = start or ("open" if boundary != "free" else "closed")
    if start not in ("open", "closed"):
        raise ValueError("start must be 'open' or 'closed'")
    return np.full(g.n_bonds, 1 if start == "open" else 0, np.uint8)


def sample_rcm(params: RCMParams, sweeps: int, s, start: str | None = None) -> BondConfig:
    """Run ``sweeps`` heat-bath sweeps and return the final configuration.

    The chain starts all-open for wired boundaries and all-closed for free
    ones unless ``start`` says otherwise.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    g = _geometry(params)
    state = _start_state(g, params.boundary, start)
    seen, qu, qv = _buffers(g)
    _run_chain(state, s.key, 0, sweeps, float(params.q), g.pe, g.eu, g.ew, g.W, g.H,
               g.eh, g.ev, g.bnd, seen, qu, qv)
    return BondConfig.from_bits(params.volume, state)


@njit(cache=True)
def _sandwich(top, bot, rkey, max_sweeps, tol, q, pe, eu, ew, W, H, eh, ev, bnd, seen, qu, qv,
              trace_gap, trace_open):
    stamp = 1
    n = top.shape[0]
    for s in range(max_sweeps):
        key = sweep_key(rkey, s)
        stamp = _sweep(top, key, q, pe, eu, ew, W, H, eh, ev, bnd, seen, stamp, qu, qv)
        stamp = _sweep(bot, key, q, pe, eu, ew, W, H, eh, ev, bnd, seen, stamp, qu, qv)
        diff = 0
        n_open = 0
        for e in range(n):
            diff += top[e] != bot[e]
            n_open += top[e]
        trace_gap[s] = diff / n
        trace_open[s] = n_open
        if diff <= tol * n:
            return s + 1
    return max_sweeps


@dataclass
class SandwichResult:
    top: BondConfig
    bottom: BondConfig
    sweeps: int
    coalesced: bool
    gap: np.ndarray
    open_edges: np.ndarray

    def diagnostics_rows(self):
        """(sweep, disagreement fraction, open-edge count of the upper chain)."""
        return [(i + 1, float(g), int(o)) for i, (g, o) in enumerate(zip(self.gap, self.open_edges))]


def sandwich(params: RCMParams, s, max_sweeps: int = 10_000, tol: float = 1e-3) -> SandwichResult:
    """Couple the all-open and all-closed chains until their disagreement drops below ``tol``."""
    g = _geometry(params)
    top = np.ones(g.n_bonds, np.uint8)
    bot = np.zeros(g.n_bonds, np.uint8)
    seen, qu, qv = _buffers(g)
    gap = np.zeros(max_sweeps)
    opn = np.zeros(max_sweeps, np.int64)
    done = _sandwich(top, bot, s.key, max_sweeps, tol, float(params.q), g.pe, g.eu, g.ew, g.W, g.H,
                     g.eh, g.ev, g.bnd, seen, qu, qv, gap, opn)
    return SandwichResult(BondConfig.from_bits(params.volume, top),
                          BondConfig.from_bits(params.volume, bot), int(done),
                          bool(gap[done - 1] <= tol), gap[:done].copy(), opn[:done].copy())


@njit(cache=True)
def _histogram(state, rkey, burn, samples, thin, q, pe, eu, ew, W, H, eh, ev, bnd, seen, qu, qv,
               counts):
    stamp = 1
    s = 0
    for _ in range(burn):
        stamp = _sweep(state, sweep_key(rkey, s), q, pe, eu, ew, W, H, eh, ev, bnd, seen, stamp, qu, qv)
        s += 1
    for _ in range(samples):
        for _ in range(thin):
            stamp = _sweep(state, sweep_key(rkey, s), q, pe, eu, ew, W, H, eh, ev, bnd, seen,
                           stamp, qu, qv)
            s += 1
        code = 0
        for e in range(state.shape[0]):
            if state[e]:
                code |= 1 << e
        counts[code] += 1


def chain_histogram(params: RCMParams, s, burn: int, samples: int, thin: int = 1,
                    start: str | None = None) -> np.ndarray:
    """Empirical distribution of one long chain over all 2^|E| configurations."""
    g = _geometry(params)
    if g.n_bonds > EXACT_MAX_BONDS:
        raise ValueError("histogram needs a volume with at most 20 bonds")
    state = _start_state(g, params.boundary, start)
    seen, qu, qv = _buffers(g)
    counts = np.zeros(1 << g.n_bonds, np.int64)
    _histogram(state, s.key, burn, samples, thin, float(params.q), g.pe, g.eu, g.ew, g.W, g.H,
               g.eh, g.ev, g.bnd, seen, qu, qv, counts)
    return counts / samples


@njit(cache=True)
def _exact_weights(n_bonds, n_vertices, q, pe, eu, ew, bnd, out):
    parent = np.empty(n_vertices + 1, np.int64)
    size = np.empty(n_vertices + 1, np.int64)
    state = np.empty(n_bonds, np.uint8)
    logq = math.log(q)
    for code in range(1 << n_bonds):
        lw = 0.0
        for e in range(n_bonds):
            b = (code >> e) & 1
            state[e] = b
            lw += math.log(pe[e]) if b else math.log(1.0 - pe[e])
        k = _count_clusters(state, eu, ew, bnd, n_vertices, parent, size)
        out[code] = lw + k * logq


def exact_rcm(params: RCMParams) -> np.ndarray:
    """Exact probability of every configuration; bit e of the index is bond e."""
    g = _geometry(params)
    if g.n_bonds > EXACT_MAX_BONDS:
        raise ValueError(f"exact enumeration is limited to {EXACT_MAX_BONDS} bonds, "
                         f"volume has {g.n_bonds}")
    logw = np.empty(1 << g.n_bonds)
    _exact_weights(g.n_bonds, g.W * g.H, float(params.q), g.pe, g.eu, g.ew, g.bnd, logw)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def edge_marginals(dist: np.ndarray, n_bonds: int) -> np.ndarray:
    codes = np.arange(dist.shape[0])
    return np.array([dist[(codes >> e) & 1 == 1].sum() for e in range(n_bonds)])


def cluster_count(cfg: BondConfig, params: RCMParams) -> ClusterCount:
    g = _geometry(params)
    if cfg.region != params.volume:
        raise ValueError("configuration and volume differ")
    nv = g.W * g.H
    parent = np.empty(nv + 1, np.int64)
    size = np.empty(nv + 1, np.int64)
    return ClusterCount(int(_count_clusters(cfg.bits, g.eu, g.ew, g.bnd, nv, parent, size)))


def heat_bath_conditional(cfg: BondConfig, b, params: RCMParams) -> float:
    """Probability that bond ``b`` is open given every other bond of ``cfg``."""
    g = _geometry(params)
    e = params.volume.index(b)
    seen, qu, qv = _buffers(g)
    c = _connected_off(g.eu[e], g.ew[e], e, g.W, g.H, cfg.bits, g.eh, g.ev, g.bnd, seen, 1, qu, qv)
    return float(_p_eff(g.pe[e], float(params.q), c))


def rcm_sigma_samples(params: RCMParams, seed: int, replicas: int, sweeps: int, cap: int,
                      start: str | None = None, rep0: int = 0) -> np.ndarray:
    """sigma of independent chains after ``sweeps`` sweeps each, one chain per replica."""
    from .connectivity import sigma_of_config

    g = _geometry(params)
    out = np.empty(replicas, np.int64)
    seen, qu, qv = _buffers(g)
    for r in range(replicas):
        state = _start_state(g, params.boundary, start)
        _run_chain(state, key_for(seed, rep0 + r), 0, sweeps, float(params.q), g.pe, g.eu, g.ew,
                   g.W, g.H, g.eh, g.ev, g.bnd, seen, qu, qv)
        cfg = BondConfig.from_bits(params.volume, state)
        out[r] = sigma_of_config(cfg, cap).value
    return out


@njit(cache=True)
def _pair_chains(states, rkey, max_sweeps, tol, q, pe, eu, ew, W, H, eh, ev, bnd_w, bnd_f,
                 seen, qu, qv, trace):
    """Rows of ``states``: wired top, wired bottom, free top, free bottom."""
    stamp = 1
    n = states.shape[1]
    for s in range(max_sweeps):
        key = sweep_key(rkey, s)
        for c in range(4):
            bnd = bnd_w if c < 2 else bnd_f
            stamp = _sweep(states[c], key, q, pe, eu, ew, W, H, eh, ev, bnd, seen, stamp, qu, qv)
        gw = 0
        gf = 0
        ow = 0
        of = 0
        for e in range(n):
            gw += states[0, e] != states[1, e]
            gf += states[2, e] != states[3, e]
            ow += states[0, e]
            of += states[2, e]
        trace[s, 0] = gw / n
        trace[s, 1] = ow
        trace[s, 2] = gf / n
        trace[s, 3] = of
        if gw <= tol * n and gf <= tol * n:
            return s + 1
    return max_sweeps


def coupled_boundaries(wired: RCMParams, free: RCMParams, key, max_sweeps: int = 10_000,
                       tol: float = 1e-3):
    """Wired and free samples of one volume driven by the same uniforms.

    Both boundaries run a monotone sandwich; sweeping stops once both gaps are
    below ``tol`` and the upper chains are returned, so the wired sample
    contains the free one.  Returns (wired cfg, free cfg, sweeps, coalesced,
    trace) where trace rows are (wired gap, wired open edges, free gap, free
    open edges) after each sweep.
    """
    if wired.volume != free.volume or wired.q != free.q or wired.prof != free.prof:
        raise ValueError("boundary pair must share volume and weights")
    gw, gf = _geometry(wired), _geometry(free)
    n = gw.n_bonds
    states = np.zeros((4, n), np.uint8)
    states[0] = 1
    states[2] = 1
    seen, qu, qv = _buffers(gw)
    trace = np.zeros((max_sweeps, 4))
    done = _pair_chains(states, np.uint64(key), max_sweeps, tol, float(wired.q), gw.pe, gw.eu,
                        gw.ew, gw.W, gw.H, gw.eh, gw.ev, gw.bnd, gf.bnd, seen, qu, qv, trace)
    coalesced = bool(np.count_nonzero(states[0] != states[1]) <= tol * n
                     and np.count_nonzero(states[2] != states[3]) <= tol * n)
    return (BondConfig.from_bits(wired.volume, states[0]), BondConfig.from_bits(free.volume, states[2]),
            int(done), coalesced, trace[:done].copy())
