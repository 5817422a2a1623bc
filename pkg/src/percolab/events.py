"""Named crossing events and a compiled Monte Carlo evaluator.

Every event reduces to one question on one rectangular grid: is a source set
of vertices joined to a target set?  The grid is either a window of the primal
sample or the dual-open grid of a dual window, and complement events flip the
answer.  ``EventSpec.plan()`` builds that question once.

Half-infinite and infinite windows are truncated.  ``B``, ``C``, ``D`` and
``E`` default to M = 4N.  ``A`` evaluates the no-escape event in the slab
[1-pad, N+pad] x [0, M]; reaching a side column counts as escaping, which
makes the truncated event a subset of the untruncated one.

Event strings look like ``B(N=16,M=8)``, ``C(N=8,k=2,M=8)`` or
``sigma(N=16,cap=100000)``.

Batch estimation uses a lazy search: it explores outward from the
source set and draws a bond's state only when the search reaches it.  Since
uniforms are keyed by bond position this sees exactly the configuration the
full sampler would produce, at a fraction of the cost for rare or local events.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields, replace

import numpy as np
from numba import njit, prange

from .connectivity import dual_grids
from .lattice import DensityProfile, Region
from .rng import bond_uniform, replica_key, row_key
from .sampler import BondConfig, column_thresholds, fill_grid
from .unionfind import sets_connected

PRIMAL_KINDS = {"A", "T", "grimmett", "Dtilde", "alpha"}
DUAL_KINDS = {"B", "C", "D", "E", "dual2pt"}
KINDS = PRIMAL_KINDS | DUAL_KINDS | {"sigma"}
ALIASES = {"strip-crossing": "T", "strip": "T", "D~": "Dtilde", "Dt": "Dtilde"}


@dataclass(frozen=True)
class Plan:
    region: Region
    dual: bool
    wx0: int
    wy0: int
    w: int
    h: int
    src: np.ndarray
    dst: np.ndarray
    negate: bool = False


@dataclass(frozen=True)
class EventSpec:
    kind: str
    N: int
    M: int | None = None
    k: int | None = None
    m: int | None = None
    H: int | None = None
    a: float | None = None
    pad: int | None = None
    W: int | None = None
    d: int | None = None
    cap: int | None = None

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.M is not None and self.M < 1:
            raise ValueError("M must be >= 1")
        if kind == "A" and self.M is None:
            raise ValueError("A needs M")
        if kind == "Dtilde" and (self.m is None or self.m < 1):
            raise ValueError("Dtilde needs m >= 1")
        if kind == "grimmett" and self.a is None and self.H is None:
            raise ValueError("grimmett needs a or H")
        if kind == "T" and self.H is None and self.M is None:
            raise ValueError("strip crossing needs H")
        if kind == "dual2pt" and (self.d is None or self.d < 1):
            raise ValueError("dual2pt needs d >= 1")
        if kind == "sigma" and (self.cap is None or self.cap < 1):
            raise ValueError("sigma needs cap >= 1")

    def __str__(self):
        args = [f"{f.name}={getattr(self, f.name)}" for f in fields(self)
                if f.name != "kind" and getattr(self, f.name) is not None]
        return f"{self.kind}({','.join(args)})"

    @property
    def is_dual(self) -> bool:
        return self.kind in DUAL_KINDS

    @property
    def increasing(self) -> bool:
        """Increasing in the primal configuration (dual events and A are decreasing)."""
        return self.kind in {"T", "grimmett", "Dtilde", "alpha"}

    @property
    def height(self) -> int:
        """Truncation height M for windows of unbounded height."""
        return self.M if self.M is not None else 4 * self.N

    def with_(self, **kw) -> "EventSpec":
        return replace(self, **kw)

    def plan(self) -> Plan:
        N = self.N
        kind = self.kind
        if kind == "A":
            pad = N if self.pad is None else self.pad
            if pad < 1:
                raise ValueError("A needs pad >= 1")
            M = self.M
            region = Region(1 - pad, N + pad, 0, M)
            src = [(x, 0) for x in range(1, N + 1)]
            dst = [(x, M) for x in range(1 - pad, N + pad + 1)]
            dst += [(x, y) for y in range(M + 1) for x in (1 - pad, N + pad)]
            return _primal_plan(region, src, dst, negate=True)
        if kind in ("T", "grimmett"):
            H = self.tube_height
            region = Region(1, N, 0, H)
            return _primal_plan(region, [(x, 0) for x in range(1, N + 1)],
                                [(x, H) for x in range(1, N + 1)])
        if kind == "Dtilde":
            top = 2 * N ** self.m - 1
            region = Region(0, N, 0, top)
            return _primal_plan(region, [(0, y) for y in range(top + 1)],
                                [(N, y) for y in range(top + 1)])
        if kind == "alpha":
            W = N if self.W is None else self.W
            region = Region(0, N, -W, W)
            return _primal_plan(region, [(0, 0)], [(N, y) for y in range(-W, W + 1)])
        if kind == "B":
            M = self.height
            return _dual_plan((0, N), (0, M - 1), [(0, 0)], [(N, 0)])
        if kind in ("C", "D", "E"):
            M = self.height
            b_lo, b_hi = -M, M - 1
            rows = range(b_lo, b_hi + 1)
            if kind == "E":
                return _dual_plan((0, N), (b_lo, b_hi), [(0, 0)], [(N, 0)])
            if kind == "C":
                if self.k is not None:
                    if not b_lo <= self.k <= b_hi:
                        raise ValueError(f"k={self.k} outside the truncated window")
                    return _dual_plan((0, N), (b_lo, b_hi), [(0, 0)], [(N, self.k)])
                return _dual_plan((0, N), (b_lo, b_hi), [(0, 0)], [(N, b) for b in rows])
            return _dual_plan((0, N), (b_lo, b_hi), [(0, b) for b in rows], [(N, b) for b in rows])
        if kind == "dual2pt":
            d = self.d
            w = max(2, d) if self.W is None else self.W
            return _dual_plan((-w, d + w), (-w, w), [(0, 0)], [(d, 0)])
        raise ValueError(f"{kind} is not a crossing event")

    @property
    def tube_height(self) -> int:
        if self.H is not None:
            return self.H
        if self.M is not None:
            return self.M
        return max(1, math.ceil(math.exp(self.a * self.N)))


def _mask(shape, cells, origin):
    m = np.zeros(shape, np.uint8)
    ox, oy = origin
    for x, y in cells:
        m[y - oy, x - ox] = 1
    return m


def _primal_plan(region: Region, src, dst, negate=False) -> Plan:
    shape = (region.height, region.width)
    origin = (region.x_min, region.y_min)
    return Plan(region, False, region.x_min, region.y_min, region.width, region.height,
                _mask(shape, src, origin), _mask(shape, dst, origin), negate)


def _dual_plan(a_range, b_range, src, dst) -> Plan:
    (a_lo, a_hi), (b_lo, b_hi) = a_range, b_range
    w, h = a_hi - a_lo + 1, b_hi - b_lo + 1
    # dual window [a_lo, a_hi] x [b_lo, b_hi] crosses primal bonds of this rectangle
    region = Region(a_lo, a_hi + 1, b_lo, b_hi + 1)
    shape = (h, w)
    return Plan(region, True, a_lo, b_lo, w, h,
                _mask(shape, src, (a_lo, b_lo)), _mask(shape, dst, (a_lo, b_lo)))


_TOKEN = re.compile(r"^\s*([A-Za-z][A-Za-z0-9~\-]*)\s*\((.*)\)\s*$")
_INT_FIELDS = {"N", "M", "k", "m", "H", "pad", "W", "d", "cap"}


def parse_event(text: str) -> EventSpec:
    """Parse ``KIND(key=value, ...)``."""
    match = _TOKEN.match(text)
    if not match:
        raise ValueError(f"cannot parse event {text!r}")
    kind, body = match.groups()
    kw = {}
    for part in filter(None, (p.strip() for p in body.split(","))):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in _INT_FIELDS | {"a"}:
            raise ValueError(f"unknown parameter {key!r} in {text!r}")
        kw[key] = int(val) if key in _INT_FIELDS else float(val)
    if "N" not in kw:
        raise ValueError(f"event {text!r} needs N")
    return EventSpec(kind, **kw)


@njit(cache=True)
def eval_grids(hor, ver, x0, y0, dual, wx0, wy0, w, h, src, dst, negate):
    n = w * h
    parent = np.empty(n, np.int64)
    size = np.empty(n, np.int64)
    mark = np.empty(n, np.uint8)
    if dual:
        dh = np.empty((h, w - 1), np.uint8)
        dv = np.empty((h - 1, w), np.uint8)
        dual_grids(hor, ver, x0, y0, wx0, wy0, w, h, dh, dv)
        ok, _ = sets_connected(dh, dv, src, dst, parent, size, mark)
    else:
        i0, j0 = wx0 - x0, wy0 - y0
        ok, _ = sets_connected(hor[j0 : j0 + h, i0 : i0 + w - 1], ver[j0 : j0 + h - 1, i0 : i0 + w],
                               src, dst, parent, size, mark)
    return ok != negate


@njit(cache=True, parallel=True)
def mc_outcomes(seed, rep0, R, x0, y0, W, H, ph, pv, dual, wx0, wy0, w, h, src, dst, negate):
    """Per-replica event indicator and open-bond count of the sampled region."""
    out = np.empty(R, np.uint8)
    n_open = np.empty(R, np.int64)
    for r in prange(R):
        hor = np.empty((H, W - 1), np.uint8)
        ver = np.empty((H - 1, W), np.uint8)
        fill_grid(replica_key(seed, rep0 + r), x0, y0, ph, pv, hor, ver)
        out[r] = eval_grids(hor, ver, x0, y0, dual, wx0, wy0, w, h, src, dst, negate)
        n_open[r] = hor.sum() + ver.sum()
    return out, n_open


@njit(cache=True, inline="always")
def _open(rkey, dual, x, y, orient, ph, pv, cx0):
    """State of the edge seen by the search; dual edges are open iff the crossed bond is closed."""
    u = bond_uniform(row_key(rkey, y), x, orient)
    op = u < (ph[x - cx0] if orient == 0 else pv[x - cx0])
    return op != dual


@njit(cache=True)
def search_event(rkey, dual, wx0, wy0, w, h, src, dst, negate, ph, pv, cx0, seen, stack):
    """Depth-first search from ``src`` that samples edges on demand."""
    n = w * h
    for v in range(n):
        seen[v] = 0
    top = 0
    found = False
    for j in range(h):
        for i in range(w):
            if src[j, i]:
                v = j * w + i
                seen[v] = 1
                stack[top] = v
                top += 1
                if dst[j, i]:
                    found = True
    while top > 0 and not found:
        top -= 1
        v = stack[top]
        j, i = v // w, v % w
        a, b = wx0 + i, wy0 + j
        for k in range(4):
            if k == 0:
                if j + 1 >= h:
                    continue
                nv = v + w
                e = _open(rkey, dual, a, b + 1, 0, ph, pv, cx0) if dual else _open(rkey, dual, a, b, 1, ph, pv, cx0)
            elif k == 1:
                if i + 1 >= w:
                    continue
                nv = v + 1
                e = _open(rkey, dual, a + 1, b, 1, ph, pv, cx0) if dual else _open(rkey, dual, a, b, 0, ph, pv, cx0)
            elif k == 2:
                if i == 0:
                    continue
                nv = v - 1
                e = _open(rkey, dual, a, b, 1, ph, pv, cx0) if dual else _open(rkey, dual, a - 1, b, 0, ph, pv, cx0)
            else:
                if j == 0:
                    continue
                nv = v - w
                e = _open(rkey, dual, a, b, 0, ph, pv, cx0) if dual else _open(rkey, dual, a, b - 1, 1, ph, pv, cx0)
            if e and not seen[nv]:
                seen[nv] = 1
                if dst[nv // w, nv % w]:
                    found = True
                    break
                stack[top] = nv
                top += 1
    return found != negate


@njit(cache=True, parallel=True)
def mc_search(seed, rep0, R, dual, wx0, wy0, w, h, src, dst, negate, ph, pv, cx0, chunk):
    """Per-replica event indicators via :func:`search_event`."""
    out = np.empty(R, np.uint8)
    n_chunks = (R + chunk - 1) // chunk
    for c in prange(n_chunks):
        seen = np.empty(w * h, np.uint8)
        stack = np.empty(w * h, np.int64)
        for r in range(c * chunk, min(R, (c + 1) * chunk)):
            out[r] = search_event(replica_key(seed, rep0 + r), dual, wx0, wy0, w, h, src, dst,
                                  negate, ph, pv, cx0, seen, stack)
    return out


def _covers(outer: Region, inner: Region) -> bool:
    return (outer.x_min <= inner.x_min and inner.x_max <= outer.x_max
            and outer.y_min <= inner.y_min and inner.y_max <= outer.y_max)


def evaluate_event(cfg: BondConfig, spec: EventSpec) -> bool:
    """Evaluate ``spec`` on a sampled configuration covering its window."""
    plan = spec.plan()
    if not _covers(cfg.region, plan.region):
        raise ValueError(f"{spec} needs {plan.region}, configuration covers only {cfg.region}")
    r = cfg.region
    return bool(eval_grids(cfg.hor, cfg.ver, r.x_min, r.y_min, plan.dual, plan.wx0, plan.wy0,
                           plan.w, plan.h, plan.src, plan.dst, plan.negate))


def dual_crossing(cfg: BondConfig, spec: EventSpec) -> bool:
    if not spec.is_dual:
        raise ValueError(f"{spec} is not a dual event")
    return evaluate_event(cfg, spec)


def event_hits(spec: EventSpec, prof: DensityProfile, N: int, replicas: int, seed: int,
               rep0: int = 0) -> np.ndarray:
    """Event indicators for replicas rep0 .. rep0+replicas-1 (lazy search)."""
    plan = spec.plan()
    region = plan.region
    ph, pv = column_thresholds(region, prof, N)
    return mc_search(np.uint64(seed), int(rep0), replicas, plan.dual, plan.wx0, plan.wy0,
                     plan.w, plan.h, plan.src, plan.dst, plan.negate, ph, pv, region.x_min, 256)


def sample_outcomes(spec: EventSpec, prof: DensityProfile, N: int, replicas: int, seed: int,
                    rep0: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Event indicators and open-bond counts for replicas rep0 .. rep0+replicas-1.

    Bonds are keyed by lattice position, so different events evaluated with the
    same seed see the same configuration on their common bonds.
    """
    plan = spec.plan()
    region = plan.region
    ph, pv = column_thresholds(region, prof, N)
    return mc_outcomes(np.uint64(seed), int(rep0), replicas, region.x_min, region.y_min,
                       region.width, region.height, ph, pv, plan.dual, plan.wx0, plan.wy0,
                       plan.w, plan.h, plan.src, plan.dst, plan.negate)


@njit(cache=True)
def _enumerate_counts(w, h, src, dst, negate, counts):
    n_h = (w - 1) * h
    n = n_h + w * (h - 1)
    hor = np.empty((h, w - 1), np.uint8)
    ver = np.empty((h - 1, w), np.uint8)
    parent = np.empty(w * h, np.int64)
    size = np.empty(w * h, np.int64)
    mark = np.empty(w * h, np.uint8)
    for code in range(1 << n):
        k = 0
        for e in range(n):
            bit = (code >> e) & 1
            k += bit
            if e < n_h:
                hor[e // (w - 1), e % (w - 1)] = bit
            else:
                f = e - n_h
                ver[f // w, f % w] = bit
        ok, _ = sets_connected(hor, ver, src, dst, parent, size, mark)
        if ok != negate:
            counts[k] += 1


ENUM_MAX_EDGES = 26


@dataclass(frozen=True)
class EventPolynomial:
    """P(event) = sum_k counts[k] r^k (1-r)^(n-k) over the event's grid edges.

    r is the edge-open probability on the grid the event is decided on: p for
    primal events, 1-p for dual ones.
    """

    spec: EventSpec
    counts: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.counts) - 1

    def _r(self, p: float) -> float:
        return 1.0 - p if self.spec.is_dual else p

    def prob(self, p: float) -> float:
        r, n = self._r(p), self.n_edges
        k = np.arange(n + 1)
        return float(np.sum(self.counts * r ** k * (1.0 - r) ** (n - k)))

    def derivative(self, p: float) -> float:
        """d/dp of :meth:`prob`, differentiating each monomial."""
        r, n = self._r(p), self.n_edges
        total = 0.0
        for k, c in enumerate(self.counts.tolist()):
            if not c:
                continue
            a = k * r ** (k - 1) * (1 - r) ** (n - k) if k else 0.0
            b = (n - k) * r ** k * (1 - r) ** (n - k - 1) if k < n else 0.0
            total += c * (a - b)
        return -total if self.spec.is_dual else total

    def russo_covariance(self, p: float) -> float:
        """cov_p(open-edge count, indicator) / (p (1-p)), primal events only."""
        if self.spec.is_dual:
            raise ValueError("covariance form is stated for primal events")
        n = self.n_edges
        k = np.arange(n + 1)
        w = self.counts * p ** k * (1.0 - p) ** (n - k)
        return float(np.sum(w * (k - n * p)) / (p * (1 - p)))


def event_polynomial(spec: EventSpec) -> EventPolynomial:
    """Exhaustive enumeration of every state of the edges the event looks at."""
    plan = spec.plan()
    w, h = plan.w, plan.h
    n = (w - 1) * h + w * (h - 1)
    if n > ENUM_MAX_EDGES:
        raise ValueError(f"{spec} looks at {n} edges, enumeration is limited to {ENUM_MAX_EDGES}")
    counts = np.zeros(n + 1, np.int64)
    _enumerate_counts(w, h, plan.src, plan.dst, plan.negate, counts)
    return EventPolynomial(spec, counts)
