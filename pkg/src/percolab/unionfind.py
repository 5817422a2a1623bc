"""Union-find over array slots (union by size, path halving).

The njit kernels count pointer steps so callers can check the near-linear
work bound without timing anything.
"""
import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def uf_find(parent, a):
    steps = 0
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
        steps += 1
    return a, steps


@njit(cache=True, inline="always")
def uf_union(parent, size, a, b):
    ra, s1 = uf_find(parent, a)
    rb, s2 = uf_find(parent, b)
    if ra != rb:
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
    return s1 + s2 + 2


@njit(cache=True)
def uf_reset(parent, size, n):
    for i in range(n):
        parent[i] = i
        size[i] = 1


@njit(cache=True)
def label_grid(hor, ver, parent, size):
    """Union every open bond of an (H, W) vertex grid; vertex (i, j) is slot j*W + i.

    Returns the number of union-find work units spent.
    """
    H = hor.shape[0]
    W = hor.shape[1] + 1
    uf_reset(parent, size, H * W)
    work = 0
    for j in range(H):
        base = j * W
        for i in range(W - 1):
            if hor[j, i]:
                work += uf_union(parent, size, base + i, base + i + 1)
        if j < H - 1:
            for i in range(W):
                if ver[j, i]:
                    work += uf_union(parent, size, base + i, base + W + i)
    return work


@njit(cache=True)
def sets_connected(hor, ver, src, dst, parent, size, mark):
    """Whether some vertex of ``src`` meets some vertex of ``dst``, and the work spent.

    Masks are (H, W) arrays over the grid's vertices.
    """
    H = hor.shape[0]
    W = hor.shape[1] + 1
    work = label_grid(hor, ver, parent, size)
    n = H * W
    for k in range(n):
        mark[k] = 0
    any_src = False
    for j in range(H):
        for i in range(W):
            if src[j, i]:
                r, s = uf_find(parent, j * W + i)
                work += s + 1
                mark[r] = 1
                any_src = True
    if not any_src:
        return False, work
    for j in range(H):
        for i in range(W):
            if dst[j, i]:
                r, s = uf_find(parent, j * W + i)
                work += s + 1
                if mark[r]:
                    return True, work
    return False, work


class UnionFind:
    """Plain-Python union-find with operation counters."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.finds = 0
        self.unions = 0
        self.steps = 0

    def find(self, a: int) -> int:
        self.finds += 1
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
            self.steps += 1
        return a

    def union(self, a: int, b: int) -> bool:
        self.unions += 1
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    @property
    def operations(self) -> int:
        return self.finds + self.unions + self.steps


def work_arrays(n: int):
    return np.empty(n, np.int64), np.empty(n, np.int64), np.empty(n, np.uint8)
