"""Independent (Bernoulli) bond configurations, whole-window or row by row.

Configurations are held as two dense grids internally:

* ``hor[j, i]`` is the bond {(x0+i, y0+j), (x0+i+1, y0+j)}
* ``ver[j, i]`` is the bond {(x0+i, y0+j), (x0+i, y0+j+1)}

and exposed as a flat bit vector in :class:`~percolab.lattice.Region` index
order.  A bond is open iff its keyed uniform is below the density of its strip,
so two densities compared against the same uniforms give a monotone coupling.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from numba import njit

from .lattice import HORIZONTAL, Bond, DensityProfile, Region
from .rng import bond_uniform, key_for, row_key


@dataclass(frozen=True)
class SeedSpec:
    seed: int
    replica: int = 0

    @property
    def key(self) -> np.uint64:
        return key_for(self.seed, self.replica)


@njit(cache=True)
def fill_grid(rkey, x0, y0, ph, pv, hor, ver):
    H, Wm1 = hor.shape
    for j in range(H):
        rk = row_key(rkey, y0 + j)
        for i in range(Wm1):
            hor[j, i] = 1 if bond_uniform(rk, x0 + i, 0) < ph[i] else 0
        if j < H - 1:
            for i in range(ver.shape[1]):
                ver[j, i] = 1 if bond_uniform(rk, x0 + i, 1) < pv[i] else 0


@njit(cache=True)
def fill_grid_coupled(rkey, x0, y0, ph_lo, pv_lo, ph_hi, pv_hi, hor_lo, ver_lo, hor_hi, ver_hi):
    H, Wm1 = hor_lo.shape
    for j in range(H):
        rk = row_key(rkey, y0 + j)
        for i in range(Wm1):
            u = bond_uniform(rk, x0 + i, 0)
            hor_lo[j, i] = 1 if u < ph_lo[i] else 0
            hor_hi[j, i] = 1 if u < ph_hi[i] else 0
        if j < H - 1:
            for i in range(ver_lo.shape[1]):
                u = bond_uniform(rk, x0 + i, 1)
                ver_lo[j, i] = 1 if u < pv_lo[i] else 0
                ver_hi[j, i] = 1 if u < pv_hi[i] else 0


def column_thresholds(region: Region, prof: DensityProfile, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-column densities for horizontal and vertical bonds of ``region``."""
    cols = prof.column_densities(N, region.x_min, region.x_max)
    return cols[:-1].copy(), cols


def empty_grids(region: Region) -> tuple[np.ndarray, np.ndarray]:
    W, H = region.width, region.height
    return np.zeros((H, W - 1), np.uint8), np.zeros((H - 1, W), np.uint8)


def grids_to_bits(hor: np.ndarray, ver: np.ndarray) -> np.ndarray:
    H, W = hor.shape[0], hor.shape[1] + 1
    stride = 2 * W - 1
    n = (W - 1) * H + W * (H - 1)
    bits = np.empty(n, np.uint8)
    if H > 1:
        block = bits[: (H - 1) * stride].reshape(H - 1, stride)
        block[:, 0 : 2 * W - 2 : 2] = hor[: H - 1]
        block[:, 1 : 2 * W - 2 : 2] = ver[:, : W - 1]
        block[:, 2 * W - 2] = ver[:, W - 1]
    bits[(H - 1) * stride :] = hor[H - 1]
    return bits


def bits_to_grids(region: Region, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    W, H = region.width, region.height
    stride = 2 * W - 1
    hor, ver = empty_grids(region)
    if H > 1:
        block = bits[: (H - 1) * stride].reshape(H - 1, stride)
        hor[: H - 1] = block[:, 0 : 2 * W - 2 : 2]
        ver[:, : W - 1] = block[:, 1 : 2 * W - 2 : 2]
        ver[:, W - 1] = block[:, 2 * W - 2]
    hor[H - 1] = bits[(H - 1) * stride :]
    return hor, ver


class BondConfig:
    """Open/closed state of every bond of a bounded region.

    Only primal states are stored; a dual bond is open iff the primal bond it
    crosses is closed.
    """

    __slots__ = ("region", "hor", "ver")

    def __init__(self, region: Region, hor: np.ndarray, ver: np.ndarray):
        if not region.bounded:
            raise ValueError("BondConfig needs a bounded region")
        W, H = region.width, region.height
        if hor.shape != (H, W - 1) or ver.shape != (H - 1, W):
            raise ValueError("grid shapes do not match region")
        self.region = region
        self.hor = hor
        self.ver = ver

    @classmethod
    def from_bits(cls, region: Region, bits) -> "BondConfig":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (region.n_bonds,):
            raise ValueError(f"expected {region.n_bonds} bits, got {bits.shape}")
        if bits.max(initial=0) > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(region, *bits_to_grids(region, bits))

    @classmethod
    def constant(cls, region: Region, value: int) -> "BondConfig":
        hor, ver = empty_grids(region)
        hor[:] = value
        ver[:] = value
        return cls(region, hor, ver)

    @property
    def bits(self) -> np.ndarray:
        return grids_to_bits(self.hor, self.ver)

    def __len__(self) -> int:
        return self.region.n_bonds

    def __getitem__(self, b: Bond) -> int:
        if not self.region.contains_bond(b):
            raise KeyError(b)
        i, j = b.x - self.region.x_min, b.y - self.region.y_min
        return int(self.hor[j, i] if b.orient == HORIZONTAL else self.ver[j, i])

    def dual_open(self, b: Bond) -> bool:
        """State of the dual bond crossing ``b``."""
        return self[b] == 0

    @property
    def n_open(self) -> int:
        return int(self.hor.sum(dtype=np.int64) + self.ver.sum(dtype=np.int64))

    def subset_of(self, other: "BondConfig") -> bool:
        return bool(np.all(self.hor <= other.hor) and np.all(self.ver <= other.ver))

    def __eq__(self, other):
        return (isinstance(other, BondConfig) and self.region == other.region
                and np.array_equal(self.hor, other.hor) and np.array_equal(self.ver, other.ver))

    def __repr__(self):
        return f"BondConfig({self.region}, open={self.n_open}/{len(self)})"

    # --- run-length export -------------------------------------------------
    MAGIC = b"BCF1"

    def to_bytes(self) -> bytes:
        """16-byte header then run lengths.

        Header: magic ``BCF1``, x_min, x_max, y_min, y_max as little-endian
        int16, bond count as uint32.  Body: one byte holding the first bit,
        then the lengths of the alternating runs as LEB128 varints.
        """
        r = self.region
        try:
            head = self.MAGIC + struct.pack("<hhhhI", r.x_min, r.x_max, r.y_min, r.y_max, r.n_bonds)
        except struct.error as e:
            raise ValueError(f"region {r} does not fit the export header") from e
        bits = self.bits
        out = bytearray(head)
        out.append(int(bits[0]) if len(bits) else 0)
        if len(bits):
            edges = np.flatnonzero(np.diff(bits)) + 1
            runs = np.diff(np.concatenate(([0], edges, [len(bits)])))
            for n in runs.tolist():
                while True:
                    byte, n = n & 0x7F, n >> 7
                    out.append(byte | (0x80 if n else 0))
                    if not n:
                        break
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BondConfig":
        if data[:4] != cls.MAGIC:
            raise ValueError("not a BondConfig export")
        x_min, x_max, y_min, y_max, n = struct.unpack("<hhhhI", data[4:16])
        region = Region(x_min, x_max, y_min, y_max)
        if region.n_bonds != n:
            raise ValueError("bond count does not match region")
        bit, pos, runs = data[16], 17, []
        while pos < len(data):
            val, shift = 0, 0
            while True:
                byte = data[pos]
                pos += 1
                val |= (byte & 0x7F) << shift
                shift += 7
                if not byte & 0x80:
                    break
            runs.append(val)
        bits = np.empty(n, np.uint8)
        at = 0
        for length in runs:
            bits[at : at + length] = bit
            at += length
            bit ^= 1
        if at != n:
            raise ValueError("run lengths do not cover the bond count")
        return cls.from_bits(region, bits)


def sample_config(region: Region, prof: DensityProfile, N: int, s: SeedSpec) -> BondConfig:
    """Each bond open independently with the density of its strip."""
    hor, ver = empty_grids(region)
    ph, pv = column_thresholds(region, prof, N)
    fill_grid(s.key, region.x_min, region.y_min, ph, pv, hor, ver)
    return BondConfig(region, hor, ver)


def sample_coupled(region: Region, prof_low: DensityProfile, prof_high: DensityProfile,
                   N: int, s: SeedSpec) -> tuple[BondConfig, BondConfig]:
    """Two configurations driven by the same uniforms; low is a subset of high."""
    if prof_low.K != prof_high.K or prof_low.k != prof_high.k:
        raise ValueError("coupled profiles must share their strip geometry")
    if any(a > b for a, b in zip(prof_low.p, prof_high.p)):
        raise ValueError("densities are not pointwise ordered")
    lo_h, lo_v = empty_grids(region)
    hi_h, hi_v = empty_grids(region)
    ph_lo, pv_lo = column_thresholds(region, prof_low, N)
    ph_hi, pv_hi = column_thresholds(region, prof_high, N)
    fill_grid_coupled(s.key, region.x_min, region.y_min, ph_lo, pv_lo, ph_hi, pv_hi,
                      lo_h, lo_v, hi_h, hi_v)
    return BondConfig(region, lo_h, lo_v), BondConfig(region, hi_h, hi_v)


@njit(cache=True)
def _fill_row(rkey, y, ph, pv, vert, hor):
    rk = row_key(rkey, y)
    for i in range(vert.shape[0]):
        vert[i] = 1 if bond_uniform(rk, 1 + i, 1) < pv[i] else 0
    rk = row_key(rkey, y + 1)
    for i in range(hor.shape[0]):
        hor[i] = 1 if bond_uniform(rk, 1 + i, 0) < ph[i] else 0


@njit(cache=True)
def _fill_bottom(rkey, ph, hor):
    rk = row_key(rkey, 0)
    for i in range(hor.shape[0]):
        hor[i] = 1 if bond_uniform(rk, 1 + i, 0) < ph[i] else 0


@dataclass(frozen=True)
class RowSamplerState:
    """Position of a row stream over the semi-cylinder [1, N] x [0, inf)."""

    N: int
    ph: tuple[float, ...]
    pv: tuple[float, ...]
    seed: SeedSpec
    y: int = 0

    @classmethod
    def start(cls, prof: DensityProfile, N: int, s: SeedSpec) -> "RowSamplerState":
        cols = prof.column_densities(N, 1, N)
        return cls(N, tuple(cols[:-1]), tuple(cols), s, 0)

    def bottom_row(self) -> np.ndarray:
        """Horizontal bonds of row 0, which no row step emits."""
        hor = np.empty(self.N - 1, np.uint8)
        _fill_bottom(self.seed.key, np.asarray(self.ph), hor)
        return hor


def sample_row(state: RowSamplerState) -> tuple[tuple[np.ndarray, np.ndarray], RowSamplerState]:
    """Vertical bonds from row y to y+1 and horizontal bonds of row y+1."""
    vert = np.empty(state.N, np.uint8)
    hor = np.empty(state.N - 1, np.uint8)
    _fill_row(state.seed.key, state.y, np.asarray(state.ph), np.asarray(state.pv), vert, hor)
    nxt = RowSamplerState(state.N, state.ph, state.pv, state.seed, state.y + 1)
    return (vert, hor), nxt


def iter_rows(state: RowSamplerState):
    while True:
        row, state = sample_row(state)
        yield row
