import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percolab.connectivity import bottom_top
from percolab.lattice import DensityProfile, Region
from percolab.sampler import (
    BondConfig,
    RowSamplerState,
    SeedSpec,
    iter_rows,
    sample_config,
    sample_coupled,
    sample_row,
)

H = DensityProfile.homogeneous


@pytest.mark.parametrize("p,value", [(1.0, 1), (0.0, 0)])
def test_degenerate_densities(p, value):
    r = Region(0, 6, 0, 4)
    cfg = sample_config(r, H(p), 7, SeedSpec(3))
    assert cfg == BondConfig.constant(r, value)


def test_open_fraction_is_binomial():
    r = Region(0, 19, 0, 19)
    reps = 10_000
    opened = sum(sample_config(r, H(0.6), 20, SeedSpec(1, i)).n_open for i in range(reps))
    n = reps * r.n_bonds
    se = np.sqrt(0.6 * 0.4 / n)
    assert abs(opened / n - 0.6) <= 3 * se


def test_fixed_bonds_are_uncorrelated():
    r = Region(0, 3, 0, 3)
    reps = 10_000
    bits = np.array([sample_config(r, H(0.5), 4, SeedSpec(9, i)).bits for i in range(reps)], float)
    c = np.corrcoef(bits.T)
    off = c[~np.eye(r.n_bonds, dtype=bool)]
    assert np.max(np.abs(off)) <= 4 / np.sqrt(reps)


def test_deterministic_and_seed_sensitive():
    r = Region(1, 8, 0, 8)
    a = sample_config(r, H(0.5), 8, SeedSpec(5, 2))
    assert a == sample_config(r, H(0.5), 8, SeedSpec(5, 2))
    assert a != sample_config(r, H(0.5), 8, SeedSpec(5, 3))
    assert a != sample_config(r, H(0.5), 8, SeedSpec(6, 2))


def test_high_bit_seeds_give_uniform_bits():
    # keys above 2**63 must behave like any other key
    r = Region(0, 29, 0, 29)
    cfg = sample_config(r, H(0.5), 30, SeedSpec(2**64 - 3, 7))
    assert abs(cfg.n_open / r.n_bonds - 0.5) < 0.06


def test_bonds_are_keyed_by_position():
    big = sample_config(Region(0, 9, 0, 9), H(0.5), 10, SeedSpec(4))
    small = sample_config(Region(2, 5, 3, 7), H(0.5), 10, SeedSpec(4))
    for b in small.region.bonds():
        assert small[b] == big[b]


def test_coupling_equal_profiles_is_identity():
    r = Region(1, 6, 0, 6)
    lo, hi = sample_coupled(r, H(0.6), H(0.6), 6, SeedSpec(2))
    assert lo == hi == sample_config(r, H(0.6), 6, SeedSpec(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.05, 0.95), st.floats(0.0, 0.5))
def test_coupling_is_monotone(seed, p, gap):
    r = Region(1, 6, 0, 6)
    lo, hi = sample_coupled(r, H(p * (1 - gap)), H(p), 6, SeedSpec(seed))
    assert lo.subset_of(hi)


def test_coupled_crossing_frequency_increases():
    r = Region(1, 8, 0, 8)
    lo_hits = hi_hits = 0
    for i in range(2000):
        lo, hi = sample_coupled(r, H(0.5), H(0.7), 8, SeedSpec(3, i))
        lo_hits += bottom_top(lo)
        hi_hits += bottom_top(hi)
        assert bottom_top(lo) <= bottom_top(hi)
    assert lo_hits < hi_hits


def test_coupling_rejects_unordered_profiles():
    with pytest.raises(ValueError):
        sample_coupled(Region(1, 3, 0, 3), H(0.7), H(0.6), 3, SeedSpec(0))


def _stream(prof, N, M, s):
    state = RowSamplerState.start(prof, N, s)
    hor, ver = [state.bottom_row()], []
    for _ in range(M):
        (v, h), state = sample_row(state)
        ver.append(v)
        hor.append(h)
    return BondConfig(Region(1, N, 0, M), np.array(hor), np.array(ver))


@pytest.mark.parametrize("N,M", [(1, 3), (4, 6), (9, 2)])
def test_row_stream_equals_window(N, M):
    prof = DensityProfile((0.3, 0.7), (0.55, 0.9))
    for rep in range(3):
        s = SeedSpec(17, rep)
        assert _stream(prof, N, M, s) == sample_config(Region(1, N, 0, M), prof, N, s)


def test_row_stream_all_open_and_reproducible():
    state = RowSamplerState.start(H(1.0), 5, SeedSpec(0))
    for (v, h), _ in zip(iter_rows(state), range(10)):
        assert v.all() and h.all()
    s = SeedSpec(8, 1)
    assert _stream(H(0.6), 5, 10, s) == _stream(H(0.6), 5, 10, s)


def test_bits_roundtrip():
    r = Region(-1, 3, 2, 4)
    cfg = sample_config(r, H(0.4), 5, SeedSpec(1))
    assert BondConfig.from_bits(r, cfg.bits) == cfg
    assert BondConfig.from_bytes(cfg.to_bytes()) == cfg
    assert len(cfg.bits) == r.n_bonds
    with pytest.raises(ValueError):
        BondConfig.from_bits(r, np.full(r.n_bonds, 2))
