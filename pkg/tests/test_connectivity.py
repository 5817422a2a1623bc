import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from percolab import oracles
from percolab.connectivity import (
    FrontierState,
    SigmaResult,
    bottom_top,
    crossing,
    left_right_dual,
    sigma,
    sigma_batch,
    sigma_of_config,
    sigma_via_duality,
)
from percolab.events import EventSpec, dual_crossing, evaluate_event
from percolab.lattice import DensityProfile, Region
from percolab.sampler import BondConfig, RowSamplerState, SeedSpec, sample_config, sample_coupled
from percolab.unionfind import UnionFind

H = DensityProfile.homogeneous


def test_crossing_trivial_cases():
    r = Region(0, 2, 0, 2)
    bottom, top = [(x, 0) for x in range(3)], [(x, 2) for x in range(3)]
    assert crossing(BondConfig.constant(r, 1), bottom, top)
    assert not crossing(BondConfig.constant(r, 0), [(0, 0)], [(2, 2)])
    assert crossing(BondConfig.constant(r, 0), [(1, 1)], [(1, 1)])


def test_crossing_on_unit_square_by_enumeration():
    r = Region(0, 1, 0, 1)
    hits = [crossing(c, [(0, 0), (1, 0)], [(0, 1), (1, 1)]) for c in oracles.all_configs(r)]
    ref = [oracles.oracle_bottom_top(c) for c in oracles.all_configs(r)]
    assert hits == ref
    assert sum(hits) / 16 == 0.75


def test_crossing_respects_window():
    r = Region(0, 3, 0, 1)
    cfg = BondConfig.constant(r, 0)
    hor, ver = cfg.hor.copy(), cfg.ver.copy()
    # path (0,0)-(0,1)-(1,1)-(2,1)-(2,0) leaves the sub-window [0,1] x [0,1] only if it uses column 2
    ver[0, 0] = ver[0, 2] = 1
    hor[1, 0] = hor[1, 1] = 1
    cfg = BondConfig(r, hor, ver)
    assert crossing(cfg, [(0, 0)], [(2, 0)])
    assert not crossing(cfg, [(0, 0)], [(1, 0)], within=Region(0, 1, 0, 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31), st.floats(0.1, 0.9))
def test_crossing_matches_bfs_on_random_configs(W, Hh, seed, p):
    r = Region(0, W - 1, 0, Hh - 1)
    cfg = sample_config(r, H(p), W, SeedSpec(seed))
    assert bottom_top(cfg) == oracles.oracle_bottom_top(cfg)
    assert left_right_dual(cfg) == oracles.oracle_left_right_dual(cfg)
    if Hh > 1:
        assert bottom_top(cfg) != left_right_dual(cfg)


def test_union_find_work_is_near_linear():
    for n in (10, 40, 160):
        cfg = sample_config(Region(0, n - 1, 0, n - 1), H(0.6), n, SeedSpec(n))
        stats = {}
        crossing(cfg, [(x, 0) for x in range(n)], [(x, n - 1) for x in range(n)], stats=stats)
        assert stats["work"] <= 6 * stats["bonds"] + 4 * n * n


def test_python_union_find():
    uf = UnionFind(6)
    assert uf.union(0, 1) and uf.union(2, 3) and uf.union(1, 3)
    assert not uf.union(0, 2)
    assert uf.connected(0, 3) and not uf.connected(0, 5)
    assert uf.operations >= uf.finds + uf.unions


@pytest.mark.parametrize("M", [1, 2, 5])
def test_dual_strip_crossing_trivial(M):
    spec = EventSpec("B", 3, M=M)
    region = spec.plan().region
    assert dual_crossing(BondConfig.constant(region, 0), spec)
    assert not dual_crossing(BondConfig.constant(region, 1), spec)
    with pytest.raises(ValueError):
        dual_crossing(BondConfig.constant(region, 1), EventSpec("A", 1, M=1))


def test_no_escape_event_fails_when_all_open():
    spec = EventSpec("A", 3, M=4)
    assert not evaluate_event(BondConfig.constant(spec.plan().region, 1), spec)
    assert evaluate_event(BondConfig.constant(spec.plan().region, 0), spec)


def test_event_inclusions_on_samples():
    N, M = 4, 4
    specs = {k: EventSpec(k, N, M=M) for k in "BCDE"}
    region = specs["D"].plan().region
    for i in range(400):
        cfg = sample_config(region, H(0.5), N, SeedSpec(21, i))
        e, c, d = (evaluate_event(cfg, specs[k]) for k in "ECD")
        assert e <= c <= d
        assert evaluate_event(cfg, specs["B"]) <= e


def test_event_monotonicity_under_coupling():
    N = 3
    primal_specs = [EventSpec("T", N, H=5), EventSpec("alpha", N, W=3), EventSpec("Dtilde", 2, m=1)]
    dual_specs = [EventSpec("B", N, M=3), EventSpec("D", N, M=2), EventSpec("A", N, M=3)]
    region = Region(-4, 7, -4, 8)
    for i in range(300):
        lo, hi = sample_coupled(region, H(0.45), H(0.6), N, SeedSpec(2, i))
        for s in primal_specs:
            assert evaluate_event(lo, s) <= evaluate_event(hi, s)
        for s in dual_specs:
            assert evaluate_event(hi, s) <= evaluate_event(lo, s)


def test_event_needs_covering_config():
    with pytest.raises(ValueError):
        evaluate_event(BondConfig.constant(Region(0, 1, 0, 1), 1), EventSpec("A", 3, M=3))


def test_sigma_trivial_values():
    r = Region(1, 4, 0, 6)
    assert sigma_of_config(BondConfig.constant(r, 0)) == SigmaResult(0, False)
    assert sigma_of_config(BondConfig.constant(r, 1)) == SigmaResult(6, True)
    assert sigma_via_duality(BondConfig.constant(r, 0)) == SigmaResult(0, False)
    assert sigma_via_duality(BondConfig.constant(r, 1)) == SigmaResult(6, True)
    assert sigma(RowSamplerState.start(H(1.0), 4, SeedSpec(0)), 4, 50) == SigmaResult(50, True)


def test_sigma_stream_forms_agree():
    prof = DensityProfile((0.5, 0.5), (0.6, 0.8))
    from percolab.sampler import iter_rows

    for rep in range(50):
        s = SeedSpec(5, rep)
        a = sigma(RowSamplerState.start(prof, 6, s), 6, 200)
        b = sigma(iter_rows(RowSamplerState.start(prof, 6, s)), 6, 200)
        cfg = sample_config(Region(1, 6, 0, 200), prof, 6, s)
        assert a == b == sigma_of_config(cfg, 200) == sigma_via_duality(cfg, 6, 200)


@pytest.mark.parametrize("N", [4, 8])
def test_sigma_equals_dual_form_on_samples(N):
    for rep in range(10_000 // 4):
        cfg = sample_config(Region(1, N, 0, 12), H(0.55), N, SeedSpec(N, rep))
        assert sigma_of_config(cfg) == sigma_via_duality(cfg)


def test_sigma_law_matches_enumeration():
    N, cap, R = 2, 3, 100_000
    law = oracles.oracle_sigma_distribution(N, cap, 0.5)
    ph, pv = np.full(N - 1, 0.5), np.full(N, 0.5)
    vals = sigma_batch(np.uint64(77), 0, R, ph, pv, cap)
    for v, p in law.items():
        freq = np.mean(vals == v)
        assert abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / R)


def test_frontier_memory_is_width_only():
    st_ = FrontierState(7)
    arrays = [st_.lab, st_._parent, st_._size, st_._newlab, st_._remap]
    before = sum(a.nbytes for a in arrays)
    ones_v, ones_h = np.ones(7, np.uint8), np.ones(6, np.uint8)
    for _ in range(1000):
        st_.step(ones_v, ones_h)
    assert st_.n == 1000
    assert sum(a.nbytes for a in [st_.lab, st_._parent, st_._size, st_._newlab, st_._remap]) == before


def test_dead_frontier_refuses_more_rows():
    st_ = FrontierState(3)
    assert not st_.step(np.zeros(3, np.uint8), np.zeros(2, np.uint8))
    with pytest.raises(RuntimeError):
        st_.step(np.ones(3, np.uint8), np.ones(2, np.uint8))
