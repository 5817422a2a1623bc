import math

import numpy as np
import pytest

from percolab import oracles
from percolab.lattice import Bond, DensityProfile, HORIZONTAL, Region
from percolab.rcm import (
    BOUNDARIES,
    RCMParams,
    chain_histogram,
    cluster_count,
    coupled_boundaries,
    dc_known,
    edge_marginals,
    exact_rcm,
    heat_bath_conditional,
    p_sd,
    sample_rcm,
    sandwich,
)
from percolab.sampler import BondConfig, SeedSpec

SQ2 = Region(0, 1, 0, 1)
SQ3 = Region(0, 2, 0, 2)


@pytest.mark.parametrize("q,expected", [(1, 0.5), (2, math.sqrt(2) / (1 + math.sqrt(2))), (4, 2 / 3)])
def test_self_dual_point(q, expected):
    assert p_sd(q) == pytest.approx(expected, abs=1e-12)
    assert p_sd(2) == pytest.approx(0.5857864, abs=1e-7)


def test_decay_regimes():
    assert dc_known(2, 0.6) and not dc_known(2, 0.58)
    assert not dc_known(3, 0.9)
    assert dc_known(30, 0.9)
    with pytest.warns(UserWarning):
        RCMParams.homogeneous(3.0, 0.9, SQ2).check_supercritical()


def test_params_validation():
    with pytest.raises(ValueError):
        RCMParams.homogeneous(0.5, 0.6, SQ2)
    with pytest.raises(ValueError):
        RCMParams.homogeneous(2, 1.0, SQ2)
    with pytest.raises(ValueError):
        RCMParams.homogeneous(2, 0.6, SQ2, "periodic")
    with pytest.raises(ValueError):
        RCMParams.homogeneous(2, 0.6, Region.semi_cylinder(2))


def _count_oracle(cfg, boundary):
    """Components of the open graph, with boundary vertices glued to a ghost."""
    r = cfg.region
    edges = [(u, v) for b, u, v in oracles.primal_edges(r.x_min, r.x_max, r.y_min, r.y_max) if cfg[b]]
    verts = [(x, y) for x in range(r.x_min, r.x_max + 1) for y in range(r.y_min, r.y_max + 1)]

    def on_boundary(x, y):
        if boundary == "free":
            return False
        side = x in (r.x_min, r.x_max) or y == r.y_max
        return side or (boundary == "wired" and y == r.y_min)

    ghost = ("ghost",)
    edges += [(v, ghost) for v in verts if on_boundary(*v)]
    adj = oracles._adjacency(edges)
    seen, k = set(), 0
    for v in verts + ([ghost] if ghost in adj else []):
        if v not in seen:
            k += 1
            seen |= oracles.bfs_reach(adj, [v])
    return k


@pytest.mark.parametrize("boundary", BOUNDARIES)
def test_cluster_count_against_oracle(boundary):
    params = RCMParams.homogeneous(2, 0.6, SQ3, boundary)
    for i, cfg in enumerate(oracles.all_configs(SQ3)):
        if i % 17:
            continue
        assert int(cluster_count(cfg, params)) == _count_oracle(cfg, boundary)


def test_cluster_count_examples():
    free = RCMParams.homogeneous(2, 0.6, SQ3, "free")
    wired = RCMParams.homogeneous(2, 0.6, SQ3, "wired")
    assert int(cluster_count(BondConfig.constant(SQ3, 1), free)) == 1
    assert int(cluster_count(BondConfig.constant(SQ3, 0), free)) == 9
    # eight boundary vertices share the ghost cluster, the centre is alone
    assert int(cluster_count(BondConfig.constant(SQ3, 0), wired)) == 2


def test_heat_bath_examples():
    cfg = BondConfig.constant(SQ3, 0)
    b = Bond(1, 1, HORIZONTAL)
    assert heat_bath_conditional(cfg, b, RCMParams.homogeneous(1, 0.37, SQ3)) == pytest.approx(0.37)
    assert heat_bath_conditional(cfg, b, RCMParams.homogeneous(2, 0.5, SQ3)) == pytest.approx(1 / 3)
    # with wired boundary both ends of a boundary bond are already joined
    edge = Bond(0, 0, HORIZONTAL)
    assert heat_bath_conditional(cfg, edge, RCMParams.homogeneous(2, 0.5, SQ3, "wired")) == 0.5


def test_single_bond_marginals():
    r = Region(0, 1, 0, 0)
    p, q = 0.6, 2.0
    free = exact_rcm(RCMParams.homogeneous(q, p, r, "free"))
    # open weight p q, closed weight (1-p) q^2
    assert free[1] == pytest.approx(p * q / (p * q + (1 - p) * q * q), abs=1e-12)
    assert free[1] == pytest.approx(p / (p + (1 - p) * q), abs=1e-12)
    wired = exact_rcm(RCMParams.homogeneous(q, p, r, "wired"))
    assert wired[1] == pytest.approx(p, abs=1e-12)


@pytest.mark.parametrize("boundary", BOUNDARIES)
def test_q1_is_product_measure(boundary):
    p = 0.35
    dist = exact_rcm(RCMParams.homogeneous(1, p, SQ2, boundary))
    for code, w in enumerate(dist):
        k = bin(code).count("1")
        assert w == pytest.approx(p ** k * (1 - p) ** (4 - k), abs=1e-14)


@pytest.mark.parametrize("boundary", BOUNDARIES)
def test_detailed_balance(boundary):
    params = RCMParams(2.0, DensityProfile((0.5, 0.5), (0.6, 0.75)), 3, boundary, SQ3)
    pi = exact_rcm(params)
    n = SQ3.n_bonds
    for code in range(0, 1 << n, 31):
        cfg = BondConfig.from_bits(SQ3, [(code >> e) & 1 for e in range(n)])
        for e in range(n):
            pe = heat_bath_conditional(cfg, SQ3.bond_at(e), params)
            lo, hi = code & ~(1 << e), code | (1 << e)
            assert pi[lo] * pe == pytest.approx(pi[hi] * (1 - pe), abs=1e-12)


def test_wired_dominates_free_on_3x3():
    mw = edge_marginals(exact_rcm(RCMParams.homogeneous(2, 0.6, SQ3, "wired")), SQ3.n_bonds)
    mf = edge_marginals(exact_rcm(RCMParams.homogeneous(2, 0.6, SQ3, "free")), SQ3.n_bonds)
    ms = edge_marginals(exact_rcm(RCMParams.homogeneous(2, 0.6, SQ3, "semicyl")), SQ3.n_bonds)
    assert np.all(mw >= mf)
    # boundary edges tie at p under both glued boundaries
    assert np.all(mw >= ms - 1e-12) and np.all(ms >= mf - 1e-12)


@pytest.mark.parametrize("boundary", ["free", "wired"])
def test_chain_matches_enumeration_in_tv(boundary):
    params = RCMParams.homogeneous(2, 0.6, SQ2, boundary)
    emp = chain_histogram(params, SeedSpec(3), burn=100, samples=200_000)
    tv = 0.5 * np.abs(emp - exact_rcm(params)).sum()
    assert tv < 0.02


def test_q1_chain_gives_bernoulli_marginals():
    r = Region(0, 3, 0, 3)
    params = RCMParams.homogeneous(1, 0.3, r)
    reps = 2000
    opened = sum(sample_rcm(params, 3, SeedSpec(4, i)).n_open for i in range(reps))
    n = reps * r.n_bonds
    assert abs(opened / n - 0.3) <= 3 * math.sqrt(0.21 / n)


def test_sandwich_is_ordered_and_coalesces():
    params = RCMParams.homogeneous(2, 0.7, Region(1, 6, 0, 12), "wired")
    res = sandwich(params, SeedSpec(1))
    assert res.coalesced and res.sweeps < 200
    assert res.bottom.subset_of(res.top)
    assert np.all(np.diff(res.gap) <= 1) and res.gap[-1] <= 1e-3
    assert len(res.diagnostics_rows()) == res.sweeps


def test_coupled_boundaries_are_ordered():
    vol = Region(1, 5, 0, 10)
    w = RCMParams.homogeneous(2, 0.75, vol, "wired")
    f = RCMParams.homogeneous(2, 0.75, vol, "free")
    for i in range(20):
        cw, cf, sweeps, ok, trace = coupled_boundaries(w, f, SeedSpec(6, i).key)
        assert ok and cf.subset_of(cw)
        assert trace.shape == (sweeps, 4)


def test_chain_reproducible():
    params = RCMParams.homogeneous(2, 0.65, Region(0, 4, 0, 4), "semicyl")
    assert sample_rcm(params, 20, SeedSpec(8)) == sample_rcm(params, 20, SeedSpec(8))
    assert sample_rcm(params, 20, SeedSpec(8)) != sample_rcm(params, 20, SeedSpec(9))


def test_enumeration_guard():
    with pytest.raises(ValueError):
        exact_rcm(RCMParams.homogeneous(2, 0.6, Region(0, 3, 0, 3)))
