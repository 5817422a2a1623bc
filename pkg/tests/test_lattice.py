from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from percolab import oracles
from percolab.lattice import (
    HORIZONTAL,
    VERTICAL,
    Bond,
    DensityProfile,
    DualBond,
    DualVertex,
    Region,
    dual,
    enumerate_bonds,
    primal,
    strip_count,
    strip_of,
)

regions = st.builds(
    lambda x, y, w, h: Region(x, x + w, y, y + h),
    st.integers(-5, 5), st.integers(-5, 5), st.integers(0, 5), st.integers(0, 5),
)


def test_dual_of_unit_horizontal_bond():
    d = dual(Bond.between((0, 0), (1, 0)))
    assert set(d.endpoints) == {(0.5, -0.5), (0.5, 0.5)}


def test_dual_vertex_rejects_primal_points():
    with pytest.raises(ValueError):
        DualVertex.at(1, Fraction(1, 2))
    assert DualVertex.at(Fraction(1, 2), Fraction(-1, 2)) == DualVertex(1, -1)


def test_primal_dual_involution_on_3x3():
    for b in enumerate_bonds(Region(0, 2, 0, 2)):
        assert primal(dual(b)) == b


@given(regions)
def test_dual_is_injective(r):
    ds = [dual(b) for b in enumerate_bonds(r)]
    assert len(set(ds)) == len(ds)
    assert all(primal(d) in set(enumerate_bonds(r)) for d in ds)


def test_bond_equality_is_orientation_free():
    assert Bond.between((2, 3), (2, 4)) == Bond.between((2, 4), (2, 3)) == Bond(2, 3, VERTICAL)
    assert DualBond.between((0.5, 0.5), (1.5, 0.5)) == DualBond.between((1.5, 0.5), (0.5, 0.5))
    with pytest.raises(ValueError):
        Bond.between((0, 0), (1, 1))


def test_closed_bond_has_open_dual():
    from percolab.sampler import BondConfig

    cfg = BondConfig.constant(Region(0, 1, 0, 1), 0)
    assert all(cfg.dual_open(b) for b in enumerate_bonds(cfg.region))


def test_unit_square_has_four_bonds():
    assert len(enumerate_bonds(Region(0, 1, 0, 1))) == 4


@pytest.mark.parametrize("W,H", [(1, 1), (2, 3), (4, 2), (5, 5), (7, 1)])
def test_bond_count_identity(W, H):
    bonds = enumerate_bonds(Region(0, W - 1, 0, H - 1))
    assert len(bonds) == (W - 1) * H + W * (H - 1) == Region(0, W - 1, 0, H - 1).n_bonds
    assert sum(b.orient == HORIZONTAL for b in bonds) == (W - 1) * H


def test_enumeration_matches_oracle_bond_set():
    ours = set(enumerate_bonds(Region(1, 2, 0, 1)))
    ref = {b for b, _, _ in oracles.primal_edges(1, 2, 0, 1)}
    assert ours == ref


@given(regions)
def test_index_is_inverse_of_bond_at(r):
    bonds = enumerate_bonds(r)
    for i, b in enumerate(bonds):
        assert r.index(b) == i
        assert r.bond_at(i) == b
        assert r.contains_bond(b)


def test_semi_cylinder_needs_cap():
    r = Region.semi_cylinder(3)
    with pytest.raises(ValueError):
        enumerate_bonds(r)
    assert len(enumerate_bonds(r, cap=2)) == Region(1, 3, 0, 2).n_bonds


@pytest.mark.parametrize("X,strip", [(3, 1), (7, 2), (5, 2)])
def test_strip_of_two_halves(X, strip):
    prof = DensityProfile((0.5, 0.5), (0.6, 0.8))
    assert strip_of(Bond(X, 0, VERTICAL), prof, 10) == strip


@given(st.lists(st.integers(1, 20), min_size=1, max_size=5), st.integers(1, 60))
def test_strips_partition_bonds(weights, N):
    total = sum(weights)
    k = [w / total for w in weights]
    k[-1] = 1.0 - sum(k[:-1])
    prof = DensityProfile(tuple(k), (0.7,) * len(k))
    bonds = enumerate_bonds(Region(1, N, 0, 2))
    counts = [0] * prof.K
    for b in bonds:
        counts[strip_of(b, prof, N) - 1] += 1
    assert sum(counts) == len(bonds)


@pytest.mark.parametrize("N", [50, 200])
def test_strip_fractions_converge(N):
    prof = DensityProfile((0.2, 0.3, 0.5), (0.6, 0.7, 0.8))
    bonds = enumerate_bonds(Region(1, N, 0, 3))
    for i, k in enumerate(prof.k, start=1):
        frac = sum(strip_of(b, prof, N) == i for b in bonds) / len(bonds)
        assert abs(frac - k) <= 4 / N


@pytest.mark.parametrize("k,p", [((0.5, 0.6), (0.7, 0.8)), ((0.0, 1.0), (0.7, 0.8)),
                                 ((1.0,), (1.2,)), ((0.5, 0.5), (0.7,))])
def test_profile_validation(k, p):
    with pytest.raises(ValueError):
        DensityProfile(k, p)


def test_profile_boundaries_increase():
    prof = DensityProfile((0.1, 0.2, 0.7), (0.6, 0.7, 0.8))
    c = prof.cumulative
    assert c[0] == 0.0 and c[-1] == 1.0
    assert all(a < b for a, b in zip(c, c[1:]))


def test_rho_profile_and_strip_count():
    assert strip_count(27, 2) == 3
    assert strip_count(28, 2) == 4
    prof = DensityProfile.from_rho("linear", 16, m=2)
    assert prof.K == strip_count(16, 2)
    assert all(0.7 <= p <= 0.9 for p in prof.p)
    with pytest.raises(ValueError):
        DensityProfile.from_rho("constant", 8, p=0.3)
