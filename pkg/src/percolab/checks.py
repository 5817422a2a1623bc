"""Exhaustive-enumeration checks run by ``oracle-check`` and the test suite.

Each check returns ``(ok, detail)``; ``detail`` is a short string with the
exact and computed values or a mismatch count.
"""
from __future__ import annotations

import numpy as np

from . import oracles
from .connectivity import bottom_top, crossing, left_right_dual, sigma_of_config, sigma_via_duality
from .events import EventSpec, evaluate_event, event_polynomial, parse_event
from .lattice import Region
from .rcm import BOUNDARIES, RCMParams, edge_marginals, exact_rcm, heat_bath_conditional
from .sampler import BondConfig, RowSamplerState, SeedSpec, sample_config, sample_row

# every window here has at most 12 bonds
SMALL_EVENTS = ("A(N=1,M=1,pad=1)", "A(N=2,M=1,pad=1)", "A(N=1,M=2,pad=1)", "B(N=1,M=2)",
                "B(N=2,M=1)", "E(N=1,M=1)", "C(N=1,M=1)", "C(N=1,M=1,k=-1)", "D(N=1,M=1)",
                "Dtilde(N=1,m=2)", "alpha(N=1,W=1)", "alpha(N=2,W=1)", "T(N=2,H=3)",
                "T(N=3,H=2)", "dual2pt(N=1,d=1,W=0)")
SMALL_SLABS = ((1, 3, 0, 2), (1, 2, 0, 3), (1, 4, 0, 1), (1, 2, 0, 4))
DUALITY_RECTANGLES = ((0, 1, 0, 2), (0, 2, 0, 1), (0, 2, 0, 2))
EXACT_PS = (0.3, 0.5, 0.7)


def check_event_detectors():
    worst = 0
    total = 0
    for text in SMALL_EVENTS:
        spec = parse_event(text)
        for cfg in oracles.all_configs(spec.plan().region):
            total += 1
            worst += evaluate_event(cfg, spec) != oracles.oracle_event(cfg, spec)
    return worst == 0, f"{worst} mismatches over {total} (event, configuration) pairs"


def check_event_probabilities():
    err = 0.0
    for text in SMALL_EVENTS:
        spec = parse_event(text)
        poly = event_polynomial(spec)
        for p in EXACT_PS:
            err = max(err, abs(poly.prob(p) - oracles.oracle_event_prob(spec, p)))
    return err <= 1e-12, f"max |detector - oracle| = {err:.3e}"


def check_crossing_square():
    region = Region(0, 1, 0, 1)
    bottom, top = [(0, 0), (1, 0)], [(0, 1), (1, 1)]
    uf = sum(crossing(c, bottom, top) for c in oracles.all_configs(region)) / 16
    ref = oracles.oracle_event_prob(EventSpec("T", 2, H=1), 0.5)
    return uf == ref, f"union-find {uf} vs path oracle {ref}"


def check_duality():
    bad = total = 0
    for x0, x1, y0, y1 in DUALITY_RECTANGLES:
        for cfg in oracles.all_configs(Region(x0, x1, y0, y1)):
            total += 1
            bad += bottom_top(cfg) == left_right_dual(cfg)
            bad += left_right_dual(cfg) != oracles.oracle_left_right_dual(cfg)
    return bad == 0, f"{bad} failures over {total} configurations"


def check_sigma():
    bad = total = 0
    for x0, x1, y0, y1 in SMALL_SLABS:
        for cfg in oracles.all_configs(Region(x0, x1, y0, y1)):
            for cap in range(1, y1 - y0 + 1):
                total += 1
                s = sigma_of_config(cfg, cap)
                bad += s.value != oracles.oracle_sigma(cfg, cap)
                bad += sigma_via_duality(cfg, cap=cap) != s
    return bad == 0, f"{bad} failures over {total} (slab, cap) evaluations"


def check_sigma_law():
    """Exact law of sigma on [1,2] x [0,3] from the detector and from the oracle."""
    region = Region(1, 2, 0, 3)
    p, n = 0.5, region.n_bonds
    law: dict = {}
    for cfg in oracles.all_configs(region):
        v = sigma_of_config(cfg, 3).value
        law[v] = law.get(v, 0.0) + p ** cfg.n_open * (1 - p) ** (n - cfg.n_open)
    ref = oracles.oracle_sigma_distribution(2, 3, p)
    err = max(abs(law.get(k, 0.0) - ref.get(k, 0.0)) for k in set(law) | set(ref))
    return err <= 1e-12, f"max atom difference {err:.3e}"


def check_row_stream():
    bad = 0
    from .lattice import DensityProfile

    prof = DensityProfile((0.5, 0.5), (0.6, 0.8))
    N, H = 5, 7
    for rep in range(5):
        s = SeedSpec(11, rep)
        cfg = sample_config(Region(1, N, 0, H), prof, N, s)
        state = RowSamplerState.start(prof, N, s)
        hor = [state.bottom_row()]
        ver = []
        for _ in range(H):
            (v, h), state = sample_row(state)
            ver.append(v)
            hor.append(h)
        streamed = BondConfig(cfg.region, np.array(hor), np.array(ver))
        bad += streamed != cfg
    return bad == 0, f"{bad} of 5 streams differ from whole-window samples"


def check_rcm():
    worst_db = worst_sum = 0.0
    region = Region(0, 2, 0, 2)
    for bnd in BOUNDARIES:
        params = RCMParams.homogeneous(2.0, 0.6, region, bnd)
        pi = exact_rcm(params)
        worst_sum = max(worst_sum, abs(pi.sum() - 1.0))
        for code in range(0, 1 << region.n_bonds, 7):
            bits = np.array([(code >> e) & 1 for e in range(region.n_bonds)], np.uint8)
            cfg = BondConfig.from_bits(region, bits)
            for e in range(region.n_bonds):
                pe = heat_bath_conditional(cfg, region.bond_at(e), params)
                lo, hi = code & ~(1 << e), code | (1 << e)
                worst_db = max(worst_db, abs(pi[lo] * pe - pi[hi] * (1 - pe)))
    mw = edge_marginals(exact_rcm(RCMParams.homogeneous(2.0, 0.6, region, "wired")), 12)
    mf = edge_marginals(exact_rcm(RCMParams.homogeneous(2.0, 0.6, region, "free")), 12)
    ok = worst_db <= 1e-12 and worst_sum <= 1e-12 and bool(np.all(mw >= mf))
    return ok, (f"detailed balance {worst_db:.2e}, normalisation {worst_sum:.2e}, "
                f"wired >= free on {int(np.sum(mw >= mf))}/12 edges")


def check_russo_exact():
    err = 0.0
    for N, m in ((1, 2), (2, 1)):
        poly = event_polynomial(EventSpec("Dtilde", N, m=m))
        for p in (0.3, 0.55, 0.8):
            err = max(err, abs(poly.derivative(p) - poly.russo_covariance(p)))
    return err <= 1e-12, f"max |dP/dp - cov/(p(1-p))| = {err:.3e}"


def check_fkg():
    """Two overlapping vertical crossings of a 4 x 2 window are positively correlated."""
    region = Region(0, 3, 0, 1)
    p, n = 0.6, region.n_bonds
    pa = pb = pab = 0.0
    for cfg in oracles.all_configs(region):
        w = p ** cfg.n_open * (1 - p) ** (n - cfg.n_open)
        a = oracles.oracle_crossing(cfg, [(x, 0) for x in range(0, 3)], [(x, 1) for x in range(0, 3)],
                                    Region(0, 2, 0, 1))
        b = oracles.oracle_crossing(cfg, [(x, 0) for x in range(1, 4)], [(x, 1) for x in range(1, 4)],
                                    Region(1, 3, 0, 1))
        pa += w * a
        pb += w * b
        pab += w * (a and b)
    return pab >= pa * pb, f"P(A and B) = {pab:.6f} >= P(A) P(B) = {pa * pb:.6f}"


CHECKS = (
    ("event detectors vs oracle", check_event_detectors),
    ("exact event probabilities", check_event_probabilities),
    ("crossing on the unit square", check_crossing_square),
    ("planar duality", check_duality),
    ("sigma frontier and dual sigma", check_sigma),
    ("exact sigma law", check_sigma_law),
    ("row stream equals window sample", check_row_stream),
    ("random-cluster enumeration", check_rcm),
    ("covariance form of the derivative", check_russo_exact),
    ("FKG spot check", check_fkg),
)


def run_checks(names=None):
    out = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        ok, detail = fn()
        out.append((name, bool(ok), detail))
    return out
