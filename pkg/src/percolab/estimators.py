"""Monte Carlo probability and rate estimates.

Probabilities carry 95% Wilson intervals.  Rates are -log(p)/N and their
intervals are the Wilson bounds pushed through the same (decreasing) map, so
no delta-method step is involved.  When no replica succeeds the rate is only
bounded from below and the upper end of its interval is reported as None.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

import numpy as np

from .events import EventSpec, event_hits, sample_outcomes
from .lattice import DensityProfile

Z95 = NormalDist().inv_cdf(0.975)
ESCALATION = 10
ALPHA_A_MAX = 8


def wilson(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("need at least one trial")
    n, ph = trials, successes / trials
    denom = 1.0 + z * z / n
    centre = (ph + z * z / (2 * n)) / denom
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return min(lo, ph), max(hi, ph)


@dataclass(frozen=True)
class ProbEstimate:
    successes: int
    trials: int
    p_hat: float = field(init=False)
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("zero replicas")
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")
        lo, hi = wilson(self.successes, self.trials)
        object.__setattr__(self, "p_hat", self.successes / self.trials)
        object.__setattr__(self, "ci_low", lo)
        object.__setattr__(self, "ci_high", hi)

    @property
    def ci(self) -> tuple[float, float]:
        return self.ci_low, self.ci_high

    @property
    def se(self) -> float:
        return math.sqrt(self.p_hat * (1 - self.p_hat) / self.trials)

    def covers(self, p: float) -> bool:
        return self.ci_low <= p <= self.ci_high


def _neglog(x: float, N: int) -> float | None:
    return None if x <= 0 else max(0.0, -math.log(x) / N)


@dataclass(frozen=True)
class RateEstimate:
    """-log(p_hat)/N with the transformed Wilson interval.

    With p_hat = 0 the rate is the lower bound -log(ci_high)/N and
    ``one_sided`` is set; ``ci_high`` is None whenever ci_low of the
    probability is 0.
    """

    prob: ProbEstimate
    N: int
    M: int | None
    kind: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def one_sided(self) -> bool:
        return self.prob.successes == 0

    @property
    def rate(self) -> float:
        if self.one_sided:
            return self.ci_low
        return _neglog(self.prob.p_hat, self.N)

    @property
    def ci_low(self) -> float:
        return _neglog(self.prob.ci_high, self.N)

    @property
    def ci_high(self) -> float | None:
        return _neglog(self.prob.ci_low, self.N)

    @property
    def ci(self) -> tuple[float, float | None]:
        return self.ci_low, self.ci_high

    @property
    def half_width(self) -> float:
        """Half the interval length; infinite for a one-sided interval."""
        if self.ci_high is None:
            return math.inf
        return 0.5 * (self.ci_high - self.ci_low)

    def overlaps(self, other: "RateEstimate") -> bool:
        a_hi = math.inf if self.ci_high is None else self.ci_high
        b_hi = math.inf if other.ci_high is None else other.ci_high
        return self.ci_low <= b_hi and other.ci_low <= a_hi

    def record(self) -> dict:
        return {
            "kind": self.kind,
            "params": {"N": self.N, "M": self.M, **self.params},
            "successes": self.prob.successes,
            "trials": self.prob.trials,
            "p_hat": self.prob.p_hat,
            "ci": [self.prob.ci_low, self.prob.ci_high],
            "rate": self.rate,
            "ci_rate": [self.ci_low, self.ci_high],
            "one_sided": self.one_sided,
            "seed": self.seed,
        }


RECORD_COLUMNS = ["kind", "params", "successes", "trials", "p_hat", "ci_low", "ci_high",
                  "rate", "ci_rate_low", "ci_rate_high", "one_sided", "seed"]


def record_row(rec: dict) -> list:
    """Flatten a record for CSV export, columns as in RECORD_COLUMNS."""
    params = ";".join(f"{k}={v}" for k, v in rec["params"].items())
    return [rec["kind"], params, rec["successes"], rec["trials"], rec["p_hat"], rec["ci"][0],
            rec["ci"][1], rec["rate"], rec["ci_rate"][0], rec["ci_rate"][1], rec["one_sided"],
            rec["seed"]]


def combined_half_width(a: RateEstimate, b: RateEstimate) -> float:
    return math.hypot(a.half_width, b.half_width)


def _profile(p) -> DensityProfile:
    if isinstance(p, DensityProfile):
        return p
    return DensityProfile.homogeneous(float(p))


def _seed_rep(s) -> tuple[int, int]:
    if hasattr(s, "seed"):
        return int(s.seed), int(s.replica)
    return int(s), 0


def estimate_prob(spec: EventSpec, prof, N: int, replicas: int, s) -> ProbEstimate:
    """Frequency of ``spec`` over independent replicas, with its Wilson interval."""
    if replicas < 1:
        raise ValueError("zero replicas")
    seed, rep0 = _seed_rep(s)
    hits = event_hits(spec, _profile(prof), N, replicas, seed, rep0)
    return ProbEstimate(int(hits.sum(dtype=np.int64)), replicas)


def _escalated(spec: EventSpec, prof, N: int, replicas: int, s, escalate: bool) -> ProbEstimate:
    est = estimate_prob(spec, prof, N, replicas, s)
    if escalate and est.successes == 0:
        # the first `replicas` replicas are reused, so only the rest is new work
        seed, rep0 = _seed_rep(s)
        more = event_hits(spec, _profile(prof), N, replicas * (ESCALATION - 1), seed,
                          rep0 + replicas)
        est = ProbEstimate(int(more.sum(dtype=np.int64)), replicas * ESCALATION)
    return est


def _rate(spec, prof, N, replicas, s, escalate, kind, M, **params) -> RateEstimate:
    est = _escalated(spec, prof, N, replicas, s, escalate)
    if isinstance(prof, DensityProfile):
        params = {**params, "profile": prof.to_json()}
    else:
        params = {**params, "p": float(prof)}
    return RateEstimate(est, N, M, kind, params, _seed_rep(s)[0])


def estimate_gamma(p, N: int, M: int, replicas: int, s=0, pad: int | None = None,
                   escalate: bool = False) -> RateEstimate:
    """Rate of the no-escape event A_N^M."""
    if M < 1:
        raise ValueError("M must be >= 1")
    spec = EventSpec("A", N, M=M, pad=pad)
    return _rate(spec, p, N, replicas, s, escalate, "gamma", M)


def estimate_mu(p, N: int, M: int | None, replicas: int, s=0,
                escalate: bool = False) -> RateEstimate:
    """Rate of the dual strip crossing B_N^M (M=None uses the default truncation)."""
    spec = EventSpec("B", N, M=M)
    return _rate(spec, p, N, replicas, s, escalate, "mu", spec.height)


def alpha_window(N: int, rate_guess: float, zeta: float) -> int:
    """Half-height W = a N with a = ceil(6 rate_guess / zeta), a clamped to [1, 8]."""
    if zeta <= 0 or not math.isfinite(zeta):
        a = ALPHA_A_MAX
    else:
        a = min(ALPHA_A_MAX, max(1, math.ceil(6 * rate_guess / zeta)))
    return a * N


def estimate_alpha(r: float, N: int, replicas: int, s=0, W: int | None = None,
                   rate_guess: float | None = None, zeta: float | None = None,
                   escalate: bool = False, pilot: int = 10_000) -> RateEstimate:
    """Rate of (0,0) <-> {x = N} at density r inside [0, N] x [-W, W].

    Without W, the window comes from :func:`alpha_window`; a missing rate
    guess is taken from a pilot run at W = N and a missing decay rate from
    :func:`fit_dual_decay` at density 1 - r.
    """
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    seed = _seed_rep(s)[0]
    if W is None:
        if r >= 0.5:
            W = N
        else:
            if rate_guess is None:
                pilot_est = estimate_prob(EventSpec("alpha", N, W=N), r, N, pilot, seed ^ 0xA1)
                rate_guess = RateEstimate(pilot_est, N, None, "alpha").rate
            if zeta is None:
                try:
                    zeta = fit_dual_decay(1 - r, (1, 2, 3, 4), pilot, seed ^ 0xDC).zeta
                except ValueError:
                    zeta = math.inf
            W = N if zeta == math.inf else alpha_window(N, rate_guess, zeta)
    spec = EventSpec("alpha", N, W=W)
    return _rate(spec, r, N, replicas, s, escalate, "alpha", None, W=W)


@dataclass(frozen=True)
class DecayFit:
    zeta: float
    intercept: float
    residuals: tuple[float, ...]
    distances: tuple[int, ...]
    dropped: tuple[int, ...]
    estimates: tuple[ProbEstimate, ...]


def _line(x, y, w=None):
    """Weighted least-squares line y = a + b x; returns (a, b, se_b)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    w = np.ones_like(x) if w is None else np.asarray(w, float)
    W = w.sum()
    xm, ym = (w * x).sum() / W, (w * y).sum() / W
    sxx = (w * (x - xm) ** 2).sum()
    b = (w * (x - xm) * (y - ym)).sum() / sxx
    a = ym - b * xm
    se_b = math.sqrt(1.0 / sxx)
    return a, b, se_b


def fit_dual_decay(p: float, distances, replicas: int, s=0, W: int | None = None) -> DecayFit:
    """Fit log P((1/2,1/2) <->* (d+1/2,1/2)) = log C - zeta d."""
    if not 0.5 < p < 1:
        raise ValueError("dual decay is fitted for p in (1/2, 1)")
    distances = sorted(set(int(d) for d in distances))
    if len(distances) < 2:
        raise ValueError("need at least two distances")
    kept, ests, dropped = [], [], []
    for d in distances:
        est = estimate_prob(EventSpec("dual2pt", 1, d=d, W=W), p, 1, replicas, s)
        if est.successes == 0:
            dropped.append(d)
            continue
        kept.append(d)
        ests.append(est)
    if dropped:
        warnings.warn(f"no dual connection seen at distances {dropped}; dropped from the fit",
                      stacklevel=2)
    if len(kept) < 2:
        raise ValueError("fewer than two distances with a nonzero estimate")
    y = [math.log(e.p_hat) for e in ests]
    a, b, _ = _line(kept, y)
    res = tuple(float(yi - (a + b * d)) for d, yi in zip(kept, y))
    return DecayFit(-b, a, res, tuple(kept), tuple(dropped), tuple(ests))


@dataclass(frozen=True)
class RussoEstimate:
    p: float
    N: int
    m: int
    replicas: int
    p_hat: float
    cov: float
    cov_se: float
    fd: float
    fd_se: float
    h: float

    def agree(self) -> bool:
        return abs(self.cov - self.fd) <= Z95 * math.hypot(self.cov_se, self.fd_se)


def russo_derivative(p: float, N: int, m: int, replicas: int, s=0, h: float = 0.01) -> RussoEstimate:
    """Two estimates of d/dp P_p(Dtilde_N).

    The covariance form is cov(open-bond count, indicator) / (p(1-p)) over
    the window's bonds.  The finite difference uses samples at p-h and p+h
    driven by the same uniforms.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if not 0 < p - h and p + h < 1:
        raise ValueError("p +- h must stay inside (0, 1)")
    seed, rep0 = _seed_rep(s)
    spec = EventSpec("Dtilde", N, m=m)
    hit, n_open = sample_outcomes(spec, DensityProfile.homogeneous(p), N, replicas, seed, rep0)
    ind = hit.astype(float)
    om = n_open.astype(float)
    prod = (om - om.mean()) * (ind - ind.mean())
    cov = prod.sum() / (replicas - 1) / (p * (1 - p))
    cov_se = prod.std(ddof=1) / math.sqrt(replicas) / (p * (1 - p))
    lo, _ = sample_outcomes(spec, DensityProfile.homogeneous(p - h), N, replicas, seed, rep0)
    hi, _ = sample_outcomes(spec, DensityProfile.homogeneous(p + h), N, replicas, seed, rep0)
    diff = (hi.astype(float) - lo.astype(float)) / (2 * h)
    return RussoEstimate(p, N, m, replicas, float(ind.mean()), float(cov), float(cov_se),
                         float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(replicas)), h)


@dataclass(frozen=True)
class RateFit:
    rate: float
    rate_se: float
    intercept: float
    Ns: tuple[int, ...]
    monotone: bool

    @property
    def ci(self) -> tuple[float, float]:
        return self.rate - Z95 * self.rate_se, self.rate + Z95 * self.rate_se


def extrapolate_rate(series) -> RateFit:
    """Weighted least squares of -log p_hat against N; the slope is the rate.

    Weights are inverse delta-method variances of log p_hat.  One-sided
    entries (no successes) cannot be placed on the line and are skipped.
    """
    pts = [e for e in series if not e.one_sided]
    if len(pts) < len(series):
        warnings.warn("entries without successes skipped in the rate fit", stacklevel=2)
    if len({e.N for e in pts}) < 3:
        raise ValueError("need at least three values of N")
    pts = sorted(pts, key=lambda e: e.N)
    x = [e.N for e in pts]
    y = [-math.log(e.prob.p_hat) for e in pts]
    var = [max((1 - e.prob.p_hat) / (e.prob.trials * e.prob.p_hat), 1e-300) for e in pts]
    a, b, se = _line(x, y, [1.0 / v for v in var])
    monotone = True
    for e1, e2 in zip(pts, pts[1:]):
        # -log p must not drop by more than the interval noise
        if -math.log(e2.prob.ci_low or 1e-300) < -math.log(e1.prob.ci_high):
            monotone = False
    if not monotone:
        warnings.warn("-log p_hat is not increasing in N beyond interval noise", stacklevel=2)
    return RateFit(float(b), float(se), float(a), tuple(x), monotone)


def to_json_safe(obj):
    """Dataclasses and numpy scalars to plain JSON values."""
    if hasattr(obj, "__dataclass_fields__"):
        return to_json_safe(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj
