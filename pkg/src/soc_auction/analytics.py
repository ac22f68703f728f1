"""Theory predictions and empirical run analysis.

Theory side: critical price, expected income per bid, and the first-order
income-variance approximation

    var(TI)/N  ~  (1 - pc) var(Y) + b E[Y]^2

where Y is the sale-price law (the bid law renormalized above the critical
price) and b is the asymptotic variance constant of the accepted-bid count.

Empirical side: goodness-of-fit of sale/frozen prices against their
truncated limit laws, avalanche segmentation, and robust power-law tail
fitting of avalanche durations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import E_INV, PriceModel, SeedSpec, critical_price
from .errors import InfiniteMomentError, InsufficientDataError

# Asymptotic variance constant of the accepted-bid count, var ~ b N.
B_DEFAULT = 0.0383


# =====================================================================
# Theory summary
# =====================================================================

@dataclass(frozen=True)
class TheorySummary:
    """Asymptotic predictions for one price model at a given pc.

    Moment-dependent fields are None when the model's mean or variance
    diverges; the flags say which.
    """

    pc: float
    xc: float
    expected_sales_fraction: float
    b_constant: float
    expected_ti_per_bid: Optional[float]
    mean_Y: Optional[float]
    var_Y: Optional[float]
    af_approx: Optional[float]
    infinite_mean: bool = False
    infinite_variance: bool = False

    def to_dict(self) -> dict:
        return {
            "pc": self.pc,
            "xc": self.xc,
            "expected_sales_fraction": self.expected_sales_fraction,
            "b_constant": self.b_constant,
            "expected_ti_per_bid": self.expected_ti_per_bid,
            "mean_Y": self.mean_Y,
            "var_Y": self.var_Y,
            "af_approx": self.af_approx,
            "infinite_mean": self.infinite_mean,
            "infinite_variance": self.infinite_variance,
        }


def theory_summary(model: PriceModel, pc: float = E_INV,
                   b: float = B_DEFAULT) -> TheorySummary:
    """Critical price, per-bid income, and the variance approximation.

    Heavy-tailed models with infinite mean (or variance) yield a partial
    summary with explicit flags instead of numbers.
    """
    if not 0 < pc < 1:
        raise ValueError(f"pc must be in (0, 1), got {pc}")
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    xc = critical_price(model, pc)
    accepted = 1.0 - pc

    try:
        ti_per_bid = model.tail_mean(xc)
    except InfiniteMomentError:
        return TheorySummary(pc=pc, xc=xc, expected_sales_fraction=accepted,
                             b_constant=b, expected_ti_per_bid=None,
                             mean_Y=None, var_Y=None, af_approx=None,
                             infinite_mean=True, infinite_variance=True)

    mean_y = ti_per_bid / accepted
    try:
        ey2 = model.tail_moment2(xc) / accepted
    except InfiniteMomentError:
        return TheorySummary(pc=pc, xc=xc, expected_sales_fraction=accepted,
                             b_constant=b, expected_ti_per_bid=ti_per_bid,
                             mean_Y=mean_y, var_Y=None, af_approx=None,
                             infinite_variance=True)

    var_y = ey2 - mean_y ** 2
    af = accepted * var_y + b * mean_y ** 2
    return TheorySummary(pc=pc, xc=xc, expected_sales_fraction=accepted,
                         b_constant=b, expected_ti_per_bid=ti_per_bid,
                         mean_Y=mean_y, var_Y=var_y, af_approx=af)


def empirical_critical_price(prices, pc: float = E_INV) -> float:
    """Model-free alternative: the empirical pc-quantile of all bids."""
    if not 0 < pc < 1:
        raise ValueError(f"pc must be in (0, 1), got {pc}")
    return float(np.quantile(np.asarray(prices, dtype=float), pc))


# =====================================================================
# Goodness-of-fit of sale / frozen price distributions
# =====================================================================

def _prices_of(obj) -> np.ndarray:
    """Accept a price array, a list of records with .price, or a RunResult-like."""
    if hasattr(obj, "sale_prices"):
        return np.asarray(obj.sale_prices, dtype=float)
    arr = np.asarray(obj)
    if arr.dtype == object or (arr.size and not np.issubdtype(arr.dtype, np.number)):
        return np.array([r.price for r in obj], dtype=float)
    return arr.astype(float, copy=False)


def ks_statistic(sample: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against a continuous cdf."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = len(s)
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(s), dtype=float)
    d_plus = np.max(np.arange(1, n + 1) / n - f)
    d_minus = np.max(f - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic critical value sqrt(-ln(alpha/2)/2) / sqrt(n)."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


@dataclass(frozen=True)
class DistributionChecks:
    """KS distances of a run against the two truncated limit laws."""

    ks_sales_above: float
    n_sales_above: int
    ks_remaining_below: float
    n_remaining_below: int
    frac_sales_at_or_below_xc: float
    xc_used: float

    def passes(self, alpha: float = 0.01) -> bool:
        return (self.ks_sales_above < ks_critical_value(self.n_sales_above, alpha)
                and self.ks_remaining_below < ks_critical_value(self.n_remaining_below, alpha))


def empirical_distribution_checks(sales, remaining, model: PriceModel,
                                  xc: float) -> DistributionChecks:
    """Compare sale prices above xc with the upper law h = f/(1-F(xc)) and
    remaining prices at or below xc with the lower law g = f/F(xc).

    Also reports the fraction of sales at or below xc, which should vanish
    for long runs.
    """
    sale_prices = _prices_of(sales)
    rem_prices = _prices_of(remaining)
    if len(sale_prices) == 0:
        raise ValueError("no sales: run too short for distribution checks")

    fxc = float(model.cdf(xc))
    above = sale_prices[sale_prices > xc]
    below = rem_prices[rem_prices <= xc]
    if len(above) == 0 or len(below) == 0:
        raise ValueError("run too short: no prices on one side of xc")

    ks_above = ks_statistic(above, lambda y: (np.asarray(model.cdf(y)) - fxc) / (1.0 - fxc))
    ks_below = ks_statistic(below, lambda x: np.asarray(model.cdf(x)) / fxc)
    frac = float(np.mean(sale_prices <= xc))
    return DistributionChecks(
        ks_sales_above=ks_above, n_sales_above=len(above),
        ks_remaining_below=ks_below, n_remaining_below=len(below),
        frac_sales_at_or_below_xc=frac, xc_used=xc)


# =====================================================================
# Avalanches
# =====================================================================

@dataclass(frozen=True)
class AvalancheSet:
    """Durations of complete avalanches: maximal runs of consecutive sale
    prices strictly above xc, delimited on both sides by a sale at or below
    xc. End runs without a delimiter are censored and excluded from
    `durations`; their lengths are kept so the sale count can be audited.

    When no delimiter exists at all, the whole run counts once (as the
    left-censored run) and both censoring flags are set.
    """

    durations: np.ndarray
    left_censored_first: bool
    right_censored_last: bool
    left_censored_length: int
    right_censored_length: int
    xc_used: float
    n_sales: int

    @property
    def n_avalanches(self) -> int:
        return len(self.durations)


def segment_avalanches(sales, xc: float) -> AvalancheSet:
    """Split the ordered sale-price sequence into avalanche durations.

    A sale exactly at xc counts as a delimiter (at-or-below side).
    """
    prices = _prices_of(sales)
    n = len(prices)
    empty = np.empty(0, dtype=np.int64)
    if n == 0:
        return AvalancheSet(empty, False, False, 0, 0, xc, 0)

    above = prices > xc
    if above.all():
        return AvalancheSet(empty, True, True, n, 0, xc, n)

    change = np.flatnonzero(np.diff(above.view(np.int8)))
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    lens = (ends - starts + 1)
    is_above = above[starts]

    left = int(lens[0]) if is_above[0] else 0
    right = int(lens[-1]) if is_above[-1] else 0
    complete = is_above & (starts > 0) & (ends < n - 1)
    return AvalancheSet(lens[complete].astype(np.int64), left > 0, right > 0,
                        left, right, xc, n)


def survival_function(durations, *, grid: str = "all", k_min: int = 1,
                      k_max: Optional[int] = None,
                      n_points: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Empirical survival P(tau > k).

    grid="all": every integer k from 0 to max(durations).
    grid="log": log-spaced integers in [k_min, k_max], deduplicated, with
    zero-survival points dropped (they have no log representation).
    """
    d = np.sort(np.asarray(durations, dtype=np.int64))
    n = len(d)
    if n == 0:
        raise ValueError("empty durations")
    if grid == "all":
        ks = np.arange(0, d[-1] + 1, dtype=np.int64)
    elif grid == "log":
        if k_max is None:
            k_max = int(d[-1])
        if not 1 <= k_min < k_max:
            raise ValueError(f"need 1 <= k_min < k_max, got [{k_min}, {k_max}]")
        ks = np.unique(np.round(np.logspace(math.log10(k_min), math.log10(k_max),
                                            n_points)).astype(np.int64))
    else:
        raise ValueError(f"grid must be 'all' or 'log', got {grid!r}")
    p = 1.0 - np.searchsorted(d, ks, side="right") / n
    if grid == "log":
        keep = p > 0
        ks, p = ks[keep], p[keep]
    return ks, p


@dataclass(frozen=True)
class TailFit:
    """Power-law fit of the survival tail over k in [k_min, k_max]."""

    slope: float
    stderr: float
    k_min: int
    k_max: int
    n_points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr,
                "k_min": self.k_min, "k_max": self.k_max,
                "n_points": self.n_points}


def _median_pairwise_slope(logk: np.ndarray, logp: np.ndarray) -> float:
    chunks = []
    for i in range(len(logk) - 1):
        dx = logk[i + 1:] - logk[i]
        dy = logp[i + 1:] - logp[i]
        good = dx != 0
        if good.any():
            chunks.append(dy[good] / dx[good])
    if not chunks:
        raise InsufficientDataError("no distinct k pairs to form slopes")
    return float(np.median(np.concatenate(chunks)))


def fit_power_tail(survival: tuple[np.ndarray, np.ndarray], k_min: int,
                   k_max: int, *, durations=None, n_bootstrap: int = 250,
                   seed: int = 0) -> TailFit:
    """Slope of log P(tau > k) versus log k by median-of-pairwise-slopes.

    Scale-free and resistant to the finite-size drop at the far tail.
    When the raw durations are supplied, stderr is the bootstrap spread of
    the slope over resampled duration sets (log-grid survival recomputed
    per resample); otherwise stderr is NaN.
    """
    ks, p = survival
    ks = np.asarray(ks)
    p = np.asarray(p, dtype=float)
    inside = (ks >= k_min) & (ks <= k_max) & (p > 0)
    n_in = int(inside.sum())
    if n_in < 10:
        raise InsufficientDataError(
            f"only {n_in} survival points in [{k_min}, {k_max}], need >= 10")
    slope = _median_pairwise_slope(np.log(ks[inside]), np.log(p[inside]))

    stderr = math.nan
    if durations is not None and n_bootstrap > 0:
        d = np.asarray(durations, dtype=np.int64)
        rng = SeedSpec(seed).generator()
        boots = []
        for _ in range(n_bootstrap):
            resample = rng.choice(d, size=len(d), replace=True)
            try:
                kb, pb = survival_function(resample, grid="log",
                                           k_min=k_min, k_max=k_max)
                m = (kb >= k_min) & (kb <= k_max)
                if m.sum() >= 3:
                    boots.append(_median_pairwise_slope(np.log(kb[m]), np.log(pb[m])))
            except (ValueError, InsufficientDataError):
                continue
        if len(boots) >= 2:
            stderr = float(np.std(boots, ddof=1))

    return TailFit(slope=slope, stderr=stderr, k_min=int(k_min),
                   k_max=int(k_max), n_points=n_in)
