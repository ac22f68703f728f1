"""Sequential auction state machine: the highest-remaining-bid selling rule.

Classic rule: at each arrival the highest remaining bid is executed, except
when the new bid is greater than or equal to that maximum; the new bid always
joins the pool. The first bid enters with no comparison, and a tying bid does
not trigger a sale.

Two-consecutive variant: the highest remaining bid is executed only when the
last two consecutive arrivals are both strictly below it (sliding window, so
a long descent executes one maximum per arrival). Calibrates to a critical
fraction of about one half.

Accept-all baseline: every bid is immediately a sale of itself.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class Rule(str, enum.Enum):
    CLASSIC = "classic"
    TWO_CONSECUTIVE = "two-consecutive"
    ACCEPT_ALL = "accept-all"


@dataclass(frozen=True, slots=True)
class Bid:
    """One offered price, in arrival order (1-based index)."""
    index: int
    price: float
    timestamp: Optional[float] = None


@dataclass(frozen=True, slots=True)
class SaleRecord:
    """An executed transaction.

    trigger_bid_index is the arrival that caused the execution; for the
    classic rule its price is strictly below the executed price. The
    accepted bid may have arrived at any earlier position.
    """
    sale_ordinal: int
    price: float
    accepted_bid_index: int
    trigger_bid_index: int


class AuctionEngine:
    """Incremental engine: one state, strictly sequential submissions.

    The remaining pool is a max-priority queue keyed on (price, earliest
    arrival index breaks ties). Income is accumulated with compensated
    summation so the conservation identity holds to 1e-9 relative even for
    multi-million-bid runs.
    """

    def __init__(self, rule: Rule | str = Rule.CLASSIC):
        self.rule = Rule(rule)
        self.bids_seen = 0
        self.accepted_count = 0
        self.below_counter = 0  # two-consecutive only: last arrival below max?
        self._heap: list[tuple[float, int]] = []  # (-price, index)
        self._income = 0.0
        self._income_carry = 0.0
        self._timestamps: dict[int, float] = {}

    @property
    def total_income(self) -> float:
        return self._income + self._income_carry

    @property
    def n_remaining(self) -> int:
        return len(self._heap)

    def _add_income(self, y: float) -> None:
        # Neumaier compensated summation
        t = self._income + y
        if abs(self._income) >= abs(y):
            self._income_carry += (self._income - t) + y
        else:
            self._income_carry += (y - t) + self._income
        self._income = t

    def submit_bid(self, price: float, timestamp: Optional[float] = None) -> Optional[SaleRecord]:
        """Process one arriving bid; returns the SaleRecord if a sale fired."""
        if not price > 0:
            raise ValueError(f"bid price must be > 0, got {price}")
        heap = self._heap
        i = self.bids_seen + 1
        rule = self.rule
        sale = None

        if rule is Rule.ACCEPT_ALL:
            self.bids_seen = i
            self.accepted_count += 1
            self._add_income(price)
            return SaleRecord(self.accepted_count, price, i, i)

        if rule is Rule.CLASSIC:
            if heap and price < -heap[0][0]:
                negz, j = heapq.heapreplace(heap, (-price, i))
                sale = self._emit(-negz, j, i)
            else:
                heapq.heappush(heap, (-price, i))
        else:  # TWO_CONSECUTIVE
            if heap and price < -heap[0][0] and self.below_counter >= 1:
                negz, j = heapq.heapreplace(heap, (-price, i))
                sale = self._emit(-negz, j, i)
            else:
                heapq.heappush(heap, (-price, i))
            # the arrival just inserted is "below" unless it is now the max
            self.below_counter = 1 if price < -heap[0][0] else 0

        self.bids_seen = i
        if timestamp is not None:
            self._timestamps[i] = timestamp
        return sale

    def _emit(self, z: float, accepted_idx: int, trigger_idx: int) -> SaleRecord:
        self.accepted_count += 1
        self._add_income(z)
        self._timestamps.pop(accepted_idx, None)
        return SaleRecord(self.accepted_count, z, accepted_idx, trigger_idx)

    def remaining_bids(self) -> list[Bid]:
        """Remaining pool as Bid objects, sorted by arrival index."""
        items = sorted(self._heap, key=lambda t: t[1])
        return [Bid(j, -negp, self._timestamps.get(j)) for negp, j in items]

    def remaining_prices(self) -> np.ndarray:
        """Remaining prices sorted by arrival index."""
        items = sorted(self._heap, key=lambda t: t[1])
        return np.array([-negp for negp, _ in items], dtype=float)


def new_engine(rule: Rule | str = Rule.CLASSIC) -> AuctionEngine:
    """Fresh engine: no bids seen, no income, empty pool."""
    return AuctionEngine(rule)


# =====================================================================
# Whole-run folds
# =====================================================================

@dataclass(eq=False)
class RunResult:
    """Outputs of folding the selling rule over a full price sequence.

    Array-first so multi-million-bid runs stay cheap; `sales` and
    `remaining` materialize record objects on demand.
    """

    rule: Rule
    n_bids: int
    sale_prices: np.ndarray
    accepted_indices: np.ndarray
    trigger_indices: np.ndarray
    ntilde: np.ndarray
    remaining_prices: np.ndarray
    remaining_indices: np.ndarray
    total_income: float
    timestamps: Optional[np.ndarray] = None
    _sales: Optional[list[SaleRecord]] = field(default=None, repr=False)
    _remaining: Optional[list[Bid]] = field(default=None, repr=False)

    @property
    def n_sales(self) -> int:
        return len(self.sale_prices)

    @property
    def sales_fraction(self) -> float:
        return self.n_sales / self.n_bids if self.n_bids else 0.0

    @property
    def trajectory(self) -> np.ndarray:
        return self.ntilde

    @property
    def sales(self) -> list[SaleRecord]:
        if self._sales is None:
            self._sales = [
                SaleRecord(k + 1, float(p), int(a), int(t))
                for k, (p, a, t) in enumerate(
                    zip(self.sale_prices, self.accepted_indices, self.trigger_indices))
            ]
        return self._sales

    @property
    def remaining(self) -> list[Bid]:
        if self._remaining is None:
            ts = self.timestamps
            self._remaining = [
                Bid(int(j), float(p), float(ts[j - 1]) if ts is not None else None)
                for p, j in zip(self.remaining_prices, self.remaining_indices)
            ]
        return self._remaining


def _validate_prices(prices) -> list[float]:
    if isinstance(prices, np.ndarray):
        if len(prices) and not (np.min(prices) > 0):
            bad = float(prices[np.argmin(prices)])
            raise ValueError(f"bid prices must be > 0, got {bad}")
        return prices.tolist()
    out = [float(x) for x in prices]
    for x in out:
        if not x > 0:
            raise ValueError(f"bid prices must be > 0, got {x}")
    return out


def _fold_classic(pl: list[float], ntilde: Optional[np.ndarray]):
    heappush = heapq.heappush
    heapreplace = heapq.heapreplace
    heap: list[tuple[float, int]] = []
    sale_p: list[float] = []
    acc: list[int] = []
    trig: list[int] = []
    ap, aa, at = sale_p.append, acc.append, trig.append
    i = 0
    k = 0
    for x in pl:
        i += 1
        if heap and x < -heap[0][0]:
            negz, j = heapreplace(heap, (-x, i))
            ap(-negz)
            aa(j)
            at(i)
            k += 1
        else:
            heappush(heap, (-x, i))
        if ntilde is not None:
            ntilde[i - 1] = k
    return sale_p, acc, trig, heap


def _fold_two_consecutive(pl: list[float], ntilde: Optional[np.ndarray]):
    heappush = heapq.heappush
    heapreplace = heapq.heapreplace
    heap: list[tuple[float, int]] = []
    sale_p: list[float] = []
    acc: list[int] = []
    trig: list[int] = []
    ap, aa, at = sale_p.append, acc.append, trig.append
    i = 0
    k = 0
    below = 0
    for x in pl:
        i += 1
        if below and heap and x < -heap[0][0]:
            negz, j = heapreplace(heap, (-x, i))
            ap(-negz)
            aa(j)
            at(i)
            k += 1
        else:
            heappush(heap, (-x, i))
        below = 1 if x < -heap[0][0] else 0
        if ntilde is not None:
            ntilde[i - 1] = k
    return sale_p, acc, trig, heap


def run_sequence(rule: Rule | str, prices, *, timestamps=None,
                 collect_trajectory: bool = True) -> RunResult:
    """Fold the selling rule over an ordered price list.

    Equivalent to submitting each price to a fresh AuctionEngine; implemented
    as a tight loop over a binary max-heap so million-bid runs take about a
    second.
    """
    rule = Rule(rule)
    pl = _validate_prices(prices)
    n = len(pl)
    ntilde = np.empty(n, dtype=np.int64) if collect_trajectory else None

    if rule is Rule.ACCEPT_ALL:
        sale_prices = np.asarray(pl, dtype=float)
        idx = np.arange(1, n + 1, dtype=np.int64)
        if ntilde is not None:
            ntilde[:] = idx
        return RunResult(
            rule=rule, n_bids=n,
            sale_prices=sale_prices,
            accepted_indices=idx, trigger_indices=idx.copy(),
            ntilde=ntilde if ntilde is not None else np.empty(0, dtype=np.int64),
            remaining_prices=np.empty(0), remaining_indices=np.empty(0, dtype=np.int64),
            total_income=math.fsum(pl),
            timestamps=None if timestamps is None else np.asarray(timestamps, dtype=float),
        )

    fold = _fold_classic if rule is Rule.CLASSIC else _fold_two_consecutive
    sale_p, acc, trig, heap = fold(pl, ntilde)

    heap.sort(key=lambda t: t[1])
    rem_prices = np.array([-negp for negp, _ in heap], dtype=float)
    rem_idx = np.array([j for _, j in heap], dtype=np.int64)
    if ntilde is None:
        ntilde = np.empty(0, dtype=np.int64)
    return RunResult(
        rule=rule, n_bids=n,
        sale_prices=np.asarray(sale_p, dtype=float),
        accepted_indices=np.asarray(acc, dtype=np.int64),
        trigger_indices=np.asarray(trig, dtype=np.int64),
        ntilde=ntilde,
        remaining_prices=rem_prices, remaining_indices=rem_idx,
        total_income=math.fsum(sale_p),
        timestamps=None if timestamps is None else np.asarray(timestamps, dtype=float),
    )


def oracle_run(rule: Rule | str, prices, *, timestamps=None) -> RunResult:
    """Reference implementation: re-derives the pool maximum by full scan at
    every step. Quadratic, intended for sequences up to a few thousand bids;
    shares no max-retrieval code with run_sequence.
    """
    rule = Rule(rule)
    pl = _validate_prices(prices)
    n = len(pl)
    ntilde = np.empty(n, dtype=np.int64)

    rem: list[tuple[float, int]] = []  # (price, index), insertion order
    sale_p: list[float] = []
    acc: list[int] = []
    trig: list[int] = []
    prev_price: Optional[float] = None

    for i, x in enumerate(pl, start=1):
        if rule is Rule.ACCEPT_ALL:
            sale_p.append(x)
            acc.append(i)
            trig.append(i)
        else:
            mi = -1
            z = -math.inf
            for t, (p, _) in enumerate(rem):
                if p > z:
                    z = p
                    mi = t
            if rule is Rule.CLASSIC:
                fire = mi >= 0 and x < z
            else:
                fire = mi >= 0 and x < z and prev_price is not None and prev_price < z
            if fire:
                p, j = rem.pop(mi)
                sale_p.append(p)
                acc.append(j)
                trig.append(i)
            rem.append((x, i))
            prev_price = x
        ntilde[i - 1] = len(sale_p)

    rem.sort(key=lambda t: t[1])
    return RunResult(
        rule=rule, n_bids=n,
        sale_prices=np.asarray(sale_p, dtype=float),
        accepted_indices=np.asarray(acc, dtype=np.int64),
        trigger_indices=np.asarray(trig, dtype=np.int64),
        ntilde=ntilde,
        remaining_prices=np.array([p for p, _ in rem], dtype=float),
        remaining_indices=np.array([j for _, j in rem], dtype=np.int64),
        total_income=math.fsum(sale_p),
        timestamps=None if timestamps is None else np.asarray(timestamps, dtype=float),
    )
