"""Price-law models: seeded sampling, cdf/pdf/quantile, truncated moments.

All sampling is inverse-transform from a reproducible uniform stream, so two
models driven by the same SeedSpec see the same underlying uniforms. That is
what makes the engine's rank-invariance property directly testable.

The pinned generator is Philox4x64-10 keyed through
``numpy.random.SeedSequence(entropy=master_seed, spawn_key=(stream_id,))``.
Philox is counter-based, and both its bit stream and ``Generator.random``'s
uniform-double conversion are stable across platforms and numpy releases.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr, ndtri

from .errors import InfiniteMomentError, ModelSpecError

# Conjectured asymptotic never-accepted fraction for the classic selling rule.
E_INV = math.exp(-1.0)

# Smallest uniform fed to quantile functions: a draw of exactly 0.0 would map
# to a non-positive price, which the engine rejects.
_U_FLOOR = 2.0 ** -53


# =====================================================================
# Seeded uniform streams
# =====================================================================

@dataclass(frozen=True)
class SeedSpec:
    """Addresses one reproducible random stream.

    Distinct stream_ids under one master_seed give statistically independent
    streams (SeedSequence spawn keys), so replicas can run concurrently
    without sharing state.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed,
                                    spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def uniform_stream(seed: SeedSpec, n: int) -> np.ndarray:
    """n uniforms in [0, 1) from the stream addressed by `seed`."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return seed.generator().random(n)


# =====================================================================
# Price models
# =====================================================================

class PriceModel:
    """A bid-price law on the positive reals.

    Subclasses provide closed-form cdf/pdf/quantile and the two truncated
    moments used by the income theory:

        tail_mean(c)    = integral of x f(x) over [c, inf)
        tail_moment2(c) = integral of x^2 f(x) over [c, inf)
    """

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def _ppf(self, u):
        """Quantile on arrays of valid probabilities; no domain checks."""
        raise NotImplementedError

    def mean(self) -> float:
        return self.tail_mean(0.0)

    def tail_mean(self, c: float) -> float:
        raise NotImplementedError

    def tail_moment2(self, c: float) -> float:
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError


def _scalarize(x, val):
    if np.ndim(x) == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class Exponential(PriceModel):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be > 0, got {self.rate}")

    def support(self):
        return 0.0, math.inf

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.where(xa < 0, 0.0, self.rate * np.exp(-self.rate * np.maximum(xa, 0)))
        return _scalarize(x, out)

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.where(xa < 0, 0.0, -np.expm1(-self.rate * np.maximum(xa, 0)))
        return _scalarize(x, out)

    def _ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def tail_mean(self, c):
        c = max(c, 0.0)
        return (c + 1.0 / self.rate) * math.exp(-self.rate * c)

    def tail_moment2(self, c):
        c = max(c, 0.0)
        lam = self.rate
        return (c * c + 2.0 * c / lam + 2.0 / lam ** 2) * math.exp(-lam * c)

    def spec_string(self):
        return f"exponential:rate={self.rate:g}"


@dataclass(frozen=True)
class LogNormal(PriceModel):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def support(self):
        return 0.0, math.inf

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        safe = np.where(xa > 0, xa, 1.0)
        z = (np.log(safe) - self.mu) / self.sigma
        out = np.where(xa > 0,
                       np.exp(-0.5 * z * z) / (safe * self.sigma * math.sqrt(2 * math.pi)),
                       0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        safe = np.where(xa > 0, xa, 1.0)
        out = np.where(xa > 0, ndtr((np.log(safe) - self.mu) / self.sigma), 0.0)
        return _scalarize(x, out)

    def _ppf(self, u):
        return np.exp(self.mu + self.sigma * ndtri(np.asarray(u, dtype=float)))

    def tail_mean(self, c):
        m = math.exp(self.mu + 0.5 * self.sigma ** 2)
        if c <= 0:
            return m
        return m * ndtr((self.mu + self.sigma ** 2 - math.log(c)) / self.sigma)

    def tail_moment2(self, c):
        m2 = math.exp(2.0 * self.mu + 2.0 * self.sigma ** 2)
        if c <= 0:
            return m2
        return m2 * ndtr((self.mu + 2.0 * self.sigma ** 2 - math.log(c)) / self.sigma)

    def spec_string(self):
        return f"lognormal:mu={self.mu:g},sigma={self.sigma:g}"


@dataclass(frozen=True)
class Uniform(PriceModel):
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.lo < 0:
            raise ValueError(f"lo must be >= 0, got {self.lo}")
        if not self.hi > self.lo:
            raise ValueError(f"hi must be > lo, got hi={self.hi}, lo={self.lo}")

    def support(self):
        return self.lo, self.hi

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        inside = (xa >= self.lo) & (xa <= self.hi)
        out = np.where(inside, 1.0 / (self.hi - self.lo), 0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.clip((xa - self.lo) / (self.hi - self.lo), 0.0, 1.0)
        return _scalarize(x, out)

    def _ppf(self, u):
        return self.lo + (self.hi - self.lo) * np.asarray(u, dtype=float)

    def tail_mean(self, c):
        c = min(max(c, self.lo), self.hi)
        return (self.hi ** 2 - c ** 2) / (2.0 * (self.hi - self.lo))

    def tail_moment2(self, c):
        c = min(max(c, self.lo), self.hi)
        return (self.hi ** 3 - c ** 3) / (3.0 * (self.hi - self.lo))

    def spec_string(self):
        return f"uniform:lo={self.lo:g},hi={self.hi:g}"


@dataclass(frozen=True)
class Pareto(PriceModel):
    """Power-law price model with density exponent alpha.

    f(x) = (alpha - 1) xmin^(alpha-1) x^(-alpha) on [xmin, inf), so the
    survival function decays like x^(1-alpha). The mean is finite only for
    alpha > 2 and the second moment only for alpha > 3.
    """

    xmin: float = 1.0
    alpha: float = 2.5

    def __post_init__(self):
        if not self.xmin > 0:
            raise ValueError(f"xmin must be > 0, got {self.xmin}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")

    def support(self):
        return self.xmin, math.inf

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        safe = np.maximum(xa, self.xmin)
        a = self.alpha
        out = np.where(xa >= self.xmin,
                       (a - 1.0) * self.xmin ** (a - 1.0) * safe ** (-a),
                       0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        safe = np.maximum(xa, self.xmin)
        out = np.where(xa >= self.xmin,
                       1.0 - (self.xmin / safe) ** (self.alpha - 1.0),
                       0.0)
        return _scalarize(x, out)

    def _ppf(self, u):
        ua = np.asarray(u, dtype=float)
        return self.xmin * (1.0 - ua) ** (-1.0 / (self.alpha - 1.0))

    def tail_mean(self, c):
        if self.alpha <= 2:
            raise InfiniteMomentError(
                f"Pareto mean is infinite for alpha <= 2 (alpha={self.alpha})")
        c = max(c, self.xmin)
        a = self.alpha
        return (a - 1.0) / (a - 2.0) * self.xmin ** (a - 1.0) * c ** (2.0 - a)

    def tail_moment2(self, c):
        if self.alpha <= 3:
            raise InfiniteMomentError(
                f"Pareto second moment is infinite for alpha <= 3 (alpha={self.alpha})")
        c = max(c, self.xmin)
        a = self.alpha
        return (a - 1.0) / (a - 3.0) * self.xmin ** (a - 1.0) * c ** (3.0 - a)

    def spec_string(self):
        return f"pareto:xmin={self.xmin:g},alpha={self.alpha:g}"


@dataclass(frozen=True)
class Truncated(PriceModel):
    """Lower truncation of another law at a base price.

    Models a posted base price: bids below it cannot be offered, so the
    inner law is renormalized on [base_price, inf).
    """

    base_price: float
    inner: PriceModel

    def __post_init__(self):
        if not self.base_price > 0:
            raise ValueError(f"base_price must be > 0, got {self.base_price}")
        mass = 1.0 - self.inner.cdf(self.base_price)
        if not mass > 0:
            raise ValueError(
                f"base_price={self.base_price} leaves no probability mass above it")

    def _f0(self) -> float:
        return float(self.inner.cdf(self.base_price))

    def support(self):
        lo, hi = self.inner.support()
        return max(lo, self.base_price), hi

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        out = np.where(xa >= self.base_price,
                       np.asarray(self.inner.pdf(xa)) / (1.0 - self._f0()),
                       0.0)
        return _scalarize(x, out)

    def cdf(self, x):
        xa = np.asarray(x, dtype=float)
        f0 = self._f0()
        out = np.where(xa >= self.base_price,
                       (np.asarray(self.inner.cdf(xa)) - f0) / (1.0 - f0),
                       0.0)
        return _scalarize(x, out)

    def _ppf(self, u):
        f0 = self._f0()
        return self.inner._ppf(f0 + (1.0 - f0) * np.asarray(u, dtype=float))

    def tail_mean(self, c):
        c = max(c, self.base_price)
        return self.inner.tail_mean(c) / (1.0 - self._f0())

    def tail_moment2(self, c):
        c = max(c, self.base_price)
        return self.inner.tail_moment2(c) / (1.0 - self._f0())

    def spec_string(self):
        return f"truncated:base={self.base_price:g},inner={self.inner.spec_string()}"


# =====================================================================
# Operations
# =====================================================================

def sample(model: PriceModel, seed: SeedSpec, n: int) -> np.ndarray:
    """n i.i.d. draws by inverse transform of the stream's uniforms.

    A uniform of exactly 0.0 is nudged to 2^-53 so every price is strictly
    positive; this preserves ranks and determinism.
    """
    u = uniform_stream(seed, n)
    np.maximum(u, _U_FLOOR, out=u)
    return model._ppf(u)


def quantile(model: PriceModel, p):
    """Smallest x with cdf(x) >= p, for p in [0, 1)."""
    pa = np.asarray(p, dtype=float)
    if np.any(pa < 0) or np.any(pa >= 1):
        raise ValueError(f"quantile level must be in [0, 1), got {p}")
    return _scalarize(p, model._ppf(pa))


def critical_price(model: PriceModel, pc: float = E_INV) -> float:
    """Threshold x_c with cdf(x_c) = pc.

    Bids above x_c are asymptotically the ones that sell under the classic
    rule; pc defaults to the conjectured 1/e.
    """
    if not 0 < pc < 1:
        raise ValueError(f"pc must be in (0, 1), got {pc}")
    return float(quantile(model, pc))


def tail_mean(model: PriceModel, c: float) -> float:
    """Integral of x f(x) over [c, inf), by closed form.

    Raises InfiniteMomentError when the law has no finite mean.
    """
    return float(model.tail_mean(c))


def tail_moment2(model: PriceModel, c: float) -> float:
    """Integral of x^2 f(x) over [c, inf), by closed form."""
    return float(model.tail_moment2(c))


def tail_moment_quad(model: PriceModel, c: float, power: int = 1) -> float:
    """Quadrature route for the truncated moments.

    Integrates quantile(u)^power du on [cdf(c), 1): the substitution
    u = F(x) turns a heavy tail in x into an endpoint singularity in u that
    adaptive Gauss-Kronrod handles well. Serves as an independent
    cross-check of the closed forms, and as the fallback for models
    without one.
    """
    lo_supp, _ = model.support()
    c = max(c, lo_supp)
    u0 = float(model.cdf(c))
    if u0 >= 1.0:
        return 0.0

    def integrand(u):
        return float(model._ppf(u)) ** power

    with warnings.catch_warnings():
        # near machine precision QUADPACK reports roundoff in its
        # extrapolation table; the returned value is still well inside the
        # 1e-9 relative target
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _err = integrate.quad(integrand, u0, 1.0, epsabs=0.0,
                                   epsrel=1e-10, limit=400)
    return val


def poisson_arrival_times(n: int, rate: float, seed: SeedSpec) -> np.ndarray:
    """Arrival timestamps of a constant-rate Poisson stream.

    Pure event-log metadata: the selling rule is order-driven and never
    reads these.
    """
    if not rate > 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    u = uniform_stream(seed, n)
    gaps = -np.log1p(-u) / rate
    return np.cumsum(gaps)


# =====================================================================
# Textual model specifiers
# =====================================================================

_FAMILIES = {
    "exponential": (Exponential, ("rate",)),
    "lognormal": (LogNormal, ("mu", "sigma")),
    "uniform": (Uniform, ("lo", "hi")),
    "pareto": (Pareto, ("xmin", "alpha")),
}


def parse_model(text: str) -> PriceModel:
    """Parse specifiers like ``lognormal:mu=0,sigma=0.3`` or
    ``truncated:base=1.0,inner=exponential:rate=1``.

    For ``truncated`` the ``inner=`` field must come last; it consumes the
    rest of the string, so inner specs can nest.
    """
    text = text.strip()
    family, _, rest = text.partition(":")
    family = family.strip().lower()

    if family == "truncated":
        idx = rest.find("inner=")
        if idx < 0:
            raise ModelSpecError("truncated: missing field 'inner'")
        head = rest[:idx].rstrip(", ")
        inner = parse_model(rest[idx + len("inner="):])
        fields = _parse_fields("truncated", head, ("base",))
        if "base" not in fields:
            raise ModelSpecError("truncated: missing field 'base'")
        try:
            return Truncated(base_price=fields["base"], inner=inner)
        except ValueError as e:
            raise ModelSpecError(f"truncated: {e}") from e

    if family not in _FAMILIES:
        known = ", ".join(sorted(_FAMILIES) + ["truncated"])
        raise ModelSpecError(f"unknown model family '{family}' (expected one of: {known})")

    cls, names = _FAMILIES[family]
    fields = _parse_fields(family, rest, names)
    missing = [k for k in names if k not in fields]
    if missing:
        raise ModelSpecError(f"{family}: missing field '{missing[0]}'")
    try:
        return cls(**fields)
    except ValueError as e:
        raise ModelSpecError(f"{family}: {e}") from e


def _parse_fields(family: str, text: str, allowed: tuple[str, ...]) -> dict[str, float]:
    fields: dict[str, float] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep:
            raise ModelSpecError(f"{family}: expected 'field=value', got '{part}'")
        if key not in allowed:
            raise ModelSpecError(f"{family}: unexpected field '{key}'")
        if key in fields:
            raise ModelSpecError(f"{family}: duplicate field '{key}'")
        try:
            fields[key] = float(value)
        except ValueError:
            raise ModelSpecError(f"{family}: bad value for '{key}': '{value.strip()}'") from None
    return fields
