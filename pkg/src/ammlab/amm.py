"""Constant-product and Maniswap pricing for a binary prediction market.

The AMM holds reserves of yes and no shares ``(y, n)``. A purchase of ``x``
currency units of yes shares mints ``x`` yes/no pairs, then pays out enough
yes shares to restore the invariant ``y**p * n**(1 - p)`` (``p = 0.5`` is the
constant product rule ``y * n``).

Every NO-side operation is the YES-side operation on the mirrored market
``(n, y, 1 - p)``, so the kernels below are written for YES only, in terms of
``a`` (reserve of the share being traded) and ``b`` (the other reserve).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ._numerics import bisect_decreasing, bisect_increasing

CONSTANT_PRODUCT = 0.5


class Side(enum.Enum):
    YES = "YES"
    NO = "NO"

    @property
    def opposite(self) -> "Side":
        return Side.NO if self is Side.YES else Side.YES


@dataclass(frozen=True, slots=True)
class MarketState:
    yes_reserve: float
    no_reserve: float
    exponent: float = CONSTANT_PRODUCT
    # net currency absorbed from traders (pairs minted minus pairs burned)
    collateral: float = 0.0

    def __post_init__(self):
        y, n, p = self.yes_reserve, self.no_reserve, self.exponent
        if not (math.isfinite(y) and math.isfinite(n) and y > 0.0 and n > 0.0):
            raise ValueError(f"reserves must be finite and positive, got y={y!r}, n={n!r}")
        if not 0.0 < p < 1.0:
            raise ValueError(f"Maniswap exponent must lie in (0, 1), got {p!r}")

    @property
    def price(self) -> float:
        return marginal_price(self)


@dataclass(frozen=True, slots=True)
class Order:
    side: Side
    spend: float

    def __post_init__(self):
        _check_amount(self.spend, "spend")


@dataclass(frozen=True, slots=True)
class Fill:
    side: Side
    shares: float
    spend: float
    price_before: float
    price_after: float


def _check_amount(value: float, what: str) -> None:
    if not math.isfinite(value) or value < 0.0:
        raise ValueError(f"{what} must be finite and non-negative, got {value!r}")


def marginal_price(state: MarketState) -> float:
    """Price of an infinitesimal yes purchase; the market probability."""
    y, n, p = state.yes_reserve, state.no_reserve, state.exponent
    if p == CONSTANT_PRODUCT:
        return n / (n + y)
    return n * p / (n * p - p * y + y)


def invariant(state: MarketState) -> float:
    y, n, p = state.yes_reserve, state.no_reserve, state.exponent
    if p == CONSTANT_PRODUCT:
        return y * n
    return y ** p * n ** (1.0 - p)


def _oriented(state: MarketState, side: Side) -> tuple[float, float, float]:
    if side is Side.YES:
        return state.yes_reserve, state.no_reserve, state.exponent
    return state.no_reserve, state.yes_reserve, 1.0 - state.exponent


def _rebuild(state: MarketState, side: Side, a: float, b: float, d_collateral: float) -> MarketState:
    y, n = (a, b) if side is Side.YES else (b, a)
    if not (a > 0.0 and b > 0.0):
        raise ValueError("trade would empty an AMM reserve")
    return MarketState(y, n, state.exponent, state.collateral + d_collateral)


# -- YES-oriented kernels ---------------------------------------------------

def _buy_kernel_general(a: float, b: float, p: float, x: float) -> tuple[float, float, float]:
    e = -((1.0 - p) / p) * math.log1p(x / b)
    # exp for the reserve (no cancellation near zero), expm1 for the share count
    return a * math.exp(e), b + x, x - a * math.expm1(e)


def _buy_kernel(a: float, b: float, p: float, x: float) -> tuple[float, float, float]:
    """Reserves after spending ``x`` on the ``a`` share, and shares received."""
    if p == CONSTANT_PRODUCT:
        b2 = b + x
        return a * b / b2, b2, x + x * a / b2
    return _buy_kernel_general(a, b, p, x)


def _sell_kernel_general(a: float, b: float, p: float, q: float) -> tuple[float, float, float]:
    r = (1.0 - p) / p
    hi = min(q, b)

    # shares left over after paying xp out of the b reserve; decreasing in xp
    def excess(xp: float) -> float:
        if xp >= b:
            return -math.inf
        return q - xp - a * math.expm1(-r * math.log1p(-xp / b))

    xp = bisect_decreasing(excess, 0.0, hi)
    return a * math.exp(-r * math.log1p(-xp / b)), b - xp, xp


def _sell_kernel(a: float, b: float, p: float, q: float) -> tuple[float, float, float]:
    """Reserves after returning ``q`` shares of ``a``, and currency paid out."""
    if p == CONSTANT_PRODUCT:
        s = a + q + b
        # smaller root of x^2 - s x + q b = 0, in cancellation-free form
        xp = 2.0 * q * b / (s + math.sqrt(s * s - 4.0 * q * b))
        b2 = b - xp
        return a * b / b2, b2, xp
    return _sell_kernel_general(a, b, p, q)


def _cost_constant_product(a: float, b: float, q: float) -> float:
    c = b + a - q
    root = math.sqrt(c * c + 4.0 * b * q)
    if c > 0.0:
        return 2.0 * b * q / (root + c)
    return 0.5 * (root - c)


def _cost_general(a: float, b: float, p: float, q: float) -> float:
    # q(x) >= x because every share costs less than one unit
    return bisect_increasing(lambda x: _buy_kernel_general(a, b, p, x)[2] - q, 0.0, q)


def _target_reserve_general(a: float, b: float, p: float, t: float) -> float:
    # the price pins the post-trade ratio a'/b'; the invariant then fixes the scale
    log_ratio = math.log(p * (1.0 - t)) - math.log(t * (1.0 - p))
    log_k = p * math.log(a) + (1.0 - p) * math.log(b)
    return math.exp(log_k - p * log_ratio)


def _marginal_cost_constant_product(a: float, b: float, q: float) -> float:
    c = b - q + a
    return 0.5 * ((b + q - a) / math.sqrt(c * c + 4.0 * b * q) + 1.0)


# -- public operations ------------------------------------------------------

def buy(state: MarketState, order: Order) -> tuple[Fill, MarketState]:
    x = order.spend
    _check_amount(x, "spend")
    before = marginal_price(state)
    if x == 0.0:
        return Fill(order.side, 0.0, 0.0, before, before), state
    a, b, p = _oriented(state, order.side)
    a2, b2, q = _buy_kernel(a, b, p, x)
    new = _rebuild(state, order.side, a2, b2, x)
    return Fill(order.side, q, x, before, marginal_price(new)), new


def sell(state: MarketState, side: Side, shares: float) -> tuple[float, MarketState]:
    """Return ``shares`` of ``side`` to the AMM; exact inverse of :func:`buy`."""
    _check_amount(shares, "shares")
    if shares == 0.0:
        return 0.0, state
    a, b, p = _oriented(state, side)
    a2, b2, proceeds = _sell_kernel(a, b, p, shares)
    return proceeds, _rebuild(state, side, a2, b2, -proceeds)


def cost(state: MarketState, side: Side, shares: float) -> float:
    """Currency needed to buy ``shares`` of ``side``."""
    _check_amount(shares, "shares")
    if shares == 0.0:
        return 0.0
    a, b, p = _oriented(state, side)
    if p == CONSTANT_PRODUCT:
        return _cost_constant_product(a, b, shares)
    return _cost_general(a, b, p, shares)


def marginal_cost(state: MarketState, side: Side, shares: float) -> float:
    """Derivative of :func:`cost`; equals the marginal price after the purchase."""
    _check_amount(shares, "shares")
    a, b, p = _oriented(state, side)
    if shares == 0.0:
        return b / (b + a) if p == CONSTANT_PRODUCT else b * p / (b * p - p * a + a)
    if p == CONSTANT_PRODUCT:
        return _marginal_cost_constant_product(a, b, shares)
    x = _cost_general(a, b, p, shares) if shares > 0.0 else 0.0
    a2, b2, _ = _buy_kernel_general(a, b, p, x)
    return 1.0 / (1.0 + ((1.0 - p) / p) * a2 / b2)


def average_cost(state: MarketState, side: Side, shares: float) -> float:
    _check_amount(shares, "shares")
    if shares == 0.0:
        raise ValueError("average cost is undefined at zero shares; use marginal_cost(state, side, 0)")
    return cost(state, side, shares) / shares


def spend_for_target_price(state: MarketState, target: float) -> Order:
    """The order that moves the marginal price exactly to ``target``."""
    if not (math.isfinite(target) and 0.0 < target < 1.0):
        raise ValueError(f"target price must lie in (0, 1), got {target!r}")
    current = marginal_price(state)
    if target == current:
        return Order(Side.YES, 0.0)
    side = Side.YES if target > current else Side.NO
    a, b, p = _oriented(state, side)
    t = target if side is Side.YES else 1.0 - target
    if p == CONSTANT_PRODUCT:
        b2 = math.sqrt(a * b * t / (1.0 - t))
    else:
        b2 = _target_reserve_general(a, b, p, t)
    return Order(side, max(b2 - b, 0.0))

