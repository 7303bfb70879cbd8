"""Log-utility traders: belief updating, optimal bets, re-adjustment."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._numerics import golden_section_max
from .amm import (CONSTANT_PRODUCT, MarketState, Order, Side, _oriented, buy, marginal_price, sell)

# optimizer domain stops short of the full budget so log(0) is never evaluated
CASH_GUARD = 1e-12


@dataclass(frozen=True, slots=True)
class Trader:
    prior: float
    cash: float
    side: Side | None = None
    shares: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.prior <= 1.0:
            raise ValueError(f"prior must lie in [0, 1], got {self.prior!r}")
        if not self.cash >= 0.0:
            raise ValueError(f"cash must be non-negative, got {self.cash!r}")
        if (self.side is None) != (self.shares == 0.0) or self.shares < 0.0:
            raise ValueError("a trader holds shares iff a holding side is set")


def posterior_belief(prior: float, price: float, learning_rate: float) -> float:
    """Blend of the (never overwritten) prior with the observed price."""
    return learning_rate * price + (1.0 - learning_rate) * prior


def closed_form_spend(belief: float, cash: float, a: float, b: float) -> float:
    """Optimal constant-product spend on the share with reserve ``a``.

    ``belief`` is the probability that this share pays out and must exceed
    the marginal price ``b / (a + b)``. Algebraically equal to
    ``b * (sqrt(D) - 2 (1 - pi) w - a) / (2 (1 - pi) (w + a))`` with
    ``D = a**2 + 4 pi (1 - pi) w a (a + b + w) / b``, rearranged so that it
    stays finite at ``pi = 1`` (where it returns the whole budget).
    """
    pi, w = belief, cash
    d = a * a + 4.0 * pi * (1.0 - pi) * w * a * (a + b + w) / b
    return (2.0 * pi * w * a * (a + b + w) / (math.sqrt(d) + a) - w * b) / (w + a)


def _net_shares(a: float, b: float, p: float, x: float) -> float:
    # shares received minus currency spent, i.e. the payoff gain if the bet wins
    if p == CONSTANT_PRODUCT:
        return x * a / (b + x)
    return -a * math.expm1(-((1.0 - p) / p) * math.log1p(x / b))


def _utility_gain(pi: float, w: float, a: float, b: float, p: float, x: float) -> float:
    """E[ln wealth] minus ln w, in log1p form so the optimizer sees full precision."""
    if x <= 0.0:
        return 0.0
    win = pi * math.log1p(_net_shares(a, b, p, x) / w) if pi > 0.0 else 0.0
    lose = (1.0 - pi) * math.log1p(-x / w) if pi < 1.0 else 0.0
    return win + lose


def expected_log_utility(belief: float, cash: float, state: MarketState, order: Order) -> float:
    """E[ln wealth] after executing ``order``, under subjective probability ``belief``."""
    a, b, p = _oriented(state, order.side)
    pi = belief if order.side is Side.YES else 1.0 - belief
    return math.log(cash) + _utility_gain(pi, cash, a, b, p, order.spend)


def numerical_spend(belief: float, cash: float, a: float, b: float, p: float) -> float:
    cap = cash * (1.0 - CASH_GUARD)
    return golden_section_max(lambda x: _utility_gain(belief, cash, a, b, p, x), 0.0, cap)


def optimal_order(belief: float, cash: float, state: MarketState) -> Order | None:
    """Expected-log-utility maximizing bet, or ``None`` if belief equals the price."""
    if not cash > 0.0:
        raise ValueError(f"cash must be positive, got {cash!r}")
    price = marginal_price(state)
    if belief == price:
        return None
    side = Side.YES if belief > price else Side.NO
    a, b, p = _oriented(state, side)
    pi = belief if side is Side.YES else 1.0 - belief
    if p == CONSTANT_PRODUCT:
        x = closed_form_spend(pi, cash, a, b)
    else:
        x = numerical_spend(pi, cash, a, b, p)
    return Order(side, min(max(x, 0.0), cash * (1.0 - CASH_GUARD)))


def readjust(trader: Trader, state: MarketState, learning_rate: float) -> tuple[Trader, MarketState]:
    """Liquidate the trader's position and re-optimize at the resulting price.

    The posterior is formed once, from the price observed before liquidating.
    """
    observed = marginal_price(state)
    belief = posterior_belief(trader.prior, observed, learning_rate)
    if trader.side is None and belief == observed:
        return trader, state
    cash = trader.cash
    if trader.side is not None:
        proceeds, state = sell(state, trader.side, trader.shares)
        cash += proceeds
    if cash <= 0.0:
        return Trader(trader.prior, cash), state
    order = optimal_order(belief, cash, state)
    if order is None or order.spend == 0.0:
        return Trader(trader.prior, cash), state
    fill, state = buy(state, order)
    if fill.shares == 0.0:
        return Trader(trader.prior, cash), state
    return Trader(trader.prior, cash - order.spend, order.side, fill.shares), state
