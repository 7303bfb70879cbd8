"""Warm-up / shock / adjustment Monte Carlo and reversion statistics.

Each replication owns its market, population and random stream, the stream
being seeded from ``(base_seed, replication_index)``. Paths are stacked in
replication order before any reduction, so results do not depend on how the
replications were split across worker processes.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .agents import Trader, readjust
from .amm import MarketState, buy, marginal_price, spend_for_target_price
from .config import SimConfig

log = logging.getLogger(__name__)

SHORT_RUN = 3
LONG_RUN = 100
AXES = {"lambda": "learning_rate", "alpha": "agreement", "m": "m"}


@dataclass(frozen=True)
class PricePath:
    prices: np.ndarray          # length warmup + post + 1
    shock_index: int            # prices[shock_index] is the price right after the shock
    seed: tuple[int, int]
    warmup_trades: int = 0

    @property
    def baseline_price(self) -> float:
        """Price just before the shock (the initial price if there is no warm-up)."""
        return float(self.prices[self.shock_index - 1]) if self.shock_index else float("nan")


@dataclass(frozen=True)
class Replication:
    path: PricePath
    traders: list[Trader]
    market: MarketState
    manipulator_spend: float


@dataclass(frozen=True)
class AveragedPath:
    mean_prices: np.ndarray
    standard_errors: np.ndarray
    # SE of (price_t - price_at_shock) across replications; paired, so much
    # tighter than standard_errors for post-shock comparisons
    drift_standard_errors: np.ndarray
    replications: int
    shock_index: int

    def at(self, k: int) -> float:
        """Mean price ``k`` periods after the shock (k may be negative)."""
        return float(self.mean_prices[self.shock_index + k])

    @property
    def periods(self) -> np.ndarray:
        return np.arange(len(self.mean_prices)) - self.shock_index


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    sr_reversion: float
    lr_reversion: float
    sr_se: float
    lr_se: float


def init_population(config: SimConfig) -> list[Trader]:
    m, alpha = config.m, config.agreement
    return [Trader(alpha * (i / m) + (1.0 - alpha) * 0.5, config.wealth) for i in range(m + 1)]


def replication_rng(base_seed: int, replication_index: int) -> np.random.Generator:
    return np.random.default_rng([base_seed, replication_index])


def simulate(config: SimConfig, replication_index: int) -> Replication:
    """One full warm-up, shock, adjustment run, keeping the final agent state."""
    rng = replication_rng(config.seed, replication_index)
    t, t_post = config.warmup, config.post
    picks = rng.integers(0, config.m + 1, size=t + t_post).tolist()
    lam = config.learning_rate

    state = MarketState(config.yes_reserve, config.no_reserve, config.exponent)
    traders = init_population(config)
    prices = np.empty(t + t_post + 1)
    trades = 0

    for k in range(t):
        i = picks[k]
        before = state
        traders[i], state = readjust(traders[i], state, lam)
        trades += state is not before
        prices[k] = marginal_price(state)

    spent = 0.0
    if config.shock != 0.0:
        order = spend_for_target_price(state, marginal_price(state) + config.shock)
        _, state = buy(state, order)
        spent = order.spend
    prices[t] = marginal_price(state)

    for k in range(t, t + t_post):
        i = picks[k]
        traders[i], state = readjust(traders[i], state, lam)
        prices[k + 1] = marginal_price(state)

    path = PricePath(prices, t, (config.seed, replication_index), trades)
    return Replication(path, traders, state, spent)


def run_replication(config: SimConfig, replication_index: int) -> PricePath:
    return simulate(config, replication_index).path


def _run_block(config: SimConfig, start: int, stop: int) -> np.ndarray:
    return np.stack([run_replication(config, r).prices for r in range(start, stop)])


def worker_count(default: int | None = None) -> int:
    env = os.environ.get("AMMLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer AMMLAB_THREADS=%r", env)
    return default or 1


def replicate(config: SimConfig, workers: int | None = None) -> np.ndarray:
    """All replication paths as a (replications, periods) array, in index order."""
    reps = config.replications
    workers = min(workers or worker_count(), reps)
    if workers <= 1:
        return _run_block(config, 0, reps)
    bounds = np.linspace(0, reps, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(_run_block, [config] * workers, bounds[:-1].tolist(), bounds[1:].tolist()))
    return np.concatenate(blocks)


def average_paths(paths: np.ndarray, shock_index: int) -> AveragedPath:
    reps = paths.shape[0]
    mean = paths.mean(axis=0)
    drift = paths - paths[:, [shock_index]]
    if reps > 1:
        se = paths.std(axis=0, ddof=1) / np.sqrt(reps)
        drift_se = drift.std(axis=0, ddof=1) / np.sqrt(reps)
    else:
        se = np.zeros_like(mean)
        drift_se = np.zeros_like(mean)
    return AveragedPath(mean, se, drift_se, reps, shock_index)


def run_monte_carlo(config: SimConfig, workers: int | None = None) -> AveragedPath:
    return average_paths(replicate(config, workers), config.warmup)


def reversion_coefficients(path: AveragedPath, shock: float,
                           short_run: int = SHORT_RUN, long_run: int = LONG_RUN) -> tuple[float, float]:
    """Fraction of the shock undone after ``short_run`` and ``long_run`` periods.

    Reported as positive magnitudes: movement back toward the pre-shock
    price counts as reversion for either shock sign.
    """
    if shock == 0.0:
        raise ValueError("reversion is undefined for a zero shock")
    available = len(path.mean_prices) - 1 - path.shock_index
    if available < max(short_run, long_run):
        raise ValueError(f"path has {available} post-shock periods, need {max(short_run, long_run)}")
    p0 = path.at(0)
    return (p0 - path.at(short_run)) / shock, (p0 - path.at(long_run)) / shock


def reversion_standard_errors(path: AveragedPath, shock: float,
                              short_run: int = SHORT_RUN, long_run: int = LONG_RUN) -> tuple[float, float]:
    s = path.shock_index
    d = path.drift_standard_errors
    return float(d[s + short_run]) / abs(shock), float(d[s + long_run]) / abs(shock)


def sweep(base: SimConfig, axis: str, values, workers: int | None = None) -> list[SweepRow]:
    """Reversion coefficients with one parameter varied, all else held at ``base``."""
    if axis not in AXES:
        raise ValueError(f"axis must be one of {sorted(AXES)}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    rows = []
    for value in values:
        value = int(value) if axis == "m" else float(value)
        config = base.replace(**{AXES[axis]: value})
        path = run_monte_carlo(config, workers)
        sr, lr = reversion_coefficients(path, config.shock)
        sr_se, lr_se = reversion_standard_errors(path, config.shock)
        log.info("%s=%s: SR %.4f LR %.4f", axis, value, sr, lr)
        rows.append(SweepRow(axis, value, sr, lr, sr_se, lr_se))
    return rows


def conservation_residual(config: SimConfig, rep: Replication) -> float:
    """Trader cash plus AMM collateral, net of the manipulator's stake, minus initial cash."""
    cash = sum(t.cash for t in rep.traders)
    return cash + rep.market.collateral - rep.manipulator_spend - (config.m + 1) * config.wealth
