"""Randomized shock experiments on simulated markets, and their estimators.

Each market in a synthetic experiment is one engine replication with its own
parameters (trader count, learning rate, belief agreement, liquidity) and a
treatment: a YES shock, a NO shock, or nothing.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, SimConfig
from .engine import run_replication
from .regression import EstimateReport, ols

log = logging.getLogger(__name__)

MODEL_TERMS = ("const", "yes", "control", "baseline_price")
PANEL_COLUMNS = ("market_id", "period", "price", "treatment", "baseline_price")


class Treatment(enum.Enum):
    YES = "YES"
    NO = "NO"
    CONTROL = "CONTROL"

    @property
    def direction(self) -> int:
        return {"YES": 1, "NO": -1, "CONTROL": 0}[self.value]


ARMS = (Treatment.YES, Treatment.NO, Treatment.CONTROL)


class PanelSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class PanelRow:
    market_id: int
    period: int                 # periods after the shock; 0 is the shock period
    price: float
    treatment: Treatment
    baseline_price: float       # price just before the shock
    moderators: Mapping[str, float] = field(default_factory=dict)


def assign_treatment(n_markets: int, arm_probabilities: Sequence[float], seed: int) -> list[Treatment]:
    """Independent (YES, NO, CONTROL) draws per market."""
    probs = np.asarray(arm_probabilities, dtype=float)
    if probs.shape != (3,) or np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-9):
        raise ValueError(f"need three non-negative arm probabilities summing to 1, got {arm_probabilities!r}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    draws = rng.choice(3, size=n_markets, p=probs / probs.sum())
    return [ARMS[d] for d in draws]


def market_configs(config: ExperimentConfig, assignment: Sequence[Treatment]) -> list[SimConfig]:
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(1,)))
    n = len(assignment)
    ms = rng.choice(np.asarray(config.m_values), size=n)
    lams = rng.choice(np.asarray(config.learning_rates, dtype=float), size=n)
    alphas = rng.choice(np.asarray(config.agreements, dtype=float), size=n)
    liqs = rng.choice(np.asarray(config.liquidity, dtype=float), size=n)
    return [
        SimConfig(m=int(ms[i]), wealth=config.wealth, yes_reserve=float(liqs[i]), no_reserve=float(liqs[i]),
                  exponent=config.exponent, learning_rate=float(lams[i]), agreement=float(alphas[i]),
                  warmup=config.warmup, post=max(config.horizon, 1),
                  shock=arm.direction * config.shock, replications=1, seed=config.seed)
        for i, arm in enumerate(assignment)
    ]


def generate_panel(config: ExperimentConfig, seed: int | None = None,
                   assignment: Sequence[Treatment] | None = None) -> list[PanelRow]:
    """Simulate every market and emit one row per post-shock period up to the horizon."""
    if seed is not None:
        config = config.replace(seed=seed)
    if assignment is None:
        assignment = assign_treatment(config.n_markets, config.arm_probabilities, config.seed)
    elif len(assignment) != config.n_markets:
        raise ValueError("assignment length must equal n_markets")
    rows: list[PanelRow] = []
    for market_id, (arm, sim) in enumerate(zip(assignment, market_configs(config, assignment))):
        path = run_replication(sim, market_id)
        t = path.shock_index
        baseline = path.baseline_price if t else sim.initial_price
        moderators = {
            "num_traders": float(sim.m + 1),
            "learning_rate": sim.learning_rate,
            "agreement": sim.agreement,
            "liquidity": sim.yes_reserve,
            "warmup_trades": float(path.warmup_trades),
        }
        for k in range(config.horizon + 1):
            rows.append(PanelRow(market_id, k, float(path.prices[t + k]), arm, baseline, moderators))
    return rows


# -- estimation -------------------------------------------------------------

def _cross_section(panel: Sequence[PanelRow], horizon: int) -> tuple[list[PanelRow], list[int]]:
    by_market: dict[int, PanelRow] = {}
    markets: set[int] = set()
    for row in panel:
        markets.add(row.market_id)
        if row.period == horizon:
            if row.market_id in by_market:
                raise ValueError(f"market {row.market_id} has several rows at period {horizon}")
            by_market[row.market_id] = row
    missing = sorted(markets - set(by_market))
    if missing:
        log.warning("%d market(s) lack period %d and are excluded: %s", len(missing), horizon, missing)
    if not by_market:
        raise ValueError(f"no market has an observation at period {horizon}")
    return [by_market[k] for k in sorted(by_market)], missing


def _design(rows: Sequence[PanelRow], two_arm: bool) -> tuple[np.ndarray, tuple[str, ...]]:
    yes = np.array([r.treatment is Treatment.YES for r in rows], dtype=float)
    ctrl = np.array([r.treatment is Treatment.CONTROL for r in rows], dtype=float)
    base = np.array([r.baseline_price for r in rows])
    ones = np.ones(len(rows))
    if two_arm:
        return np.column_stack([ones, yes, base]), ("const", "yes", "baseline_price")
    return np.column_stack([ones, yes, ctrl, base]), MODEL_TERMS


def _is_two_arm(rows: Sequence[PanelRow], two_arm: bool | None) -> bool:
    has_control = any(r.treatment is Treatment.CONTROL for r in rows)
    if two_arm is None:
        return not has_control
    if two_arm and has_control:
        raise ValueError("two-arm model requested but the panel contains control markets")
    return two_arm


def estimate_treatment_effect(panel: Sequence[PanelRow], horizon: int,
                              two_arm: bool | None = None) -> EstimateReport:
    """Price at ``horizon`` on arm dummies and the pre-shock price; NO is the omitted arm.

    Without control markets the control dummy is dropped (two-arm design).
    Markets lacking the horizon are excluded and listed in ``info``.
    """
    rows, missing = _cross_section(panel, horizon)
    X, names = _design(rows, _is_two_arm(rows, two_arm))
    report = ols(X, [r.price for r in rows], names)
    report.info.update(horizon=horizon, excluded_markets=missing)
    return report


def median_split(values) -> tuple[float, np.ndarray]:
    """Split point and indicator ``x = values >= split``.

    The split is the median, or the smallest non-zero value when a strict
    majority of values are zero. A two-level moderator is treated as binary
    (split at its upper level) when the median would put every market on one
    side.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.all(v == v[0]):
        raise ValueError("moderator must take at least two distinct values")
    if 2 * np.count_nonzero(v == 0) > v.size:
        point = float(v[v != 0].min())
    else:
        point = float(np.median(v))
    x = v >= point
    levels = np.unique(v)
    if x.all() and levels.size == 2:
        point = float(levels[1])
        x = v >= point
    return point, x.astype(float)


def heterogeneity_split(panel: Sequence[PanelRow], moderator: str, horizon: int,
                        two_arm: bool | None = None) -> EstimateReport:
    """Interaction model: every regressor of the main model, plus each times the split dummy.

    The coefficient ``yes_x`` is the difference in YES-NO treatment effects
    between markets above and below the split.
    """
    rows, missing = _cross_section(panel, horizon)
    try:
        v = [r.moderators[moderator] for r in rows]
    except KeyError:
        raise KeyError(f"moderator {moderator!r} missing from the panel") from None
    point, x = median_split(v)
    X, names = _design(rows, _is_two_arm(rows, two_arm))
    inter = X[:, 1:] * x[:, None]
    report = ols(np.column_stack([X, inter]), [r.price for r in rows],
                 names + tuple(f"{n}_x" for n in names[1:]))
    report.info.update(horizon=horizon, excluded_markets=missing, moderator=moderator,
                       split_point=point, n_above=int(x.sum()))
    return report


def inject_spillovers(panel: Sequence[PanelRow], weights: Mapping[tuple[int, int], float],
                      sources: set[int], targets: set[int]) -> list[PanelRow]:
    """Add cross-market effects: target i moves by +w[i, j] for each YES source j, -w[i, j] for NO.

    ``weights`` maps (target, source) pairs to effects. Control sources have
    no effect.
    """
    sources, targets = set(sources), set(targets)
    if sources & targets:
        raise ValueError(f"source and target sets overlap: {sorted(sources & targets)}")
    arms: dict[int, Treatment] = {}
    for row in panel:
        arms.setdefault(row.market_id, row.treatment)
    shift: dict[int, float] = {}
    for (i, j), w in weights.items():
        if i not in targets or j not in sources:
            if w != 0.0:
                raise ValueError(f"non-zero weight for ({i}, {j}) outside targets x sources")
            continue
        if j not in arms:
            raise KeyError(f"source market {j} not in panel")
        shift[i] = shift.get(i, 0.0) + w * arms[j].direction
    return [replace(r, price=r.price + shift[r.market_id]) if shift.get(r.market_id) else r
            for r in panel]


# -- CSV --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_panel(panel: Sequence[PanelRow], path: str | Path) -> None:
    mods = sorted({k for r in panel for k in r.moderators})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PANEL_COLUMNS + tuple(mods))
        for r in panel:
            w.writerow([r.market_id, r.period, _fmt(r.price), r.treatment.value, _fmt(r.baseline_price)]
                       + [_fmt(r.moderators[m]) for m in mods])


def read_panel(path: str | Path) -> list[PanelRow]:
    path = str(path)
    rows: list[PanelRow] = []
    arms: dict[int, Treatment] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:5]) != PANEL_COLUMNS:
            raise PanelSchemaError(f"{path}:1: header must start with {', '.join(PANEL_COLUMNS)}")
        mods = header[5:]
        for lineno, rec in enumerate(reader, 2):
            if len(rec) != len(header):
                raise PanelSchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                market, period = int(rec[0]), int(rec[1])
                price, baseline = float(rec[2]), float(rec[4])
                values = {m: float(v) for m, v in zip(mods, rec[5:])}
            except ValueError as exc:
                raise PanelSchemaError(f"{path}:{lineno}: {exc}") from None
            try:
                arm = Treatment(rec[3])
            except ValueError:
                raise PanelSchemaError(f"{path}:{lineno}: unknown treatment {rec[3]!r}") from None
            if arms.setdefault(market, arm) is not arm:
                raise PanelSchemaError(f"{path}:{lineno}: treatment changes within market {market}")
            rows.append(PanelRow(market, period, price, arm, baseline, values))
    return rows
