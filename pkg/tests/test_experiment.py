from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ammlab.config import ExperimentConfig
from ammlab.experiment import (PanelRow, PanelSchemaError, Treatment, assign_treatment,
                               estimate_treatment_effect, generate_panel, heterogeneity_split,
                               inject_spillovers, median_split, read_panel, write_panel)
from ammlab.regression import symmetry_test

FAST = ExperimentConfig(n_markets=30, horizon=10, warmup=20, seed=5)


def constructed_panel(n, rng, effects=(0.05, -0.05, 0.0), noise=0.0, horizon=0, moderator=None):
    """Deterministic-DGP panel: price = baseline + arm effect (+ noise)."""
    arms = [Treatment.YES, Treatment.NO, Treatment.CONTROL]
    rows = []
    for i in range(n):
        arm = arms[i % 3] if noise == 0.0 else arms[int(rng.integers(3))]
        base = float(rng.uniform(0.3, 0.7))
        price = base + effects[arms.index(arm)] + (rng.normal(0, noise) if noise else 0.0)
        mods = {"v": float(moderator[i])} if moderator is not None else {}
        rows.append(PanelRow(i, horizon, price, arm, base, mods))
    return rows


# -- assignment -------------------------------------------------------------

def test_assignment_counts_concentrate():
    counts = Counter(assign_treatment(3000, (1 / 3, 1 / 3, 1 / 3), seed=1))
    sd = np.sqrt(3000 * (1 / 3) * (2 / 3))
    for arm in Treatment:
        assert abs(counts[arm] - 1000) < 4 * sd


def test_assignment_degenerate_and_two_arm():
    assert set(assign_treatment(50, (1, 0, 0), seed=2)) == {Treatment.YES}
    two = assign_treatment(200, (0.5, 0.5, 0.0), seed=3)
    assert Treatment.CONTROL not in two and len(set(two)) == 2
    assert assign_treatment(40, (0.2, 0.3, 0.5), 9) == assign_treatment(40, (0.2, 0.3, 0.5), 9)


@pytest.mark.parametrize("probs", [(0.5, 0.5), (0.5, 0.6, -0.1), (0.2, 0.2, 0.2)])
def test_assignment_rejects_bad_probabilities(probs):
    with pytest.raises(ValueError):
        assign_treatment(10, probs, seed=0)


# -- panel generation -------------------------------------------------------

def test_panel_shape_and_determinism():
    config = ExperimentConfig(n_markets=90, horizon=100, seed=11)
    arms = [Treatment.YES, Treatment.NO, Treatment.CONTROL] * 30
    panel = generate_panel(config, assignment=arms)
    assert len(panel) == 90 * 101
    by_market = {}
    for row in panel:
        by_market.setdefault(row.market_id, set()).add(row.treatment)
    assert all(len(v) == 1 for v in by_market.values())
    assert Counter(next(iter(v)) for v in by_market.values()) == {a: 30 for a in Treatment}
    assert [r.period for r in panel[:101]] == list(range(101))
    assert generate_panel(config, assignment=arms) == panel


def test_panel_shock_sizes():
    panel = generate_panel(FAST)
    for row in panel:
        if row.period == 0:
            assert row.price - row.baseline_price == pytest.approx(0.05 * row.treatment.direction, abs=1e-12)


def test_shock_period_gap_is_the_full_shock():
    config = ExperimentConfig(n_markets=817, horizon=0, warmup=50, seed=12)
    report = estimate_treatment_effect(generate_panel(config), 0)
    assert report["yes"] == pytest.approx(0.10, abs=1e-9)
    assert report["control"] == pytest.approx(0.05, abs=1e-9)


def test_placebo_shockless_markets_show_no_effect():
    worst = 0.0
    for seed in range(20):
        config = ExperimentConfig(n_markets=90, horizon=20, warmup=50, shock=0.0, seed=seed)
        report = estimate_treatment_effect(generate_panel(config), 20)
        worst = max(worst, abs(report["yes"] / report.se("yes")), abs(report["control"] / report.se("control")))
    assert worst < 3.0


# -- estimation -------------------------------------------------------------

def test_exact_construction_recovered():
    panel = constructed_panel(90, np.random.default_rng(0))
    report = estimate_treatment_effect(panel, 0)
    assert report["yes"] == pytest.approx(0.10, abs=1e-12)
    assert report["control"] == pytest.approx(0.05, abs=1e-12)
    assert report["baseline_price"] == pytest.approx(1.0, abs=1e-12)
    assert np.all(report.standard_errors < 1e-12)
    assert symmetry_test(report) == (0.0, 1.0)


def test_symmetry_test_has_power():
    panel = constructed_panel(5000, np.random.default_rng(1), effects=(0.05, -0.05, -0.05), noise=0.05)
    report = estimate_treatment_effect(panel, 0)
    assert report["yes"] == pytest.approx(0.10, abs=0.01)
    assert symmetry_test(report)[1] < 0.01


def test_two_arm_design():
    rng = np.random.default_rng(2)
    panel = [r for r in constructed_panel(90, rng) if r.treatment is not Treatment.CONTROL]
    report = estimate_treatment_effect(panel, 0)
    assert report.names == ("const", "yes", "baseline_price")
    assert report["yes"] == pytest.approx(0.10, abs=1e-12)
    with pytest.raises(ValueError):
        estimate_treatment_effect(constructed_panel(90, rng), 0, two_arm=True)


def test_missing_horizon_is_reported(caplog):
    panel = constructed_panel(30, np.random.default_rng(3))
    panel += [PanelRow(999, 5, 0.5, Treatment.YES, 0.5)]
    report = estimate_treatment_effect(panel, 0)
    assert report.info["excluded_markets"] == [999]
    assert "excluded" in caplog.text
    with pytest.raises(ValueError):
        estimate_treatment_effect(panel, 7)


# -- heterogeneity ----------------------------------------------------------

def test_median_split_examples():
    point, x = median_split([0, 0, 0, 2, 5])
    assert point == 2 and list(x) == [0, 0, 0, 1, 1]
    point, x = median_split([1, 2, 3, 4])
    assert point == 2.5 and list(x) == [0, 0, 1, 1]
    point, x = median_split([11, 11, 11, 61])
    assert point == 61 and list(x) == [0, 0, 0, 1]
    with pytest.raises(ValueError):
        median_split([3, 3, 3])


def counting_oracle(v):
    n = len(v)
    zeros = sum(1 for a in v if a == 0)
    if 2 * zeros > n:
        point = min(a for a in v if a != 0)
    else:
        s = sorted(v)
        point = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    x = [a >= point for a in v]
    if all(x) and len(set(v)) == 2:
        point = max(v)
        x = [a >= point for a in v]
    return point, x


@given(st.lists(st.integers(0, 6), min_size=2, max_size=40).filter(lambda v: len(set(v)) > 1))
def test_median_split_matches_counting_oracle(v):
    point, x = median_split(v)
    expected_point, expected_x = counting_oracle(v)
    assert point == expected_point
    assert list(x.astype(bool)) == expected_x


def test_heterogeneity_placebo_moderator():
    estimates = []
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        panel = constructed_panel(600, rng, noise=0.03, moderator=rng.uniform(0, 1, 600))
        report = heterogeneity_split(panel, "v", 0)
        estimates.append(report["yes_x"])
        assert abs(report["yes_x"]) < 4 * report.se("yes_x")
    se = np.std(estimates, ddof=1) / np.sqrt(len(estimates))
    assert abs(np.mean(estimates)) < 3 * se


def test_larger_markets_shrink_the_gap():
    config = ExperimentConfig(n_markets=2000, horizon=100, m_values=(10, 60), learning_rates=(0.0,),
                              agreements=(1.0,), liquidity=(1000.0,), seed=13)
    report = heterogeneity_split(generate_panel(config), "num_traders", 100)
    assert report.info["split_point"] == 61.0
    assert report["yes_x"] + 5 * report.se("yes_x") < 0.0


def test_heterogeneity_rejects_unknown_moderator():
    with pytest.raises(KeyError):
        heterogeneity_split(constructed_panel(30, np.random.default_rng(4)), "nope", 0)


# -- spillovers -------------------------------------------------------------

def test_spillover_examples():
    rng = np.random.default_rng(5)
    panel = constructed_panel(6, rng)     # arms cycle YES, NO, CONTROL
    assert inject_spillovers(panel, {(3, 0): 0.0}, {0}, {3}) == panel
    shifted = inject_spillovers(panel, {(4, 0): 0.02}, {0}, {4})
    assert shifted[4].price == pytest.approx(panel[4].price + 0.02, abs=1e-15)
    assert [r.price for i, r in enumerate(shifted) if i != 4] == [r.price for i, r in enumerate(panel) if i != 4]
    assert inject_spillovers(panel, {(4, 1): 0.02}, {1}, {4})[4].price == pytest.approx(panel[4].price - 0.02)
    assert inject_spillovers(panel, {(4, 2): 0.02}, {2}, {4}) == panel
    with pytest.raises(ValueError):
        inject_spillovers(panel, {}, {0, 1}, {1, 3})
    with pytest.raises(ValueError):
        inject_spillovers(panel, {(0, 4): 0.02}, {1}, {4})


def spillover_shift(seed, dense, balanced=False, n=120):
    """Change in the YES-NO estimate caused by injecting positive spillovers into one panel."""
    rng = np.random.default_rng(seed)
    ids = rng.permutation(n)
    sources, targets = ids[:40].tolist(), ids[40:].tolist()
    if balanced:
        # equal YES/NO counts inside the source set and inside the target set
        arms = [None] * n
        for group in (sources, targets):
            half = len(group) // 2
            for k, i in enumerate(rng.permutation(group)):
                arms[i] = Treatment.YES if k < half else Treatment.NO
    else:
        arms = assign_treatment(n, (0.5, 0.5, 0.0), seed)
    base = rng.uniform(0.3, 0.7, n)
    panel = [PanelRow(i, 0, float(base[i] + 0.05 * a.direction + rng.normal(0, 0.02)), a, float(base[i]))
             for i, a in enumerate(arms)]
    if dense:
        weights = {(i, j): float(rng.uniform(0, 0.002)) for i in targets for j in sources}
    else:
        # each target is related to one source market
        weights = {(i, int(rng.choice(sources))): float(rng.uniform(0, 0.02)) for i in targets}
    clean = estimate_treatment_effect(panel, 0)["yes"]
    spilled = estimate_treatment_effect(inject_spillovers(panel, weights, set(sources), set(targets)), 0)["yes"]
    return spilled - clean


def z_score(diffs):
    diffs = np.asarray(diffs)
    return diffs.mean() / (diffs.std(ddof=1) / np.sqrt(len(diffs)))


def test_spillovers_cancel_across_seeds():
    assert abs(z_score([spillover_shift(seed, dense=False) for seed in range(200)])) < 3.0


def test_balanced_assignment_cancels_dense_spillovers():
    assert abs(z_score([spillover_shift(seed, dense=True, balanced=True) for seed in range(200)])) < 3.0


def test_dense_spillovers_leave_a_small_ratio_bias():
    # Independent draws make the arm sizes depend on the sources' arms, so the
    # difference-in-means picks up an O(1/n) share of the total spillover.
    diffs = np.array([spillover_shift(seed, dense=True) for seed in range(200)])
    assert z_score(diffs) < -3.0
    mean_total_spillover = 40 * 0.001
    assert abs(diffs.mean()) < 0.03 * mean_total_spillover


# -- CSV --------------------------------------------------------------------

def test_panel_csv_round_trip(tmp_path):
    panel = generate_panel(FAST)
    write_panel(panel, tmp_path / "panel.csv")
    assert read_panel(tmp_path / "panel.csv") == panel


@pytest.mark.parametrize("text, where", [
    ("market_id,period,price\n", ":1:"),
    ("market_id,period,price,treatment,baseline_price\n0,0,0.5,MAYBE,0.5\n", ":2:"),
    ("market_id,period,price,treatment,baseline_price\n0,0,abc,YES,0.5\n", ":2:"),
    ("market_id,period,price,treatment,baseline_price\n0,0,0.5,YES\n", ":2:"),
    ("market_id,period,price,treatment,baseline_price\n0,0,0.5,YES,0.5\n0,1,0.5,NO,0.5\n", ":3:"),
])
def test_panel_schema_errors(tmp_path, text, where):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(PanelSchemaError, match=where):
        read_panel(path)


def test_panel_row_replace_keeps_types():
    row = PanelRow(0, 0, 0.5, Treatment.NO, 0.5)
    assert replace(row, price=0.4).treatment is Treatment.NO
