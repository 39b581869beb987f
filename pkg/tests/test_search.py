from __future__ import annotations

import itertools

import numpy as np
import pytest

from lagdex.config.outputs import NamedPair
from lagdex.exceptions import NoFeasibleModel, UnknownSeries
from lagdex.ingest import SeriesRegistry
from lagdex.regress import fit_lag_model, trend_column
from lagdex.search import (
    LedgerRow,
    SearchSpec,
    StabilityLedger,
    compare_named_models,
    default_end_months,
    grid_size,
    mark_stability,
    search,
    stability_scan,
    unordered_pairs,
)
from lagdex.series import MonthInterval, MonthlySeries, MonthStamp
from lagdex.synthetic import (
    CANDIDATE_NAMES,
    random_walks,
    synthetic_registry,
    synthetic_target,
)


@pytest.fixture(scope="module")
def exact_registry():
    return synthetic_registry(
        seed=11,
        window="2006-01:2010-12",
        names=["A", "B", "C", "D"],
        terms=(("B", 2, 0.8), ("C", 0, -0.6)),
        trend=1.5,
        intercept=20.0,
    )


@pytest.fixture(scope="module")
def noisy_registry():
    return synthetic_registry(
        seed=11,
        window="2006-01:2010-12",
        names=["A", "B", "C", "D"],
        terms=(("B", 2, 0.8), ("C", 0, -0.6)),
        trend=1.5,
        intercept=20.0,
        noise=0.1,
    )


def _spec(registry, **kwargs):
    kwargs.setdefault("lag_max", 3)
    return SearchSpec(target=registry.target.id, candidates=registry.names, **kwargs)


def test_grid_size():
    assert grid_size(14, range(14)) == 17836
    assert grid_size(14, range(-13, 14)) == 91 * 27**2
    assert grid_size(2, 1) == 1


def test_pairs_are_unordered_and_sorted():
    assert unordered_pairs(["PPI", "COAL", "C"]) == [
        ("C", "COAL"),
        ("C", "PPI"),
        ("COAL", "PPI"),
    ]


def test_search_spec_validation():
    with pytest.raises(ValueError):
        SearchSpec(target="COP", candidates=["PPI"])
    with pytest.raises(ValueError):
        SearchSpec(target="COP", candidates=["PPI", "PPI", "C"])
    with pytest.raises(ValueError):
        SearchSpec(target="COP", candidates=["PPI", "C"], lag_min=-14)
    with pytest.raises(ValueError):
        SearchSpec(target="COP", candidates=["PPI", "C"], lag_min=3, lag_max=2)
    spec = SearchSpec(target="COP", candidates=["PPI", "C"], lag_min=-2, lag_max=2)
    assert list(spec.lags) == [-2, -1, 0, 1, 2]


@pytest.mark.slow
def test_full_grid_recovers_generating_model(cop_registry):
    spec = SearchSpec(target="COP", candidates=list(CANDIDATE_NAMES))
    result = search(spec, cop_registry)
    best = result.best
    assert best.names == ("COAL", "PPI")
    assert best.lags == (1, 1)
    assert best.terms[0].coefficient == pytest.approx(-0.615, abs=1e-9)
    assert best.terms[1].coefficient == pytest.approx(1.2687, abs=1e-9)
    assert best.trend_coeff == pytest.approx(4.023, abs=1e-9)
    assert best.intercept == pytest.approx(-105.35, abs=1e-9)
    assert best.rms <= 1e-9
    assert result.grid_size == 17836
    assert result.evaluated_count + len(result.skipped) == 17836


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_full_grid_selection_with_noise(seed):
    registry = synthetic_registry(seed=seed, noise=1.0)
    spec = SearchSpec(target="COP", candidates=list(CANDIDATE_NAMES))
    best = search(spec, registry).best
    assert best.names == ("COAL", "PPI")
    assert best.lags == (1, 1)


@pytest.mark.parametrize("trial", range(25))
def test_matches_brute_force(trial):
    rng = np.random.default_rng(1000 + trial)
    n_series = int(rng.integers(2, 5))
    names = [f"S{k}" for k in range(n_series)]
    window = MonthInterval.parse("2003-01:2005-12")
    walks = random_walks([*names, "Y"], "2002-10:2005-12", seed=trial)
    target = walks.pop("Y")
    registry = SeriesRegistry(walks, target)
    spec = SearchSpec(
        target="Y", candidates=names, lag_min=0, lag_max=3, window=window
    )
    result = search(spec, registry)

    fits = {}
    for (a, b), (la, lb) in itertools.product(
        itertools.combinations(sorted(names), 2), itertools.product(range(4), repeat=2)
    ):
        fits[((a, b), (la, lb))] = fit_lag_model(
            target, (walks[a], la), (walks[b], lb), window
        ).rms
    key = min(fits, key=lambda k: (fits[k], k))
    assert (result.best.names, result.best.lags) == key
    assert result.best.rms == pytest.approx(fits[key], rel=1e-12)
    assert result.evaluated_count == len(fits)
    assert result.ranking[0].rms == pytest.approx(min(fits.values()), rel=1e-12)


def test_worker_count_does_not_change_result(noisy_registry):
    spec = _spec(noisy_registry)
    one = search(spec, noisy_registry, workers=1)
    two = search(spec, noisy_registry, workers=2)
    assert one.ranking == two.ranking
    assert one.skipped == two.skipped
    assert (one.best.coefficient_vector() == two.best.coefficient_vector()).all()


def test_ranking(noisy_registry):
    result = search(_spec(noisy_registry), noisy_registry)
    assert result.ranking[0].key == (result.best.names, result.best.lags)
    rms = [r.rms for r in result.ranking]
    assert rms[1:] == sorted(rms[1:])
    assert rms[0] == min(rms)
    assert len(result.ranking) == grid_size(4, 4)
    frame = result.to_frame()
    assert list(frame.columns) == ["CPI1", "Lag1", "CPI2", "Lag2", "rms"]
    assert len(frame) == 96
    assert search(_spec(noisy_registry), noisy_registry).ranking == result.ranking


def test_nested_truth_is_found(exact_registry, noisy_registry):
    for registry in (exact_registry, noisy_registry):
        best = search(_spec(registry), registry).best
        assert best.names == ("B", "C")
        assert best.lags == (2, 0)
    exact = search(_spec(exact_registry), exact_registry).best
    assert exact.rms <= 1e-9
    assert exact.coefficient_vector() == pytest.approx([0.8, -0.6, 1.5, 20.0])


def test_larger_grid_never_worse(noisy_registry):
    previous = np.inf
    for lag_max in range(4):
        best = search(_spec(noisy_registry, lag_max=lag_max), noisy_registry).best
        assert best.rms <= previous
        previous = best.rms


def test_infeasible_fits_are_skipped(exact_registry):
    twin = exact_registry.get("A").renamed("A2")
    registry = exact_registry.with_entries({"A2": twin})
    spec = SearchSpec(
        target="COP", candidates=["A", "A2", "B"], lag_min=0, lag_max=1
    )
    result = search(spec, registry)
    skipped = {(s.pair, s.lags) for s in result.skipped}
    assert skipped == {(("A", "A2"), (0, 0)), (("A", "A2"), (1, 1))}
    assert result.evaluated_count + len(result.skipped) == result.grid_size
    frame = result.skipped_frame()
    assert frame["reason"].str.contains("rank deficient").all()


def test_no_feasible_model(exact_registry):
    spec = _spec(exact_registry, window="2006-01:2006-12")
    with pytest.raises(NoFeasibleModel):
        search(spec, exact_registry)


def test_unknown_candidate(exact_registry):
    spec = SearchSpec(target="COP", candidates=["A", "GOLD"])
    with pytest.raises(UnknownSeries):
        search(spec, exact_registry)


def test_stability_scan(exact_registry):
    spec = _spec(exact_registry)
    months = default_end_months(spec, exact_registry, 4)
    assert months[-1] == MonthStamp(2010, 12)
    ledger = stability_scan(spec, exact_registry, months, depth=4)
    assert [r.end_month for r in ledger.rows] == months[::-1]
    assert ledger.stable
    assert [r.stable for r in ledger.rows] == [True, False, False, False]
    for row in ledger.rows:
        assert row.key == (("B", "C"), (2, 0))
        assert row.best.window.end == row.end_month

    text = ledger.to_text()
    assert "CPI1" in text.splitlines()[0]
    assert "error" not in text
    frame = ledger.to_frame()
    assert frame["Month"].tolist()[0] == "2010-12"
    assert frame["CPI2"].tolist() == ["C"] * 4


def test_stability_after_generating_pair_changes():
    # B,C drive the price throughout; A and D only exist from the switch on
    # and reproduce the price exactly, so A,D wins once it has 16 months
    window = MonthInterval.parse("2006-01:2010-12")
    walks = random_walks(["B", "C", "D"], "2005-10:2010-12", seed=21)
    before = synthetic_target(walks, window, (("B", 2, 0.8), ("C", 0, -0.6)), 1.5, 20.0)
    after = np.array([m >= MonthStamp(2009, 1) for m in window.months()])
    price = before.values + np.where(
        after, np.random.default_rng(5).normal(0.0, 0.05, len(window)), 0.0
    )
    d = walks["D"].values_over(window)
    a = price + 0.5 * d - 0.7 * trend_column(window) - 3.0
    registry = SeriesRegistry(
        {
            "A": MonthlySeries("A", window.start, np.where(after, a, np.nan)),
            "B": walks["B"],
            "C": walks["C"],
            "D": MonthlySeries("D", window.start, np.where(after, d, np.nan)),
        },
        MonthlySeries("COP", window.start, price),
    )
    spec = _spec(registry)
    months = MonthInterval.parse("2009-06:2010-12").months()
    ledger = stability_scan(spec, registry, months, depth=8)

    for row in ledger.rows:
        if row.end_month >= MonthStamp(2010, 4):
            assert row.key == (("A", "D"), (0, 0))
        else:
            assert row.key == (("B", "C"), (2, 0))
    stable = {str(r.end_month) for r in ledger.rows if r.stable}
    assert stable == {"2010-12", "2010-11", "2010-03", "2010-02", "2010-01"}
    assert ledger.stable


def test_stability_scan_records_failures(exact_registry):
    spec = _spec(exact_registry)
    ledger = stability_scan(spec, exact_registry, ["2006-06", "2010-11", "2010-12"], 2)
    early = ledger.rows[-1]
    assert early.end_month == MonthStamp(2006, 6)
    assert early.best is None
    assert early.error
    assert not early.stable
    assert ledger.stable
    assert "-" in ledger.to_text()


def test_stability_scan_parallel(exact_registry):
    spec = _spec(exact_registry)
    months = ["2010-09", "2010-10", "2010-11", "2010-12"]
    one = stability_scan(spec, exact_registry, months, depth=2)
    two = stability_scan(spec, exact_registry, months, depth=2, workers=2)
    assert [r.key for r in one.rows] == [r.key for r in two.rows]
    assert [r.stable for r in one.rows] == [r.stable for r in two.rows]


def test_mark_stability(exact_registry):
    m1 = fit_lag_model(
        exact_registry.target, (exact_registry["B"], 2), (exact_registry["C"], 0)
    )
    m2 = fit_lag_model(
        exact_registry.target, (exact_registry["A"], 0), (exact_registry["D"], 0)
    )
    rows = [
        LedgerRow(end_month="2010-12", best=m2),
        LedgerRow(end_month="2010-11", best=m1),
        LedgerRow(end_month="2010-10", best=m1),
        LedgerRow(end_month="2010-09", best=m1),
        LedgerRow(end_month="2010-08", error="no model"),
    ]
    marked = mark_stability(rows, 3)
    assert [r.stable for r in marked] == [False, True, False, False, False]
    ledger = StabilityLedger(rows=marked, depth=3)
    assert not ledger.stable
    assert mark_stability(rows[1:4], 3)[0].stable

    with pytest.raises(ValueError):
        StabilityLedger(rows=list(reversed(marked)), depth=3)


def test_compare_named_models():
    registry = synthetic_registry(
        seed=3,
        names=["C", "CC", "E", "PPI", "OIL"],
        terms=(("C", 0, 1.1), ("CC", 12, -0.7)),
    )
    comparison = compare_named_models(registry)
    first, second, third = comparison.results
    assert first.pair == ("C", "CC")
    assert first.best.lags == (0, 12)
    assert first.best.rms <= 1e-9
    assert first.reference_fit.rms == pytest.approx(first.best.rms, abs=1e-9)
    assert second.pair == ("CC", "E")
    assert third.pair == ("OIL", "PPI")
    assert second.best.rms > 1e-6
    assert third.best.rms > 1e-6

    frame = comparison.to_frame()
    assert frame["pair"].tolist() == ["C,CC", "CC,E", "OIL,PPI"]
    assert frame["reference_lags"].tolist() == ["0,12", "12,0", "2,0"]
    assert "reference σ = $6.21" in comparison.to_text()


def test_compare_reference_lags_follow_their_index():
    registry = synthetic_registry(
        seed=4,
        names=["PPI", "OIL", "C"],
        terms=(("PPI", 0, 0.9), ("OIL", 2, 0.4)),
    )
    named = NamedPair(pair=("PPI", "OIL"), reference_lags=(0, 2))
    comparison = compare_named_models(registry, pairs=[named], lags=range(0, 4))
    (result,) = comparison.results
    assert result.pair == ("OIL", "PPI")
    assert result.best.lags == (2, 0)
    assert result.reference_lags == result.best.lags
    assert result.reference_fit.rms == pytest.approx(result.best.rms, abs=1e-9)
    row = comparison.to_frame().iloc[0]
    assert (row["CPI1"], row["Lag1"], row["CPI2"], row["Lag2"]) == ("OIL", 2, "PPI", 0)
    assert row["reference_lags"] == "2,0"


def test_compare_named_models_unknown_series(exact_registry):
    with pytest.raises(UnknownSeries):
        compare_named_models(
            exact_registry, pairs=[NamedPair(pair=("A", "GOLD"))], lags=range(0, 2)
        )
