from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from lagdex.exceptions import InsufficientData, RankDeficient
from lagdex.regress import (
    LagModel,
    SimpleDiffModel,
    fit_lag_model,
    fit_simple_diff,
    fitted,
    lag_design,
    least_squares,
    load_model,
    predict,
    save_model,
    trend_column,
)
from lagdex.series import MonthInterval, MonthlySeries, diff, lagged_values
from lagdex.synthetic import random_walks, synthetic_registry


def _exact_least_squares(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve the normal equations in rational arithmetic."""
    Xf = [[Fraction(float(v)) for v in row] for row in X]
    yf = [Fraction(float(v)) for v in y]
    p = X.shape[1]
    A = [
        [sum(r[i] * r[j] for r in Xf) for j in range(p)]
        + [sum(r[i] * t for r, t in zip(Xf, yf))]
        for i in range(p)
    ]
    for col in range(p):
        pivot = next(r for r in range(col, p) if A[r][col] != 0)
        A[col], A[pivot] = A[pivot], A[col]
        for r in range(p):
            if r != col and A[r][col] != 0:
                factor = A[r][col] / A[col][col]
                A[r] = [a - factor * b for a, b in zip(A[r], A[col])]
    return np.array([float(A[i][p] / A[i][i]) for i in range(p)])


def test_trend_column():
    t = trend_column(MonthInterval.parse("1999-12:2000-02"))
    np.testing.assert_allclose(t, [-1 / 12, 0.0, 1 / 12], atol=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_matches_extended_precision_oracle(seed):
    rng = np.random.default_rng(seed)
    window = MonthInterval.parse("2005-01:2009-12")
    walks = random_walks(["A", "B", "Y"], "2004-01:2009-12", seed=seed)
    lag_a, lag_b = (int(x) for x in rng.integers(0, 8, size=2))
    model = fit_lag_model(walks["Y"], (walks["A"], lag_a), (walks["B"], lag_b), window)

    X = lag_design(
        lagged_values(walks["A"], lag_a, window),
        lagged_values(walks["B"], lag_b, window),
        trend_column(window),
    )
    y = walks["Y"].values_over(window)
    exact = _exact_least_squares(X, y)
    got = model.coefficient_vector()
    assert np.linalg.norm(got - exact) <= 1e-8 * np.linalg.norm(exact)

    residuals = y - X @ got
    for j in range(4):
        scale = np.linalg.norm(X[:, j]) * np.linalg.norm(y)
        assert abs(X[:, j] @ residuals) <= 1e-8 * scale


def test_exact_recovery():
    reg = synthetic_registry(seed=5, window="2002-04:2012-03", names=["PPI", "COAL"])
    model = fit_lag_model(reg.target, (reg["PPI"], 1), (reg["COAL"], 1))
    assert model.terms[0].coefficient == pytest.approx(1.2687, abs=1e-9)
    assert model.terms[1].coefficient == pytest.approx(-0.615, abs=1e-9)
    assert model.trend_coeff == pytest.approx(4.023, abs=1e-9)
    assert model.intercept == pytest.approx(-105.35, abs=1e-9)
    assert model.rms <= 1e-9
    assert model.n_obs == 120
    assert str(model.window) == "2002-04:2012-03"
    assert model.lags == (1, 1)
    assert model.names == ("PPI", "COAL")


def test_equation_format():
    reg = synthetic_registry(seed=5, window="2002-04:2012-03", names=["PPI", "COAL"])
    model = fit_lag_model(reg.target, (reg["COAL"], 1), (reg["PPI"], 1))
    assert model.equation() == (
        "COP(t) = -0.615COAL(t-1) + 1.269PPI(t-1) + 4.02(t-2000) - 105.35; "
        "σ = $0.00 (rms), $0.00 (dof)"
    )
    row = model.table_row()
    assert list(row)[:8] == ["CPI1", "Lag1", "b1", "CPI2", "Lag2", "b2", "c", "d"]
    assert row["CPI1"] == "COAL"


def test_scale_and_shift():
    walks = random_walks(["A", "B", "Y"], "2000-01:2006-12", seed=42)
    window = MonthInterval.parse("2001-01:2006-12")
    terms = ((walks["A"], 2), (walks["B"], 0))
    base = fit_lag_model(walks["Y"], *terms, window)
    coef = base.coefficient_vector()
    atol = 1e-9 * np.linalg.norm(coef)

    tripled = fit_lag_model(walks["Y"].scale(3.0), *terms, window)
    np.testing.assert_allclose(
        tripled.coefficient_vector(), 3.0 * coef, rtol=1e-9, atol=3 * atol
    )
    assert tripled.rms == pytest.approx(3.0 * base.rms, rel=1e-9)

    shifted = fit_lag_model(walks["Y"].add(7.5), *terms, window)
    np.testing.assert_allclose(
        shifted.coefficient_vector()[:3], coef[:3], rtol=1e-9, atol=atol
    )
    assert shifted.intercept == pytest.approx(base.intercept + 7.5, abs=atol)
    assert shifted.rms == pytest.approx(base.rms, rel=1e-9)


def test_sigma_variants():
    walks = random_walks(["A", "B", "Y"], "2000-01:2003-12", seed=9)
    model = fit_lag_model(walks["Y"], (walks["A"], 0), (walks["B"], 0))
    residuals = model.residuals.values
    sse = float(np.nansum(residuals**2))
    assert model.rms == pytest.approx(np.sqrt(sse / 48))
    assert model.stderr_dof == pytest.approx(np.sqrt(sse / 44))
    assert abs(np.nanmean(residuals)) < 1e-9 * np.nanmax(np.abs(residuals))


def test_rank_deficient():
    walks = random_walks(["A", "Y"], "2000-01:2003-12", seed=1)
    with pytest.raises(RankDeficient) as err:
        fit_lag_model(walks["Y"], (walks["A"], 1), (walks["A"], 1))
    assert "A(t-1)" in err.value.columns

    X = np.column_stack([np.arange(20.0), 2 * np.arange(20.0), np.ones(20)])
    with pytest.raises(RankDeficient):
        least_squares(X, np.ones(20), ["x", "2x", "1"])


def test_insufficient_data():
    walks = random_walks(["A", "B", "Y"], "2000-01:2000-12", seed=1)
    with pytest.raises(InsufficientData) as err:
        fit_lag_model(walks["Y"], (walks["A"], 0), (walks["B"], 0))
    assert err.value.required == 16
    assert err.value.available == 12


def test_missing_months_are_skipped():
    walks = random_walks(["A", "B"], "2000-01:2004-12", seed=4)
    t = trend_column(MonthInterval.parse("2000-01:2004-12"))
    y = 2 * walks["A"].values + 0.5 * walks["B"].values + t
    y[[5, 17, 30]] = np.nan
    target = MonthlySeries("Y", "2000-01", y)
    model = fit_lag_model(target, (walks["A"], 0), (walks["B"], 0))
    assert model.n_obs == 57
    assert model.terms[0].coefficient == pytest.approx(2.0, abs=1e-9)


def test_predict_propagates_missing_lags():
    reg = synthetic_registry(seed=5, window="2002-04:2012-03", names=["PPI", "COAL"])
    model = fit_lag_model(reg.target, (reg["PPI"], 1), (reg["COAL"], 1))
    np.testing.assert_allclose(
        fitted(model, reg).values, reg.target.values, rtol=0, atol=1e-8
    )
    # PPI starts in 2001-03, so a one month lag is only available from 2001-04
    early = predict(model, reg, "2001-01:2001-06")
    assert np.isnan(early.values[:3]).all()
    assert np.isfinite(early.values[3:]).all()


def test_simple_diff_model():
    walks = random_walks(["CC", "C"], "1997-01:2012-06", seed=21)
    dcpi = diff(walks["CC"], walks["C"])
    window = MonthInterval.parse("1998-01:2012-03")
    # price leads the difference by one month
    y = 72.3 - 5.35 * lagged_values(dcpi, -1, window)
    target = MonthlySeries("COP", window.start, y)
    model = fit_simple_diff(target, dcpi, -1, window)
    assert isinstance(model, SimpleDiffModel)
    assert model.slope == pytest.approx(-5.35, abs=1e-9)
    assert model.intercept == pytest.approx(72.3, abs=1e-9)
    assert model.components == ("CC", "C")
    assert model.equation().startswith("COP(t) = -5.350CC-C(t+1) + 72.30")


def test_save_and_load(tmp_path):
    reg = synthetic_registry(seed=5, window="2002-04:2012-03", names=["PPI", "COAL"])
    model = fit_lag_model(reg.target, (reg["PPI"], 1), (reg["COAL"], 1))
    path = save_model(model, tmp_path / "model.json")
    loaded = load_model(path)
    assert isinstance(loaded, LagModel)
    assert loaded.coefficient_vector().tolist() == model.coefficient_vector().tolist()
    assert loaded.window == model.window
    assert loaded.residuals is None
    np.testing.assert_array_equal(
        predict(loaded, reg).values, predict(model, reg).values
    )
