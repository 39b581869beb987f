"""Checks against published figures, run only with real index and price data.

Point LAGDEX_REAL_DATA at a config whose target is the adjusted monthly COP
close and whose candidates include C, CC, E, PPI, OIL and COAL.  Tolerances
are wide because series vintages differ and the published standard errors do
not state their divisor, so either rms or the degrees-of-freedom error may
match.
"""

from __future__ import annotations

import os

import pytest

from lagdex.config import Config
from lagdex.ingest import build_registry
from lagdex.regress import fit_lag_model, fit_simple_diff
from lagdex.series import diff

REAL_DATA = os.environ.get("LAGDEX_REAL_DATA")

pytestmark = pytest.mark.skipif(
    not REAL_DATA, reason="set LAGDEX_REAL_DATA to a config with real series"
)


def _sigma_close(model, published, rel):
    return any(
        abs(s - published) <= rel * published for s in (model.rms, model.stderr_dof)
    )


@pytest.fixture(scope="module")
def registry():
    return build_registry(Config.from_yaml(REAL_DATA), "2003-07:2012-03")


def test_index_difference_model(registry):
    dcpi = diff(registry["CC"], registry["C"])
    model = fit_simple_diff(registry.target, dcpi, -1, "1998-01:2012-03")
    assert model.slope == pytest.approx(-5.35, rel=0.10)
    assert model.intercept == pytest.approx(72.3, rel=0.10)
    assert _sigma_close(model, 7.87, 0.10)


@pytest.mark.parametrize(
    "first, second, sigma",
    [
        (("CC", 12), ("E", 0), 5.98),
        (("PPI", 0), ("OIL", 2), 6.35),
        (("COAL", 0), ("PPI", 0), 3.96),
    ],
)
def test_fixed_pairs(registry, first, second, sigma):
    (n1, l1), (n2, l2) = first, second
    model = fit_lag_model(
        registry.target, (registry[n1], l1), (registry[n2], l2), "2003-07:2012-03"
    )
    assert _sigma_close(model, sigma, 0.15)
