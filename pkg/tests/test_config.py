from __future__ import annotations

import pathlib

import pytest
from pydantic import ValidationError

import lagdex
from lagdex.config import (
    Config,
    RemoteSettings,
    SearchSettings,
    SeriesSource,
    SignalSettings,
)
from lagdex.series import MonthInterval

MINIMAL = """
scenario: tiny
target:
  name: COP
  path: data/COP.csv
  family: price
candidates:
  PPI:
    path: data/PPI.csv
    family: PPI
  COAL:
    series_id: WPU051
    family: PPI
"""


def test_demo_config():
    config = Config.from_yaml(lagdex.demo_config())
    assert config.scenario == "cop-2012"
    assert config.target.name == "COP"
    assert len(config.candidates) == 14
    assert config.candidates["COAL"].series_id == "WPU051"
    assert config.candidates["COAL"].family == "PPI"
    assert config.candidates["CC"].family == "CPI"
    assert config.search.window == MonthInterval.parse("2003-01:2012-03")
    assert list(config.search.lags) == list(range(14))
    assert config.outputs.out_dir == pathlib.Path("cop-2012-output")
    assert config.resolve_path("data/COP.csv").parent.parent.name == "configs"
    assert [p.pair for p in config.named_pairs] == [
        ("C", "CC"),
        ("CC", "E"),
        ("PPI", "OIL"),
    ]


def test_candidates_as_list():
    config = Config.model_validate(
        {
            "target": {"name": "COP", "path": "COP.csv", "family": "price"},
            "candidates": [
                {"name": "PPI", "path": "ppi.csv"},
                {"name": "C", "series_id": "CUUR0000SA0"},
            ],
        }
    )
    assert list(config.candidates) == ["PPI", "C"]
    with pytest.raises(ValidationError, match="duplicate name"):
        Config.model_validate(
            {
                "target": {"name": "COP", "path": "COP.csv"},
                "candidates": [
                    {"name": "PPI", "path": "ppi.csv"},
                    {"name": "PPI", "path": "other.csv"},
                ],
            }
        )


def test_target_cannot_be_a_candidate():
    with pytest.raises(ValidationError, match="also listed as a candidate"):
        Config.model_validate(
            {
                "target": {"name": "PPI", "path": "p.csv"},
                "candidates": {"PPI": {"path": "ppi.csv"}},
            }
        )


def test_candidate_must_be_an_index():
    with pytest.raises(ValidationError):
        Config.model_validate(
            {
                "target": {"name": "COP", "path": "COP.csv"},
                "candidates": {"XOM": {"path": "xom.csv", "family": "price"}},
            }
        )


def test_series_source_needs_a_location():
    with pytest.raises(ValidationError):
        SeriesSource(name="C")
    assert SeriesSource(name="C", series_id="CUUR0000SA0").path is None


def test_search_settings():
    assert SearchSettings(window="2003-01:2012-03").window.start.year == 2003
    with pytest.raises(ValidationError):
        SearchSettings(window="2012-03:2003-01")
    with pytest.raises(ValidationError):
        SearchSettings(window="2003-01:2003-01")
    with pytest.raises(ValidationError):
        SearchSettings(lag_min=-14)
    with pytest.raises(ValidationError):
        SearchSettings(lag_min=5, lag_max=2)
    assert list(SearchSettings(lag_min=-13, lag_max=13).lags) == list(range(-13, 14))
    assert SearchSettings(n_workers=-1).workers() >= 1
    assert SearchSettings(n_workers=3).workers() == 3


def test_signal_settings():
    with pytest.raises(ValidationError):
        SignalSettings(enter=1.0, exit=1.0)
    with pytest.raises(ValidationError):
        SignalSettings(enter=2.0, exit=-0.5)
    assert SignalSettings(enter=3.0, exit=0.0).exit == 0.0


def test_tags_and_yaml_round_trip(tmp_path):
    config = Config.from_yaml(
        MINIMAL + "tags:\n  run: a1\noutputs:\n  out_dir: '{scenario}-{run}'\n"
    )
    assert config.outputs.out_dir == pathlib.Path("tiny-a1")
    path = tmp_path / "lagdex.yaml"
    config.to_yaml(path)
    reloaded = Config.from_yaml(path)
    assert reloaded.model_dump() == config.model_dump()
    assert reloaded.resolve_path("data/PPI.csv") == tmp_path / "data" / "PPI.csv"


def test_include(tmp_path):
    (tmp_path / "base.yaml").write_text(MINIMAL)
    (tmp_path / "run.yaml").write_text(
        "include: base.yaml\nsearch:\n  window: 2005-01:2009-12\n  lag_max: 6\n"
    )
    config = Config.from_yaml(tmp_path / "run.yaml")
    assert config.scenario == "tiny"
    assert config.search.lag_max == 6
    assert str(config.search.window) == "2005-01:2009-12"


def test_later_files_override(tmp_path):
    (tmp_path / "a.yaml").write_text(MINIMAL)
    (tmp_path / "b.yaml").write_text("signal:\n  enter: 3.0\n")
    config = Config.from_yaml([tmp_path / "a.yaml", tmp_path / "b.yaml"])
    assert config.signal.enter == 3.0
    assert config.signal.exit == 1.0


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError):
        Config.from_yaml(MINIMAL + "serach:\n  lag_max: 3\n")


def test_api_key_from_environment(monkeypatch):
    monkeypatch.delenv("LAGDEX_API_KEY", raising=False)
    assert RemoteSettings().resolved_api_key() is None
    monkeypatch.setenv("LAGDEX_API_KEY", "from-env")
    assert RemoteSettings().resolved_api_key() == "from-env"
    assert RemoteSettings(api_key="explicit").resolved_api_key() == "explicit"
