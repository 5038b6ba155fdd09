import csv
import json
from pathlib import Path

import numpy as np
import pytest

import nhcurrent

ROOT = Path(__file__).resolve().parents[2]
CANONICAL = ROOT / "configs" / "canonical_2site.json"


def test_version_matches_package():
    assert nhcurrent.__version__ == nhcurrent.version() == "0.1.0"


def test_canonical_first_record():
    cfg = nhcurrent.parse_config(str(CANONICAL))
    assert cfg.sites == 2
    assert cfg.dt == 1e-3
    out = nhcurrent.simulate(cfg)
    assert out["rho"].shape == (101, 2)
    np.testing.assert_allclose(out["rho"][0], [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(out["s"][0], [-0.5, 0.5], atol=1e-15)
    # Open 2-site chain: bond 0 carries everything, the missing bond is zero.
    np.testing.assert_allclose(out["j_tilde"][0], [0.5, 0.0], atol=1e-15)
    np.testing.assert_allclose(out["j_tilde"], out["j"] + out["delta_j"], atol=1e-15)
    assert not out["neutralizing_background"]


def test_source_sums_to_zero_and_density_normalized():
    out = nhcurrent.simulate(nhcurrent.parse_config(str(ROOT / "configs" / "chain64_lossy.json")))
    assert np.max(np.abs(out["s"].sum(axis=1))) < 1e-12
    assert np.max(np.abs(out["rho"].sum(axis=1) - 1.0)) < 1e-9


def test_charge_invariance():
    cfg = nhcurrent.parse_config(str(ROOT / "configs" / "hermitian_ring.json"))
    a = nhcurrent.simulate(cfg)
    cfg.charge = 2.0
    b = nhcurrent.simulate(cfg)
    np.testing.assert_array_equal(a["j_tilde"], b["j_tilde"])
    np.testing.assert_allclose(b["phi"], 2.0 * a["phi"], atol=1e-10)


def test_run_writes_documented_files(tmp_path):
    cfg = nhcurrent.parse_config(str(CANONICAL))
    nhcurrent.run(cfg, str(tmp_path))
    for name in ("run_meta.json", "observables.csv", "currents.csv", "fields.ndjson", "oracle_report.json"):
        assert (tmp_path / name).stat().st_size > 0

    with open(tmp_path / "observables.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["time", "site", "rho", "s", "phi"]
    assert float(rows[0]["s"]) == pytest.approx(-0.5, abs=1e-15)

    with open(tmp_path / "currents.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["time", "bond_site", "axis", "j", "delta_j", "j_tilde"]

    with open(tmp_path / "fields.ndjson") as fh:
        first = json.loads(fh.readline())
    assert set(first) == {"time", "phi", "a", "e", "b"}
    assert first["b"] is None

    meta = json.loads((tmp_path / "run_meta.json").read_text())
    assert meta["version"] == nhcurrent.version()
    assert meta["neutralizing_background"] is False


def test_run_is_deterministic(tmp_path):
    cfg = nhcurrent.parse_config(str(CANONICAL))
    nhcurrent.run(cfg, str(tmp_path / "a"))
    nhcurrent.run(cfg, str(tmp_path / "b"))
    for name in ("observables.csv", "currents.csv", "fields.ndjson"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_error_names_key():
    text = '{"model": {"lattice": {"extent": [3]}, "gamma": {"kind": "onsite", "values": [1, 2]}}}'
    with pytest.raises(nhcurrent.ConfigError) as info:
        nhcurrent.parse_config_text(text)
    assert info.value.key == "model.gamma.values"
    assert isinstance(info.value, ValueError)


def test_oracle_report():
    report = nhcurrent.oracle(nhcurrent.parse_config(str(CANONICAL)))
    assert report["exact_vs_evolved"] < 1e-9
    study = report["postselection"]
    assert study["monotone"]
    assert len(study["rows"]) == 5
