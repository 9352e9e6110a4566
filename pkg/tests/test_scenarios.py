import json
import math

import numpy as np
import pytest

from kerrcomb.errors import LeakAbortError, ScenarioValidationError
from kerrcomb.scenarios import (
    PRESETS,
    TimeSeriesRecord,
    load_scenario,
    read_state_csv,
    read_timeseries,
    run_scenario,
    scenario_from_dict,
    write_state_csv,
    write_timeseries,
)
from kerrcomb.fock import DensityMatrix


def small_scenario(**overrides):
    doc = {
        "name": "unit",
        "model": "exact_mzi",
        "params": {"omega_a": 1.0, "beta": 0.01, "chi": 0.02, "tau_pi": 0.5},
        "space": {"n_max": 12, "leak_tol": 1e-8},
        "initial": {"factory": "coherent", "args": {"alpha": 1.0}},
        "n_steps": 20,
        "record_every": 5,
        "coherence_ks": [1],
        "trace_distance_to_initial": True,
    }
    doc.update(overrides)
    return doc


def test_fig3b_preset_parameters():
    s = load_scenario("fig3b_evencat")
    cav = s.params.cavity
    assert cav.omega_a * cav.beta * s.params.tau == pytest.approx(math.pi / 2, rel=1e-12)
    assert s.params.chi == 0.01
    assert s.params.tau == pytest.approx(200.0 * math.pi)
    assert cav.beta == pytest.approx(2.5e-3)
    assert s.initial["factory"] == "coherent"
    assert s.initial["args"]["alpha"] == pytest.approx(math.sqrt(10.0))


def test_fig3d_preset_parameters():
    s = load_scenario("fig3d_fivecat")
    cav = s.params.cavity
    assert cav.omega_a * cav.beta * s.params.tau == pytest.approx(math.pi / 5, rel=1e-12)
    assert s.params.chi == 0.003
    assert s.params.tau == pytest.approx(201.4 * math.pi)
    assert cav.beta == pytest.approx(9.93e-4, rel=1e-3)
    assert s.initial["args"]["alpha"] == pytest.approx(math.sqrt(15.0))
    assert s.rotation_optimize


def test_missing_field_names_the_field():
    doc = small_scenario()
    del doc["params"]["chi"]
    with pytest.raises(ScenarioValidationError, match="chi"):
        scenario_from_dict(doc)


def test_unknown_factory_rejected():
    doc = small_scenario(initial={"factory": "bogus", "args": {}})
    with pytest.raises(ScenarioValidationError, match="bogus"):
        scenario_from_dict(doc)


def test_unknown_model_rejected():
    with pytest.raises(ScenarioValidationError, match="model"):
        scenario_from_dict(small_scenario(model="exact"))


def test_eq2_dt_bound_enforced():
    doc = small_scenario(model="eq2_master", dt_over_tau=0.2)
    with pytest.raises(ScenarioValidationError, match="dt_over_tau"):
        scenario_from_dict(doc)


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "name": "x",\n broken\n}')
    with pytest.raises(ScenarioValidationError, match="line 3"):
        load_scenario(path)


def test_load_scenario_from_file_round_trip(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(small_scenario()))
    s = load_scenario(path)
    assert s.name == "unit"
    assert s.n_steps == 20


def test_run_and_csv_round_trip(tmp_path):
    s = scenario_from_dict(small_scenario())
    record = run_scenario(s)
    csv_path = tmp_path / "unit.csv"
    write_timeseries(record, csv_path)

    back = read_timeseries(csv_path)
    assert back.header == record.header
    assert len(back.rows) == len(record.rows)
    for row_a, row_b in zip(record.rows, back.rows):
        for a, b in zip(row_a, row_b):
            if a is None:
                assert b is None
            else:
                assert b == pytest.approx(a, rel=1e-9, abs=1e-300)


def test_metadata_echo_matches_scenario(tmp_path):
    s = scenario_from_dict(small_scenario())
    record = run_scenario(s)
    write_timeseries(record, tmp_path / "unit.csv")
    meta = json.loads((tmp_path / "unit.json").read_text())
    assert meta["scenario"] == s.as_dict()
    assert "runtime_seconds" in meta and meta["runtime_seconds"] >= 0.0
    assert meta["version"]


def test_rerun_is_byte_identical(tmp_path):
    s = scenario_from_dict(small_scenario())
    write_timeseries(run_scenario(s), tmp_path / "a.csv")
    write_timeseries(run_scenario(s), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_empty_record_writes_header_only(tmp_path):
    rec = TimeSeriesRecord(header=["t", "p_0"], rows=[])
    path = tmp_path / "empty.csv"
    write_timeseries(rec, path)
    assert path.read_text() == "t,p_0\n"


def test_fidelity_cells_blank_off_period():
    # crosscheck params: the Kerr period spans 1000 passes, so only t = 0
    # lands on it within the first 20 records
    doc = small_scenario(
        params={"omega_a": 1.0, "beta": 0.01, "chi": 0.005, "tau_pi": 0.1},
        targets=[{"factory": "coherent", "args": {"alpha": 1.0}, "label": "self"}],
    )
    record = run_scenario(scenario_from_dict(doc))
    fid_col = record.header.index("fid_self")
    assert record.rows[0][fid_col] is not None
    assert all(row[fid_col] is None for row in record.rows[1:])


def test_state_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    m = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    rho = DensityMatrix((m @ m.conj().T) / np.trace(m @ m.conj().T))
    path = tmp_path / "state.csv"
    write_state_csv(rho, path)
    back = read_state_csv(path)
    np.testing.assert_allclose(back.entries, rho.entries, atol=1e-9)
    assert path.read_text().splitlines()[0] == "7,7"


def test_leak_abort():
    doc = small_scenario(initial={"factory": "fock", "args": {"n": 12}})
    with pytest.raises(LeakAbortError):
        with pytest.warns(RuntimeWarning):
            run_scenario(scenario_from_dict(doc))


def test_every_preset_validates():
    for name in PRESETS:
        s = load_scenario(name)
        assert s.name == name
