import pandas as pd
import pytest
import yaml

import main
from constants import CON_RUN, EXIT_CODES, TABLE_SCHEMAS
from errors import ConfigError, DataError
from handlers.record_handler import RecordHandler
from machine.cloner import clone_fidelities
from machine.detection import CoincidenceCounts, EfficiencyPair, MeasurementRecord, run_experiment
from run_config import RunConfig, resolve


def test_resolve_defaults():
    config = resolve()
    assert config == RunConfig()
    assert config.t_values == CON_RUN["t_values"]
    assert config.eta_true == EfficiencyPair(1.046, 0.840)


def test_resolve_file_then_flags(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("eta_a: 1.1\nseed: 5\nt_values: [0.0, 0.5]\nstrict: true\n")
    config = resolve(path, {"seed": 7, "eta_b": None})
    assert config.eta_a == 1.1
    assert config.eta_b == CON_RUN["eta_b"]
    assert config.seed == 7
    assert config.t_values == (0.0, 0.5)
    assert config.strict is True


def test_resolve_unknown_key_names_field_and_line(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 5\nbogus: 1\n")
    with pytest.raises(ConfigError) as info:
        resolve(path)
    assert info.value.field == "bogus"
    assert info.value.line == 2


def test_resolve_reports_yaml_line(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 5\neta_a: [1.0,\n")
    with pytest.raises(ConfigError) as info:
        resolve(path)
    assert info.value.line is not None


def test_resolve_bad_values():
    with pytest.raises(ConfigError) as info:
        resolve(None, {"t_values": "0.5,1.5"})
    assert info.value.field == "t_values"
    with pytest.raises(ConfigError) as info:
        resolve(None, {"counts_per_setting": "many"})
    assert info.value.field == "counts_per_setting"
    with pytest.raises(ConfigError):
        resolve(None, {"machine": "0.9,0.9"})


def test_record_file_round_trip(tmp_path):
    records = run_experiment(0.4, EfficiencyPair(1.046, 0.84), 1e3, seed=11)
    handler = RecordHandler()
    path = handler.write_records(tmp_path / "r.csv", records)
    loaded = handler.read_records(path)
    assert len(loaded) == len(records)
    for original, copy in zip(records, loaded):
        assert copy.t == pytest.approx(original.t, abs=1e-12)
        assert (copy.state_label, copy.basis_label, copy.role) == (original.state_label, original.basis_label, original.role)
        assert copy.counts.as_tuple() == original.counts.as_tuple()
        assert copy.true_eta == original.true_eta

    again = handler.write_records(tmp_path / "r2.csv", loaded)
    assert again.read_text() == path.read_text()


def test_record_file_errors_name_the_line(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("t,state,basis,role,c_pp,c_pm,c_mp,c_mm,eta_a,eta_b\n0.5,H,HV,psi,1,2,3,4,,\n0.5,Q,HV,perp,1,2,3,4,,\n")
    with pytest.raises(DataError, match="line 3"):
        RecordHandler().read_records(path)


def test_analytic_command(tmp_path):
    out = tmp_path / "analytic.csv"
    assert main.run(["analytic", "--out", str(out)]) == EXIT_CODES["ok"]
    table = pd.read_csv(out)
    settings = table[table["kind"] == "setting"]
    assert len(settings) == 6
    first = settings.iloc[0]
    assert first["t"] == 0.0
    assert first["f_a"] == pytest.approx(5 / 6, abs=1e-11)
    assert first["f_b"] == pytest.approx(5 / 6, abs=1e-11)
    assert table["tradeoff_residual"].abs().max() < 1e-12
    assert len(table[table["kind"] == "curve"]) == CON_RUN["curve_points"]

    sidecar = yaml.safe_load((tmp_path / "analytic.csv.config.yaml").read_text())
    assert sidecar["summary"]["command"] == "analytic"
    assert sidecar["config"]["output_path"] == str(out)


def test_simulate_then_calibrate_noiseless(tmp_path):
    sim = tmp_path / "sim.csv"
    assert main.run(["simulate", "--noiseless", "--out", str(sim)]) == EXIT_CODES["ok"]
    records = tmp_path / "sim.records.csv"
    assert records.exists()
    assert (tmp_path / "sim.summary.csv").exists()

    cal = tmp_path / "cal.csv"
    assert main.run(["calibrate", str(records), "--out", str(cal)]) == EXIT_CODES["ok"]
    table = pd.read_csv(cal)
    assert len(table) == 6
    assert table["eta_a"].to_numpy() == pytest.approx(1.046, abs=1e-6)
    assert table["eta_b"].to_numpy() == pytest.approx(0.840, abs=1e-6)
    assert not table["boundary_hit"].any()
    for row in table.itertuples():
        f_a, f_b = clone_fidelities(row.t)
        assert row.mean_a_after == pytest.approx(f_a, abs=1e-10)
        assert row.mean_b_after == pytest.approx(f_b, abs=1e-10)

    summary = pd.read_csv(tmp_path / "cal.summary.csv")
    calibrated = summary[summary["stage"] == "calibrated"]
    assert calibrated["variance_a"].max() < 1e-12


def _boundary_records(tmp_path):
    records = run_experiment(0.2, EfficiencyPair(5.0, 1.0), 1e5, seed=0, noiseless=True)
    pushed = [
        MeasurementRecord(r.t, r.state_index, r.basis_index, r.role,
                          CoincidenceCounts.from_array(r.counts.as_array() * [1, 1, 1.5, 1.5]))
        for r in records
    ]
    return RecordHandler().write_records(tmp_path / "pushed.csv", pushed)


def test_calibrate_boundary_exit_codes(tmp_path):
    path = _boundary_records(tmp_path)
    out = str(tmp_path / "cal.csv")
    assert main.run(["calibrate", str(path), "--out", out, "--strict"]) == EXIT_CODES["boundary"]
    assert main.run(["calibrate", str(path), "--out", out]) == EXIT_CODES["ok"]
    assert pd.read_csv(out)["boundary_hit"].all()


def test_data_and_config_exit_codes(tmp_path):
    out = str(tmp_path / "cal.csv")
    assert main.run(["calibrate", str(tmp_path / "missing.csv"), "--out", out]) == EXIT_CODES["data"]

    records = run_experiment(0.5, EfficiencyPair.unit(), 1e3, seed=1, noiseless=True)
    partial = RecordHandler().write_records(tmp_path / "partial.csv", records[:5])
    assert main.run(["calibrate", str(partial), "--out", out]) == EXIT_CODES["data"]

    assert main.run(["analytic", "--t", "0.5,1.5", "--out", out]) == EXIT_CODES["config"]
    assert main.run(["calibrate", "--out", out]) == EXIT_CODES["config"]


def test_schema_command(capsys):
    assert main.run(["schema"]) == EXIT_CODES["ok"]
    text = capsys.readouterr().out
    assert "records: t, state, basis, role, c_pp, c_pm, c_mp, c_mm, eta_a, eta_b" in text
    assert "calibration: t, eta_a, eta_b" in text


def test_json_output(tmp_path):
    out = tmp_path / "analytic.json"
    assert main.run(["analytic", "--format", "json", "--t", "0,1", "--out", str(out)]) == EXIT_CODES["ok"]
    table = pd.read_json(out, orient="records")
    assert list(table.columns[:4]) == ["kind", "t", "f_a", "f_b"]
    assert len(table) == 2 + CON_RUN["curve_points"]
    sidecar = yaml.safe_load((tmp_path / "analytic.json.config.yaml").read_text())
    assert sidecar["config"]["output_format"] == "json"
    assert sidecar["config"]["t_values"] == [0.0, 1.0]


def test_simulate_is_deterministic_per_seed(tmp_path):
    def records_text(name, seed):
        out = tmp_path / f"{name}.csv"
        assert main.run(["simulate", "--counts", "1000", "--seed", str(seed), "--out", str(out)]) == 0
        return (tmp_path / f"{name}.records.csv").read_text()

    assert records_text("one", 42) == records_text("two", 42)
    assert records_text("one", 42) != records_text("three", 43)


def test_robustness_command(tmp_path):
    out = tmp_path / "rob.csv"
    code = main.run(["robustness", "--machine", "0.8333333333333334,0.8333333333333334,0.6666666666666666",
                     "--out", str(out)])
    assert code == EXIT_CODES["ok"]
    sweep = pd.read_csv(out)
    assert len(sweep) == CON_RUN["eps_points"] ** 2
    assert (sweep["bound_a"] >= sweep["quadratic_a"].abs() - 1e-12).all()
    coefficients = pd.read_csv(tmp_path / "rob.coefficients.csv")
    assert coefficients["bound_factor"].iloc[0] == pytest.approx(0.047799, abs=1e-6)


def test_negative_seed_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError) as info:
        resolve(None, {"seed": -1})
    assert info.value.field == "seed"
    out = str(tmp_path / "sim.csv")
    assert main.run(["simulate", "--seed", "-1", "--out", out]) == EXIT_CODES["config"]


def test_mismatch_grid_must_keep_efficiencies_in_range(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("eps_max: 0.9\n")
    with pytest.raises(ConfigError) as info:
        resolve(path)
    assert info.value.field == "eps_max"
    out = str(tmp_path / "rob.csv")
    assert main.run(["robustness", "--config", str(path), "--out", out]) == EXIT_CODES["config"]

    path.write_text("eps_max: 0.75\neps_points: 3\n")
    assert main.run(["robustness", "--config", str(path), "--out", out]) == EXIT_CODES["ok"]
    assert pd.read_csv(out)["eps_a"].min() == pytest.approx(-0.75)


def test_per_setting_calibration_flags_flat_direction(tmp_path):
    sim = tmp_path / "sim.csv"
    assert main.run(["simulate", "--noiseless", "--out", str(sim)]) == EXIT_CODES["ok"]
    cal = tmp_path / "cal.csv"
    assert main.run(["calibrate", str(tmp_path / "sim.records.csv"), "--mode", "per_t",
                     "--out", str(cal)]) == EXIT_CODES["ok"]
    table = pd.read_csv(cal)
    flags = dict(zip(table["t"], table["identifiable"]))
    assert not flags[1.0]
    assert all(flag for t, flag in flags.items() if t != 1.0)
    sidecar = yaml.safe_load((tmp_path / "cal.csv.config.yaml").read_text())
    assert sidecar["summary"]["unidentified"] == 1


@pytest.mark.parametrize("command", ["analytic", "simulate"])
def test_result_tables_survive_rewrite(tmp_path, command):
    out = tmp_path / f"{command}.csv"
    assert main.run([command, "--counts", "2000", "--out", str(out)]) == EXIT_CODES["ok"]
    schema = "analytic" if command == "analytic" else "report"
    handler = RecordHandler()
    first = handler.read_table(out)
    assert list(first.columns) == list(TABLE_SCHEMAS[schema])

    copy = handler.write_table(tmp_path / "copy.csv", schema, first.itertuples(index=False))
    assert copy.read_text() == out.read_text()
    pd.testing.assert_frame_equal(handler.read_table(copy), first)
