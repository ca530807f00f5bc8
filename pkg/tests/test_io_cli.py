import json

import numpy as np
import pytest

from conftest import FIXTURE
from smvmde.cli import main
from smvmde.core import EntropyParams, MultiChannelSeries, StrataAllocation, multiscale_profile
from smvmde.errors import InputOutputError, ParseError, ValidationError
from smvmde.harness import ExperimentConfig, run_synthetic_experiment, run_timing_benchmark
from smvmde.io import (
    RunConfig,
    format_outputs,
    load_config,
    load_distributions,
    load_multichannel_csv,
    load_pairs,
    read_outputs,
    table_for,
    write_outputs,
)
from smvmde.stats import effect_size_report, paired_difference_summary


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_two_columns(self, tmp_path):
        s = load_multichannel_csv(_write(tmp_path / "x.csv", "a,b\n1,2\n3,4\n"))
        assert s.names == ("a", "b")
        np.testing.assert_array_equal(s.data, [[1, 3], [2, 4]])

    def test_non_numeric_cell(self, tmp_path):
        with pytest.raises(ParseError) as info:
            load_multichannel_csv(_write(tmp_path / "x.csv", "a,b\n1,x\n"))
        assert (info.value.row, info.value.column) == (1, "b")
        assert "row 1" in str(info.value) and "column b" in str(info.value)

    def test_ragged_row(self, tmp_path):
        with pytest.raises(ParseError) as info:
            load_multichannel_csv(_write(tmp_path / "x.csv", "a,b\n1,2\n3\n"))
        assert info.value.row == 2

    @pytest.mark.parametrize("text", ["", "a,b\n", "a,a\n1,2\n", "a,\n1,2\n", "a\nnan\n", "a\ninf\n"])
    def test_malformed(self, tmp_path, text):
        with pytest.raises(ParseError):
            load_multichannel_csv(_write(tmp_path / "x.csv", text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputOutputError):
            load_multichannel_csv(tmp_path / "absent.csv")

    def test_bom_and_trailing_blank_lines(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_bytes("﻿a,b\n1,2\n\n\n".encode("utf-8"))
        assert load_multichannel_csv(path).names == ("a", "b")

    def test_large_table(self, tmp_path):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((7_500, 8))
        path = tmp_path / "big.csv"
        header = ",".join(f"ch{k}" for k in range(8))
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
        s = load_multichannel_csv(path)
        assert (s.p, s.length) == (8, 7_500)
        np.testing.assert_array_equal(s.data, data.T)

    def test_distributions(self, tmp_path):
        d = load_distributions(_write(tmp_path / "d.csv", "1,2,3\n0.5,0.6,0.7\n0.4,0.5,0.6\n"))
        assert sorted(d) == [1, 2, 3]
        np.testing.assert_array_equal(d[2], [0.6, 0.5])

    def test_distributions_need_integer_header(self, tmp_path):
        with pytest.raises(ParseError):
            load_distributions(_write(tmp_path / "d.csv", "tau1\n0.5\n"))

    def test_pairs(self, tmp_path):
        assert load_pairs(_write(tmp_path / "p.csv", "s1,s2\n0.6,0.4\n")).shape == (1, 2)
        with pytest.raises(ParseError):
            load_pairs(_write(tmp_path / "q.csv", "a,b,c\n1,2,3\n"))


def _artifacts():
    rng = np.random.default_rng(5)
    params = EntropyParams(m=2, c=3, d=1, tau_max=3)
    series = MultiChannelSeries(rng.standard_normal((3, 300)))
    profile = multiscale_profile(series, params, StrataAllocation.proportional({1}))
    table = run_synthetic_experiment(ExperimentConfig(setups=(1, 4), realizations=2, length=300, params=params, workers=1))
    timing = run_timing_benchmark(channels=(2,), lengths=(200,), reps=1, params=params)
    dist = {tau: rng.normal(0.8, 0.1, 10) for tau in (1, 2)}
    other = {tau: rng.normal(0.7, 0.1, 10) for tau in (1, 2)}
    report = effect_size_report(dist, other, n_boot=10, seed=1)
    paired = paired_difference_summary([(0.6, 0.4), (0.3, 0.5)], [(0.5, 0.5), (0.3, 0.3)])
    return {"profile": profile, "table": table, "timing": timing, "report": report, "paired": paired}


ARTIFACTS = _artifacts()

HEADERS = {
    "profile": ("tau", "entropy"),
    "table": ("setup", "variant", "designated", "tau", "mean", "std"),
    "timing": ("algorithm", "channels", "length", "mean_seconds"),
    "report": ("tau", "baseline_g", "mean_diff", "ci_lo", "ci_hi"),
    "paired": ("mean_abs_diff", "improved_count", "positive_count"),
}


class TestWrite:
    @pytest.mark.parametrize("name", sorted(ARTIFACTS))
    def test_headers(self, name):
        columns, _ = table_for(ARTIFACTS[name])
        assert columns == HEADERS[name]
        assert format_outputs(ARTIFACTS[name], "csv").splitlines()[0] == ",".join(HEADERS[name])

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    @pytest.mark.parametrize("name", sorted(ARTIFACTS))
    def test_round_trip(self, tmp_path, name, fmt):
        path = tmp_path / f"out.{fmt}"
        write_outputs(ARTIFACTS[name], path)
        back = read_outputs(path)
        columns, rows = table_for(ARTIFACTS[name])
        assert len(back) == len(rows)
        for row, got in zip(rows, back):
            assert list(got) == list(columns)
            for value, col in zip(row, columns):
                if isinstance(value, float):
                    assert got[col] == pytest.approx(value, abs=1e-12)
                else:
                    assert got[col] == value

    def test_json_layout(self):
        doc = json.loads(format_outputs(ARTIFACTS["paired"], "json"))
        assert doc["columns"] == list(HEADERS["paired"])
        # diffs 0.2 and -0.2 against a zero baseline
        assert doc["rows"][0]["improved_count"] == 2

    def test_unknown_format(self):
        with pytest.raises(ValidationError):
            format_outputs(ARTIFACTS["paired"], "xml")

    def test_unwritable(self, tmp_path):
        blocker = _write(tmp_path / "file", "")
        with pytest.raises(InputOutputError):
            write_outputs(ARTIFACTS["paired"], blocker / "sub" / "out.csv")


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.params() == EntropyParams(2, 5, 1, 20)

    def test_json_round_trip(self, tmp_path):
        cfg = RunConfig(m=3, c=4, variant="st", designated=["a"], threshold=2, weight=0.25)
        path = _write(tmp_path / "cfg.json", json.dumps(cfg.to_dict()))
        assert load_config(path) == cfg

    @pytest.mark.parametrize(
        "doc",
        [{"m": 0}, {"variant": "x"}, {"weight": 1.5}, {"threshold": 3}, {"format": "xml"}, {"bogus": 1}, {"m": "two"}],
    )
    def test_invalid(self, doc):
        with pytest.raises(ValidationError):
            RunConfig.from_dict(doc)

    def test_bad_json(self, tmp_path):
        with pytest.raises(ParseError):
            load_config(_write(tmp_path / "cfg.json", "{m: 2"))

    def test_allocation_by_name(self):
        series = MultiChannelSeries(np.zeros((3, 4)) + np.arange(4), ("x", "y", "z"))
        alloc = RunConfig(variant="t", designated=["z"]).allocation(series)
        assert alloc.designated == frozenset({2})
        with pytest.raises(ValidationError):
            RunConfig(variant="t").allocation(series)


@pytest.fixture
def signal_csv(tmp_path):
    rng = np.random.default_rng(2)
    data = rng.standard_normal((600, 3))
    path = tmp_path / "signal.csv"
    np.savetxt(path, data, delimiter=",", header="fz,cz,pz", comments="", fmt="%.17g")
    return path


class TestCli:
    def test_compute(self, signal_csv, capsys):
        assert main(["compute", str(signal_csv), "--tau-max", "3", "--c", "4"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "tau,entropy" and len(lines) == 4

    def test_compute_stratified_json(self, signal_csv, tmp_path):
        out = tmp_path / "p.json"
        rc = main(["compute", str(signal_csv), "--variant", "p", "--designated", "cz", "--tau-max", "2", "--out", str(out)])
        assert rc == 0
        assert [r["tau"] for r in read_outputs(out)] == [1, 2]

    def test_repeat_runs_identical(self, signal_csv, tmp_path):
        outputs = []
        for k in range(2):
            out = tmp_path / f"run{k}.csv"
            assert main(["compute", str(signal_csv), "--variant", "st", "--designated", "fz", "--tau-max", "3", "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_config_file(self, signal_csv, tmp_path, capsys):
        cfg = _write(tmp_path / "cfg.json", json.dumps({"tau_max": 2, "variant": "t", "designated": ["pz"]}))
        assert main(["compute", str(signal_csv), "--config", str(cfg)]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 3

    def test_missing_input_is_io_error(self, tmp_path):
        assert main(["compute", str(tmp_path / "none.csv")]) == 2

    def test_missing_designation_is_validation_error(self, signal_csv):
        assert main(["compute", str(signal_csv), "--variant", "t"]) == 1

    def test_unknown_channel(self, signal_csv):
        assert main(["compute", str(signal_csv), "--variant", "t", "--designated", "oz"]) == 1

    def test_parse_error(self, tmp_path):
        assert main(["compute", str(_write(tmp_path / "x.csv", "a,b\n1,x\n"))]) == 1

    def test_degenerate_channel_is_numerical(self, tmp_path):
        path = _write(tmp_path / "x.csv", "a,b\n" + "1,1\n" * 50)
        assert main(["compute", str(path), "--tau-max", "2"]) == 3

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["compute"])
        assert info.value.code == 1

    def test_synth(self, capsys):
        rc = main(["synth", "--realizations", "2", "--length", "300", "--setups", "1,4", "--tau-max", "2", "--c", "3", "--workers", "1"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "setup,variant,designated,tau,mean,std"
        assert len(lines) == 1 + 2 * 4 * 2

    def test_bench(self, capsys):
        rc = main(["bench", "--channels", "2", "--lengths", "300", "--reps", "1", "--tau-max", "2", "--c", "3"])
        assert rc == 0
        assert len(capsys.readouterr().out.splitlines()) == 1 + 4

    def test_effect_size(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        files = {}
        for name, loc in (("a", 0.8), ("b", 0.7), ("ba", 0.8), ("bb", 0.75)):
            files[name] = tmp_path / f"{name}.csv"
            np.savetxt(files[name], rng.normal(loc, 0.05, (20, 2)), delimiter=",", header="1,2", comments="", fmt="%.17g")
        args = ["effect-size", str(files["a"]), str(files["b"]), "--bootstrap", "20"]
        assert main(args + ["--baseline-first", str(files["ba"]), "--baseline-second", str(files["bb"])]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "tau,baseline_g,mean_diff,ci_lo,ci_hi" and len(lines) == 3
        assert main(args + ["--baseline-first", str(files["ba"])]) == 1

    def test_paired(self, tmp_path, capsys):
        pairs = _write(tmp_path / "p.csv", "s1,s2\n0.6,0.4\n0.3,0.5\n")
        assert main(["paired", str(pairs), str(pairs)]) == 0
        header, row = capsys.readouterr().out.splitlines()
        assert header == "mean_abs_diff,improved_count,positive_count"
        mean_abs, improved, positive = row.split(",")
        assert float(mean_abs) == pytest.approx(0.2, abs=1e-12)
        assert (improved, positive) == ("0", "1")

    def test_oracle(self, tmp_path, capsys):
        path = tmp_path / "labels.csv"
        np.savetxt(path, FIXTURE.T, delimiter=",", header="u1,u2", comments="", fmt="%d")
        assert main(["oracle", str(path), "--c", "2", "--variant", "st", "--designated", "u1", "--weight", "0.5"]) == 0
        header, row = capsys.readouterr().out.splitlines()
        assert header == "variant,core,oracle,abs_diff"
        assert float(row.split(",")[1]) == pytest.approx(0.85401, abs=1e-4)
