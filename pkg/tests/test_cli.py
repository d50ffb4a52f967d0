import csv
import subprocess
import sys

import pytest

from seqweight.cli import ConfigError, parse_and_dispatch, parse_config


def test_parse_config_basic(caplog):
    specs = parse_config(
        "# two scenarios\n[a]\nJ = 20\nseed = 4\n\n[b]\nJ = 30\neta = 20\nr = 5\nalpha = 0.01\n"
    )
    assert [s.name for s in specs] == ["a", "b"]
    assert specs[0].master_seed == 4 and specs[0].alpha == 0.05
    assert (specs[1].eta, specs[1].r, specs[1].alpha, specs[1].beta) == (20.0, 5.0, 0.01, 0.05)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[a]\nJ = 20\nJ = 30\n", "x.cfg:3: duplicate key 'J'"),
        ("[a]\nJ = 20\n[a]\nJ = 10\n", "x.cfg:3: duplicate scenario"),
        ("[a]\nJ = 20\nbogus = 1\n", "x.cfg:3: unknown key"),
        ("J = 20\n", "x.cfg:1: key outside"),
        ("[a]\nJ twenty\n", "x.cfg:2: expected"),
        ("[a]\nJ = twenty\n", "x.cfg:2: J = 'twenty'"),
        ("[a]\nmu = 0.2\n", "x.cfg:1: scenario [a] is missing J"),
        ("[a\n", "x.cfg:1: malformed"),
        ("", "no scenarios"),
        ("[a]\nJ = 1\n", "x.cfg:1: scenario [a]"),
    ],
)
def test_parse_config_errors(text, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text, "x.cfg")
    assert fragment in str(err.value)


def test_calibrate_gap_output(capsys):
    assert parse_and_dispatch(["calibrate", "--alpha", "0.05", "--m", "20", "--J", "200"]) == 0
    out = capsys.readouterr().out
    assert "C_W = 3600" in out and "c = 11.1844214" in out


def test_calibrate_gi_output(capsys):
    assert parse_and_dispatch(["calibrate", "--l", "0", "--u", "10", "--J", "10"]) == 0
    out = capsys.readouterr().out
    assert "a = 5.991464547" in out and "b = 5.991464547" in out
    assert "c = inactive" in out and "d = inactive" in out


def test_calibrate_weights_list_and_csv(tmp_path, capsys):
    assert parse_and_dispatch(["calibrate", "--m", "2", "--weights", "0.5,1,1,2,4"]) == 0
    assert "C_W = 21" in capsys.readouterr().out
    path = tmp_path / "w.csv"
    path.write_text("stream_index,weight\n1,1\n0,1\n")
    assert parse_and_dispatch(["calibrate", "--m", "1", "--weights", str(path)]) == 0
    assert "C_W = 1\n" in capsys.readouterr().out


def test_usage_errors_exit_2(capsys):
    assert parse_and_dispatch(["gap", "--J", "1", "--reps", "1"]) == 2
    assert parse_and_dispatch(["calibrate", "--J", "4"]) == 2
    assert parse_and_dispatch(["gap"]) == 2
    assert parse_and_dispatch(["sweep"]) == 2
    with pytest.raises(SystemExit) as err:
        parse_and_dispatch(["gap", "--no-such-flag"])
    assert err.value.code == 2


def test_no_arguments_prints_help(capsys):
    assert parse_and_dispatch([]) == 0
    assert "usage" in capsys.readouterr().out


def test_gap_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = parse_and_dispatch(
        ["gap", "--J", "10", "--signal-fraction", "0.2", "--mu", "0.6", "--reps", "12", "--out", str(out), "--per-rep"]
    )
    assert code == 0
    rows = list(csv.DictReader((out / "summary.csv").open()))
    assert len(rows) == 1 and rows[0]["scenario"] == "gap" and rows[0]["reps"] == "12"
    assert len((out / "reps.csv").read_text().splitlines()) == 13
    manifest = (out / "manifest.txt").read_text()
    assert "validation_stamp=absent" in manifest


def test_config_run_keeps_names_and_overrides(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("[left]\nJ = 10\nmu = 0.6\nsignal_fraction = 0.2\n[right]\nJ = 12\nmu = 0.6\nsignal_fraction = 0.25\n")
    out = tmp_path / "o"
    assert parse_and_dispatch(["gi", "--config", str(cfg), "--l", "1", "--u", "4", "--reps", "5", "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "summary.csv").open()))
    assert [r["scenario"] for r in rows] == ["left", "right"]
    assert all(r["reps"] == "5" for r in rows)


def test_sweep_config_emits_plot_data(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("[Unweighted-J10]\nJ = 10\nmu = 0.6\nsignal_fraction = 0.2\nreps = 6\n")
    out = tmp_path / "o"
    assert parse_and_dispatch(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "plot_data.csv").open()))
    assert list(rows[0]) == ["J", "scenario", "ess", "ess_se"]
    assert (rows[0]["J"], rows[0]["scenario"]) == ("10", "Unweighted")


def test_validate_writes_stamp(tmp_path, capsys):
    assert parse_and_dispatch(["validate", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "VALIDATED").exists()
    assert capsys.readouterr().out.count("PASS") == 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "seqweight", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("seqweight 0.1.0")
