import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from vilenkin.cli import EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, UsageError, main, parse_config
from vilenkin.core import CellFunction, build_base


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_experiment_config_parses():
    args = parse_config("experiment --part a --m walsh --N 8 --q const --phi one --ks 1,2,3".split())
    assert args.command == "experiment" and args.N == 8 and args.ks == "1,2,3"


def test_missing_subcommand():
    with pytest.raises(UsageError):
        parse_config([])
    assert main([]) == EXIT_USAGE


def test_unknown_flag_is_usage_error(capsys):
    assert main(["kernels", "--bogus"]) == EXIT_USAGE
    assert "bogus" in capsys.readouterr().err


def test_cycle_base(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["kernels", "--m", "cycle:2,3", "--N", "6", "--n", "5", "--out", str(out)]) == EXIT_OK
    assert len(read_csv(out)) == 216
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["base"]["m"] == [2, 3, 2, 3, 2, 3]
    assert meta["base"]["M_N"] == 216


def test_part_b_rejects_large_p(capsys):
    code = main("experiment --part b --m walsh --N 8 --p 0.6 --phi one".split())
    assert code == EXIT_USAGE
    assert "0 < p < 1/2" in capsys.readouterr().err


def test_memory_cap(monkeypatch, capsys):
    monkeypatch.setenv("VILENKIN_MAX_CELLS", "64")
    assert main("kernels --N 7 --n 3".split()) == EXIT_USAGE
    assert "VILENKIN_MAX_CELLS" in capsys.readouterr().err


def test_experiment_part_a(tmp_path):
    out = tmp_path / "a.csv"
    code = main(f"experiment --part a --m walsh --N 8 --q const --phi one --ks 1,2,3 --out {out}".split())
    assert code == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 3
    ratios = [float(r["ratio"]) for r in rows]
    assert ratios[0] < ratios[1] < ratios[2]
    meta = json.loads(out.with_suffix(".json").read_text())
    cfg = meta["config"]
    assert cfg["q"] == "const:1" and cfg["phi"] == "one" and cfg["log_base"] == 2.0
    assert cfg["argv"]["part"] == "a"


def test_experiment_rerun_from_echo(tmp_path):
    first = tmp_path / "b1.csv"
    argv = f"experiment --part b --N 8 --p 0.25 --phi paper --ks 1,2 --out {first}".split()
    assert main(argv) == EXIT_OK
    echo = json.loads(first.with_suffix(".json").read_text())["config"]["argv"]
    second = tmp_path / "b2.csv"
    again = [
        "experiment", "--part", echo["part"], "--m", echo["m"], "--N", str(echo["N"]),
        "--p", repr(echo["p"]), "--phi", echo["phi"], "--q", echo["q"], "--ks", echo["ks"],
        "--out", str(second),
    ]
    assert main(again) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_experiment_stdout(capsys):
    assert main("experiment --part a --N 5 --ks 1,2".split()) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("k,n_k,M_2nk") and len(lines) == 3


def test_experiment_bad_ks():
    assert main("experiment --part a --N 5 --ks 3".split()) == EXIT_USAGE
    assert main("experiment --part a --N 5 --ks 2,1".split()) == EXIT_USAGE


def test_check_conditions(capsys):
    assert main("check-conditions --cond k1 --q const --c 0.5 --ks 1,2,3".split()) == EXIT_OK
    assert "PASS" in capsys.readouterr().out
    assert main("check-conditions --cond k2 --q riesz --c 0.5 --ks 1,2,3".split()) == EXIT_NUMERIC
    assert "FAIL at index 1" in capsys.readouterr().out
    assert main("check-conditions --cond regular --q const".split()) == EXIT_OK
    assert main("check-conditions --cond cond0 --q const".split()) == EXIT_USAGE


def test_transform_round_trip(tmp_path, rng):
    base = build_base((2, 3, 4), 3)
    f = CellFunction(base, rng.normal(size=24) + 1j * rng.normal(size=24))
    src, spec, back = tmp_path / "f.csv", tmp_path / "s.csv", tmp_path / "g.csv"
    f.to_csv(src)
    common = ["--m", "custom:2,3,4", "--N", "3"]
    assert main(["transform", *common, "--input", str(src), "--out", str(spec)]) == EXIT_OK
    assert main(["transform", *common, "--inverse", "--input", str(spec), "--out", str(back)]) == EXIT_OK
    g = CellFunction.from_csv(base, back)
    assert g.sup_distance(f) < 1e-12
    assert read_csv(spec)[0].keys() == {"n", "re", "im"}


def test_transform_missing_file(tmp_path):
    assert main(["transform", "--N", "3", "--input", str(tmp_path / "nope.csv")]) == EXIT_IO


def test_transform_wrong_size(tmp_path):
    CellFunction.constant(build_base((2, 2), 2), 1).to_csv(tmp_path / "f.csv")
    assert main(["transform", "--N", "3", "--input", str(tmp_path / "f.csv")]) == EXIT_USAGE


def test_means_output(tmp_path):
    out = tmp_path / "m.csv"
    code = main(["means", "--N", "3", "--mean", "fejer", "--f", "vilenkin:1", "--n-list", "4", "--out", str(out)])
    assert code == EXIT_OK
    rows = read_csv(out)
    vals = np.array([float(r["re"]) for r in rows])
    assert np.allclose(vals, 0.75 * np.array([1, -1] * 4), atol=1e-12)


def test_means_literal_a0_flag(tmp_path):
    normal, literal = tmp_path / "n.csv", tmp_path / "l.csv"
    base_args = ["means", "--N", "3", "--mean", "cesaro", "--alpha", "0.5", "--f", "dirichlet:1", "--n-list", "3"]
    assert main(base_args + ["--out", str(normal)]) == EXIT_OK
    assert main(base_args + ["--paper-a0-zero", "--out", str(literal)]) == EXIT_OK
    a = [float(r["re"]) for r in read_csv(normal)]
    b = [float(r["re"]) for r in read_csv(literal)]
    assert np.allclose(a, 1.0)
    assert not np.allclose(b, 1.0)


def test_means_errors():
    assert main("means --N 3 --mean cesaro --n-list 2".split()) == EXIT_USAGE
    assert main("means --N 3 --mean riesz --n-list 1".split()) == EXIT_USAGE
    assert main("means --N 3 --mean b --q riesz --n-list 4".split()) == EXIT_USAGE


def test_config_file_merge(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[experiment]\npart = a\nN = 5\nks = 1,2\nphi = power:0.5\n")
    args = parse_config(["--config", str(ini), "experiment", "--phi", "one"])
    assert args.part == "a" and args.N == 5 and args.ks == "1,2"
    assert args.phi == "one"  # the flag wins


def test_config_unknown_key(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[experiment]\npart = a\nN = 5\nwieght = one\n")
    assert main(["--config", str(ini), "experiment"]) == EXIT_USAGE
    assert "wieght" in capsys.readouterr().err


def test_config_bad_choice(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[experiment]\npart = c\n")
    with pytest.raises(UsageError, match="part"):
        parse_config(["--config", str(ini), "experiment"])


def test_console_script_module():
    proc = subprocess.run(
        [sys.executable, "-m", "vilenkin.cli", "check-conditions", "--cond", "k2", "--q", "riesz", "--c", "0.5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_NUMERIC
    assert "witness" in proc.stdout or "FAIL at index 1" in proc.stdout
