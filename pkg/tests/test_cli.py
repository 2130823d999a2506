import json

import numpy as np
import pytest

import gridot as g
from gridot import cli
from gridot.io import read_plan


def write_csv(path, arr):
    np.savetxt(path, np.asarray(arr), fmt="%d", delimiter=",")
    return str(path)


@pytest.fixture
def pair(tmp_path, rng):
    a = write_csv(tmp_path / "a.csv", rng.integers(0, 20, (8, 8)))
    b = write_csv(tmp_path / "b.csv", rng.integers(0, 20, (8, 8)))
    return a, b


def test_solve_identical_prints_zero(tmp_path, capsys):
    f = write_csv(tmp_path / "m.csv", [[1, 2], [3, 4]])
    assert cli.main(["solve", "--mu", f, "--nu", f]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_solve_modes_agree(pair, capsys):
    a, b = pair
    assert cli.main(["solve", "--mu", a, "--nu", b, "--multiscale"]) == 0
    ms = int(capsys.readouterr().out)
    assert cli.main(["solve", "--mu", a, "--nu", b, "--dense"]) == 0
    dn = int(capsys.readouterr().out)
    assert ms == dn


def test_solve_emits_plan_and_stats(pair, tmp_path, capsys):
    a, b = pair
    plan_path = tmp_path / "plan.txt"
    stats_path = tmp_path / "stats.json"
    rc = cli.main([
        "solve", "--mu", a, "--nu", b,
        "--emit-plan", str(plan_path), "--emit-stats", str(stats_path),
    ])
    assert rc == 0
    printed = int(capsys.readouterr().out)
    plan = read_plan(plan_path)
    assert g.plan_cost(plan) == printed
    stats = json.loads(stats_path.read_text())
    assert stats["cost"] == printed
    assert stats["pivots"] > 0
    assert stats["final_neighborhood_size"] > 0


def test_solve_increment_all(tmp_path, capsys):
    z = write_csv(tmp_path / "z.csv", [[0, 0], [0, 0]])
    o = write_csv(tmp_path / "o.csv", [[0, 0], [0, 4]])
    # without the increment the blank image cannot be balanced
    assert cli.main(["solve", "--mu", z, "--nu", o]) == cli.EXIT_SOLVER
    capsys.readouterr()
    assert cli.main(["solve", "--mu", z, "--nu", o, "--increment-all"]) == 0
    printed = int(capsys.readouterr().out)
    mu = g.increment_all(g.DiscreteMeasure(g.GridShape((2, 2)), [0, 0, 0, 0]))
    nu = g.increment_all(g.DiscreteMeasure(g.GridShape((2, 2)), [0, 0, 0, 4]))
    assert printed == g.solve_multiscale(g.balance(mu, nu)).cost


def test_verify_agrees(pair, capsys):
    a, b = pair
    assert cli.main(["verify", "--mu", a, "--nu", b]) == 0
    out = capsys.readouterr().out
    assert "AGREE" in out and "oracle" in out and "dense" in out


def test_verify_disagreement_exit_code(pair, capsys, monkeypatch):
    a, b = pair

    class Fake:
        cost = -1

    monkeypatch.setattr(cli, "solve_dense", lambda inst: Fake())
    assert cli.main(["verify", "--mu", a, "--nu", b]) == cli.EXIT_DISAGREE
    assert "DISAGREE" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    good = write_csv(tmp_path / "g.csv", [[1, 2], [3, 4]])
    missing = str(tmp_path / "missing.csv")
    assert cli.main(["solve", "--mu", missing, "--nu", good]) == cli.EXIT_IO
    capsys.readouterr()
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert cli.main(["solve", "--mu", str(bad), "--nu", good]) == cli.EXIT_IO
    capsys.readouterr()
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--mu", good])  # --nu is required
    assert exc.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == cli.EXIT_USAGE


def test_solve_mutually_exclusive_modes(tmp_path, capsys):
    f = write_csv(tmp_path / "m.csv", [[1, 2], [3, 4]])
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--mu", f, "--nu", f, "--dense", "--multiscale"])
    assert exc.value.code == cli.EXIT_USAGE


def test_bench_cli_defaults_match_protocol():
    parser = cli._build_parser()
    args = parser.parse_args(["bench", "--data", "x", "--out", "y"])
    assert args.reps == 10
    assert args.dims == "32,64,128"


def test_bench_cli_runs(tmp_path, rng, capsys):
    root = tmp_path / "data" / "Noise"
    root.mkdir(parents=True)
    for i in range(3):
        write_csv(root / f"data8_{1001 + i}.csv", rng.integers(1, 32, (8, 8)))
    out = tmp_path / "out.csv"
    rc = cli.main([
        "bench", "--data", str(tmp_path / "data"), "--dims", "8",
        "--reps", "2", "--out", str(out), "--workers", "1",
    ])
    assert rc == 0
    assert "3 pairs, 0 failures" in capsys.readouterr().out
    assert out.exists()


def test_bench_cli_bad_dims(capsys):
    assert cli.main(["bench", "--data", "x", "--out", "y", "--dims", "a,b"]) == cli.EXIT_USAGE
