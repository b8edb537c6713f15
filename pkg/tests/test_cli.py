import csv
import io
import json
import subprocess
import sys

import pytest

from gamblers_ruin.cli import RunConfig, main, parse_wealth, run
from gamblers_ruin.errors import ValidationError


@pytest.fixture
def spec_file(tmp_path):
    def write(doc, name="spec.json"):
        p = tmp_path / name
        p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(p)

    return write


POISSON = {"type": "poisson_prize", "nu": 3, "epsilon": 0.01}
WALK = {"type": "table", "entries": {"-1": 0.4, "1": 0.6}}


def test_parse_wealth():
    assert parse_wealth("3,10,50") == [3, 10, 50]
    assert parse_wealth("1..4") == [1, 2, 3, 4]
    assert parse_wealth("1..2, 7") == [1, 2, 7]
    for bad in ("", "a", "5..2", "1..x"):
        with pytest.raises(ValidationError):
            parse_wealth(bad)


def test_poisson_table(spec_file):
    status, text = run(RunConfig(spec=spec_file(POISSON), wealth=[3, 10, 50, 100, 200, 500]))
    assert status == 0
    published = {3: 0.9900, 10: 0.9456, 50: 0.7245, 100: 0.5193, 200: 0.2668, 500: 0.0361}
    rows = [line.split() for line in text.splitlines() if line.split() and line.split()[0].isdigit()]
    assert [int(r[0]) for r in rows] == list(published)
    for r in rows:
        assert float(r[1]) == pytest.approx(published[int(r[0])], abs=5e-4)
        assert len(r[1].split(".")[1]) == 6


def test_zero_drift_is_trivial(spec_file):
    doc = {"type": "table", "entries": {"-1": 0.5, "1": 0.5}}
    status, text = run(RunConfig(spec=spec_file(doc), wealth=[10], fmt="json"))
    assert status == 0
    res = json.loads(text)["results"][0]
    assert res["p_ruin"] == 1.0
    assert res["method"] == "trivial"


def test_walk_csv(spec_file):
    status, text = run(RunConfig(spec=spec_file(WALK), wealth=parse_wealth("1..20"), fmt="csv"))
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["M", "p_ruin", "method", "max_root_abs"]
    assert [int(r["M"]) for r in rows] == list(range(1, 21))
    for r in rows:
        assert float(r["p_ruin"]) == pytest.approx((2 / 3) ** int(r["M"]), abs=1e-13)


def test_json_schema(spec_file):
    status, text = run(RunConfig(spec=spec_file(POISSON), wealth=[3, 50], fmt="json"))
    doc = json.loads(text)
    assert doc["schema_version"] == 1
    assert doc["spec"] == {"type": "poisson_prize", "nu": 3, "epsilon": 0.01}
    assert doc["distribution"]["nu"] == 3
    assert len(doc["roots"]["roots"]) == 3
    assert len(doc["roots"]["residual_floors"]) == 3
    first = doc["results"][0]
    assert set(first) == {"M", "p_ruin", "method", "q_coeffs", "max_root_abs"}
    assert sum(first["q_coeffs"]) == pytest.approx(first["p_ruin"], abs=1e-9)


def test_verify_mode(spec_file):
    doc = {"type": "two_point", "nu": 2, "mu": 1, "p_loss": 0.3}
    cfg = RunConfig(spec=spec_file(doc), wealth=[4, 6], mode="verify", fmt="json", mc_paths=20_000, seed=1)
    status, text = run(cfg)
    out = json.loads(text)
    assert status == 0 and out["ok"]
    oracle = out["results"][0]["oracle"]
    assert set(oracle["verdicts"]) == {"dp", "mc", "finite_w"}

    cfg.fmt = "csv"
    status, text = run(cfg)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["verify_ok"] == "True"
    assert "mc_ci_halfwidth" in rows[0]

    cfg.fmt = "table"
    status, text = run(cfg)
    assert "dp " in text and text.count("; ok") == 2


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_deterministic_output(spec_file, fmt):
    doc = {"type": "table", "entries": {"-2": 0.2, "-1": 0.1, "1": 0.3, "3": 0.4}}
    cfg = dict(spec=spec_file(doc), wealth=[2, 5, 9], mode="verify", fmt=fmt, mc_paths=10_000, seed=9)
    _, a = run(RunConfig(**cfg))
    _, b = run(RunConfig(**cfg))
    assert a == b


def test_roots_listing(spec_file, capsys):
    assert main(["--spec", spec_file(POISSON), "--roots"]) == 0
    lines = capsys.readouterr().out.splitlines()
    listed = [complex(float(f[1]), float(f[2])) for f in (ln.split() for ln in lines) if f and f[0] in "123"]
    expected = [0.993362, -0.202699 - 0.220049j, -0.202699 + 0.220049j]
    assert len(listed) == 3
    for got, want in zip(listed, expected):
        # published digits are truncated, the listing rounds
        assert abs(got - want) <= 1.5e-6
    assert main(["--spec", spec_file(WALK), "--roots"]) == 0
    out = capsys.readouterr().out
    assert "0.666667" in out


def test_roots_listing_flags_cluster(spec_file, capsys, near_double):
    entries = {str(k): v for k, v in near_double.probs.items()}
    assert main(["--spec", spec_file({"type": "table", "entries": entries}), "--roots"]) == 0
    out = capsys.readouterr().out
    assert out.count(" yes") == 2


def test_out_file(spec_file, tmp_path, capsys):
    target = tmp_path / "report.csv"
    assert main(["--spec", spec_file(WALK), "--wealth", "5", "--format", "csv", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert target.read_text().startswith("M,p_ruin")


@pytest.mark.parametrize(
    "args",
    [
        ["--wealth", "5"],  # spec filled in below
        ["--wealth", "-3"],
        ["--wealth", "a,b"],
        ["--format", "xml", "--wealth", "1"],
    ],
)
def test_invalid_input_exit_2(spec_file, args, capsys):
    bad = spec_file({"type": "table", "entries": {"-1": 0.4, "1": 0.5}})
    assert main(["--spec", bad if args == ["--wealth", "5"] else spec_file(WALK), *args]) == 2
    assert capsys.readouterr().err


def test_missing_and_malformed_spec(spec_file, tmp_path, capsys):
    assert main(["--spec", str(tmp_path / "nope.json"), "--wealth", "3"]) == 2
    assert main(["--spec", spec_file('{"type": "table",\n "entries": }', "bad.json"), "--wealth", "3"]) == 2
    err = capsys.readouterr().err
    assert "bad.json:2:" in err


def test_numerical_failure_exit_3(spec_file, capsys, monkeypatch):
    import gamblers_ruin.cli as cli
    from gamblers_ruin.errors import RootCountMismatch

    def fail(*args, **kwargs):
        raise RootCountMismatch("found 2 roots, expected 3")

    monkeypatch.setattr(cli, "find_disk_roots", fail)
    assert main(["--spec", spec_file(POISSON), "--wealth", "10"]) == 3
    assert "RootCountMismatch" in capsys.readouterr().err


def test_module_entry_point(spec_file):
    proc = subprocess.run(
        [sys.executable, "-m", "gamblers_ruin", "--spec", spec_file(WALK), "--wealth", "5", "--format", "csv"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert proc.stdout.splitlines()[1].startswith("5,0.13168724279835")
