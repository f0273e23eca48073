import csv
import io
import json
import subprocess


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def test_match_exit_codes(cli, fixtures):
    lane_change = fixtures / "lane_change.scq"
    found = run(cli, "match", lane_change, fixtures / "lane_change_trace.json", "--map", fixtures / "two_lane_map.json", "-m", 5)
    assert found.returncode == 0, found.stderr
    result = json.loads(found.stdout)
    assert result["matched"] and result["witness"]["correspondence"]["ego"] == "car2"

    missing = run(cli, "match", lane_change, fixtures / "lane_change_turn_left.json", "--map", fixtures / "two_lane_map.json", "-m", 5)
    assert missing.returncode == 1


def test_malformed_program_exits_2(cli, tmp_path):
    bad = tmp_path / "bad.scq"
    bad.write_text("ego = new Car with behavior\n")
    assert run(cli, "compile", bad, "--stdout").returncode == 2


def test_batch_reports_each_file(cli, fixtures):
    out = run(cli, "match", fixtures / "lane_change.scq", fixtures / "batch", "-m", 10, "--jobs", 2)
    assert out.returncode == 0
    rows = [json.loads(line) for line in out.stdout.splitlines()]
    assert len(rows) == 5
    assert sum(r["matched"] for r in rows) == 2
    assert sum(1 for r in rows if r.get("error")) == 1


def test_compile_emits_both(cli, fixtures, tmp_path):
    out = run(cli, "compile", fixtures / "lane_change.scq", "--emit", "both", "-o", tmp_path / "lane_change")
    assert out.returncode == 0, out.stderr
    assert json.loads((tmp_path / "lane_change.json").read_text())["machines"]
    assert (tmp_path / "lane_change.dot").read_text().startswith("digraph")


def test_gen_is_seeded(cli, fixtures, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(cli, "gen", fixtures / "lane_change.scq", "--seed", 42, "-o", path).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    # The oracle budget caps the window length, not the trace length.
    assert run(cli, "oracle", fixtures / "lane_change.scq", a, "-m", 5).returncode == 0
    assert run(cli, "oracle", fixtures / "lane_change.scq", a, "-m", 50).returncode == 2
    small = tmp_path / "small.json"
    assert run(cli, "gen", fixtures / "lane_change.scq", "--seed", 42, "--length", 8, "-o", small).returncode == 0
    oracle = run(cli, "oracle", fixtures / "lane_change.scq", small, "-m", 4)
    assert oracle.returncode == 0
    assert json.loads(oracle.stdout) == {"matched": True}


def test_bench_csv(cli, fixtures):
    out = run(cli, "bench", "duration", fixtures / "lane_change.scq", "--values", 10, 20, "--repeats", 2)
    assert out.returncode == 0, out.stderr
    rows = list(csv.DictReader(io.StringIO(out.stdout)))
    assert [int(r["value"]) for r in rows] == [10, 20]
    assert all(int(r["runs"]) == 2 for r in rows)
