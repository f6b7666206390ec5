"""End-to-end runs of the command-line entry point."""

import json

import pytest

from biscount.bigraph import BipartiteGraph, complete_bipartite, read_graph, write_graph
from biscount.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, main
from biscount.engine import brute_force_count
from biscount.oracle import VerifyReport


@pytest.fixture
def k22_file(tmp_path):
    path = tmp_path / "k22.txt"
    write_graph(complete_bipartite(2), path)
    return path


def _count_json(capsys, *argv):
    capsys.readouterr()
    code = main(["count", *argv, "--json", "--no-timing"])
    return code, json.loads(capsys.readouterr().out)


def test_gen_then_count(tmp_path, capsys):
    path = tmp_path / "g.txt"
    assert main(["gen", "--n", "8", "--d", "4", "--seed", "3", "--out", str(path)]) == EXIT_OK
    g = read_graph(path)
    assert (g.n, g.d) == (8, 4)

    code, doc = _count_json(capsys, "--input", str(path))
    assert code == EXIT_OK
    assert doc["estimate"] == str(brute_force_count(g))
    assert doc["method"] == "exact-fallback"
    assert "wall_ms" not in doc


def test_count_text_output(k22_file, capsys):
    assert main(["count", "--input", str(k22_file)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("i(G) ~ 7 ")
    assert "method exact-fallback" in out


def test_count_json_is_reproducible(k22_file, capsys):
    argv = ["--input", str(k22_file), "--brute-force-threshold", "0", "--no-regime-check", "--seed", "4"]
    _, first = _count_json(capsys, *argv)
    _, second = _count_json(capsys, *argv)
    assert first == second
    assert first["method"] == "fpras"
    assert first["seed"] == 4


def test_gen_rejects_impossible_degree(tmp_path):
    assert main(["gen", "--n", "3", "--d", "4", "--out", str(tmp_path / "g.txt")]) == EXIT_INPUT


def test_count_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n0 0\n0 0\n", encoding="utf-8")
    assert main(["count", "--input", str(bad)]) == EXIT_INPUT
    assert "line 3" in capsys.readouterr().err
    assert main(["count", "--input", str(tmp_path / "missing.txt")]) == EXIT_INPUT


def test_count_unreadable_inputs(tmp_path, capsys):
    binary = tmp_path / "binary.txt"
    binary.write_bytes(b"1 1\n0 \xff0\n")
    assert main(["count", "--input", str(binary)]) == EXIT_INPUT
    assert "not valid UTF-8" in capsys.readouterr().err
    assert main(["count", "--input", str(tmp_path)]) == EXIT_INPUT
    assert main(["verify", "--input", str(tmp_path)]) == EXIT_INPUT


def test_count_above_the_exact_limit_exits_with_budget_code(tmp_path):
    path = tmp_path / "matching.txt"
    write_graph(BipartiteGraph.from_edges(25, 1, [(i, i) for i in range(25)]), path)
    assert main(["count", "--input", str(path), "--exact"]) == EXIT_BUDGET


def test_environment_then_profile_then_flags(k22_file, tmp_path, capsys, monkeypatch):
    profiles = tmp_path / "profiles.json"
    profiles.write_text(json.dumps({"loose": {"epsilon": 0.6, "seed": 11}}), encoding="utf-8")
    monkeypatch.setenv("BISCOUNT_EPSILON", "0.5")
    monkeypatch.setenv("BISCOUNT_SEED", "2")

    _, doc = _count_json(capsys, "--input", str(k22_file))
    assert (doc["epsilon"], doc["seed"]) == (0.5, 2)

    _, doc = _count_json(capsys, "--input", str(k22_file), "--profile", "loose", "--profile-path", str(profiles))
    assert (doc["epsilon"], doc["seed"]) == (0.6, 11)

    _, doc = _count_json(
        capsys,
        "--input",
        str(k22_file),
        "--profile",
        "loose",
        "--profile-path",
        str(profiles),
        "--epsilon",
        "0.25",
    )
    assert (doc["epsilon"], doc["seed"]) == (0.25, 11)


def test_profile_without_exact_flag_keeps_profile_settings(k22_file, tmp_path, capsys):
    profiles = tmp_path / "profiles.json"
    profiles.write_text(
        json.dumps({"desk": {"t0_override": 2, "brute_force_threshold": 0, "enforce_regime": False}}),
        encoding="utf-8",
    )
    common = ["--input", str(k22_file), "--profile", "desk", "--profile-path", str(profiles)]
    _, doc = _count_json(capsys, *common)
    assert doc["method"] == "fpras"
    assert doc["t0"] == 2
    _, doc = _count_json(capsys, *common, "--exact")
    assert doc["method"] == "exact-fallback"
    assert doc["estimate"] == "7"


def test_bad_profile_and_bad_environment(k22_file, tmp_path, monkeypatch):
    profiles = tmp_path / "profiles.json"
    profiles.write_text("{}", encoding="utf-8")
    argv = ["count", "--input", str(k22_file)]
    assert main(argv + ["--profile", "nope", "--profile-path", str(profiles)]) == EXIT_INPUT
    monkeypatch.setenv("BISCOUNT_EPSILON", "abc")
    assert main(argv) == EXIT_INPUT


def test_malformed_profile_file(k22_file, tmp_path):
    profiles = tmp_path / "profiles.json"
    profiles.write_text("{not json", encoding="utf-8")
    argv = ["count", "--input", str(k22_file), "--profile", "desk", "--profile-path", str(profiles)]
    assert main(argv) == EXIT_INPUT


def test_unexpected_key_errors_are_not_input_errors(k22_file, monkeypatch):
    def broken(g, cfg):
        raise KeyError("internal")

    monkeypatch.setattr("biscount.cli.count_bis", broken)
    with pytest.raises(KeyError, match="internal"):
        main(["count", "--input", str(k22_file)])


def test_verify_reports_json(k22_file, capsys):
    assert main(["verify", "--input", str(k22_file)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["ok"] is True
    assert doc["checks"]["identity"]["passed"] is True


def test_verify_mismatch_exit_code(k22_file, capsys, monkeypatch):
    failing = VerifyReport()
    failing.checks["identity"] = False
    failing.details["identity"] = "identity sum 6, i(G) 7"
    monkeypatch.setattr("biscount.cli.verify_graph", lambda g, t0: failing)
    assert main(["verify", "--input", str(k22_file)]) == EXIT_MISMATCH
    assert json.loads(capsys.readouterr().out)["ok"] is False


def test_text_log_format(k22_file, capsys):
    assert main(["count", "--input", str(k22_file), "--log-level", "INFO", "--log-format", "text"]) == EXIT_OK
    err = capsys.readouterr().err
    assert "INFO" in err and "count finished" in err
