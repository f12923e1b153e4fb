import csv
import json
import math
from fractions import Fraction as F

import pytest

from densecsp import cli
from densecsp.csp import from_json_dict


def run(args):
    return cli.main(args)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


class TestGenerate:
    def test_3xor_constraint_count(self, tmp_path):
        out = tmp_path / "inst.json"
        assert run(["generate", "3xor", "--n", "12", "--d", "5", "--seed", "7",
                    "--output", str(out)]) == 0
        inst = from_json_dict(read_json(out))
        assert inst.num_constraints == 60

    def test_byte_identical_under_fixed_seed(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["generate", "3xor", "--n", "9", "--d", "2", "--seed", "3"]
        run(args + ["--output", str(a)])
        run(args + ["--output", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_birthday_game_counts(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        game_path = tmp_path / "game.json"
        rep_path = tmp_path / "rep.json"
        run(["generate", "fully-dense", "--n", "3", "--q", "2", "--k", "2",
             "--seed", "1", "--output", str(inst_path)])
        run(["generate", "clause-variable", "--input", str(inst_path),
             "--output", str(game_path)])
        game = read_json(game_path)
        assert game["projection"] is True
        assert run(["generate", "birthday-game", "--input", str(game_path),
                    "--k", "2", "--l", "2", "--output", str(rep_path)]) == 0
        rep = read_json(rep_path)
        assert rep["x_count"] == math.comb(game["x_count"], 2)
        assert rep["y_count"] == math.comb(game["y_count"], 2)

    def test_hypergraph_generator(self, tmp_path):
        out = tmp_path / "h.json"
        assert run(["generate", "hypergraph", "--n", "8", "--d", "3",
                    "--edges", "6", "--seed", "2", "--output", str(out)]) == 0
        data = read_json(out)
        assert data["n"] == 8 and data["d"] == 3 and len(data["edges"]) == 6
        assert len({tuple(e) for e in data["edges"]}) == 6
        assert run(["generate", "hypergraph", "--n", "4", "--d", "2",
                    "--edges", "99", "--output", str(out)]) == cli.EXIT_INPUT

    def test_parallel_repetition_file(self, tmp_path, chsh):
        from densecsp.games import to_json_dict

        game_path = tmp_path / "chsh.json"
        game_path.write_text(json.dumps(to_json_dict(chsh)))
        out = tmp_path / "rep.json"
        assert run(["generate", "parallel", "--input", str(game_path),
                    "--r", "2", "--output", str(out)]) == 0
        assert read_json(out)["x_count"] == 4


class TestSolve:
    def test_satisfiable_report(self, tmp_path, capsys):
        inst_path = tmp_path / "inst.json"
        trace_path = tmp_path / "trace.json"
        run(["generate", "fully-dense", "--n", "4", "--q", "2", "--k", "2",
             "--seed", "3", "--satisfiable", "--output", str(inst_path)])
        code = run(["solve", "--input", str(inst_path), "--i", "4",
                    "--oracle", "--output", str(trace_path)])
        assert code == 0
        report = read_json(trace_path)
        assert report["schema_version"] == 1
        # satisfiable: the guarantee floor is q^(-1/i)
        assert report["achieved_value_float"] >= 2 ** (-1 / 4) - 1e-12
        assert report["oracle"]["optimum"] == "1"
        out = capsys.readouterr().out
        assert "achieved value" in out and "oracle" in out

    def test_malformed_input_no_partial_output(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        trace = tmp_path / "trace.json"
        code = run(["solve", "--input", str(bad), "--i", "1",
                    "--output", str(trace)])
        assert code == cli.EXIT_INPUT
        assert not trace.exists()

    def test_guard_exit_code(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        run(["generate", "3xor", "--n", "12", "--d", "5", "--seed", "7",
             "--output", str(inst_path)])
        # sparse instance forces a level beyond the variable cap
        assert run(["solve", "--input", str(inst_path), "--i", "2"]) == cli.EXIT_CAP


class TestRelax:
    def test_plain_and_conditioned(self, tmp_path, capsys):
        from densecsp.hierarchy import check_consistency, solution_from_json_dict

        inst_path = tmp_path / "inst.json"
        run(["generate", "fully-dense", "--n", "3", "--q", "2", "--k", "2",
             "--seed", "4", "--output", str(inst_path)])
        sol_path = tmp_path / "sol.json"
        assert run(["relax", "--input", str(inst_path), "--level", "3",
                    "--exact", "--output", str(sol_path)]) == 0
        mu = solution_from_json_dict(read_json(sol_path))
        assert mu.exact and mu.level == 3
        assert check_consistency(mu) == []
        assert run(["relax", "--input", str(inst_path), "--level", "3",
                    "--sac", "--output", str(sol_path)]) == 0
        out = capsys.readouterr().out
        assert "lambda" in out


class TestExperiment:
    def test_birthday_decay_csv_and_figure(self, tmp_path):
        out = tmp_path / "decay.csv"
        assert run(["experiment", "birthday-decay", "--output", str(out)]) == 0
        with open(out) as fh:
            echo = fh.readline()
            rows = list(csv.DictReader(fh))
        assert echo.startswith("# densecsp") and "seed=0" in echo
        assert len(rows) == 9
        assert rows[0]["value"] == "8/9"
        assert (tmp_path / "decay.png").exists()

    def test_deterministic_csv(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            run(["experiment", "funcbound-sweep", "--trials", "200",
                 "--seed", "5", "--output", str(path), "--no-figure"])
        assert a.read_bytes() == b.read_bytes()

    def test_funcbound_slack_nonnegative(self, tmp_path):
        out = tmp_path / "fb.csv"
        run(["experiment", "funcbound-sweep", "--trials", "500",
             "--seed", "1", "--output", str(out), "--no-figure"])
        with open(out) as fh:
            fh.readline()  # parameter echo
            slacks = [float(r["slack"]) for r in csv.DictReader(fh)]
        assert len(slacks) == 500
        assert min(slacks) >= -1e-9

    def test_json_format(self, tmp_path):
        out = tmp_path / "decay.json"
        run(["experiment", "birthday-decay", "--format", "json",
             "--output", str(out), "--no-figure"])
        data = read_json(out)
        assert data["experiment"] == "birthday-decay"
        assert len(data["rows"]) == 9

    def test_unknown_name_rejected(self, capsys):
        with pytest.raises(SystemExit) as err:
            run(["experiment", "no-such-experiment"])
        assert err.value.code == 2


class TestMetricsOracleDksh:
    def test_metrics_tensor(self, tmp_path):
        src = tmp_path / "t.json"
        src.write_text(json.dumps({"tensor": [[0.5, 0.0], [0.0, 0.5]]}))
        out = tmp_path / "m.json"
        assert run(["metrics", "--input", str(src), "--output", str(out)]) == 0
        data = read_json(out)
        assert data["entropy"] == pytest.approx(math.log(2))
        assert data["total_correlation"] == pytest.approx(math.log(2))
        assert data["mutual_information"] == pytest.approx(math.log(2))

    def test_metrics_probs_with_reference(self, tmp_path):
        src = tmp_path / "p.json"
        src.write_text(json.dumps({"probs": [0.75, 0.25], "reference": [0.5, 0.5]}))
        out = tmp_path / "m.json"
        run(["metrics", "--input", str(src), "--output", str(out)])
        assert read_json(out)["kl_divergence"] == pytest.approx(0.130812, abs=1e-6)

    def test_oracle_passthrough_game(self, tmp_path, chsh):
        from densecsp.games import to_json_dict

        src = tmp_path / "g.json"
        src.write_text(json.dumps(to_json_dict(chsh)))
        out = tmp_path / "o.json"
        assert run(["oracle", "--input", str(src), "--output", str(out)]) == 0
        data = read_json(out)
        assert data["kind"] == "game"
        assert data["value"] == "3/4"

    def test_dksh_command(self, tmp_path, capsys):
        src = tmp_path / "h.json"
        src.write_text(json.dumps(
            {"n": 6, "d": 2, "edges": [[0, 1], [1, 2], [2, 0], [3, 4]]}
        ))
        out = tmp_path / "res.json"
        assert run(["dksh", "--input", str(src), "--k", "3",
                    "--output", str(out)]) == 0
        data = read_json(out)
        assert data["mode"] == "brute-force"
        assert F(data["density"]) == F(2, 3)  # the triangle

    def test_oracle_passthrough_instance(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        run(["generate", "3xor", "--n", "6", "--d", "1", "--seed", "2",
             "--output", str(inst_path)])
        out = tmp_path / "o.json"
        assert run(["oracle", "--input", str(inst_path), "--output", str(out)]) == 0
        data = read_json(out)
        assert data["kind"] == "instance"
        assert data["search_space"] == 64

    def test_hypergraph_oracle_needs_k(self, tmp_path):
        src = tmp_path / "h.json"
        src.write_text(json.dumps({"n": 4, "d": 2, "edges": [[0, 1]]}))
        assert run(["oracle", "--input", str(src)]) == cli.EXIT_INPUT


def test_env_cap_override(tmp_path, monkeypatch):
    inst_path = tmp_path / "inst.json"
    run(["generate", "fully-dense", "--n", "3", "--q", "2", "--k", "2",
         "--seed", "1", "--output", str(inst_path)])
    monkeypatch.setenv("DENSECSP_CAP", "5")
    assert run(["solve", "--input", str(inst_path), "--i", "1"]) == cli.EXIT_CAP
    monkeypatch.setenv("DENSECSP_CAP", "nonsense")
    assert run(["solve", "--input", str(inst_path), "--i", "1"]) == cli.EXIT_INPUT


def test_jobs_do_not_change_experiment_results(tmp_path):
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    base = ["experiment", "funcbound-sweep", "--trials", "600", "--seed", "9",
            "--no-figure"]
    run(base + ["--jobs", "1", "--output", str(serial)])
    run(base + ["--jobs", "4", "--output", str(parallel)])
    # the parameter echo names the jobs count; the data must not
    data = lambda p: p.read_text().splitlines()[1:]
    assert data(serial) == data(parallel)
