import io
import json

import numpy as np
import pytest

from mcidtest.chain import simulate
from mcidtest.cli import main
from mcidtest.instances import far_pair, two_block_chain
from mcidtest.io import format_matrix, format_trajectory, parse_matrix, parse_trajectory
from mcidtest.errors import ParseError
from mcidtest.testing import trajectory_length

from conftest import data_path

EPS = 0.3


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.fixture
def chain_files(tmp_path):
    P = two_block_chain(8)
    Q = far_pair(P, [list(range(4)), list(range(4, 8))], EPS)
    m = trajectory_length(8, EPS)
    paths = {"matrix": tmp_path / "P.txt", "same": tmp_path / "same.txt",
             "far": tmp_path / "far.txt", "empty": tmp_path / "empty.txt"}
    paths["matrix"].write_text(format_matrix(P))
    paths["same"].write_text(format_trajectory(simulate(P, 0, m, 11)))
    paths["far"].write_text(format_trajectory(simulate(Q, 0, m, 11)))
    paths["empty"].write_text("")
    return paths


class TestFormats:
    def test_matrix_round_trip(self):
        P = parse_matrix(open(data_path("block4.txt")).read())
        assert parse_matrix(format_matrix(P)) == P

    def test_trajectory_round_trip(self):
        w = simulate(two_block_chain(4), 0, 50, 1)
        assert np.array_equal(parse_trajectory(format_trajectory(w)).states, w.states)

    @pytest.mark.parametrize("text", ["", "2\n1 0\n", "x\n", "2\n1 0\n0 a\n", "2\n1 0 0\n0 1\n"])
    def test_bad_matrix(self, text):
        with pytest.raises(ParseError):
            parse_matrix(text)

    @pytest.mark.parametrize("text", ["", "0\n1\n", "#n=2\n2\n", "#n=2\nx\n"])
    def test_bad_trajectory(self, text):
        with pytest.raises(ParseError):
            parse_trajectory(text)


class TestPartition:
    def test_tight_block(self):
        code, out = run("partition", data_path("block4_tight.txt"), "--beta", "0.05")
        assert code == 0
        assert json.loads(out) == {"beta": 0.05, "high_info": [[0, 1], [2, 3]], "low_info": []}

    def test_uniform(self):
        code, out = run("partition", data_path("uniform4.txt"), "--beta", "0.05")
        assert json.loads(out)["high_info"] == [[0, 1, 2, 3]]

    def test_bad_row_sum(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("2\n0.5 0.6\n0.5 0.4\n")
        assert run("partition", f)[0] == 3

    def test_parse_error(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("2\n0.5 0.5\n")
        assert run("partition", f)[0] == 2

    def test_missing_file(self, tmp_path):
        assert run("partition", tmp_path / "nope.txt")[0] == 2


class TestTest:
    def test_same(self, chain_files):
        code, out = run("test", chain_files["matrix"], chain_files["same"], "--eps", EPS, "--seed", 3)
        assert code == 0 and json.loads(out)["verdict"] == "same"

    def test_far(self, chain_files):
        code, out = run("test", chain_files["matrix"], chain_files["far"], "--eps", EPS, "--seed", 3)
        assert code == 1 and json.loads(out)["verdict"] == "different"

    def test_empty(self, chain_files):
        code, out = run("test", chain_files["matrix"], chain_files["empty"])
        assert code == 1
        assert json.loads(out) == {"verdict": "different", "component": None, "reason": "AllGenerationFailed"}

    def test_size_mismatch(self, chain_files, tmp_path):
        f = tmp_path / "w.txt"
        f.write_text("#n=3\n0\n1\n")
        assert run("test", chain_files["matrix"], f)[0] == 2

    def test_seed_from_environment(self, chain_files, monkeypatch):
        monkeypatch.setenv("MCIDTEST_SEED", "3")
        a = run("test", chain_files["matrix"], chain_files["same"], "--eps", EPS)
        b = run("test", chain_files["matrix"], chain_files["same"], "--eps", EPS, "--seed", 3)
        assert a == b


class TestSimulate:
    def test_swap(self, tmp_path):
        f = tmp_path / "swap.txt"
        f.write_text("2\n0 1\n1 0\n")
        assert run("simulate", f, "--length", 4, "--start", 0) == (0, "#n=2\n0\n1\n0\n1\n")

    def test_repeatable(self):
        a = run("simulate", data_path("uniform4.txt"), "--length", 100, "--seed", 9)
        assert a == run("simulate", data_path("uniform4.txt"), "--length", 100, "--seed", 9)

    def test_output_file(self, tmp_path):
        f = tmp_path / "w.txt"
        assert run("simulate", data_path("uniform4.txt"), "--length", 10, "-o", f)[0] == 0
        assert len(parse_trajectory(f.read_text())) == 10

    def test_bad_start(self):
        assert run("simulate", data_path("uniform4.txt"), "--length", 4, "--start", 7)[0] == 2


class TestOracle:
    def test_sparsest_cut(self):
        code, out = run("oracle", "sparsest-cut", data_path("block4.txt"))
        doc = json.loads(out)
        assert code == 0 and doc["set"] == [0, 1] and doc["value"] == pytest.approx(0.01)

    def test_cheeger(self):
        assert json.loads(run("oracle", "cheeger", data_path("uniform4.txt"))[1])["value"] == pytest.approx(0.5)

    def test_queries(self):
        doc = json.loads(run("oracle", "internal-expansion", data_path("block4.txt"), "--set", "0,1")[1])
        assert doc["value"] == pytest.approx(0.49)
        doc = json.loads(run("oracle", "low-info", data_path("block4.txt"), "--T", "0", "--floor", "0.1")[1])
        assert doc["value"] == pytest.approx(0.51) and doc["holds"] is True
        doc = json.loads(run("oracle", "hitting-time", data_path("uniform4.txt"))[1])
        assert doc["value"] == pytest.approx(4.0)

    def test_bad_set(self):
        assert run("oracle", "internal-expansion", data_path("block4.txt"), "--set", "0,9")[0] == 2


class TestBench:
    def test_zero_trials(self):
        assert run("bench", "--trials", 0)[0] == 2

    def test_bad_only(self):
        assert run("bench", "--only", "12")[0] == 2

    def test_bad_config(self, tmp_path):
        f = tmp_path / "c.json"
        f.write_text(json.dumps({"trials": 5, "colour": 1}))
        assert run("bench", "--config", f)[0] == 2

    def test_subset_passes(self):
        code, out = run("bench", "--only", "1,6", "--config", data_path("bench_default.json"))
        doc = json.loads(out)
        assert code == 0
        assert [c["criterion"] for c in doc["criteria"]] == [1, 6]
        assert all(c["passed"] for c in doc["criteria"])

    def test_identical_across_threads(self):
        a = run("bench", "--only", "9", "--trials", 4, "--threads", 1)
        b = run("bench", "--only", "9", "--trials", 4, "--threads", 3)
        assert a == b
