import csv
import io
import json
import subprocess
import sys

import pytest

from gatesimp.cli import CSV_HEADER, main, parse_dataset, run_bench


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestGenerate:
    def test_er_large(self, capsys, tmp_path):
        d = run_json(capsys, "generate", "--family", "er", "--n", "10000", "--density", "2", "--seed", "7",
                     "--out", str(tmp_path))
        assert d["m"] == 20000 and d["n"] == 10000
        lines = (tmp_path / "graph.txt").read_text().splitlines()
        assert len(lines) == 20000

    def test_path_fixture(self, capsys, tmp_path):
        d = run_json(capsys, "generate", "--family", "path", "--n", "5", "--out", str(tmp_path))
        assert (d["n"], d["m"], d["diameter"]) == (5, 4, 4)
        assert (tmp_path / "graph.txt").read_text().split("\n")[:4] == ["0 1", "1 2", "2 3", "3 4"]

    def test_deterministic(self, capsys, tmp_path):
        for sub in ("a", "b"):
            run(capsys, "generate", "--family", "sf", "--n", "300", "--density", "3", "--seed", "2",
                "--out", str(tmp_path / sub))
        for name in ("graph.txt", "labels.tsv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_doubled_edges(self, capsys):
        d = run_json(capsys, "generate", "--family", "cycle", "--n", "6", "--doubled-edges")
        assert d["m_doubled"] == 12

    def test_bad_generator(self, capsys):
        code, _, err = run(capsys, "generate", "--family", "er", "--n", "4", "--density", "5")
        assert code == 2 and err

    def test_no_input(self, capsys):
        assert run(capsys, "generate")[0] == 2

    def test_two_inputs(self, capsys, tmp_path):
        assert run(capsys, "generate", "--family", "path", "--n", "3", "--input", str(tmp_path / "x"))[0] == 2

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "generate", "--input", str(tmp_path / "missing.txt"))[0] == 2

    def test_parse_error(self, capsys, tmp_path):
        f = tmp_path / "g.txt"
        f.write_text("1 2\n3\n")
        code, _, err = run(capsys, "generate", "--input", str(f))
        assert code == 2 and "2" in err


class TestDiscover:
    def test_sc(self, capsys, tmp_path):
        d = run_json(capsys, "discover", "--family", "path", "--n", "5", "--epsilon", "3", "--out", str(tmp_path))
        assert d["gates"] == ["2"] and d["size"] == 1
        assert (tmp_path / "gates.txt").read_text() == "gate 3 sc 1\n2\n"

    def test_fs(self, capsys):
        d = run_json(capsys, "discover", "--family", "path", "--n", "5", "--epsilon", "3", "--method", "fs")
        assert d["size"] == 3

    def test_kskip_exact(self, capsys):
        d = run_json(capsys, "discover", "--family", "path", "--n", "5", "--mode", "kskip", "--k", "3",
                     "--method", "exact")
        assert d["size"] == 1 and d["mode"] == "kskip"

    def test_dump_instance(self, capsys, tmp_path):
        f = tmp_path / "inst.txt"
        run_json(capsys, "discover", "--family", "path", "--n", "5", "--epsilon", "3", "--dump-instance", str(f))
        assert f.read_text().splitlines()[0] == "gate 3 2"

    def test_missing_param(self, capsys):
        assert run(capsys, "discover", "--family", "path", "--n", "5")[0] == 2

    def test_fs_bad_epsilon(self, capsys):
        assert run(capsys, "discover", "--family", "path", "--n", "5", "--epsilon", "2", "--method", "fs")[0] == 2

    def test_resource_guard(self, capsys, monkeypatch):
        import gatesimp.verify as verify_mod
        from gatesimp.errors import ResourceGuardError

        def boom(*a, **k):
            raise ResourceGuardError("apsp_max_n", "too big")
        monkeypatch.setattr(verify_mod, "check_gate_cover", boom)
        assert run(capsys, "discover", "--family", "path", "--n", "5", "--epsilon", "3")[0] == 4

    def test_self_check_failure_exit(self, capsys, monkeypatch):
        import gatesimp.gates as gates_mod
        from gatesimp.setcover import GreedyTrace
        monkeypatch.setattr(gates_mod, "greedy_solve", lambda inst: ({1}, GreedyTrace([])))
        assert run(capsys, "discover", "--family", "path", "--n", "5", "--epsilon", "3")[0] == 3

    def test_byte_identical(self, capsys):
        argv = ["discover", "--family", "er", "--n", "300", "--density", "3", "--seed", "5", "--epsilon", "4",
                "--no-timing"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestGateGraph:
    def gates_file(self, tmp_path, text):
        f = tmp_path / "gates.txt"
        f.write_text(text)
        return str(f)

    def test_path_three_gates(self, capsys, tmp_path):
        gf = self.gates_file(tmp_path, "gate 3 exact 3\n0\n1\n2\n")
        d = run_json(capsys, "gategraph", "--family", "path", "--n", "5", "--gates", gf, "--out", str(tmp_path))
        assert (d["edges_stage1"], d["edges_sparsified"], d["removed"]) == (3, 2, 1)
        assert (tmp_path / "gategraph_sparsified.txt").read_text().splitlines()[1:] == ["0 1 1", "1 2 1"]

    def test_single_gate(self, capsys, tmp_path):
        gf = self.gates_file(tmp_path, "gate 3 sc 1\n2\n")
        d = run_json(capsys, "gategraph", "--family", "path", "--n", "5", "--gates", gf)
        assert d["edges_stage1"] == d["edges_sparsified"] == 0

    def test_no_sparsify(self, capsys, tmp_path):
        out = tmp_path / "o"
        d = run_json(capsys, "gategraph", "--family", "path", "--n", "5", "--epsilon", "3", "--no-sparsify",
                     "--out", str(out))
        assert d["sparsify"] == "skipped"
        assert (out / "gategraph_stage1.txt").exists()
        assert not (out / "gategraph_sparsified.txt").exists()

    def test_discovers_when_no_gates_file(self, capsys):
        d = run_json(capsys, "gategraph", "--family", "cycle", "--n", "12", "--epsilon", "3")
        assert d["gates"] >= 1 and d["epsilon"] == 3

    def test_kskip_set_used_at_k_plus_one(self, capsys):
        d = run_json(capsys, "gategraph", "--family", "cycle", "--n", "12", "--mode", "kskip", "--k", "3")
        assert d["epsilon"] == 4


class TestQuery:
    def gates(self, tmp_path):
        f = tmp_path / "gates.txt"
        f.write_text("gate 3 sc 1\n2\n")
        return str(f)

    def test_via_gates(self, capsys, tmp_path):
        d = run_json(capsys, "query", "--family", "path", "--n", "5", "--gates", self.gates(tmp_path),
                     "--u", "0", "--v", "4")
        assert d == {"u": "0", "v": "4", "distance": 4, "route": "VIA_GATES", "witness": ["2", "2"]}

    def test_precomputed(self, capsys, tmp_path):
        d = run_json(capsys, "query", "--family", "path", "--n", "5", "--gates", self.gates(tmp_path),
                     "--u", "0", "--v", "4", "--precompute-balls")
        assert d["distance"] == 4 and d["route"] == "VIA_GATES"

    def test_local(self, capsys, tmp_path):
        d = run_json(capsys, "query", "--family", "path", "--n", "5", "--gates", self.gates(tmp_path),
                     "--u", "0", "--v", "1")
        assert (d["distance"], d["route"]) == (1, "LOCAL")

    def test_unreachable(self, capsys, tmp_path):
        g = tmp_path / "g.txt"
        g.write_text("a b\nb c\nx y\ny z\n")
        d = run_json(capsys, "query", "--input", str(g), "--epsilon", "3", "--u", "a", "--v", "z")
        assert d["distance"] == "UNREACHABLE"

    def test_saved_gategraph(self, capsys, tmp_path):
        gf = self.gates(tmp_path)
        run_json(capsys, "gategraph", "--family", "path", "--n", "5", "--gates", gf, "--out", str(tmp_path))
        d = run_json(capsys, "query", "--family", "path", "--n", "5", "--gates", gf,
                     "--gategraph", str(tmp_path / "gategraph_sparsified.txt"), "--u", "4", "--v", "0")
        assert d["distance"] == 4

    def test_unknown_label(self, capsys, tmp_path):
        assert run(capsys, "query", "--family", "path", "--n", "5", "--epsilon", "3",
                   "--u", "0", "--v", "nope")[0] == 2


class TestVerify:
    def test_pass(self, capsys):
        d = run_json(capsys, "verify", "--family", "sf", "--n", "200", "--density", "2", "--seed", "3",
                     "--epsilon", "3", "--method", "fs", "--no-timing")
        assert d["pass"] and d["authoritative"]
        assert [r["check"] for r in d["reports"]] == ["gate_cover", "recovery_stage1", "recovery_sparsified",
                                                      "sparsify_preserves"]
        assert all(r["elapsed_ms"] == 0 for r in d["reports"])

    def test_failure_exit_code(self, capsys, tmp_path):
        gf = tmp_path / "gates.txt"
        gf.write_text("gate 3 sc 1\n1\n")
        code, out, _ = run(capsys, "verify", "--family", "path", "--n", "5", "--gates", str(gf))
        assert code == 3
        d = json.loads(out)
        assert not d["pass"]
        assert d["reports"][0]["violations"][0] == {"u": 1, "v": 4, "expected": "covered", "observed": "uncovered"}

    def test_sampled(self, capsys):
        d = run_json(capsys, "verify", "--family", "er", "--n", "300", "--density", "3", "--epsilon", "4",
                     "--sample", "20")
        assert d["pass"] and not d["authoritative"]

    def test_kskip(self, capsys):
        d = run_json(capsys, "verify", "--family", "cycle", "--n", "10", "--mode", "kskip", "--k", "3")
        assert d["epsilon"] == 4 and [r["check"] for r in d["reports"]][:2] == ["kskip_cover", "gate_cover"]

    def test_byte_identical(self, capsys):
        argv = ["verify", "--family", "er", "--n", "200", "--density", "3", "--seed", "1", "--epsilon", "3",
                "--no-timing"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestBench:
    def test_row_count(self, capsys):
        code, out, _ = run(capsys, "bench", "--dataset", "er:1000:2", "--dataset", "er:1000:3",
                           "--epsilons", "3,4", "--methods", "sc,fs")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 9
        keys = [(r[0], int(r[5]), r[6]) for r in rows[1:]]
        assert keys == sorted(keys)

    def test_path(self, capsys):
        code, out, _ = run(capsys, "bench", "--dataset", "path:5", "--epsilons", "3", "--no-timing")
        rows = {r["method"]: r for r in csv.DictReader(io.StringIO(out))}
        assert rows["sc"]["gates"] == "1" and rows["fs"]["gates"] == "3"
        assert rows["sc"]["build_ms"] == "0.000"

    def test_verify_column(self, capsys, tmp_path):
        code, _, _ = run(capsys, "bench", "--dataset", "er:300:3:1", "--dataset", "sf:300:2:1",
                         "--epsilons", "3,4", "--verify", "--out", str(tmp_path / "b.csv"))
        assert code == 0
        rows = list(csv.DictReader(open(tmp_path / "b.csv")))
        assert len(rows) == 8 and all(r["verified"] == "true" for r in rows)

    def test_deterministic(self, capsys):
        argv = ["bench", "--dataset", "sf:400:3:2", "--epsilons", "3,5", "--no-timing"]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

    def test_threads_same_rows(self, monkeypatch):
        specs = ["er:200:2:1", "sf:200:2:1", "path:9"]
        serial = run_bench(specs, [3], ["sc", "fs"], timing=False, threads=1)
        parallel = run_bench(specs, [3], ["sc", "fs"], timing=False, threads=2)
        assert serial == parallel

    def test_parse_dataset(self, tmp_path):
        label, g = parse_dataset("cycle:7")
        assert label == "cycle_n7" and g.n == 7
        f = tmp_path / "mini.txt"
        f.write_text("1 2\n")
        assert parse_dataset(f"file:{f}")[0] == "mini"
        with pytest.raises(ValueError):
            parse_dataset("er")

    def test_needs_dataset(self, capsys):
        assert run(capsys, "bench")[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gatesimp", "discover", "--family", "path", "--n", "5",
                          "--epsilon", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["size"] == 1


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["discover", "--method", "bogus"])
    assert exc.value.code == 2
