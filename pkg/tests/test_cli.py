import json
import subprocess
import sys

import pytest

from causalaba.cli import EXIT_INPUT, EXIT_OK, EXIT_TIMEOUT, main
from causalaba.facts import read_facts_tsv
from causalaba.graph import read_edgelist


def test_simulate_discover_eval(tmp_path, capsys):
    sim = tmp_path / "sim"
    assert main(["simulate", "--random-dag", "5", "--edges", "5", "--n", "2000", "--seed", "1",
                 "--out", str(sim)]) == EXIT_OK
    assert (sim / "data.csv").exists()
    names, truth = read_edgelist((sim / "truth.edges").read_text())
    assert len(names) == 5 and truth.n_edges == 5

    run = tmp_path / "run"
    assert main(["discover", "--data", str(sim / "data.csv"), "--out", str(run), "--timing"]) == EXIT_OK
    info = json.loads((run / "run.json").read_text())
    assert info["method"] == "abapc" and info["d"] == 5
    assert "solver" in info
    assert len(read_facts_tsv((run / "facts.tsv").read_text())) == info["n_facts"]
    assert read_edgelist((run / "graph.edges").read_text())[1].is_dag()

    assert main(["eval", "--truth", str(sim / "truth.edges"), "--est", str(run / "cpdag.edges"),
                 "--dataset", "sem5", "--method", "abapc"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["dataset"] == "sem5" and rows[0]["true_edges"] == 5


def test_discover_mpc_and_random(tmp_path):
    sim = tmp_path / "sim"
    main(["simulate", "--bif", "cancer", "--n", "1000", "--out", str(sim)])
    assert main(["discover", "--data", str(sim / "data.csv"), "--method", "mpc", "--out",
                 str(tmp_path / "m")]) == EXIT_OK
    assert (tmp_path / "m" / "cpdag.edges").exists()
    assert main(["discover", "--data", str(sim / "data.csv"), "--method", "random", "--edges", "3",
                 "--out", str(tmp_path / "r")]) == EXIT_OK
    assert read_edgelist((tmp_path / "r" / "graph.edges").read_text())[1].n_edges == 3


def test_discover_oracle(tmp_path):
    g = tmp_path / "g.edges"
    g.write_text("vars: r,wp,wr,ws\nr -> wr\nwp -> wr\nwr -> ws\nr -> ws\n")
    assert main(["discover", "--graph", str(g), "--method", "oracle", "--out", str(tmp_path / "o")]) == EXIT_OK
    est = read_edgelist((tmp_path / "o" / "cpdag.edges").read_text())[1]
    assert est.is_dag() and len(est.directed) == 4


def test_exit_codes(tmp_path):
    assert main(["discover", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x")]) == EXIT_INPUT
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2\n")
    assert main(["discover", "--data", str(bad), "--out", str(tmp_path / "x")]) == EXIT_INPUT
    with pytest.raises(SystemExit):
        main(["discover", "--data", str(bad), "--alpha", "2", "--out", str(tmp_path / "x")])
    sim = tmp_path / "sim"
    main(["simulate", "--bif", "asia", "--n", "5000", "--seed", "1", "--out", str(sim)])
    code = main(["discover", "--data", str(sim / "data.csv"), "--budget", "0.001", "--out", str(tmp_path / "t")])
    assert code == EXIT_TIMEOUT
    assert json.loads((tmp_path / "t" / "run.json").read_text())["timeout"] is True


def test_bench_small(tmp_path):
    out = tmp_path / "b"
    assert main(["bench", "--datasets", "sem5,cancer", "--methods", "abapc,mpc,random", "--seeds", "2",
                 "--n", "1000", "--svg", "--quiet", "--out", str(out)]) == EXIT_OK
    rows = json.loads((out / "metrics.json").read_text())
    assert len(rows) == 2 * 2 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert {p["dataset"] for p in summary["paired"]} == {"sem5", "cancer"}
    assert (out / "nsid_high.svg").read_text().lstrip().startswith("<?xml")
    assert main(["bench", "--datasets", "nope", "--out", str(out)]) == EXIT_INPUT


def test_aba_enumerate(tmp_path, capsys):
    assert main(["aba", "enumerate", "--dag", "3", "--method", "search", "--project"]) == EXIT_OK
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 25 and "(empty)" in out
    fw = tmp_path / "f.aba"
    fw.write_text("contrary(a)=p\ncontrary(b)=q\np <- b\nq <- a\n")
    assert main(["aba", "enumerate", "--framework", str(fw), "--semantics", "preferred"]) == EXIT_OK
    assert capsys.readouterr().out.split() == ["a", "b"]


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "causalaba.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "discover" in out.stdout
