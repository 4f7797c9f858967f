"""Command-line front end: discover, simulate, eval, bench and aba enumerate."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import aba
from .abapc import run_abapc
from .bench import METHODS, bar_chart_svg, make_case, paired_comparison, run_grid, summarise
from .citest import FisherZ, OracleTester
from .dataio import FIXTURES, SemSpec, ancestral_sample, load_fixture, parse_bif, random_dag, read_csv, sem_sample, \
    write_csv
from .errors import CausalAbaError, SolverTimeout
from .facts import mpc_source_facts, read_facts_tsv, write_facts_tsv
from .graph import Dag, cpdag_of, read_edgelist, write_edgelist
from .metrics import evaluate, metrics_json
from .solver import SolverConfig

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_TIMEOUT = 2
WORKERS_ENV = "CAUSALABA_WORKERS"


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    return int(os.environ.get(WORKERS_ENV, "1"))


def _alpha(text: str) -> float:
    a = float(text)
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _read_truth(path) -> tuple[list[str], Dag]:
    names, p = read_edgelist(Path(path).read_text())
    return names, p.to_dag()


# ---------------------------------------------------------------- discover


def cmd_discover(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.method == "oracle":
        if args.graph is None:
            raise CausalAbaError("--method oracle needs --graph")
        names, truth = _read_truth(args.graph)
        tester = OracleTester(truth)
    else:
        if args.data is None:
            raise CausalAbaError(f"--method {args.method} needs --data")
        data = read_csv(Path(args.data))
        names = list(data.names)
        tester = FisherZ(data)
    d = len(names)
    cfg = SolverConfig(args.mode, args.budget, _workers(args))
    log = {"method": args.method, "alpha": args.alpha, "d": d, "variables": names}
    t0 = time.perf_counter()

    if args.method == "random":
        g = random_dag(d, args.edges if args.edges is not None else d, args.seed)
        (out / "graph.edges").write_text(write_edgelist(g, names))
        (out / "cpdag.edges").write_text(write_edgelist(cpdag_of(g), names))
        log["selected"] = [list(e) for e in g.sorted_edges()]
        (out / "run.json").write_text(json.dumps(log, sort_keys=True, indent=1))
        return EXIT_OK

    src = mpc_source_facts(tester, args.alpha)
    (out / "facts.tsv").write_text(write_facts_tsv(src.facts))
    if args.method == "mpc":
        (out / "cpdag.edges").write_text(write_edgelist(src.cpdag, names))
        log["n_tests"] = len(src.facts)
        log["elapsed_s"] = round(time.perf_counter() - t0, 6)
        (out / "run.json").write_text(json.dumps(log, sort_keys=True, indent=1))
        return EXIT_OK

    try:
        run = run_abapc(src.facts, cfg, symmetric=args.symmetric)
    except SolverTimeout as exc:
        log["timeout"] = True
        if exc.log is not None:
            log.update(exc.log.to_dict(timing=True))
        (out / "run.json").write_text(json.dumps(log, sort_keys=True, indent=1))
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    (out / "graph.edges").write_text(write_edgelist(run.selected, names))
    (out / "cpdag.edges").write_text(write_edgelist(cpdag_of(run.selected), names))
    log.update(run.to_dict(timing=args.timing))
    (out / "run.json").write_text(json.dumps(log, sort_keys=True, indent=1))
    return EXIT_OK


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.bif is not None:
        net = load_fixture(args.bif) if args.bif in FIXTURES else parse_bif(Path(args.bif).read_bytes())
        data = ancestral_sample(net, args.n, args.seed)
        truth, names = net.structure, net.names
    else:
        if args.random_dag is None:
            raise CausalAbaError("give --bif or --random-dag")
        edges = args.edges if args.edges is not None else args.random_dag
        truth = random_dag(args.random_dag, edges, args.seed)
        spec = SemSpec.random(truth, args.seed)
        data = sem_sample(spec, args.n)
        names = list(data.names)
    write_csv(data, out / "data.csv")
    (out / "truth.edges").write_text(write_edgelist(truth, names))
    return EXIT_OK


# ---------------------------------------------------------------- eval / bench


def cmd_eval(args) -> int:
    tnames, tp = read_edgelist(Path(args.truth).read_text())
    enames, ep = read_edgelist(Path(args.est).read_text())
    if tnames != enames:
        raise CausalAbaError("truth and estimate use different variables")
    truth = tp.to_dag() if tp.is_dag() else tp
    est = ep.to_dag() if ep.is_dag() else ep
    rep = evaluate(truth, est)
    row = rep.row(dataset=args.dataset, seed=args.seed, method=args.method, elapsed_s=0.0)
    text = metrics_json([row])
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    datasets = [s.strip() for s in args.datasets.split(",") if s.strip()]
    methods = [s.strip() for s in args.methods.split(",") if s.strip()]
    for m in methods:
        if m not in METHODS + ("oracle",):
            raise CausalAbaError(f"unknown method {m!r}")
    for ds in datasets:
        make_case(ds, 0, 2)  # validates the name before the long run

    def progress(r):
        if not args.quiet:
            print(f"{r['dataset']}\t{r['seed']}\t{r['method']}\t{r['nsid_high']}\t{r['elapsed_s']:.2f}",
                  file=sys.stderr)

    rows = run_grid(datasets, range(args.seed0, args.seed0 + args.seeds), methods, args.n, args.alpha,
                    args.budget, progress)
    (out / "metrics.json").write_text(metrics_json(rows) + "\n")
    errors = [{"dataset": r["dataset"], "seed": r["seed"], "method": r["method"], "error": r["error"]}
              for r in rows if r["error"]]
    summary = {"rows": len(rows), "errors": errors, "groups": []}
    for key in ("nsid_high", "nsid_low", "nshd", "f1", "elapsed_s"):
        for (ds, m), (mean, std, cnt) in summarise(rows, key).items():
            summary["groups"].append({"dataset": ds, "method": m, "metric": key, "mean": mean, "std": std, "n": cnt})
    if "abapc" in methods and "mpc" in methods:
        summary["paired"] = []
        for ds in datasets:
            ma, mb, p, n = paired_comparison(rows, ds)
            summary["paired"].append({"dataset": ds, "mean_abapc": ma, "mean_mpc": mb, "p_abapc_worse": p,
                                      "n_pairs": n})
    (out / "summary.json").write_text(json.dumps(_finite(summary), indent=1) + "\n")
    if args.svg:
        bar_chart_svg(summarise(rows, "nsid_high"), out / "nsid_high.svg")
    return EXIT_OK


def _finite(obj):
    """NaN becomes null so the JSON stays standard."""
    if isinstance(obj, float):
        return None if obj != obj else obj
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


# ---------------------------------------------------------------- aba


def cmd_aba(args) -> int:
    if args.framework is not None:
        f = aba.parse(Path(args.framework).read_text())
        d = None
    else:
        if args.dag is None:
            raise CausalAbaError("give --framework or --dag")
        d = args.dag
        if args.facts is not None:
            facts = read_facts_tsv(Path(args.facts).read_text())
            f = aba.build_causal_abaf(d, facts.facts)
        else:
            f = aba.build_dag_abaf(d)
    exts = aba.semantics_enumerate(f, args.semantics, method=args.method)
    for e in exts:
        line = " ".join(sorted(e))
        if d is not None and args.project:
            g = aba.project(e, d)
            line = " ".join(f"{a}->{b}" for a, b in g.sorted_edges()) or "(empty)"
        print(line)
    print(f"# {len(exts)} {args.semantics} extensions", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalaba", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("discover", help="learn a graph from data (or an oracle graph)")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV with a header row")
    src.add_argument("--graph", help="true graph edge list, for --method oracle")
    q.add_argument("--alpha", type=_alpha, default=0.05)
    q.add_argument("--method", choices=("abapc", "mpc", "random", "oracle"), default="abapc")
    q.add_argument("--mode", choices=("hard", "soft"), default="hard", help="solver mode")
    q.add_argument("--budget", type=float, default=600.0, help="time budget in seconds")
    q.add_argument("--workers", type=int, default=None, help=f"solver workers (default ${WORKERS_ENV} or 1)")
    q.add_argument("--symmetric", action="store_true", help="reward d-connected dependence facts when scoring")
    q.add_argument("--edges", type=int, default=None, help="edge count for --method random")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--timing", action="store_true", help="include timings and solver stats in run.json")
    q.add_argument("--out", required=True, help="output directory")
    q.set_defaults(func=cmd_discover)

    q = sub.add_parser("simulate", help="sample a dataset and its true graph")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--bif", help="BIF file or fixture name (" + ", ".join(FIXTURES) + ")")
    src.add_argument("--random-dag", type=int, metavar="D", help="random DAG on D nodes")
    q.add_argument("--edges", type=int, default=None)
    q.add_argument("--sem", choices=("linear-gaussian",), default="linear-gaussian")
    q.add_argument("--n", type=int, default=5000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("eval", help="metrics of an estimate against the truth")
    q.add_argument("--truth", required=True)
    q.add_argument("--est", required=True)
    q.add_argument("--dataset", default="")
    q.add_argument("--method", default="")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", default=None, help="write JSON here instead of stdout")
    q.set_defaults(func=cmd_eval)

    q = sub.add_parser("bench", help="method x seed grid with aggregated metrics")
    q.add_argument("--datasets", default="sem5,sem6,sem8," + ",".join(FIXTURES),
                   help="comma list of fixture names and sem<d>")
    q.add_argument("--methods", default=",".join(METHODS))
    q.add_argument("--seeds", type=int, default=50)
    q.add_argument("--seed0", type=int, default=0)
    q.add_argument("--n", type=int, default=5000)
    q.add_argument("--alpha", type=_alpha, default=0.05)
    q.add_argument("--budget", type=float, default=600.0)
    q.add_argument("--svg", action="store_true", help="also write a bar chart")
    q.add_argument("--quiet", action="store_true")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_bench)

    q = sub.add_parser("aba", help="assumption-based argumentation utilities")
    asub = q.add_subparsers(dest="aba_command", required=True)
    e = asub.add_parser("enumerate", help="list extensions of a framework")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--framework", help="framework file (contrary(a)=c and head <- body lines)")
    src.add_argument("--dag", type=int, metavar="D", help="built-in DAG framework on D nodes")
    e.add_argument("--facts", help="facts TSV added to the --dag framework")
    e.add_argument("--semantics", default="stable",
                   choices=("conflict-free", "admissible", "complete", "grounded", "preferred", "stable"))
    e.add_argument("--method", choices=("naive", "search"), default="naive")
    e.add_argument("--project", action="store_true", help="print graphs instead of assumption sets")
    e.set_defaults(func=cmd_aba)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CausalAbaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
