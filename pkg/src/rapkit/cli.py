"""Command-line front end: generate, solve, verify, and benchmark.

Exit codes: 0 success (for solve: the output re-verified as feasible),
1 usage or IO problem, 2 infeasible instance, 3 solution rejected by the
verifier.  Reports never trust a solver's own feasibility claim; every
solution is re-checked before being announced.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ear import EarDecomposition, format_ears, solve_ear
from .exact import ExactError, lower_bounds, solve_exact
from .graph_core import BipartiteMultigraph
from .instance import (
    NOMINAL_SCENARIO,
    InfeasibleSolutionError,
    InstanceError,
    InstanceMapping,
    RapInstance,
    Solution,
    balanced_completion,
    check_feasible,
    format_instance,
    format_solution,
    parse_instance,
    parse_solution,
    solution_for,
    uniformize,
    verify_solution,
)
from .lp import build_lp, dump_lp
from .reductions import (
    format_reduced,
    from_set_cover,
    from_snpp,
    gk_family,
    parse_set_cover,
    random_instance,
)
from .rounding import format_trace, solve_lp_round

__all__ = ["RunReport", "cmd_bench", "cmd_gen", "cmd_solve", "cmd_verify", "main"]

ALGOS = ("lp-round", "ear", "exact")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_REJECTED = 3

CSV_COLUMNS = ("instance", "algo", "seed", "cost", "lb", "exact", "ratio", "iters", "ms")


@dataclass(frozen=True)
class RunReport:
    """Outcome of a single solver run.

    ``feasible`` always comes from re-verifying the produced solution,
    never from the solver itself.  ``exact`` and ``ratio`` are absent when
    no reference value is available.
    """

    instance: str
    algo: str
    seed: Optional[int]
    cost: float
    feasible: bool
    iterations: Optional[int]
    wall_ms: float
    lower_bound: float
    exact: Optional[float] = None
    ratio: Optional[float] = None

    def line(self) -> str:
        # wall time deliberately left out: repeated runs must print
        # byte-identical reports
        seed = "-" if self.seed is None else str(self.seed)
        iters = "-" if self.iterations is None else str(self.iterations)
        ratio = "-" if self.ratio is None else f"{self.ratio:.4f}"
        flag = "yes" if self.feasible else "no"
        return (
            f"instance={self.instance} algo={self.algo} seed={seed} "
            f"cost={_num(self.cost)} feasible={flag} iters={iters} "
            f"lb={_num(self.lower_bound)} ratio={ratio}"
        )


def _num(x: float) -> str:
    return f"{int(x)}" if float(x).is_integer() else f"{x:g}"


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return EXIT_USAGE


def _instance_id(path: str, text: str) -> str:
    digest = hashlib.sha256(text.encode()).hexdigest()[:8]
    return f"{Path(path).stem}@{digest}"


def _read_instance(path: str) -> tuple[RapInstance, str]:
    text = Path(path).read_text()
    return parse_instance(text), text


def _completed(inst: RapInstance) -> tuple[Optional[InstanceMapping], RapInstance]:
    if inst.graph.balanced:
        return None, inst
    mapping = balanced_completion(inst)
    return mapping, mapping.instance


def _run_solver(
    work: RapInstance, algo: str, seed: Optional[int], ear_order: str
) -> tuple[Solution, Optional[int], str]:
    """Run one algorithm on a balanced instance.

    Returns the solution, the iteration count when the algorithm has one,
    and the trace text (one line per iteration or per ear; empty for the
    exact solver).
    """
    if algo == "exact":
        return solve_exact(work), None, ""
    if algo == "ear":
        decs: list[EarDecomposition] = []
        sol = solve_ear(work, ear_order=ear_order, trace=decs)
        text = "\n".join(format_ears(d) for d in decs)
        return sol, None, text + ("\n" if text else "")
    sol, rtrace = solve_lp_round(work, seed=seed if seed is not None else 0)
    return sol, rtrace.iterations, format_trace(rtrace)


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        inst, text = _read_instance(args.infile)
    except OSError as exc:
        return _fail(f"cannot read instance: {exc}")
    except InstanceError as exc:
        return _fail(str(exc))
    if args.algo == "ear" and any(c != 1 for c in inst.costs):
        print(
            "warning: ear minimizes cardinality; costs are not all one",
            file=sys.stderr,
        )

    mapping, work = _completed(inst)
    seed = args.seed
    if args.algo == "lp-round" and seed is None:
        seed = 0
    try:
        sol, iters, trace_text = _run_solver(work, args.algo, seed, args.ear_order)
    except InstanceError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ExactError, ValueError) as exc:
        return _fail(str(exc))

    try:
        verify_solution(work, sol)
        feasible = True
    except InfeasibleSolutionError as exc:
        print(f"solver output rejected: {exc}", file=sys.stderr)
        feasible = False
    lb = lower_bounds(inst)
    ratio = sol.cost / lb if lb > 0 else None
    report = RunReport(
        instance=_instance_id(args.infile, text),
        algo=args.algo,
        seed=seed,
        cost=sol.cost,
        feasible=feasible,
        iterations=iters,
        wall_ms=0.0,
        lower_bound=lb,
        ratio=ratio,
    )

    try:
        if args.out:
            chosen = mapping.decode(sol.edge_ids) if mapping else sol.edge_ids
            Path(args.out).write_text(format_solution(chosen))
        if args.trace:
            Path(args.trace).write_text(trace_text)
        if args.dump_lp:
            target = work
            if args.algo == "lp-round" and work.vulnerable and not work.uniform:
                target = uniformize(work).instance
            Path(args.dump_lp).write_text(dump_lp(build_lp(target)))
    except OSError as exc:
        return _fail(f"cannot write output: {exc}")

    print(report.line())
    return EXIT_OK if feasible else EXIT_REJECTED


def _gen_snpp(n: int, edge_prob: float, seed: int) -> RapInstance:
    """Random nice-path gadget: sample bipartite graphs until one is
    robustly feasible with the fixed terminals t0 and r0."""
    if n < 1:
        raise InstanceError("need at least one node per side")
    if not 0.0 <= edge_prob <= 1.0:
        raise InstanceError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        edges = [
            (r, t) for r in range(n) for t in range(n) if rng.random() < edge_prob
        ]
        h = BipartiteMultigraph(n, n, edges)
        inst = from_snpp(h, ("t", 0), ("r", 0))
        if check_feasible(inst):
            return inst
    raise InstanceError("could not generate feasible instance")


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        if args.family == "gk":
            if args.k is None:
                return _fail("gk family needs --k")
            inst = gk_family(args.k)
            text = format_instance(inst)
        elif args.family == "setcover":
            if args.infile is None:
                return _fail("setcover family needs --in <setcover file>")
            sc = parse_set_cover(Path(args.infile).read_text())
            ri = from_set_cover(sc, args.variant)
            inst = ri.rap
            text = format_reduced(ri)
        elif args.family == "snpp":
            if args.n is None:
                return _fail("snpp family needs --n")
            inst = _gen_snpp(args.n, args.edge_prob, args.seed)
            text = format_instance(inst)
        else:
            if args.n_r is None or args.n_t is None:
                return _fail("random family needs --n-r and --n-t")
            inst = random_instance(
                args.n_r,
                args.n_t,
                args.edge_prob,
                args.vuln_prob,
                (args.cost_lo, args.cost_hi),
                seed=args.seed,
            )
            text = format_instance(inst)
    except OSError as exc:
        return _fail(f"cannot read input: {exc}")
    except InstanceError as exc:
        return _fail(str(exc))

    counts = f"{inst.graph.n_r + inst.graph.n_t} nodes, {inst.graph.n_edges} edges"
    try:
        if args.out:
            Path(args.out).write_text(text)
            print(counts)
        else:
            sys.stdout.write(text)
            print(counts, file=sys.stderr)
    except OSError as exc:
        return _fail(f"cannot write output: {exc}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        inst, _ = _read_instance(args.instance)
        ids = parse_solution(Path(args.solution).read_text())
        mapping, work = _completed(inst)
        work_ids = mapping.encode(ids) if mapping else ids
        sol = solution_for(work, work_ids)
    except OSError as exc:
        return _fail(f"cannot read input: {exc}")
    except InstanceError as exc:
        return _fail(str(exc))

    try:
        cert = verify_solution(work, sol)
    except InfeasibleSolutionError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_REJECTED
    for f in sorted(cert.matchings):
        name = "nominal" if f == NOMINAL_SCENARIO else f"e{f}"
        pm = cert.matchings[f]
        if mapping:
            # report in the caller's edge ids, not the completion's
            pm = mapping.decode(pm)
        matched = ",".join(f"e{e}" for e in sorted(pm))
        print(f"scenario {name}: matching {matched}")
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    """Either a single integer or an inclusive range ``a..b``."""
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
        if hi < lo:
            raise ValueError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _bench_one(
    label: str,
    inst: Optional[RapInstance],
    algo: str,
    seed: int,
    lb: Optional[float],
    exact_cost: Optional[float],
) -> dict[str, str]:
    row = {col: "" for col in CSV_COLUMNS}
    row["instance"] = label
    row["algo"] = algo
    row["seed"] = str(seed)
    if lb is not None:
        row["lb"] = _num(lb)
    if exact_cost is not None:
        row["exact"] = _num(exact_cost)
    if inst is None:
        return row
    start = time.perf_counter()
    try:
        mapping, work = _completed(inst)
        sol, iters, _ = _run_solver(work, algo, seed, "lowest")
        verify_solution(work, sol)
    except Exception:
        # failed runs keep their row with the result cells blank
        row["ms"] = f"{(time.perf_counter() - start) * 1000:.1f}"
        return row
    row["ms"] = f"{(time.perf_counter() - start) * 1000:.1f}"
    row["cost"] = _num(sol.cost)
    if iters is not None:
        row["iters"] = str(iters)
    reference = exact_cost if exact_cost is not None else lb
    if reference:
        row["ratio"] = f"{sol.cost / reference:.4f}"
    return row


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        manifest_text = Path(args.manifest).read_text()
    except OSError as exc:
        return _fail(f"cannot read manifest: {exc}")
    try:
        seeds = _parse_seeds(args.seeds)
    except ValueError as exc:
        return _fail(str(exc))

    base = Path(args.manifest).parent
    entries: list[tuple[str, str]] = []
    for raw in manifest_text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ALGOS:
            return _fail(f"expected '<instance path> <algo>', got {raw!r}")
        entries.append((parts[0], parts[1]))

    # per-instance work shared by all of its rows
    loaded: dict[str, Optional[RapInstance]] = {}
    lbs: dict[str, Optional[float]] = {}
    exacts: dict[str, Optional[float]] = {}
    for label, _ in entries:
        if label in loaded:
            continue
        try:
            inst, _ = _read_instance(str(base / label))
        except (OSError, InstanceError):
            loaded[label], lbs[label], exacts[label] = None, None, None
            continue
        loaded[label] = inst
        try:
            lbs[label] = lower_bounds(inst)
        except Exception:
            lbs[label] = None
        try:
            exacts[label] = solve_exact(inst).cost
        except Exception:
            exacts[label] = None

    tasks = [
        (label, algo, seed) for (label, algo) in entries for seed in seeds
    ]

    def run(task: tuple[str, str, int]) -> dict[str, str]:
        label, algo, seed = task
        return _bench_one(label, loaded[label], algo, seed, lbs[label], exacts[label])

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(task) for task in tasks]
    rows.sort(key=lambda row: (row["instance"], row["algo"], int(row["seed"])))

    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    try:
        if args.out:
            Path(args.out).write_text(out.getvalue())
        else:
            sys.stdout.write(out.getvalue())
    except OSError as exc:
        return _fail(f"cannot write output: {exc}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage problems exit with code 1, matching the documented contract
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rap", description="Robust assignment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an instance file")
    solve.add_argument("--algo", choices=ALGOS, required=True)
    solve.add_argument("--in", dest="infile", required=True, metavar="FILE")
    solve.add_argument("--seed", type=int, help="rounding seed (lp-round only)")
    solve.add_argument("--out", metavar="FILE", help="write the solution here")
    solve.add_argument("--trace", metavar="FILE", help="write the iteration trace here")
    solve.add_argument(
        "--ear-order",
        default="lowest",
        metavar="ORDER",
        help="ear exploration order: lowest or random:<seed>",
    )
    solve.add_argument(
        "--dump-lp", metavar="FILE", help="write the relaxation in LP format"
    )
    solve.set_defaults(func=cmd_solve)

    gen = sub.add_parser("gen", help="generate an instance")
    gen.add_argument(
        "--family", choices=("setcover", "gk", "snpp", "random"), required=True
    )
    gen.add_argument("--out", metavar="FILE", help="write the instance here")
    gen.add_argument("--k", type=int, help="gk: number of paths")
    gen.add_argument("--variant", choices=("basic", "uniform_weighted", "uniform_card"),
                     default="basic", help="setcover: reduction variant")
    gen.add_argument("--in", dest="infile", metavar="FILE",
                     help="setcover: cover instance to encode")
    gen.add_argument("--n", type=int, help="snpp: nodes per side")
    gen.add_argument("--n-r", type=int, help="random: r-side size")
    gen.add_argument("--n-t", type=int, help="random: t-side size")
    gen.add_argument("--edge-prob", type=float, default=0.5)
    gen.add_argument("--vuln-prob", type=float, default=0.5)
    gen.add_argument("--cost-lo", type=int, default=1)
    gen.add_argument("--cost-hi", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_gen)

    verify = sub.add_parser("verify", help="check a solution file")
    verify.add_argument("instance", metavar="INSTANCE")
    verify.add_argument("solution", metavar="SOLUTION")
    verify.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="run a manifest of instances")
    bench.add_argument("manifest", metavar="MANIFEST",
                       help="lines of '<instance path> <algo>'")
    bench.add_argument("--seeds", default="0..0", metavar="A..B",
                       help="inclusive seed range, or a single seed")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--out", metavar="FILE", help="write the CSV here")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
