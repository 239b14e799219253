"""Command line entry point (``satcon`` or ``python -m satcon``).

Every subcommand exits with status 0 only when all of its checks agree
with the theory, so it can gate a CI job. Input problems exit with 2.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import harness
from .analysis import verify_proof_identities
from .graph import GraphError, random_connected_graph
from .scenario import ScenarioError, builtin, builtin_scenarios, fig10_graph, parse_scenario


def _load(target):
    path = Path(target)
    if path.is_file():
        return parse_scenario(path.read_text())
    try:
        return builtin(target)
    except KeyError:
        raise ScenarioError(f"{target!r} is neither a scenario file nor a built-in name") from None


def _verdict(flag):
    return "consensus" if flag else "no-consensus"


def cmd_run(args):
    ok = True
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for target in args.targets:
        scn = _load(target).with_overrides(dt=args.dt, t_end=args.t_end, seed=args.seed)
        traj, summary = harness.run(scn)
        p, d = summary.prediction, summary.diagnostics
        ok &= bool(d.agreement_with_prediction)
        status = "PASS" if d.agreement_with_prediction else "FAIL"
        print(f"{status}  {scn.name:<12} predicted={_verdict(p.consensus_expected):<12} "
              f"observed={_verdict(d.consensus_observed):<12} condition={p.condition_value:+.4f} "
              f"threshold={p.threshold:.4f} disagreement={d.final_disagreement:.3e} "
              f"[{summary.wall_time:.1f}s]")
        if out:
            harness.export_csv(traj, out / f"{scn.name}.csv")
            harness.export_summary(summary, out / f"{scn.name}.summary.json")
    return 0 if ok else 1


def cmd_list(args):
    for scn in builtin_scenarios():
        print(f"{scn.name:<8} {scn.model:<6} n={scn.n:<3} t_end={scn.sim.t_end:g}")
    return 0


def cmd_sweep(args):
    regimes = args.regime or list(harness.REGIMES)
    ok = True
    print(f"{'regime':<22}{'runs':>6}{'agree':>7}{'fail':>6}{'max drift':>12}{'lyap':>6}{'box':>5}{'time':>9}")
    for regime in regimes:
        t0 = time.perf_counter()
        recs = harness.oracle_sweep(regime, args.count, seed=args.seed, t_end=args.t_end)
        bad = [r for r in recs if not r.agree]
        lyap = sum(r.lyapunov_violations for r in recs if r.expected)
        box = sum(r.box_invariance_violations for r in recs)
        drift = max(r.drift for r in recs)
        ok &= not bad and lyap == 0 and drift <= 1e-6
        print(f"{regime:<22}{len(recs):>6}{len(recs) - len(bad):>7}{len(bad):>6}{drift:>12.2e}"
              f"{lyap:>6}{box:>5}{time.perf_counter() - t0:>8.1f}s")
        for r in bad:
            print(f"    FAIL seed={args.seed + r.index} n={r.n} condition={r.condition_value:+.4f} "
                  f"threshold={r.threshold:.4f} predicted={_verdict(r.expected)}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_identities(args):
    graphs = {
        "random undirected (n=12)": random_connected_graph(12, 0.3, (0.5, 2.0), seed=args.seed),
        "six-node digraph": fig10_graph(),
    }
    ok = True
    for label, g in graphs.items():
        rep = verify_proof_identities(g, samples=args.samples, seed=args.seed)
        ok &= rep.ok
        print(f"{label}: {'PASS' if rep.ok else 'FAIL'} ({rep.samples} draws)")
        for name in rep.failures:
            if name == "double_sum" and g.directed:
                continue
            print(f"    {name:<22} failures={rep.failures[name]:<5} worst={rep.worst[name]:.2e}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="satcon", description="Simulate saturated-output consensus and check it against the predicted verdict.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate scenarios and compare with the predicted verdict")
    p.add_argument("targets", nargs="+", metavar="SCENARIO", help="scenario file or built-in name")
    p.add_argument("--out", metavar="DIR", help="write <name>.csv and <name>.summary.json here")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--seed", type=int, help="override every seed in the scenario")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("list-builtins", help="list the built-in scenarios")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("sweep", help="randomized prediction-vs-simulation sweep")
    p.add_argument("--count", type=int, default=200, help="scenarios per regime")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-end", type=float, default=500.0)
    p.add_argument("--regime", action="append", choices=harness.REGIMES,
                   help="restrict to one regime (repeatable)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("identities", help="check the algebraic identities behind the proofs")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_identities)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, GraphError, ValueError, OSError) as exc:
        print(f"satcon: error: {exc}", file=sys.stderr)
        return 2
