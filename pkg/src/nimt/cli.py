"""Command-line entry points.

    nimt run --config cfg.json [--out DIR]
    nimt scenario NAME [--teacher rft|gft] [--k K] [--eta ETA] [--seed N] ...
    nimt compare-linear --steps 50 [--out DIR]
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config, parse_config
from .function_space import empirical_l2
from .harness import SCENARIOS, compare_linear
from .logs import fmt, write_iteration_log
from .metrics import bound_monitor, crossings
from .teacher import TeachingAssertionError, run_session

log = logging.getLogger("nimt")


def _k(text: str):
    return float(text) if any(c in text for c in ".eE") else int(text)


def execute(cfg: RunConfig, out_dir=None) -> int:
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    scen, policy, assertions = cfg.build()
    status = "converged"
    try:
        session = run_session(scen, policy, assertions)
    except TeachingAssertionError as exc:
        log.error("%s", exc)
        print(f"assertion failed: {exc}", file=sys.stderr)
        (out / "summary.json").write_text(json.dumps({"status": "assertion_failed", "error": str(exc)}, indent=2) + "\n")
        return 1
    if not session.converged:
        status = "max_iters_reached"

    write_iteration_log(session.records, out / "log.csv")
    points = bound_monitor(session.records, session.eta, session.Lbar0)
    summary = {
        "scenario": scen.name,
        "teacher": policy.kind,
        "k": session.k,
        "seed": policy.seed,
        "status": status,
        "iterations": session.itd,
        "M0": fmt(session.M0),
        "M_final": fmt(session.records[-1].M if session.records else session.M0),
        "epsilon": fmt(session.epsilon),
        "Lbar0": fmt(session.Lbar0),
        "substitutions": session.substitutions,
        "descent_checked": session.descent_checked,
        "bound_crossings": crossings(points),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{scen.name}: {status} after {session.itd} iterations, M = {summary['M_final']} -> {out / 'log.csv'}")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    return execute(cfg, args.out)


def _cmd_scenario(args) -> int:
    overrides = {}
    for key, val in (("eta", args.eta), ("epsilon", args.epsilon), ("max_iters", args.max_iters),
                     ("target_image", args.target), ("init_image", args.init)):
        if val is not None:
            overrides[key] = val
    teacher = {"kind": args.teacher, "k": args.k}
    if args.pool_ratio is not None:
        teacher["pool"] = {"ratio": args.pool_ratio}
    if args.alt is not None:
        teacher["alt"] = {"image": args.alt}
        if args.alt_prob is not None:
            teacher["alt"]["prob"] = args.alt_prob
    raw = {
        "scenario": {"name": args.name, "overrides": overrides},
        "teacher": teacher,
        "seed": args.seed,
        "assertions": {"lemma_descent": args.check, "theorem1": args.check},
    }
    cfg = parse_config(json.dumps(raw))
    return execute(cfg, args.out)


def _cmd_compare_linear(args) -> int:
    cmp = compare_linear(args.steps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["t,x,y,w0,w1,max_gap,M_linear,M_rbf"]
    gaps = cmp.max_gap
    for t in range(1, len(cmp.f_linear)):
        x, y = cmp.taught[t - 1]
        w = cmp.weights[t]
        m_lin = empirical_l2(cmp.f_linear[t], cmp.target_vals)
        m_rbf = empirical_l2(cmp.f_rbf[t], cmp.target_vals)
        lines.append(",".join([str(t), fmt(x[0]), fmt(y), fmt(w[0]), fmt(w[1]), fmt(gaps[t]),
                               fmt(m_lin), fmt(m_rbf)]))
    (out / "compare_linear.csv").write_text("\n".join(lines) + "\n")
    print(f"max |f_linear - <w, (x, 1)>| over {args.steps} steps: {gaps.max():.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nimt", description="Nonparametric iterative machine teaching")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a session from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("scenario", help="run a named scenario")
    s.add_argument("name", choices=SCENARIOS)
    s.add_argument("--teacher", choices=["rft", "gft"], default="gft")
    s.add_argument("--k", type=_k, default=1, help="pack size (int) or ratio of the pool (decimal)")
    s.add_argument("--eta", type=float)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pool-ratio", type=float)
    s.add_argument("--alt")
    s.add_argument("--alt-prob", type=float)
    s.add_argument("--target")
    s.add_argument("--init")
    s.add_argument("--check", action="store_true", help="assert descent and direction inequalities")
    s.add_argument("--out", default="out")
    s.set_defaults(func=_cmd_scenario)

    c = sub.add_parser("compare-linear", help="linear-kernel vs parametric teaching")
    c.add_argument("--steps", type=int, default=50)
    c.add_argument("--out", default="out")
    c.set_defaults(func=_cmd_compare_linear)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
