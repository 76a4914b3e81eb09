"""Command-line surface: board generation, self-play batches, transcript
evaluation, report bundles with figures, belief demos and the play server."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from gridtalk.agents import POLICY_NAMES, make_agent
from gridtalk.core import Role, Scenario
from gridtalk.errors import GameError
from gridtalk.evaluation import (
    evaluate_policy,
    filter_dataset,
    read_transcripts,
    write_transcripts,
)
from gridtalk.harness import (
    marginals_demo,
    parse_action_script,
    render_marginals_demo,
    run_batch,
)
from gridtalk.planning import FULL_CONFIG, PipConfig
from gridtalk.scenario_gen import generate_many


def _config_from(path: str | None) -> PipConfig | None:
    if not path:
        return None
    with open(path, encoding="utf-8") as fh:
        return PipConfig.from_json(json.load(fh))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_scenarios_generate(args) -> int:
    scens = generate_many(args.count, args.seed)
    _emit(json.dumps([s.to_json() for s in scens], indent=2), args.out)
    return 0


def cmd_selfplay(args) -> int:
    config = _config_from(args.config)
    scenarios = generate_many(args.n, args.seed)
    seeds = list(range(args.seed, args.seed + args.n))
    batch = run_batch(args.a, args.b, scenarios, seeds,
                      max_turns=args.max_turns, config=config)
    if args.out:
        write_transcripts(args.out, batch.transcripts)
    if args.csv:
        batch.write_csv(args.csv)
    print(json.dumps(batch.to_json(), indent=2))
    return 0


def _load_dataset(path: str):
    transcripts = filter_dataset(read_transcripts(path))
    if not transcripts:
        raise ValueError(f"no evaluable games in {path}")
    return transcripts


def cmd_eval(args) -> int:
    transcripts = _load_dataset(args.data)
    agent = make_agent(args.policy, _config_from(args.config))
    report = evaluate_policy(agent, transcripts, seed=args.seed, resamples=args.resamples)
    if args.out:
        report.write_json(args.out)
        print(f"{report.policy}: mean LL {report.mean_ll:.4f} "
              f"CI [{report.ci[0]:.4f}, {report.ci[1]:.4f}] "
              f"over {report.n_actions} actions -> {args.out}")
    else:
        print(json.dumps(report.to_json(), indent=2))
    if args.csv:
        report.write_csv(args.csv)
    return 0


def cmd_report(args) -> int:
    from gridtalk import figures

    transcripts = _load_dataset(args.data)
    config = _config_from(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not names:
        raise ValueError("no policies given")
    reports = []
    for name in names:
        agent = make_agent(name, config)
        report = evaluate_policy(agent, transcripts, seed=args.seed,
                                 resamples=args.resamples)
        safe = name.replace(":", "-")
        report.write_json(out_dir / f"eval_{safe}.json")
        report.write_csv(out_dir / f"eval_{safe}.csv")
        reports.append(report)
        rank = "n/a" if report.mean_rank is None else f"{report.mean_rank:.2f}"
        print(f"{name}: mean LL {report.mean_ll:.4f} "
              f"CI [{report.ci[0]:.4f}, {report.ci[1]:.4f}] mean rank {rank}")
    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "n_games", "n_actions", "mean_ll",
                         "ci_low", "ci_high", "mean_rank", "illegal_actions"])
        for r in reports:
            writer.writerow([
                r.policy, r.n_games, r.n_actions, f"{r.mean_ll:.6f}",
                f"{r.ci[0]:.6f}", f"{r.ci[1]:.6f}",
                "" if r.mean_rank is None else f"{r.mean_rank:.4f}",
                r.illegal_actions,
            ])
    figures.save_ll_figure(reports, out_dir / "log_likelihood.png")
    figures.save_rank_figure(reports, out_dir / "action_rank.png")
    figures.save_entropy_figure(reports[0], out_dir / "first_step_entropy.png")
    print(f"wrote {len(reports)} reports, summary.csv and 3 figures to {out_dir}")
    return 0


def cmd_marginals(args) -> int:
    with open(args.scenario, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, list):
        data = data[args.index]
    scenario = Scenario.from_json(data)
    config = _config_from(args.config) or FULL_CONFIG
    if args.k is not None:
        config = replace(config, k=args.k)
    if args.unconstrained_prior:
        config = replace(config, constrained_prior=False)
    viewer = Role(args.viewer) if args.viewer else scenario.first_player.other
    actions = parse_action_script(args.actions or "")
    steps = marginals_demo(scenario, actions, viewer, config)
    print(f"beliefs of the {viewer.value} player about the partner\n")
    print(render_marginals_demo(steps))
    if args.figure:
        from gridtalk import figures

        figures.save_marginals_figure(steps, args.figure)
        print(f"\nfigure -> {args.figure}")
    return 0


def resolve_port(port: int | None) -> int:
    if port is not None:
        return port
    return int(os.environ.get("PORT", "8080"))


def cmd_serve(args) -> int:
    import uvicorn

    from gridtalk.service import create_app

    app = create_app(export_path=args.export)
    uvicorn.run(app, host=args.host, port=resolve_port(args.port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridtalk",
        description="two-player grid dialogue game: boards, agents, evaluation, play server",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    scen = sub.add_parser("scenarios", help="board utilities")
    scen_sub = scen.add_subparsers(dest="subcommand", required=True)
    gen = scen_sub.add_parser("generate", help="emit random valid boards as a JSON array")
    gen.add_argument("--count", type=int, default=10)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output path (stdout when omitted)")
    gen.set_defaults(func=cmd_scenarios_generate)

    sp = sub.add_parser("selfplay", help="agent-vs-agent batches on generated boards")
    sp.add_argument("--a", default="pip", help=f"letters-side policy ({', '.join(POLICY_NAMES)})")
    sp.add_argument("--b", default="pip", help="digits-side policy")
    sp.add_argument("--n", type=int, default=10, help="number of games")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-turns", type=int, default=10)
    sp.add_argument("--config", help="planning config JSON path")
    sp.add_argument("--out", help="write transcripts JSONL here")
    sp.add_argument("--csv", help="write per-game stats CSV here")
    sp.set_defaults(func=cmd_selfplay)

    ev = sub.add_parser("eval", help="score a policy against recorded games")
    ev.add_argument("--data", required=True, help="transcripts JSONL")
    ev.add_argument("--policy", required=True)
    ev.add_argument("--config", help="planning config JSON path")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--resamples", type=int, default=1000)
    ev.add_argument("--out", help="report JSON path")
    ev.add_argument("--csv", help="per-action CSV path")
    ev.set_defaults(func=cmd_eval)

    rep = sub.add_parser("report", help="evaluate several policies and render figures")
    rep.add_argument("--data", required=True, help="transcripts JSONL")
    rep.add_argument("--policies", default="pip,pip:noprag,pip:noplan,pip:noinfer,greedy,random")
    rep.add_argument("--config", help="planning config JSON path")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--resamples", type=int, default=1000)
    rep.add_argument("--out-dir", required=True)
    rep.set_defaults(func=cmd_report)

    mg = sub.add_parser("marginals", help="belief matrices along a scripted conversation")
    mg.add_argument("--scenario", required=True, help="scenario JSON path (object or array)")
    mg.add_argument("--index", type=int, default=0, help="index when the file is an array")
    mg.add_argument("--actions", default="", help="comma-separated script, e.g. 'blue,yes'")
    mg.add_argument("--viewer", choices=[r.value for r in Role],
                    help="which player's beliefs to show (default: the first listener)")
    mg.add_argument("--config", help="planning config JSON path")
    mg.add_argument("--k", type=int, help="override the pragmatic depth")
    mg.add_argument("--unconstrained-prior", action="store_true",
                    help="drop the shared-goal-cell prior constraint")
    mg.add_argument("--figure", help="also render the matrices to this PNG")
    mg.set_defaults(func=cmd_marginals)

    sv = sub.add_parser("serve", help="HTTP play service")
    sv.add_argument("--port", type=int, default=None, help="default: $PORT or 8080")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--export", help="append finished games to this JSONL file")
    sv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GameError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
