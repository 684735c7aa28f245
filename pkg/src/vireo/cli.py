"""Command-line interface.

Subcommands cover the pipeline end to end: ``gen`` builds datasets,
``eval`` runs generation + verification, ``tpo`` optimizes prompts,
``report`` renders aggregate tables, ``author`` writes task prompts, and
``stub-server`` hosts the local HTTP stub for integration testing.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import taskgen
from .config import (
    AppConfig,
    build_embedder,
    build_generator,
    build_grounder,
    build_judge,
    load_config,
)
from .core import (
    ConfigError,
    Dataset,
    Difficulty,
    Dimension,
    Task,
    load_dataset,
    read_verdicts,
    save_dataset,
    write_verdicts,
)
from .harness import (
    EvalConfig,
    Strategy,
    aggregate_report,
    render_csv,
    render_json,
    render_markdown,
    run_eval,
)
from .modelio import StubServer
from .tpo import author_prompt, run_tpo, save_trace
from .verify import VerifierDeps

__all__ = ["main"]


def _match_one(name: str, candidates: dict[str, object], what: str):
    """Resolve a name by exact match or unique substring."""
    if name in candidates:
        return candidates[name]
    hits = [key for key in candidates if name in key]
    if len(hits) == 1:
        return candidates[hits[0]]
    if not hits:
        raise ConfigError(
            f"unknown {what} {name!r}; choose from: {', '.join(sorted(candidates))}"
        )
    raise ConfigError(
        f"ambiguous {what} {name!r}; matches: {', '.join(sorted(hits))}"
    )


def _parse_tasks(text: str) -> list[Task]:
    by_value = {t.value: t for t in taskgen.SUPPORTED_TASKS}
    if text.strip() == "all":
        return list(taskgen.SUPPORTED_TASKS)
    tasks = []
    for part in text.split(","):
        part = part.strip()
        if part:
            tasks.append(_match_one(part, by_value, "task"))
    if not tasks:
        raise ConfigError("no tasks selected")
    return tasks


def _parse_difficulties(text: str) -> list[Difficulty]:
    by_value = {d.value: d for d in Difficulty}
    if text.strip() == "all":
        return list(Difficulty)
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(_match_one(part, by_value, "difficulty"))
    if not out:
        raise ConfigError("no difficulties selected")
    return out


def _parse_k_list(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--k must be a comma list of integers, got {text!r}")
    if not ks or any(k < 1 for k in ks):
        raise ConfigError(f"--k values must be positive integers, got {text!r}")
    return ks


def _load_app(args) -> AppConfig:
    return load_config(getattr(args, "config", None))


def _eval_config(app: AppConfig, args) -> EvalConfig:
    cfg = app.eval
    if getattr(args, "strategy", None):
        cfg = replace(cfg, strategy=Strategy(args.strategy))
    if getattr(args, "k", None):
        cfg = replace(cfg, k=args.k)
    if getattr(args, "workers", None):
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_gen(args) -> int:
    tasks = _parse_tasks(args.tasks)
    difficulties = _parse_difficulties(args.difficulties)
    samples = []
    gt_videos = {}
    for task in tasks:
        for difficulty in difficulties:
            batch = taskgen.generate_batch(
                task, difficulty, args.per_task, base_seed=args.seed
            )
            samples.extend(batch)
            if not args.no_gt:
                for sample in batch:
                    gt_videos[sample.id] = taskgen.render_gt_video(sample)
    root = save_dataset(args.out, samples, gt_videos)
    print(f"wrote {len(samples)} samples to {root}")
    return 0


def _clients(app: AppConfig, dataset: Dataset):
    judge = build_judge(app.judge)
    deps = VerifierDeps(
        embedder=build_embedder(app.embedder),
        grounder=build_grounder(app.grounder),
        judge=judge,
        track=app.track,
    )
    generator = build_generator(app.generator, dataset)
    return generator, judge, deps


def _cmd_eval(args) -> int:
    app = _load_app(args)
    dataset = load_dataset(args.dataset)
    cfg = _eval_config(app, args)
    generator, judge, deps = _clients(app, dataset)
    resume = read_verdicts(args.resume) if args.resume else None
    verdicts, reports, _traces = run_eval(
        dataset,
        generator,
        deps=deps,
        cfg=cfg,
        verify_cfg=app.verify,
        tpo_cfg=app.tpo,
        judge=judge,
        resume=resume,
    )
    write_verdicts(verdicts, args.out)
    print(f"wrote {len(verdicts)} verdicts to {args.out}")
    sys.stdout.write(render_markdown(reports))
    return 0


def _cmd_tpo(args) -> int:
    app = _load_app(args)
    dataset = load_dataset(args.dataset)
    generator, judge, _deps = _clients(app, dataset)
    if judge is None:
        raise ConfigError(
            "tpo needs a judge: set [judge] endpoint in the config "
            "(the stub-server subcommand provides one for testing)"
        )
    cfg = app.tpo
    if args.steps:
        cfg = replace(cfg, n_steps=args.steps)
    if args.candidates:
        cfg = replace(cfg, n_candidates=args.candidates)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for sample in dataset:
        trace = run_tpo(sample, generator, judge, cfg)
        trace_dir = out / sample.id
        trace_dir.mkdir(parents=True, exist_ok=True)
        save_trace(trace, trace_dir / "trace.json")
        status = "partial" if trace.partial else "ok"
        print(f"{sample.id}: {status}, final prompt: {trace.final_prompt}")
    return 0


def _cmd_report(args) -> int:
    dataset = load_dataset(args.dataset)
    verdicts = read_verdicts(args.verdicts)
    reports = aggregate_report(verdicts, dataset, _parse_k_list(args.k))
    renderer = {
        "json": render_json,
        "csv": render_csv,
        "md": render_markdown,
    }[args.format]
    _emit(renderer(reports), args.out)
    return 0


def _cmd_author(args) -> int:
    app = _load_app(args)
    dataset = load_dataset(args.dataset)
    judge = build_judge(app.judge)
    wanted = Dimension(args.dimension) if args.dimension else None
    count = 0
    for sample in dataset:
        if wanted is not None and sample.dimension != wanted:
            continue
        scene = taskgen.scene_for(sample.task, sample.difficulty, sample.seed)
        prompt = author_prompt(
            sample.initial,
            sample.target,
            scene.task_text(),
            sample.dimension,
            judge=judge,
        )
        print(f"{sample.id}\t{' '.join(prompt.split())}")
        count += 1
    if count == 0:
        raise ConfigError("no samples match the requested dimension")
    return 0


def _cmd_stub_server(args) -> int:
    with StubServer(host=args.host, port=args.port) as stub:
        print(f"stub server listening on {stub.base_url}")
        print("routes: /chat /embed /ground /generate  (Ctrl-C to stop)")
        try:
            while True:
                stub._thread.join(3600)
        except KeyboardInterrupt:
            print("stopping")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vireo",
        description="Generate, evaluate, and report on video-reasoning tasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a dataset")
    gen.add_argument("--tasks", default="all",
                     help="comma list of task names or unique fragments")
    gen.add_argument("--per-task", type=int, default=1,
                     help="samples per (task, difficulty)")
    gen.add_argument("--difficulties", default="all",
                     help="comma list: easy,medium,hard")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--no-gt", action="store_true",
                     help="skip rendering ground-truth videos")
    gen.set_defaults(func=_cmd_gen)

    ev = sub.add_parser("eval", help="run generation + verification")
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--config", help="INI config file")
    ev.add_argument("--strategy",
                    choices=[s.value for s in Strategy])
    ev.add_argument("--k", type=int, help="generations per sample")
    ev.add_argument("--workers", type=int)
    ev.add_argument("--out", required=True, help="verdicts JSONL path")
    ev.add_argument("--resume", help="existing verdicts JSONL to resume from")
    ev.set_defaults(func=_cmd_eval)

    tp = sub.add_parser("tpo", help="optimize prompts on a dataset")
    tp.add_argument("--dataset", required=True)
    tp.add_argument("--config", help="INI config file")
    tp.add_argument("--steps", type=int)
    tp.add_argument("--candidates", type=int)
    tp.add_argument("--out", required=True, help="trace output directory")
    tp.set_defaults(func=_cmd_tpo)

    rp = sub.add_parser("report", help="aggregate verdicts into tables")
    rp.add_argument("--verdicts", required=True)
    rp.add_argument("--dataset", required=True)
    rp.add_argument("--k", default="1,5", help="comma list of k values")
    rp.add_argument("--format", choices=["json", "csv", "md"], default="json")
    rp.add_argument("--out", help="write to file instead of stdout")
    rp.set_defaults(func=_cmd_report)

    au = sub.add_parser("author", help="write task prompts for a dataset")
    au.add_argument("--dataset", required=True)
    au.add_argument("--dimension",
                    choices=[d.value for d in Dimension])
    au.add_argument("--config", help="INI config file (judge-backed mode)")
    au.set_defaults(func=_cmd_author)

    st = sub.add_parser("stub-server",
                        help="run the local judge/generator stub")
    st.add_argument("--host", default="127.0.0.1")
    st.add_argument("--port", type=int, default=8008)
    st.set_defaults(func=_cmd_stub_server)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors; usage errors
        # are configuration mistakes here.
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # runtime failure: dataset IO, clients, bugs
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
