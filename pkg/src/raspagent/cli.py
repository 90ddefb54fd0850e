"""Command-line entry point.

Exit codes: 0 success, 1 validation errors or failed team run,
2 configuration/usage errors, 3 provider or transport errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path

from . import simlint
from .agentcore import PROVIDER_ERROR, ChatCompletionsProvider, ReplayProvider, write_transcripts
from .crews import TABLE_TOOLS, Session, load_config, run_combined, run_research_team, run_setup_team, tool_registry
from .crews.toolbox import invoke_tool
from .errors import ConfigurationError, LiteratureError, ProviderError, RaspagentError
from .evalbench.benchmark import load_suite, render_tables, run_benchmark
from .tasks import load_task

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_PROVIDER = 0, 1, 2, 3

logger = logging.getLogger("raspagent")


def _provider(args, config):
    if args.replay:
        return ReplayProvider(args.replay)
    return ChatCompletionsProvider.from_env(config.endpoint, config.api_key)


def _exit_for(transcripts, ok: bool) -> int:
    if any(t.terminated_by == PROVIDER_ERROR for t in transcripts):
        return EXIT_PROVIDER
    return EXIT_OK if ok else EXIT_VALIDATION


def _save_run(out: Path, transcripts, memory) -> None:
    write_transcripts(transcripts, out / "transcripts.jsonl")
    (out / "memory.jsonl").write_text(memory.to_jsonl())


def cmd_setup(args, config) -> int:
    request = load_task(args.request)
    out = Path(args.out)
    outcome = run_setup_team(request, config, _provider(args, config), out / "batch")
    _save_run(out, outcome.transcripts, outcome.memory)
    findings = [f for fs in outcome.findings.values() for f in fs]
    sys.stdout.write(simlint.render_report(findings))
    print(f"{len(outcome.folders)} folder(s) in {out / 'batch'}; "
          f"correct={outcome.label.correctly_configured} executable={outcome.label.executable}")
    if outcome.feedback:
        print(f"team failure: {outcome.feedback}")
    return _exit_for(outcome.transcripts, outcome.success and outcome.lint_errors == 0)


def cmd_research(args, config) -> int:
    if args.corpus:
        config = replace(config, corpus_root=Path(args.corpus))
    target = args.doi or args.query
    out = Path(args.out)
    outcome = run_research_team(target, config, _provider(args, config), out)
    _save_run(out, outcome.transcripts, outcome.memory)
    (out / "findings.json").write_text(json.dumps(outcome.findings.to_dict(), indent=2, sort_keys=True) + "\n")
    if outcome.success:
        print(f"force field written to {outcome.bundle_dir} from {', '.join(p.identifier for p in outcome.papers)}")
    else:
        print(f"research failed: {outcome.feedback}")
    return _exit_for(outcome.transcripts, outcome.success)


def cmd_combined(args, config) -> int:
    request = load_task(args.request)
    out = Path(args.out)
    outcome = run_combined(request, config, _provider(args, config), out, source=args.doi)
    transcripts = outcome.all_transcripts()
    _save_run(out, transcripts, outcome.memory)
    if outcome.success:
        print(f"{len(outcome.setup.folders)} folder(s) prepared with extracted/{outcome.research.identifier}")
    else:
        print(f"combined run failed: {outcome.feedback}")
    return _exit_for(transcripts, outcome.success)


def cmd_validate(args, config) -> int:
    task = load_task(args.task) if args.task else None
    findings = []
    for folder in args.folders:
        findings += simlint.validate_folder(folder, task, cutoff_warning=config.cutoff_warning)
    if args.json:
        print(simlint.report_json(findings))
    else:
        sys.stdout.write(simlint.render_report(findings))
        errors = sum(f.is_error for f in findings)
        print(f"{len(args.folders)} folder(s): {errors} error(s), {len(findings) - errors} warning(s)")
    return EXIT_VALIDATION if any(f.is_error for f in findings) else EXIT_OK


def cmd_eval(args, config) -> int:
    suite = load_suite(args.suite, config=config if args.config else None)
    out = Path(args.out or datetime.now().strftime("raspagent-eval-%Y%m%d-%H%M%S"))
    report = run_benchmark(suite, args.reps, out)
    sys.stdout.write(render_tables(report))
    print(f"results in {out / 'results.jsonl'}")
    return EXIT_PROVIDER if report.provider_errors else EXIT_OK


def _parse_tool_args(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigurationError(f"tool arguments are key=value pairs, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def cmd_tools(args, config) -> int:
    session = Session(config, args.workspace)
    registry = tool_registry(config, session)
    if not args.name:
        for name in registry.names():
            marker = "*" if name in TABLE_TOOLS else " "
            print(f"{marker} {name}: {registry.get(name).schema.description}")
        return EXIT_OK
    if args.name not in registry:
        print(f"unknown tool {args.name!r}", file=sys.stderr)
        return EXIT_USAGE
    result = invoke_tool(registry, args.name, _parse_tool_args(args.args))
    print(result.text)
    return EXIT_VALIDATION if result.is_error else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raspagent", description="Agent teams that set up RASPA simulations.")
    parser.add_argument("--config", help="team configuration file (YAML or JSON)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="run the experiment setup team")
    p.add_argument("--request", required=True)
    p.add_argument("--replay", help="replay script instead of a live model")
    p.add_argument("--out", default="raspagent-setup")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("research", help="run the research team on a paper")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--query")
    target.add_argument("--doi")
    p.add_argument("--replay")
    p.add_argument("--corpus", help="fixture corpus directory")
    p.add_argument("--out", default="raspagent-research")
    p.set_defaults(func=cmd_research)

    p = sub.add_parser("combined", help="research a force field, then set up simulations with it")
    p.add_argument("--request", required=True)
    p.add_argument("--doi", required=True)
    p.add_argument("--replay")
    p.add_argument("--out", default="raspagent-combined")
    p.set_defaults(func=cmd_combined)

    p = sub.add_parser("validate", help="static checks on simulation folders")
    p.add_argument("folders", nargs="+")
    p.add_argument("--task", help="task request the folders were made for")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="repeated-run benchmark")
    p.add_argument("--suite", required=True)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", help="results folder (default: timestamped raspagent-eval-*)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tools", help="invoke one agent tool directly (no name: list tools)")
    p.add_argument("name", nargs="?")
    p.add_argument("args", nargs="*", help="key=value arguments (values parsed as JSON when possible)")
    p.add_argument("--workspace", default=".")
    p.set_defaults(func=cmd_tools)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except (ProviderError, LiteratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (ConfigurationError, RaspagentError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
