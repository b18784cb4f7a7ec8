"""Command line entry points.

  voxagent serve --config cfg.json --port 8080 [--text-mode]
  voxagent eval mcq --data items.jsonl --policy websearch|none --out report.json
  voxagent eval judge --data items.jsonl --judge-endpoint URL
  voxagent eval jga --data corpus.jsonl
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import SessionConfig
from .controller import Controller
from .llm import HttpLlmClient


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voxagent")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the session API server")
    serve.add_argument("--config", default="", help="path to a session config JSON file")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--text-mode", action="store_true",
                       help="disable ASR/TTS regardless of config")

    ev = sub.add_parser("eval", help="run an evaluation harness")
    ev_sub = ev.add_subparsers(dest="eval_command", required=True)

    def add_llm_flags(p):
        p.add_argument("--endpoint", default="http://localhost:8000/v1",
                       help="chat-completions endpoint for the agent LLM")
        p.add_argument("--model", default="default")
        p.add_argument("--out", default="", help="write the report JSON here")

    mcq = ev_sub.add_parser("mcq", help="multiple-choice accuracy")
    mcq.add_argument("--data", required=True)
    mcq.add_argument("--policy", choices=["websearch", "none"], default="none")
    add_llm_flags(mcq)

    judge = ev_sub.add_parser("judge", help="judge-scored open-ended QA")
    judge.add_argument("--data", required=True)
    judge.add_argument("--judge-endpoint", required=True)
    judge.add_argument("--judge-model", default="default")
    add_llm_flags(judge)

    jga = ev_sub.add_parser("jga", help="joint goal accuracy over a dialogue corpus")
    jga.add_argument("--data", required=True)
    add_llm_flags(jga)

    return parser


def _emit(report, out_path: str) -> None:
    if out_path:
        report.save(out_path)
        print(f"report written to {out_path}")
    print(f"{report.metric}: {report.value:.4f} over {report.n_items} items")
    if report.excluded:
        print(f"excluded: {', '.join(report.excluded)}")
    for domain, value in report.breakdown.items():
        print(f"  {domain}: {value:.4f}")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .server import create_app

        config = SessionConfig.from_file(args.config) if args.config else SessionConfig()
        controller = Controller(text_mode=args.text_mode)
        app = create_app(controller, default_config=config)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    llm = HttpLlmClient(endpoint=args.endpoint, model=args.model)
    if args.eval_command == "mcq":
        from .evals import load_mcq_dataset, run_mcq_eval

        report = run_mcq_eval(load_mcq_dataset(args.data), llm,
                              web_search_policy=args.policy == "websearch")
    elif args.eval_command == "judge":
        from .evals import load_open_dataset, run_judge_eval

        judge_llm = HttpLlmClient(endpoint=args.judge_endpoint, model=args.judge_model)
        report = run_judge_eval(load_open_dataset(args.data), llm, judge_llm)
    else:
        from .evals import run_jga_eval

        report = run_jga_eval(args.data, llm)
    _emit(report, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
