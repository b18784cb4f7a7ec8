"""Evaluation harnesses: MCQ accuracy, judge-scored QA, and JGA."""

from .jga import run_jga_eval
from .judge import OpenItem, judge_answer, load_open_dataset, parse_judge_score, run_judge_eval
from .mcq import McqItem, extract_mcq_answer, load_mcq_dataset, render_mcq_question, run_mcq_eval
from .report import EvalReport

__all__ = [
    "EvalReport",
    "McqItem",
    "OpenItem",
    "extract_mcq_answer",
    "judge_answer",
    "load_mcq_dataset",
    "load_open_dataset",
    "parse_judge_score",
    "render_mcq_question",
    "run_jga_eval",
    "run_judge_eval",
    "run_mcq_eval",
]
