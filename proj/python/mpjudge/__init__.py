"""Acceptability judgments over linguistic minimal pairs.

The heavy lifting lives in the compiled extension; this wrapper turns its
JSON-string returns into plain dicts and keeps pathlib-friendly signatures.
"""

import json

from ._core import (
    NgramModel,
    ScoredText,
    ab_good_is_a,
    lp,
    mean_lp,
    pen_lp,
    yes_no_prob,
)
from . import _core

__all__ = [
    "NgramModel",
    "ScoredText",
    "ab_good_is_a",
    "analyze",
    "ensemble",
    "judge_readout",
    "load_benchmark",
    "lp",
    "mean_lp",
    "pen_lp",
    "report",
    "run",
    "validate",
    "yes_no_prob",
]


def validate(config_path):
    """Per-stage (check, ok, detail) results for a config file."""
    return _core.validate(str(config_path))


def load_benchmark(path):
    """Minimal pairs of a JSONL benchmark file, as a list of dicts."""
    return json.loads(_core.load_benchmark_json(str(path)))


def judge_readout(model, sentence_good, sentence_bad, measure="lp", alpha=0.8):
    """Score both sentences with `model` and return the verdict as a dict."""
    return json.loads(
        _core.judge_readout_json(model, sentence_good, sentence_bad, measure, alpha)
    )


def run(config_path):
    """Execute all configured (method, template) combinations; returns the manifest."""
    return json.loads(_core.run_json(str(config_path)))


def ensemble(config_path):
    """Mix the template pools after a run; returns the ensemble report."""
    return json.loads(_core.ensemble_json(str(config_path)))


def analyze(config_path):
    """Accuracy and diagnostics over a finished run; returns the analysis."""
    return json.loads(_core.analyze_json(str(config_path)))


def report(config_path):
    """Text-table rendering of a finished run's analysis (and ensemble, if present)."""
    return _core.report_text(str(config_path))
