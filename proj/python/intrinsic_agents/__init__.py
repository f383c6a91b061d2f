"""Multi-agent conversations with intrinsic structured memory."""

import json
import os

from ._core import (
    BackendError,
    Error,
    LoadError,
    ParseError,
    PersistError,
    PreconditionError,
    TemplateError,
    detect_flags,
    format_percent_change,
    rank_sum_test,
    render_judge_prompt,
    select_context,
    token_efficiency,
)
from . import _core

__all__ = [
    "BackendError",
    "Error",
    "LoadError",
    "ParseError",
    "PersistError",
    "PreconditionError",
    "TemplateError",
    "detect_flags",
    "format_percent_change",
    "load_scenario",
    "parse_scorecard",
    "rank_sum_test",
    "render_judge_prompt",
    "render_update_prompt",
    "run_scenario",
    "select_context",
    "token_efficiency",
    "validate_memory",
]


def _path(p):
    return None if p is None else os.fspath(p)


def run_scenario(path, *, seed=None, mode=None, max_turns=None, max_context_tokens=None, out=None):
    """Runs a scenario file and returns its report with the transcript under "transcript"."""
    return json.loads(
        _core._run_scenario(_path(path), seed, mode, max_turns, max_context_tokens, _path(out))
    )


def load_scenario(path):
    """Loads and validates a scenario; returns its self-contained JSON form."""
    return json.loads(_core._load_scenario(_path(path)))


def validate_memory(template, content):
    """Returns (ok, [(json_pointer, kind), ...]) for memory content against a template."""
    return _core._validate_memory(json.dumps(template), json.dumps(content))


def render_update_prompt(role, memory, output):
    return _core._render_update_prompt(role, json.dumps(memory), output)


def parse_scorecard(response):
    return json.loads(_core._parse_scorecard(response))
