"""Python access to the mission-profiler core."""

import json

from ._core import (
    MissionError,
    assign_group,
    burstiness,
    fleiss_kappa,
    gini_index,
    group_boundaries,
    mtld,
    normalize_tweet,
    normalized_burstiness,
    readability,
    shannon_entropy,
    synth,
)
from ._core import run_pipeline as _run_pipeline


def run_pipeline(config, out="", until="report", force=False):
    """Run the pipeline from a config file; returns the report as a dict (None before the report stage)."""
    return json.loads(_run_pipeline(str(config), str(out), until, force))


__all__ = [
    "MissionError",
    "assign_group",
    "burstiness",
    "fleiss_kappa",
    "gini_index",
    "group_boundaries",
    "mtld",
    "normalize_tweet",
    "normalized_burstiness",
    "readability",
    "run_pipeline",
    "shannon_entropy",
    "synth",
]
