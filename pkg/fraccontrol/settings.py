"""Umgebungsvariablen von fracctl."""
import os

import numpy as np

DEFAULT_SEED = 20240917
DEFAULT_LANG = "de"


def seed_from_env() -> int:
    raw = os.environ.get("FRACCTL_SEED")
    try:
        return int(raw) if raw else DEFAULT_SEED
    except ValueError:
        return DEFAULT_SEED


def make_rng() -> np.random.Generator:
    return np.random.default_rng(seed_from_env())


def language_from_env() -> str:
    return os.environ.get("FRACCTL_LANG") or DEFAULT_LANG


def jobs_from_env() -> int:
    raw = os.environ.get("FRACCTL_JOBS")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1
