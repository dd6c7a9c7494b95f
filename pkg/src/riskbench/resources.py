"""Bundled data files; RISKBENCH_DATA overrides the packaged directory."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

_ENV_VAR = "RISKBENCH_DATA"


def data_root() -> Path:
    override = os.environ.get(_ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("riskbench").joinpath("data")))


def data_path(*parts: str) -> Path:
    path = data_root().joinpath(*parts)
    if not path.exists():
        raise FileNotFoundError(f"bundled data file not found: {path}")
    return path
