"""Shared fixtures: the reference instance and its solved planning modes."""

from __future__ import annotations

import pathlib

import pytest

from gridgame import MODES, load_config, run_mode

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
REFERENCE_CONFIG = REPO_ROOT / "examples" / "paper_sec6.cfg"


@pytest.fixture(scope="session")
def ref_config():
    return load_config(str(REFERENCE_CONFIG))


@pytest.fixture(scope="session")
def ref_modes(ref_config):
    """All three planning modes solved once for the whole session."""
    return {mode: run_mode(ref_config, mode) for mode in MODES}
