"""Bundled example models: the toolkit's reference corpus.

Each ``.tm`` file is a hand encoding of one worked scenario; the
``@N`` annotations number the steps of the scenario walkthrough each
encoding follows, so elements stay traceable to their story.
"""

from __future__ import annotations

from pathlib import Path

_DIR = Path(__file__).resolve().parent


def corpus_path(name: str) -> Path:
    """Absolute path of a bundled corpus file, e.g. ``atm_full.tm``."""
    path = _DIR / name
    if not path.is_file():
        known = ", ".join(p.name for p in corpus_files())
        raise FileNotFoundError(f"no corpus file '{name}' (have: {known})")
    return path


def corpus_files() -> list[Path]:
    """All bundled corpus files, sorted by name."""
    return sorted(_DIR.glob("*.tm"))
