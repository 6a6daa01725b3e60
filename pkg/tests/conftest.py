from __future__ import annotations

import sys
from pathlib import Path

import pytest

from tmkit import parse
from tmkit.corpus import corpus_path

sys.path.insert(0, str(Path(__file__).parent))

CORPUS_NAMES = [
    "davidson.tm",
    "mud.tm",
    "ships.tm",
    "caesar_event.tm",
    "caesar_fact.tm",
    "atm_full.tm",
    "atm_simplified.tm",
    "atm_events.tm",
]


@pytest.fixture(scope="session")
def load_corpus():
    cache = {}

    def loader(name: str):
        if name not in cache:
            path = corpus_path(name)
            cache[name] = parse(path.read_text(encoding="utf-8"), name)
        return cache[name]

    return loader
