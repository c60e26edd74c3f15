"""Bundled demo data: two small clinical vocabularies, a handbook, questions."""

from __future__ import annotations

import os
from importlib import resources

FIXTURE_NAMES = (
    "symptoms.obo",
    "clinical_signs.json",
    "handbook.txt",
    "questions.jsonl",
)


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    return (resources.files(__package__) / name).read_text(encoding="utf-8")


def export_fixtures(dest_dir: str) -> list[str]:
    """Copy every bundled fixture into ``dest_dir``; returns the paths written."""
    os.makedirs(dest_dir, exist_ok=True)
    written = []
    for name in FIXTURE_NAMES:
        path = os.path.join(dest_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(fixture_text(name))
        written.append(path)
    return written
