"""Prompt infiltration: widen a user prompt with narrower ontology terms.

Dictionary anchors are matched against the prompt as token n-grams, longest
span first, and the accepted narrower labels are appended inside a single
``(related: ...)`` suffix. The suffix is recognized and stripped on re-entry,
which makes the operation idempotent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ._kernels import levenshtein
from .model import label_tokens
from .subsume import SubsumptionDictionary

MAX_APPEND_TOTAL = 6
FUZZY_MAX_EDITS = 1
_SUFFIX_RE = re.compile(r"\s*\(related:[^)]*\)\s*$")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs, in order of appearance."""
    return label_tokens(text)


def detokenize(tokens: list[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class TokenizedPrompt:
    text: str
    tokens: tuple[str, ...]


def tokenize_prompt(text: str) -> TokenizedPrompt:
    return TokenizedPrompt(text=text, tokens=tuple(tokenize(text)))


@dataclass(frozen=True)
class AugmentedPrompt:
    """Result of infiltration, keeping the original prompt for evaluation."""

    original: str
    augmented: str
    matched: tuple[str, ...]
    appended: tuple[str, ...]


def strip_suffix(text: str) -> str:
    """Remove a trailing ``(related: ...)`` marker, if present."""
    return _SUFFIX_RE.sub("", text)


def _fuzzy_anchor(key: str, word_count: int, dictionary: SubsumptionDictionary) -> str | None:
    best: tuple[int, str] | None = None
    for anchor in dictionary.entries:
        if len(label_tokens(anchor)) != word_count:
            continue
        dist = levenshtein(key, anchor)
        if dist <= FUZZY_MAX_EDITS and (best is None or (dist, anchor) < best):
            best = (dist, anchor)
    return None if best is None else best[1]


def _match_anchors(tokens: tuple[str, ...], dictionary: SubsumptionDictionary, fuzzy: bool) -> list[str]:
    consumed = [False] * len(tokens)
    matched: list[str] = []
    top = min(dictionary.max_key_word_count, len(tokens))
    for n in range(top, 0, -1):
        for i in range(len(tokens) - n + 1):
            if any(consumed[i : i + n]):
                continue
            key = " ".join(tokens[i : i + n])
            anchor = key if key in dictionary.entries else None
            if anchor is None and fuzzy:
                anchor = _fuzzy_anchor(key, n, dictionary)
            if anchor is None:
                continue
            for j in range(i, i + n):
                consumed[j] = True
            if anchor not in matched:
                matched.append(anchor)
    return matched


def _word_boundary_contains(haystack_norm: str, needle_norm: str) -> bool:
    return f" {needle_norm} " in f" {haystack_norm} "


def infiltrate(
    text: str,
    dictionary: SubsumptionDictionary,
    fuzzy: bool = False,
    bare: bool = False,
    max_append_total: int = MAX_APPEND_TOTAL,
) -> AugmentedPrompt:
    """Append narrower terms for every dictionary anchor found in ``text``.

    Longer anchors win overlaps; each prompt token feeds at most one anchor.
    Terms already present in the prompt (on token boundaries, case folded)
    are skipped, as are duplicates, and at most ``max_append_total`` terms
    are appended. With ``bare=True`` the terms are appended as plain words
    instead of the ``(related: ...)`` marker. With ``fuzzy=True`` an n-gram
    also matches an anchor of the same word count within one edit.
    """
    core = strip_suffix(text)
    prompt = tokenize_prompt(core)
    matched = _match_anchors(prompt.tokens, dictionary, fuzzy)
    core_norm = detokenize(list(prompt.tokens))
    appended: list[str] = []
    appended_norms: set[str] = set()
    for anchor in matched:
        for term in dictionary.entries[anchor]:
            if len(appended) >= max_append_total:
                break
            term_norm = detokenize(tokenize(term))
            if not term_norm or term_norm in appended_norms:
                continue
            if _word_boundary_contains(core_norm, term_norm):
                continue
            appended.append(term)
            appended_norms.add(term_norm)
        if len(appended) >= max_append_total:
            break
    if not appended:
        return AugmentedPrompt(
            original=text, augmented=text, matched=tuple(matched), appended=()
        )
    base = core.rstrip()
    if bare:
        augmented = f"{base} {' '.join(appended)}" if base else " ".join(appended)
    else:
        augmented = f"{base} (related: {', '.join(appended)})"
    return AugmentedPrompt(
        original=text,
        augmented=augmented,
        matched=tuple(matched),
        appended=tuple(appended),
    )
