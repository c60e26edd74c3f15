"""Ontology alignment: score cross-ontology class pairs for synonymy.

The output of :func:`align` is a list of equivalence mappings, each naming a
source class, a target class, the synonymy score that joined them, and the
literal relation tag ``EQUIV``. Scoring is pluggable; the default
:class:`LexicalScorer` needs no network and is fully deterministic.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import numpy as np

from ._kernels import levenshtein
from .errors import DataError, ProviderError
from .model import ClassIri, Ontology, OntologyClass, label_tokens, normalize_label

DEFAULT_THRESHOLD = 0.9
EQUIV = "EQUIV"
SUBSUMED_BY = "SUBSUMED_BY"
_RELATIONS = (EQUIV, SUBSUMED_BY)
_HEADER = "source_iri\ttarget_iri\tscore\trelation"
# Blocking keeps a cross-ontology pair only when the two classes share a
# token at least this long somewhere in their labels or synonyms.
MIN_BLOCK_TOKEN = 3
# Candidate count above which a concurrent scorer is actually used.
CONCURRENCY_FLOOR = 500


class SynonymyScorer(Protocol):
    """Scores two label strings for synonymy in ``[0, 1]``."""

    max_in_flight: int

    def score(self, text_a: str, text_b: str) -> float: ...


def lexical_score(text_a: str, text_b: str) -> float:
    """Similarity of two labels without any external model.

    Both inputs are normalized first. Equal normal forms score 1.0;
    otherwise the score is the larger of token-set Jaccard overlap and
    edit-distance similarity ``1 - dist / max(len)``.
    """
    a = normalize_label(text_a)
    b = normalize_label(text_b)
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    ta = set(label_tokens(a))
    tb = set(label_tokens(b))
    jaccard = len(ta & tb) / len(ta | tb) if (ta or tb) else 0.0
    edit = 1.0 - levenshtein(a, b) / max(len(a), len(b))
    return max(jaccard, edit)


class LexicalScorer:
    """Default scorer backed by :func:`lexical_score`. Thread-safe, no state."""

    max_in_flight = 1

    def score(self, text_a: str, text_b: str) -> float:
        return lexical_score(text_a, text_b)


class EmbeddingScorer:
    """Scores label pairs by cosine of their embeddings, clamped to [0, 1].

    ``provider`` is any object with ``embed(texts) -> ndarray``; vectors are
    cached per text under a lock so repeated labels cost one call.
    """

    def __init__(self, provider) -> None:
        self._provider = provider
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()
        self.max_in_flight = int(getattr(provider, "max_in_flight", 1))

    def _vector(self, text: str) -> np.ndarray:
        with self._lock:
            hit = self._cache.get(text)
        if hit is not None:
            return hit
        vec = np.asarray(self._provider.embed([text])[0], dtype=np.float64)
        with self._lock:
            self._cache[text] = vec
        return vec

    def score(self, text_a: str, text_b: str) -> float:
        va = self._vector(text_a)
        vb = self._vector(text_b)
        na = float(np.linalg.norm(va))
        nb = float(np.linalg.norm(vb))
        if na == 0.0 or nb == 0.0:
            return 0.0
        cos = float(np.dot(va, vb) / (na * nb))
        return min(1.0, max(0.0, cos))


@dataclass(frozen=True)
class EquivalenceMapping:
    """One accepted cross-ontology pairing."""

    source: ClassIri
    target: ClassIri
    score: float
    relation: str = EQUIV


def _blocking_tokens(cls: OntologyClass) -> set[str]:
    tokens: set[str] = set()
    for text in cls.normalized_texts:
        for tok in label_tokens(text):
            if len(tok) >= MIN_BLOCK_TOKEN:
                tokens.add(tok)
    return tokens


def candidate_pairs(source: Ontology, target: Ontology) -> list[tuple[ClassIri, ClassIri]]:
    """Cross-ontology pairs sharing at least one blocking token, sorted."""
    index: dict[str, set[ClassIri]] = {}
    for iri in target.sorted_iris():
        for tok in _blocking_tokens(target.classes[iri]):
            index.setdefault(tok, set()).add(iri)
    pairs: list[tuple[ClassIri, ClassIri]] = []
    for s_iri in source.sorted_iris():
        hits: set[ClassIri] = set()
        for tok in _blocking_tokens(source.classes[s_iri]):
            hits.update(index.get(tok, ()))
        pairs.extend((s_iri, t_iri) for t_iri in sorted(hits))
    return pairs


def class_score(scorer: SynonymyScorer, a: OntologyClass, b: OntologyClass) -> float:
    """Best scorer value over every (label-or-synonym, label-or-synonym) pair."""
    best = 0.0
    for ta in a.normalized_texts:
        for tb in b.normalized_texts:
            value = scorer.score(ta, tb)
            if value > best:
                best = value
    return best


def _score_pairs(
    scorer: SynonymyScorer,
    source: Ontology,
    target: Ontology,
    pairs: Sequence[tuple[ClassIri, ClassIri]],
) -> list[float]:
    def one(pair: tuple[ClassIri, ClassIri]) -> float:
        return class_score(scorer, source.classes[pair[0]], target.classes[pair[1]])

    workers = int(getattr(scorer, "max_in_flight", 1))
    if workers > 1 and len(pairs) > CONCURRENCY_FLOOR:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(one, pair) for pair in pairs]
            scores = []
            for pair, fut in zip(pairs, futures):
                try:
                    scores.append(fut.result())
                except Exception as exc:
                    raise ProviderError(f"scoring failed for pair {pair[0]} / {pair[1]}: {exc}") from exc
            return scores
    scores = []
    for pair in pairs:
        try:
            scores.append(one(pair))
        except Exception as exc:
            raise ProviderError(f"scoring failed for pair {pair[0]} / {pair[1]}: {exc}") from exc
    return scores


def align(
    source: Ontology,
    target: Ontology,
    scorer: SynonymyScorer | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    use_blocking: bool = True,
) -> list[EquivalenceMapping]:
    """Equivalence mappings between two ontologies.

    Every candidate pair whose class-level score is >= ``threshold`` becomes a
    mapping. A class may appear in any number of mappings. Results are sorted
    by (source, target) and independent of scorer concurrency.
    """
    if scorer is None:
        scorer = LexicalScorer()
    if use_blocking:
        pairs = candidate_pairs(source, target)
    else:
        pairs = [
            (s_iri, t_iri)
            for s_iri in source.sorted_iris()
            for t_iri in target.sorted_iris()
        ]
    scores = _score_pairs(scorer, source, target, pairs)
    return [
        EquivalenceMapping(source=s_iri, target=t_iri, score=score)
        for (s_iri, t_iri), score in zip(pairs, scores)
        if score >= threshold
    ]


def render_mappings(mappings: Iterable[EquivalenceMapping]) -> str:
    """Mapping TSV text: a header line then one row per mapping."""
    lines = [_HEADER]
    for m in mappings:
        lines.append(f"{m.source}\t{m.target}\t{m.score!r}\t{m.relation}")
    return "\n".join(lines) + "\n"


def write_mappings(path: str, mappings: Iterable[EquivalenceMapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_mappings(mappings))


def read_mappings(path: str) -> list[EquivalenceMapping]:
    """Read a mapping TSV produced by :func:`write_mappings`."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    lines = [line for line in raw.split("\n") if line]
    if not lines or lines[0] != _HEADER:
        raise DataError(f"{path}: missing mapping header")
    out: list[EquivalenceMapping] = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataError(f"{path}:{lineno}: expected 4 tab-separated fields")
        src, tgt, score_text, relation = fields
        if relation not in _RELATIONS:
            raise DataError(f"{path}:{lineno}: unknown relation {relation!r}")
        try:
            score = float(score_text)
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad score {score_text!r}") from None
        out.append(EquivalenceMapping(source=src, target=tgt, score=score, relation=relation))
    return out
