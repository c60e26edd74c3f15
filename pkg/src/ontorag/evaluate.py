"""Hallucination measurement for the answering pipeline.

Three vector measures compare a model response against a reference text:
cosine similarity (reported as a percentage), raw dot product, and euclidean
distance. "Contextual similarity" references the original user prompt,
"factual accuracy" references the ground-truth answer, and the hallucination
index is the component-wise mean of the two. Batch evaluation runs every
record twice, with and without prompt infiltration, and reports the relative
change of each aggregate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import LlmProvider, answer
from .errors import DataError
from .ragstore import EmbeddingProvider, VectorStore
from .subsume import SubsumptionDictionary

TABLE_CONTEXTUAL = "Contextual Similarity"
TABLE_FACTUAL = "Factual Accuracy"
TABLE_INDEX = "Hallucination Index"
MEASURE_COSINE = "Cosine Similarity"
MEASURE_DOT = "Dot Product"
MEASURE_EUCLIDEAN = "Euclidean Distance"
_SUMMARY_HEADER = "table\tmeasure\twith_subsumptions\twithout_subsumptions\trelative_change_pct"


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DataError("empty vector")
    return arr


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, scaled to a percentage."""
    a = _as_vector(u)
    b = _as_vector(v)
    if a.shape != b.shape:
        raise DataError(f"vector widths differ: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine similarity undefined for a zero-norm vector")
    return float(np.dot(a, b) / (na * nb)) * 100.0


def dot_product(u, v) -> float:
    a = _as_vector(u)
    b = _as_vector(v)
    if a.shape != b.shape:
        raise DataError(f"vector widths differ: {a.shape[0]} vs {b.shape[0]}")
    return float(np.dot(a, b))


def euclidean_distance(u, v) -> float:
    a = _as_vector(u)
    b = _as_vector(v)
    if a.shape != b.shape:
        raise DataError(f"vector widths differ: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class SimilarityReport:
    """The three measures for one response/reference pair."""

    cosine: float
    dot: float
    euclidean: float


def similarity_report(response: str, reference: str, provider: EmbeddingProvider) -> SimilarityReport:
    """Embed both texts with ``provider`` and compare them."""
    rows = provider.embed([response, reference])
    u, v = rows[0], rows[1]
    return SimilarityReport(
        cosine=cosine_similarity(u, v),
        dot=dot_product(u, v),
        euclidean=euclidean_distance(u, v),
    )


def hallucination_index(contextual: SimilarityReport, factual: SimilarityReport) -> SimilarityReport:
    """Component-wise mean of the contextual and factual reports."""
    return SimilarityReport(
        cosine=(contextual.cosine + factual.cosine) / 2.0,
        dot=(contextual.dot + factual.dot) / 2.0,
        euclidean=(contextual.euclidean + factual.euclidean) / 2.0,
    )


def mean_report(reports: Sequence[SimilarityReport]) -> SimilarityReport:
    if not reports:
        raise DataError("cannot average zero reports")
    n = len(reports)
    return SimilarityReport(
        cosine=sum(r.cosine for r in reports) / n,
        dot=sum(r.dot for r in reports) / n,
        euclidean=sum(r.euclidean for r in reports) / n,
    )


def relative_change(with_value: float, without_value: float) -> float:
    """Percent change of ``with_value`` against the ``without_value`` baseline."""
    if without_value == 0.0:
        raise DataError("relative change undefined for a zero baseline")
    return 100.0 * (with_value - without_value) / without_value


def _report_change(with_report: SimilarityReport, without_report: SimilarityReport) -> SimilarityReport:
    return SimilarityReport(
        cosine=relative_change(with_report.cosine, without_report.cosine),
        dot=relative_change(with_report.dot, without_report.dot),
        euclidean=relative_change(with_report.euclidean, without_report.euclidean),
    )


@dataclass(frozen=True)
class EvalRecord:
    """One benchmark item: a prompt and the answer it should produce."""

    prompt: str
    ground_truth: str

    def __post_init__(self) -> None:
        if not self.prompt.strip():
            raise DataError("record prompt must be non-empty")
        if not self.ground_truth.strip():
            raise DataError("record ground_truth must be non-empty")


def read_records(path: str) -> list[EvalRecord]:
    """Read JSONL records of {"prompt", "ground_truth"}."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    records: list[EvalRecord] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: bad record JSON: {exc}") from exc
        if not isinstance(row, dict) or not isinstance(row.get("prompt"), str) or not isinstance(
            row.get("ground_truth"), str
        ):
            raise DataError(f'{path}:{lineno}: record needs string "prompt" and "ground_truth"')
        records.append(EvalRecord(prompt=row["prompt"], ground_truth=row["ground_truth"]))
    if not records:
        raise DataError(f"{path}: no records")
    return records


@dataclass(frozen=True)
class EvalSummary:
    """Aggregate measures over a record batch, with and without infiltration."""

    n_records: int
    augmented_count: int
    with_contextual: SimilarityReport
    without_contextual: SimilarityReport
    with_factual: SimilarityReport
    without_factual: SimilarityReport
    with_index: SimilarityReport
    without_index: SimilarityReport
    contextual_change: SimilarityReport
    factual_change: SimilarityReport
    index_change: SimilarityReport


def evaluate_batch(
    records: Sequence[EvalRecord],
    store: VectorStore,
    provider: EmbeddingProvider,
    llm: LlmProvider,
    dictionary: SubsumptionDictionary,
    k: int = 4,
    fuzzy: bool = False,
    bare: bool = False,
) -> EvalSummary:
    """Run every record through the pipeline twice and aggregate.

    Contextual similarity always references the original prompt, never the
    infiltrated one, so the two arms stay comparable.
    """
    if not records:
        raise DataError("cannot evaluate zero records")
    with_ctx: list[SimilarityReport] = []
    without_ctx: list[SimilarityReport] = []
    with_fact: list[SimilarityReport] = []
    without_fact: list[SimilarityReport] = []
    augmented_count = 0
    for record in records:
        infiltrated = answer(
            store, provider, llm, record.prompt,
            dictionary=dictionary, k=k, fuzzy=fuzzy, bare=bare,
        )
        plain = answer(store, provider, llm, record.prompt, dictionary=None, k=k)
        if infiltrated.augmented != record.prompt:
            augmented_count += 1
        with_ctx.append(similarity_report(infiltrated.response, record.prompt, provider))
        without_ctx.append(similarity_report(plain.response, record.prompt, provider))
        with_fact.append(similarity_report(infiltrated.response, record.ground_truth, provider))
        without_fact.append(similarity_report(plain.response, record.ground_truth, provider))
    with_contextual = mean_report(with_ctx)
    without_contextual = mean_report(without_ctx)
    with_factual = mean_report(with_fact)
    without_factual = mean_report(without_fact)
    with_index = hallucination_index(with_contextual, with_factual)
    without_index = hallucination_index(without_contextual, without_factual)
    return EvalSummary(
        n_records=len(records),
        augmented_count=augmented_count,
        with_contextual=with_contextual,
        without_contextual=without_contextual,
        with_factual=with_factual,
        without_factual=without_factual,
        with_index=with_index,
        without_index=without_index,
        contextual_change=_report_change(with_contextual, without_contextual),
        factual_change=_report_change(with_factual, without_factual),
        index_change=_report_change(with_index, without_index),
    )


def _fmt(x: float) -> str:
    return "%.6g" % x


def render_summary_tsv(summary: EvalSummary) -> str:
    """One rectangular TSV: three tables by three measures."""
    rows = [_SUMMARY_HEADER]
    blocks = [
        (TABLE_CONTEXTUAL, summary.with_contextual, summary.without_contextual, summary.contextual_change),
        (TABLE_FACTUAL, summary.with_factual, summary.without_factual, summary.factual_change),
        (TABLE_INDEX, summary.with_index, summary.without_index, summary.index_change),
    ]
    for table, with_r, without_r, change in blocks:
        for measure, attr in (
            (MEASURE_COSINE, "cosine"),
            (MEASURE_DOT, "dot"),
            (MEASURE_EUCLIDEAN, "euclidean"),
        ):
            rows.append(
                "\t".join(
                    (
                        table,
                        measure,
                        _fmt(getattr(with_r, attr)),
                        _fmt(getattr(without_r, attr)),
                        _fmt(getattr(change, attr)),
                    )
                )
            )
    return "\n".join(rows) + "\n"
