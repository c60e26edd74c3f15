"""Document chunking, embedding, and an exact-scan vector store.

The store is a JSONL file: one header object holding the embedding dimension,
the provider name, and a creation timestamp, then one object per chunk.
Retrieval is a full cosine scan (see ``_kernels``), so results are exact and
reproducible; ties break on ascending chunk id.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
import zlib

from ._kernels import cosine_scan
from .errors import DataError, ProviderError
from .model import label_tokens

CHUNK_SIZE = 512
CHUNK_OVERLAP = 64
ALIGN_WINDOW = 20
MIN_DIM = 8
DEFAULT_DIM = 256
_HASH_SEED = 0x9E3779B9


class EmbeddingProvider(Protocol):
    """Maps a batch of texts to row vectors of a fixed dimension."""

    name: str
    dim: int
    max_in_flight: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def deterministic_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Feature-hashed token counts, L2-normalized.

    Each token lands in the CRC32 bucket ``crc32(token, seed) % dim``. Text
    with no tokens maps to the first basis vector so every embedding has unit
    norm.
    """
    if dim < MIN_DIM:
        raise DataError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    tokens = label_tokens(text)
    if not tokens:
        vec[0] = 1.0
        return vec
    for tok in tokens:
        vec[zlib.crc32(tok.encode("utf-8"), _HASH_SEED) % dim] += 1.0
    return vec / np.linalg.norm(vec)


class DeterministicEmbedder:
    """Offline provider built on :func:`deterministic_embed`."""

    name = "deterministic"
    max_in_flight = 1

    def __init__(self, dim: int = DEFAULT_DIM) -> None:
        if dim < MIN_DIM:
            raise DataError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            out[i] = deterministic_embed(text, self.dim)
        return out


class HttpEmbeddingProvider:
    """Embeddings over HTTP: POST {"model", "input"} -> {"data": [{"embedding"}]}.

    Sends ``Authorization: Bearer $EMBED_API_KEY`` when the variable is set.
    Batches are dispatched through a small thread pool and reassembled in
    input order.
    """

    def __init__(
        self,
        url: str,
        model: str = "embed-default",
        dim: int = DEFAULT_DIM,
        batch_size: int = 64,
        max_in_flight: int = 4,
        timeout: float = 30.0,
    ) -> None:
        if dim < MIN_DIM:
            raise DataError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
        if batch_size < 1:
            raise DataError("batch_size must be >= 1")
        self.url = url
        self.model = model
        self.dim = dim
        self.batch_size = batch_size
        self.max_in_flight = max(1, int(max_in_flight))
        self.timeout = timeout
        self.name = f"http:{url}"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get("EMBED_API_KEY")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _embed_batch(self, batch: Sequence[str]) -> list[list[float]]:
        import requests

        try:
            resp = requests.post(
                self.url,
                json={"model": self.model, "input": list(batch)},
                headers=self._headers(),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderError(f"embedding request to {self.url} failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(
                f"embedding request to {self.url} returned status {resp.status_code}"
            )
        try:
            payload = resp.json()
            rows = [item["embedding"] for item in payload["data"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response from {self.url}: {exc}") from exc
        if len(rows) != len(batch):
            raise ProviderError(
                f"embedding response from {self.url} has {len(rows)} rows for {len(batch)} inputs"
            )
        return rows

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.empty((0, self.dim), dtype=np.float64)
        batches = [
            texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)
        ]
        if self.max_in_flight > 1 and len(batches) > 1:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                results = list(pool.map(self._embed_batch, batches))
        else:
            results = [self._embed_batch(b) for b in batches]
        rows = [row for batch_rows in results for row in batch_rows]
        out = np.asarray(rows, dtype=np.float64)
        if out.ndim != 2 or out.shape[1] != self.dim:
            raise ProviderError(
                f"embedding response from {self.url} has width {out.shape[-1] if out.ndim == 2 else '?'}, expected {self.dim}"
            )
        return out


def chunk_document(text: str, size: int = CHUNK_SIZE, overlap: int = CHUNK_OVERLAP) -> list[tuple[int, str]]:
    """Sliding-window chunks as (grid_offset, chunk_text).

    Window starts advance on a fixed grid of ``size - overlap``; each start is
    then pulled back up to ``ALIGN_WINDOW`` characters to the nearest
    whitespace so chunks begin on word boundaries. Ends stay on the grid, so
    consecutive chunks always overlap. Offsets name the grid position, which
    keeps chunk ids unique even after alignment.
    """
    if size < 1:
        raise DataError("chunk size must be >= 1")
    if not 0 <= overlap < size:
        raise DataError("chunk overlap must satisfy 0 <= overlap < size")
    if not text:
        return []
    step = size - overlap
    chunks: list[tuple[int, str]] = []
    start = 0
    while start < len(text):
        begin = start
        for j in range(start - 1, max(start - ALIGN_WINDOW, 0) - 1, -1):
            if text[j].isspace():
                begin = j + 1
                break
        chunks.append((start, text[begin : min(start + size, len(text))]))
        if start + size >= len(text):
            break
        start += step
    return chunks


@dataclass(frozen=True)
class Chunk:
    id: str
    doc_id: str
    text: str
    embedding: tuple[float, ...]


@dataclass
class VectorStore:
    """In-memory chunk collection with an exact cosine scan."""

    dim: int
    provider_name: str
    created: int
    chunks: list[Chunk] = field(default_factory=list)
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    _norms: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def new(cls, provider: EmbeddingProvider) -> "VectorStore":
        return cls(dim=provider.dim, provider_name=provider.name, created=_now())

    def __len__(self) -> int:
        return len(self.chunks)

    def doc_ids(self) -> list[str]:
        return sorted({c.doc_id for c in self.chunks})

    def chunk_ids(self) -> set[str]:
        return {c.id for c in self.chunks}

    def add_chunks(self, new_chunks: Sequence[Chunk]) -> None:
        """Validate then append; the store is untouched if anything is wrong."""
        existing = self.chunk_ids()
        fresh: set[str] = set()
        for chunk in new_chunks:
            if len(chunk.embedding) != self.dim:
                raise DataError(
                    f"chunk {chunk.id}: embedding width {len(chunk.embedding)} != store dim {self.dim}"
                )
            if chunk.id in existing or chunk.id in fresh:
                raise DataError(f"duplicate chunk id {chunk.id}")
            fresh.add(chunk.id)
        self.chunks.extend(new_chunks)
        self._matrix = None
        self._norms = None

    def _ensure_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        if self._matrix is None:
            mat = np.empty((len(self.chunks), self.dim), dtype=np.float64)
            for i, chunk in enumerate(self.chunks):
                mat[i] = chunk.embedding
            self._matrix = np.ascontiguousarray(mat)
            self._norms = np.linalg.norm(self._matrix, axis=1)
        return self._matrix, self._norms

    def nearest(self, query: np.ndarray, k: int) -> list[tuple[Chunk, float]]:
        """Top-k chunks by cosine similarity; ties break on ascending id."""
        if k < 1:
            raise DataError("k must be >= 1")
        if not self.chunks:
            return []
        q = np.ascontiguousarray(np.asarray(query, dtype=np.float64).reshape(-1))
        if q.shape[0] != self.dim:
            raise DataError(f"query width {q.shape[0]} != store dim {self.dim}")
        matrix, norms = self._ensure_matrix()
        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            scores = np.zeros(len(self.chunks), dtype=np.float64)
        else:
            scores = cosine_scan(matrix, norms, q, qnorm)
        ids = np.array([c.id for c in self.chunks])
        order = np.lexsort((ids, -scores))[:k]
        return [(self.chunks[i], float(scores[i])) for i in order]

    def to_jsonl(self) -> str:
        """Header plus one chunk per line, ordered by chunk id."""
        header = {"dim": self.dim, "provider": self.provider_name, "created": self.created}
        lines = [json.dumps(header, ensure_ascii=False)]
        for chunk in sorted(self.chunks, key=lambda c: c.id):
            lines.append(
                json.dumps(
                    {
                        "id": chunk.id,
                        "doc_id": chunk.doc_id,
                        "text": chunk.text,
                        "embedding": list(chunk.embedding),
                    },
                    ensure_ascii=False,
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def load(cls, path: str) -> "VectorStore":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line for line in fh.read().split("\n") if line]
        if not lines:
            raise DataError(f"{path}: empty store file")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:1: bad store header: {exc}") from exc
        if (
            not isinstance(header, dict)
            or not isinstance(header.get("dim"), int)
            or not isinstance(header.get("provider"), str)
            or not isinstance(header.get("created"), int)
        ):
            raise DataError(f"{path}:1: store header needs dim, provider, created")
        if header["dim"] < MIN_DIM:
            raise DataError(f"{path}:1: store dim must be >= {MIN_DIM}")
        store = cls(dim=header["dim"], provider_name=header["provider"], created=header["created"])
        chunks: list[Chunk] = []
        for lineno, line in enumerate(lines[1:], start=2):
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad chunk row: {exc}") from exc
            try:
                chunk = Chunk(
                    id=row["id"],
                    doc_id=row["doc_id"],
                    text=row["text"],
                    embedding=tuple(float(x) for x in row["embedding"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: chunk row needs id, doc_id, text, embedding") from exc
            chunks.append(chunk)
        store.add_chunks(chunks)
        return store


def _now() -> int:
    stamp = os.environ.get("SOURCE_DATE_EPOCH")
    if stamp:
        try:
            return int(stamp)
        except ValueError:
            raise DataError(f"SOURCE_DATE_EPOCH must be an integer, got {stamp!r}") from None
    return int(time.time())


def ingest(
    store: VectorStore,
    doc_id: str,
    text: str,
    provider: EmbeddingProvider,
    size: int = CHUNK_SIZE,
    overlap: int = CHUNK_OVERLAP,
) -> int:
    """Chunk, embed, and add a document; returns the number of new chunks."""
    if not doc_id or doc_id != doc_id.strip():
        raise DataError(f"doc_id must be non-empty without surrounding whitespace, got {doc_id!r}")
    if provider.name != store.provider_name:
        raise DataError(
            f"provider {provider.name!r} does not match store provider {store.provider_name!r}"
        )
    if provider.dim != store.dim:
        raise DataError(f"provider dim {provider.dim} != store dim {store.dim}")
    pieces = chunk_document(text, size=size, overlap=overlap)
    if not pieces:
        return 0
    vectors = provider.embed([piece for _, piece in pieces])
    new_chunks = [
        Chunk(
            id=f"{doc_id}:{offset}",
            doc_id=doc_id,
            text=piece,
            embedding=tuple(float(x) for x in vectors[i]),
        )
        for i, (offset, piece) in enumerate(pieces)
    ]
    store.add_chunks(new_chunks)
    return len(new_chunks)


def retrieve(
    store: VectorStore,
    query_text: str,
    provider: EmbeddingProvider,
    k: int = 4,
) -> list[tuple[Chunk, float]]:
    """Embed ``query_text`` with ``provider`` and scan the store."""
    if provider.name != store.provider_name:
        raise DataError(
            f"provider {provider.name!r} does not match store provider {store.provider_name!r}"
        )
    query = provider.embed([query_text])[0]
    return store.nearest(query, k)
