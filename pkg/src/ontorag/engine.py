"""Retrieval-augmented answering: infiltrate, retrieve, prompt, complete.

The prompt template is fixed: the system message carries the retrieved
chunks, the user message carries the (possibly infiltrated) question. The
bundled :class:`EchoLlm` simply returns both messages, which keeps the whole
pipeline runnable and measurable offline.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import IO, Protocol, Sequence

from .errors import DataError, ProviderError
from .infiltrate import AugmentedPrompt, infiltrate
from .ragstore import EmbeddingProvider, VectorStore, _now
from .subsume import SubsumptionDictionary

SYSTEM_PREFIX = "Answer using only the context below.\nContext:\n"
USER_PREFIX = "Question: "
DEFAULT_K = 4


class LlmProvider(Protocol):
    name: str

    def complete(self, system: str, user: str) -> str: ...


class EchoLlm:
    """Returns the rendered request verbatim; the offline default."""

    name = "echo"

    def complete(self, system: str, user: str) -> str:
        return f"{system}\n{user}"


class HttpLlm:
    """Chat-completions style HTTP provider.

    POSTs {"model", "messages"} and reads choices[0].message.content. Sends
    ``Authorization: Bearer $LLM_API_KEY`` when the variable is set.
    """

    def __init__(self, url: str, model: str = "chat-default", timeout: float = 60.0) -> None:
        self.url = url
        self.model = model
        self.timeout = timeout
        self.name = f"http:{url}"

    def complete(self, system: str, user: str) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        key = os.environ.get("LLM_API_KEY")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = requests.post(
                self.url,
                json={
                    "model": self.model,
                    "messages": [
                        {"role": "system", "content": system},
                        {"role": "user", "content": user},
                    ],
                },
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderError(f"completion request to {self.url} failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"completion request to {self.url} returned status {resp.status_code}")
        try:
            payload = resp.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response from {self.url}: {exc}") from exc
        if not isinstance(content, str):
            raise ProviderError(f"completion response from {self.url} has non-text content")
        return content


def render_request(question: str, context_texts: Sequence[str]) -> tuple[str, str]:
    """The (system, user) message pair sent to the model."""
    return SYSTEM_PREFIX + "\n\n".join(context_texts), USER_PREFIX + question


@dataclass(frozen=True)
class AnswerResult:
    """Everything produced while answering one question."""

    question: str
    augmented: str
    matched: tuple[str, ...]
    appended: tuple[str, ...]
    context_ids: tuple[str, ...]
    context_texts: tuple[str, ...]
    scores: tuple[float, ...]
    response: str


def answer(
    store: VectorStore,
    provider: EmbeddingProvider,
    llm: LlmProvider,
    question: str,
    dictionary: SubsumptionDictionary | None = None,
    k: int = DEFAULT_K,
    fuzzy: bool = False,
    bare: bool = False,
) -> AnswerResult:
    """Answer one question against the store.

    When a dictionary is given the question is infiltrated first and the
    augmented form drives retrieval. Provider failures surface as
    ProviderError naming the stage (embed, retrieve, complete).
    """
    if not question.strip():
        raise DataError("question must be non-empty")
    if provider.name != store.provider_name:
        raise DataError(
            f"provider {provider.name!r} does not match store provider {store.provider_name!r}"
        )
    if dictionary is not None:
        aug: AugmentedPrompt = infiltrate(question, dictionary, fuzzy=fuzzy, bare=bare)
    else:
        aug = AugmentedPrompt(original=question, augmented=question, matched=(), appended=())
    try:
        query = provider.embed([aug.augmented])[0]
    except DataError:
        raise
    except Exception as exc:
        raise ProviderError(f"embed stage failed: {exc}") from exc
    hits = store.nearest(query, k)
    system, user = render_request(aug.augmented, [chunk.text for chunk, _ in hits])
    try:
        response = llm.complete(system, user)
    except Exception as exc:
        raise ProviderError(f"complete stage failed: {exc}") from exc
    return AnswerResult(
        question=aug.original,
        augmented=aug.augmented,
        matched=aug.matched,
        appended=aug.appended,
        context_ids=tuple(chunk.id for chunk, _ in hits),
        context_texts=tuple(chunk.text for chunk, _ in hits),
        scores=tuple(score for _, score in hits),
        response=response,
    )


@dataclass(frozen=True)
class ChatTurn:
    """One logged exchange; self-contained, including the retrieved texts."""

    ts: int
    question: str
    augmented: str
    answer: str
    context_texts: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "ts": self.ts,
            "question": self.question,
            "augmented": self.augmented,
            "answer": self.answer,
            "context_texts": list(self.context_texts),
        }

    @classmethod
    def from_json_dict(cls, row: dict) -> "ChatTurn":
        try:
            return cls(
                ts=int(row["ts"]),
                question=row["question"],
                augmented=row["augmented"],
                answer=row["answer"],
                context_texts=tuple(row["context_texts"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"chat turn row needs ts, question, augmented, answer, context_texts: {exc}") from exc


def chat_repl(
    store: VectorStore,
    provider: EmbeddingProvider,
    llm: LlmProvider,
    dictionary: SubsumptionDictionary | None,
    input_stream: IO[str],
    output_stream: IO[str],
    k: int = DEFAULT_K,
    log_path: str | None = None,
    fuzzy: bool = False,
    bare: bool = False,
) -> list[ChatTurn]:
    """Line-oriented chat loop; `/quit` or EOF ends it.

    Blank lines are skipped. Every turn is echoed to ``output_stream`` and,
    when ``log_path`` is set, appended there as one JSON object per line.
    """
    turns: list[ChatTurn] = []
    log_fh = open(log_path, "a", encoding="utf-8") if log_path else None
    try:
        for line in input_stream:
            question = line.strip()
            if not question:
                continue
            if question == "/quit":
                break
            result = answer(
                store, provider, llm, question,
                dictionary=dictionary, k=k, fuzzy=fuzzy, bare=bare,
            )
            turn = ChatTurn(
                ts=_now(),
                question=result.question,
                augmented=result.augmented,
                answer=result.response,
                context_texts=result.context_texts,
            )
            turns.append(turn)
            output_stream.write(result.response + "\n")
            output_stream.flush()
            if log_fh is not None:
                log_fh.write(json.dumps(turn.to_json_dict(), ensure_ascii=False) + "\n")
                log_fh.flush()
    finally:
        if log_fh is not None:
            log_fh.close()
    return turns
