"""HTTP clients for the external model services.

Four endpoints are supported, all JSON over POST:

* graph-to-text generation: ``{"graphs": [penman, ...]}`` -> ``{"texts": [...]}``
* sentence-to-graph parsing: ``{"sentences": [...]}`` -> ``{"graphs": [...]}``
* presence scoring: ``{"pairs": [{"premise", "hypothesis"}, ...]}`` -> ``{"probs": [...]}``
* chat completions: ``{"model", "temperature", "messages"}`` ->
  first choice message content

Requests are retried on connection failures and 5xx answers; the nominal
backoff schedule is 1s/2s/4s with 3 attempts. Auth tokens are read from
environment variables only and are never logged or echoed back.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import requests

from .errors import MalformedServiceReply, ServiceUnavailable

DEFAULT_ATTEMPTS = 3
DEFAULT_RETRY_SCHEDULE = (1.0, 2.0, 4.0)
DEFAULT_TIMEOUT = 60.0

LLM_TOKEN_ENV = "AUTOPYRAMID_LLM_TOKEN"
NLI_TOKEN_ENV = "AUTOPYRAMID_NLI_TOKEN"
AMR_TOKEN_ENV = "AUTOPYRAMID_AMR_TOKEN"

# test/automation hook: a comma-separated float list overriding the backoff
RETRY_SCHEDULE_ENV = "AUTOPYRAMID_RETRY_SCHEDULE"


def retry_schedule() -> tuple[float, ...]:
    raw = os.environ.get(RETRY_SCHEDULE_ENV)
    if raw:
        return tuple(float(part) for part in raw.split(","))
    return DEFAULT_RETRY_SCHEDULE


def post_json(
    url: str,
    payload: dict,
    *,
    token: str | None = None,
    attempts: int = DEFAULT_ATTEMPTS,
    schedule: Sequence[float] | None = None,
    timeout: float = DEFAULT_TIMEOUT,
    sleep: Callable[[float], None] = time.sleep,
) -> dict:
    """POST *payload* and return the parsed JSON reply.

    Connection errors and 5xx answers are retried up to *attempts* times,
    sleeping per *schedule* between tries. 4xx answers are not retried.
    """
    if schedule is None:
        schedule = retry_schedule()
    headers = {}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    failure = "no attempt made"
    for attempt in range(attempts):
        try:
            response = requests.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            failure = exc.__class__.__name__
        else:
            if response.status_code >= 500:
                failure = f"status {response.status_code}"
            elif response.status_code >= 400:
                raise ServiceUnavailable(f"{url} answered {response.status_code}")
            else:
                try:
                    body = response.json()
                except ValueError as exc:
                    raise MalformedServiceReply(f"{url} returned non-JSON data") from exc
                if not isinstance(body, dict):
                    raise MalformedServiceReply(f"{url} returned a non-object reply")
                return body
        if attempt + 1 < attempts and schedule:
            sleep(schedule[min(attempt, len(schedule) - 1)])
    raise ServiceUnavailable(f"{url} failed after {attempts} attempts ({failure})")


def _chunks(items: Sequence, size: int) -> list[Sequence]:
    return [items[i : i + size] for i in range(0, len(items), size)]


class BatchClient:
    """Shared plumbing: batched, order-preserving, bounded-concurrency POSTs."""

    token_env: str | None = None

    def __init__(
        self,
        endpoint: str,
        *,
        batch_size: int = 32,
        concurrency: int = 4,
        attempts: int = DEFAULT_ATTEMPTS,
        schedule: Sequence[float] | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.concurrency = concurrency
        self.attempts = attempts
        self.schedule = schedule
        self.sleep = sleep
        self.timeout = timeout

    def _token(self) -> str | None:
        return os.environ.get(self.token_env) if self.token_env else None

    def _post(self, payload: dict) -> dict:
        return post_json(
            self.endpoint,
            payload,
            token=self._token(),
            attempts=self.attempts,
            schedule=self.schedule,
            timeout=self.timeout,
            sleep=self.sleep,
        )

    def _run_batched(self, items: Sequence, build: Callable, parse: Callable) -> list:
        """POST every batch, fan out up to ``concurrency`` at a time, and
        stitch replies back together in input order."""
        if not items:
            return []
        batches = _chunks(items, self.batch_size)

        def one(batch):
            reply = self._post(build(batch))
            values = parse(reply)
            if len(values) != len(batch):
                raise MalformedServiceReply(
                    f"{self.endpoint} answered {len(values)} items for a "
                    f"batch of {len(batch)}"
                )
            return values

        if len(batches) == 1:
            replies = [one(batches[0])]
        else:
            with ThreadPoolExecutor(max_workers=min(self.concurrency, len(batches))) as pool:
                replies = list(pool.map(one, batches))
        out: list = []
        for values in replies:
            out.extend(values)
        return out


class GraphToTextClient(BatchClient):
    """Client for the graph-to-text generation service."""

    token_env = AMR_TOKEN_ENV

    def generate(self, graphs: Sequence[str]) -> list[str]:
        def parse(reply: dict) -> list[str]:
            texts = reply.get("texts")
            if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
                raise MalformedServiceReply(f"{self.endpoint} reply lacks 'texts'")
            return texts

        return self._run_batched(list(graphs), lambda b: {"graphs": list(b)}, parse)


class ParseServiceClient(BatchClient):
    """Client for the sentence-to-graph parsing service."""

    token_env = AMR_TOKEN_ENV

    def parse_sentences(self, sentences: Sequence[str]) -> list[str]:
        def parse(reply: dict) -> list[str]:
            graphs = reply.get("graphs")
            if not isinstance(graphs, list) or not all(isinstance(g, str) for g in graphs):
                raise MalformedServiceReply(f"{self.endpoint} reply lacks 'graphs'")
            return graphs

        return self._run_batched(list(sentences), lambda b: {"sentences": list(b)}, parse)


class PresenceClient(BatchClient):
    """Client for the presence-probability scoring service."""

    token_env = NLI_TOKEN_ENV

    def probabilities(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        def parse(reply: dict) -> list[float]:
            probs = reply.get("probs")
            if not isinstance(probs, list):
                raise MalformedServiceReply(f"{self.endpoint} reply lacks 'probs'")
            for value in probs:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise MalformedServiceReply(
                        f"{self.endpoint} returned a non-numeric probability"
                    )
                if not 0.0 <= value <= 1.0:
                    raise MalformedServiceReply(
                        f"{self.endpoint} returned probability {value} outside [0, 1]"
                    )
            return [float(v) for v in probs]

        return self._run_batched(
            list(pairs),
            lambda batch: {
                "pairs": [{"premise": p, "hypothesis": h} for p, h in batch]
            },
            parse,
        )


class ChatClient:
    """Client for a chat-completions style language model endpoint."""

    token_env = LLM_TOKEN_ENV

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        temperature: float = 0.0,
        attempts: int = DEFAULT_ATTEMPTS,
        schedule: Sequence[float] | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.attempts = attempts
        self.schedule = schedule
        self.timeout = timeout
        self.sleep = sleep

    def complete(self, messages: list[dict]) -> str:
        reply = post_json(
            self.endpoint,
            {"model": self.model, "temperature": self.temperature, "messages": messages},
            token=os.environ.get(self.token_env),
            attempts=self.attempts,
            schedule=self.schedule,
            timeout=self.timeout,
            sleep=self.sleep,
        )
        try:
            content = reply["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedServiceReply(
                f"{self.endpoint} reply has no first choice message"
            ) from exc
        if not isinstance(content, str):
            raise MalformedServiceReply(f"{self.endpoint} message content is not text")
        return content
