"""Presence scoring: how much of each unit a system summary contains.

A scorer maps (premise, hypothesis) pairs to probabilities in [0, 1]; the
premise is the system summary, the hypothesis is a unit. The pyramid score
of a summary is the plain mean of its per-unit probabilities, every unit
weighted equally.

Two scorers ship with the package: a deterministic lexical fallback that
needs no network, and a remote scorer backed by an entailment service.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import MalformedServiceReply, NoUnits
from .extract import ContentUnit
from .services import PresenceClient
from .text import tokenize

PresenceScorer = Callable[[list[tuple[str, str]]], list[float]]


@dataclass(frozen=True)
class PresenceResult:
    """Per-unit presence probabilities for one summary."""

    probabilities: tuple[float, ...]

    def __post_init__(self):
        if not self.probabilities:
            raise ValueError("a presence result needs at least one probability")
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")

    @property
    def pyramid_score(self) -> float:
        return math.fsum(self.probabilities) / len(self.probabilities)


def lexical_presence(premise: str, hypothesis: str) -> float:
    """Clipped unigram recall of the hypothesis inside the premise.

    Offline stand-in for a trained entailment model: 1.0 when every
    hypothesis token (with multiplicity) occurs in the premise, 0.0 when
    none does or the hypothesis has no tokens.
    """
    hyp = tokenize(hypothesis)
    if not hyp:
        return 0.0
    remaining: dict[str, int] = {}
    for token in tokenize(premise):
        remaining[token] = remaining.get(token, 0) + 1
    overlap = 0
    for token in hyp:
        if remaining.get(token, 0) > 0:
            remaining[token] -= 1
            overlap += 1
    return overlap / len(hyp)


def lexical_scorer(pairs: list[tuple[str, str]]) -> list[float]:
    return [lexical_presence(premise, hypothesis) for premise, hypothesis in pairs]


def remote_presence(
    pairs: Sequence[tuple[str, str]],
    endpoint: str,
    *,
    batch_size: int = 32,
    concurrency: int = 4,
    client: PresenceClient | None = None,
) -> list[float]:
    """Probabilities from the presence service, one per pair, in order.

    Requests go out in batches of *batch_size*; an empty pair list makes no
    network call. Out-of-range or missing probabilities raise
    :class:`MalformedServiceReply`.
    """
    if not pairs:
        return []
    if client is None:
        client = PresenceClient(endpoint, batch_size=batch_size, concurrency=concurrency)
    return client.probabilities(list(pairs))


def remote_scorer(
    endpoint: str, *, batch_size: int = 32, concurrency: int = 4
) -> PresenceScorer:
    """A scorer bound to a presence endpoint."""
    client = PresenceClient(endpoint, batch_size=batch_size, concurrency=concurrency)

    def scorer(pairs: list[tuple[str, str]]) -> list[float]:
        return remote_presence(pairs, endpoint, client=client)

    return scorer


def score_summary(
    units: Sequence[ContentUnit], summary: str, scorer: PresenceScorer
) -> PresenceResult:
    """Score *summary* against every unit; unit order is preserved."""
    if not units:
        raise NoUnits("cannot score a summary without units")
    probabilities = scorer([(summary, unit.text) for unit in units])
    if len(probabilities) != len(units):
        raise MalformedServiceReply(
            f"scorer answered {len(probabilities)} probabilities for {len(units)} units"
        )
    return PresenceResult(tuple(float(p) for p in probabilities))
