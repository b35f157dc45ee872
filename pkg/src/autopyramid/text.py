"""Deterministic text primitives: tokens, sentences, n-grams, unigram F1.

Everything in this module is pure and dependency-free so that scores are
reproducible bit-for-bit across machines.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

# Unicode alphanumerics; underscore is punctuation here.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_TERMINATORS = ".!?"

# Lowercase, dot-free or dot-internal forms checked against the word
# immediately preceding a period.
DEFAULT_ABBREVIATIONS = frozenset(
    {"mr", "mrs", "dr", "prof", "e.g", "i.e", "u.s", "u.k", "no", "vs"}
)

TokenSeq = list[str]


def tokenize(text: str) -> list[str]:
    """Lowercase *text* and split it on maximal runs of non-alphanumerics.

    Empty fragments are dropped, so the result contains only non-empty,
    whitespace-free tokens. An empty input yields an empty list.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class SentenceSpan:
    """One sentence of a source text, with its 0-based position."""

    text: str
    index: int


def _abbreviation_before(text: str, dot: int, abbreviations: frozenset[str]) -> bool:
    # Collect the word (letters, digits, internal dots) ending right before
    # the period at *dot*; "U.S." checks as "u.s", "Dr." as "dr".
    j = dot
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "."):
        j -= 1
    return text[j:dot].lower() in abbreviations


def split_sentences(
    text: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[SentenceSpan]:
    """Split *text* into sentences on '.', '!', '?' at a word boundary.

    A terminator only splits when followed by whitespace or end-of-text,
    and a '.' does not split when the preceding word is in *abbreviations*.
    Spans are trimmed and indexed consecutively from 0; empty spans are
    never produced.
    """
    spans: list[SentenceSpan] = []
    start = 0
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        if i + 1 < len(text) and not text[i + 1].isspace():
            continue
        if ch == "." and _abbreviation_before(text, i, abbreviations):
            continue
        piece = text[start : i + 1].strip()
        if piece:
            spans.append(SentenceSpan(piece, len(spans)))
        start = i + 1
    tail = text[start:].strip()
    if tail:
        spans.append(SentenceSpan(tail, len(spans)))
    return spans


def rouge1_f1(candidate: str, reference: str) -> float:
    """Unigram F1 with clipped counts and no stemming or stopword removal.

    Precision counts each candidate token at most as often as it occurs in
    the reference; recall divides the same overlap by the reference length.
    Returns 0.0 whenever either side has no tokens or no token is shared.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    ref_counts = Counter(ref)
    overlap = sum(min(count, ref_counts[tok]) for tok, count in Counter(cand).items())
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def enumerate_ngrams(sentence: str, sizes: Iterable[int]) -> list[str]:
    """All n-grams of the tokenized *sentence* for each n in *sizes*.

    Output is ordered by (n ascending, start position ascending); each
    n-gram is its tokens joined by single spaces. Sentences shorter than n
    contribute nothing for that n.
    """
    sorted_sizes = sorted(set(sizes))
    if not sorted_sizes or sorted_sizes[0] < 1:
        raise ValueError("sizes must be a non-empty collection of integers >= 1")
    tokens = tokenize(sentence)
    grams: list[str] = []
    for n in sorted_sizes:
        for start in range(len(tokens) - n + 1):
            grams.append(" ".join(tokens[start : start + n]))
    return grams
