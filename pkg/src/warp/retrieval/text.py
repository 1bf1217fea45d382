"""Lexical utilities for query formulation and evidence scoring."""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Sequence

_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*")
_PATHLIKE_RE = re.compile(
    r"(^\.{0,2}/)|(/)|(\\)|(\.(?:c|cc|cpp|cxx|h|hpp|py|go|js|ts|java|rs)$)",
    re.IGNORECASE)

# English + build-log filler, used both as similarity stopwords and as
# the common end of the keyword frequency ranking.
STOPWORDS = frozenset("""
a an and are as at be been before but by can cannot could did do does for from
had has have he her his how i if in into is it its may might must no not of on
or our out she should so some such than that the their them then there these
they this to was we were what when where which while who will with would you
your
also any because both each either just like more most only other same several
through under until upon very
error errors warning line file function call value type name use used using
code following message
""".split())

# Most-common-first ranking for "rarest-first" keyword ordering.  Words
# missing from the table rank rarer than everything listed.
_FREQUENCY_ORDER = """
the be to of and a in that have i it for not on with he as you do at this but
his by from they we say her she or an will my one all would there their what
so up out if about who get which go me when make can like time no just him
know take people into year your good some could them see other than then now
look only come its over think also back after use two how our work first well
way even new want because any these give day most us
error value function type name variable file line code string list object
class method call print return import module test case number set error
""".split()

_FREQ_RANK = {word: idx for idx, word in enumerate(_FREQUENCY_ORDER)}
_UNKNOWN_RANK = len(_FREQUENCY_ORDER)


def scoring_tokens(text: str) -> list[str]:
    """Lowercased identifier-ish tokens for similarity/keyword work."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]


def content_tokens(text: str) -> list[str]:
    """scoring_tokens minus stopwords."""
    return [t for t in scoring_tokens(text) if t not in STOPWORDS]


def strip_pathlike(tokens: Iterable[str]) -> list[str]:
    """Drop tokens that look like file paths (keep dotted identifiers)."""
    return [t for t in tokens if not _PATHLIKE_RE.search(t)]


def rank_keywords(text: str, top_n: int = 3) -> list[str]:
    """Content words of `text`, rarest first per the shipped frequency
    table, ties by first appearance."""
    seen: list[str] = []
    for token in content_tokens(text):
        if len(token) >= 2 and not token.isdigit() and token not in seen:
            seen.append(token)
    ranked = sorted(seen, key=lambda t: (-_FREQ_RANK.get(t, _UNKNOWN_RANK),
                                         seen.index(t)))
    return ranked[:top_n]


def cosine_similarity(a: Sequence[str], b: Sequence[str]) -> float:
    """Cosine over term-frequency vectors; 0.0 when either is empty."""
    if not a or not b:
        return 0.0
    ca, cb = Counter(a), Counter(b)
    dot = sum(ca[t] * cb[t] for t in ca.keys() & cb.keys())
    norm = math.sqrt(sum(v * v for v in ca.values()))
    norm *= math.sqrt(sum(v * v for v in cb.values()))
    if norm == 0.0:
        return 0.0
    return min(1.0, dot / norm)


def word_ngrams(text: str, n: int = 5) -> frozenset[tuple[str, ...]]:
    """Word n-grams for redundancy checks; short texts collapse to one
    gram so exact short duplicates still collide."""
    words = text.lower().split()
    if not words:
        return frozenset()
    if len(words) < n:
        return frozenset({tuple(words)})
    return frozenset(tuple(words[i:i + n]) for i in range(len(words) - n + 1))


def jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def identifier_tokens(snippet: str) -> list[str]:
    """Identifier-like tokens from a code snippet, deduplicated in
    order of first appearance."""
    seen: list[str] = []
    for token in scoring_tokens(snippet):
        if token not in seen:
            seen.append(token)
    return seen
