"""Text and ranking metrics for the benchmark harness.

Variants are pinned here and recorded in every report's metadata:
BLEU-4 uses add-1 smoothing on n >= 2 only; ROUGE-L is the token-level
LCS F-measure with beta = 1.2 (recall-weighted); NDCG@3 uses binary
gains over normalized URLs; MRR counts a missing rank as zero.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Optional, Sequence

BLEU_MAX_ORDER = 4
ROUGE_BETA = 1.2
NDCG_CUTOFF = 3

METRIC_VARIANTS = {
    "bleu4": "modified n-gram precision, add-1 smoothing for n>=2, brevity penalty exp(1-r/c)",
    "rouge_l": f"token-level LCS F-measure, beta={ROUGE_BETA}",
    "ndcg_at_3": "binary gains, urls normalized by scheme/trailing-slash/fragment strip",
    "mrr": "reciprocal of first correct rank, absent rank contributes 0",
}


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: str, reference: str) -> float:
    """BLEU with n-gram orders 1..4 against a single reference."""
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not cand or not ref:
        return 0.0

    log_sum = 0.0
    for n in range(1, BLEU_MAX_ORDER + 1):
        cand_ngrams = _ngrams(cand, n)
        ref_ngrams = _ngrams(ref, n)
        clipped = sum(min(count, ref_ngrams[g]) for g, count in cand_ngrams.items())
        total = sum(cand_ngrams.values())
        if n == 1:
            if clipped == 0:
                return 0.0
            precision = clipped / total
        else:
            precision = (clipped + 1) / (total + 1)
        log_sum += math.log(precision)
    geo_mean = math.exp(log_sum / BLEU_MAX_ORDER)

    c, r = len(cand), len(ref)
    brevity = 1.0 if c >= r else math.exp(1 - r / c)
    return brevity * geo_mean


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            curr.append(prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F-measure over case-folded whitespace tokens."""
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    beta_sq = ROUGE_BETA ** 2
    return (1 + beta_sq) * precision * recall / (recall + beta_sq * precision)


def normalize_url(url: str) -> str:
    """Strip scheme, trailing slash, and fragment; used for NDCG matching."""
    u = url.strip()
    for scheme in ("https://", "http://"):
        if u.startswith(scheme):
            u = u[len(scheme):]
            break
    u = u.split("#", 1)[0]
    return u.rstrip("/")


def ndcg_at_3(ranked_urls: Sequence[str], relevant_urls: Iterable[str]) -> float:
    """Binary-gain NDCG over the top 3 ranked URLs.

    An empty relevant set scores 0 by definition.  Duplicate URLs in the
    ranking collapse to their first occurrence.
    """
    relevant = {normalize_url(u) for u in relevant_urls}
    if not relevant:
        return 0.0
    seen = set()
    deduped = []
    for url in ranked_urls:
        norm = normalize_url(url)
        if norm not in seen:
            seen.add(norm)
            deduped.append(norm)
    dcg = sum(
        1.0 / math.log2(i + 1)
        for i, url in enumerate(deduped[:NDCG_CUTOFF], start=1)
        if url in relevant
    )
    ideal_hits = min(len(relevant), NDCG_CUTOFF)
    idcg = sum(1.0 / math.log2(i + 1) for i in range(1, ideal_hits + 1))
    return dcg / idcg


def mrr(first_correct_ranks: Sequence[Optional[int]]) -> float:
    """Mean reciprocal rank; None means no correct fix was returned."""
    if not first_correct_ranks:
        return 0.0
    return sum(1.0 / r if r else 0.0 for r in first_correct_ranks) / len(first_correct_ranks)
