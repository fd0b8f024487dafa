"""Translation metrics: sentence BLEU (smoothing 4), corpus BLEU, METEOR, ROUGE-L.

All scores are on a 0..100 scale.  METEOR uses exact unigram matching only
(no stemming or synonym resources), so its numbers are comparable within this
package but not to resource-backed implementations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput, EmptyReference, LengthMismatch

Tokens = Sequence[str]

_SMOOTH4_K = 5.0  # Chen-Cherry smoothing-4 constant
_MAX_ORDER = 4


def _ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1))


def _clipped_matches(hyp: Tokens, ref: Tokens, n: int) -> tuple[int, int]:
    """(clipped match count, hypothesis n-gram count) for one order."""
    hyp_counts = _ngrams(hyp, n)
    ref_counts = _ngrams(ref, n)
    matches = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
    return matches, max(len(hyp) - n + 1, 0)


def sentence_bleu_s4(hyp: Tokens, ref: Tokens) -> float:
    """Sentence BLEU-4 with smoothing method 4 on zero-count higher orders.

    Uniform 1/4 weights; brevity penalty exp(1 - |ref|/|hyp|) when the
    hypothesis is shorter.  A smoothed precision for order n is
    (ln|hyp| / (2^i * 5)) / denom with i counting smoothed orders, applied
    only when |hyp| > 1.  No unigram match (or an empty hypothesis) gives 0.
    """
    if len(ref) == 0:
        raise EmptyReference("reference must be nonempty")
    hyp_len, ref_len = len(hyp), len(ref)
    if hyp_len == 0:
        return 0.0
    numerators = []
    denominators = []
    for n in range(1, _MAX_ORDER + 1):
        num, den = _clipped_matches(hyp, ref, n)
        numerators.append(num)
        denominators.append(max(den, 1))
    if numerators[0] == 0:
        return 0.0
    precisions = []
    smoothed = 1
    for num, den in zip(numerators, denominators):
        if num == 0 and hyp_len > 1:
            precisions.append(math.log(hyp_len) / (2.0 ** smoothed * _SMOOTH4_K) / den)
            smoothed += 1
        else:
            precisions.append(num / den)
    log_sum = sum(0.25 * math.log(p) for p in precisions if p > 0)
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_sum)


def corpus_bleu(hyps: Sequence[Tokens], refs: Sequence[Tokens]) -> float:
    """Corpus-level BLEU-4: aggregated counts, no smoothing, corpus-length BP.

    Any zero aggregate precision (including an order with no hypothesis
    n-grams at all) yields 0.
    """
    if len(hyps) != len(refs):
        raise LengthMismatch(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if len(hyps) == 0:
        raise EmptyInput("corpus BLEU over an empty corpus")
    numerators = [0] * _MAX_ORDER
    denominators = [0] * _MAX_ORDER
    hyp_total = 0
    ref_total = 0
    for hyp, ref in zip(hyps, refs):
        if len(ref) == 0:
            raise EmptyReference("reference must be nonempty")
        hyp_total += len(hyp)
        ref_total += len(ref)
        for n in range(1, _MAX_ORDER + 1):
            num, den = _clipped_matches(hyp, ref, n)
            numerators[n - 1] += num
            denominators[n - 1] += den
    if hyp_total == 0 or any(num == 0 for num in numerators):
        return 0.0
    log_sum = sum(
        0.25 * math.log(num / den) for num, den in zip(numerators, denominators)
    )
    bp = 1.0 if hyp_total > ref_total else math.exp(1.0 - ref_total / hyp_total)
    return 100.0 * bp * math.exp(log_sum)


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------

_ALIGN_NODE_BUDGET = 500_000


def _min_chunk_alignment(hyp: Tokens, ref: Tokens) -> tuple[int, int]:
    """(match count, chunk count) of a maximum unigram alignment with fewest chunks.

    Exhaustive depth-first search with branch-and-bound; continuation moves
    are tried first so a near-optimal alignment is found immediately, which
    makes the bound effective.  The node budget only matters on adversarial
    inputs far beyond comment length; within it the result is exact.
    """
    hyp_counts = Counter(hyp)
    ref_counts = Counter(ref)
    need = {t: min(c, ref_counts[t]) for t, c in hyp_counts.items() if t in ref_counts}
    m = sum(need.values())
    if m == 0:
        return 0, 0
    ref_positions: dict[str, list[int]] = {}
    for j, tok in enumerate(ref):
        if tok in need:
            ref_positions.setdefault(tok, []).append(j)
    # hyp occurrences of each matchable token at position >= i
    suffix_left: list[Counter] = [Counter() for _ in range(len(hyp) + 1)]
    for i in range(len(hyp) - 1, -1, -1):
        suffix_left[i] = suffix_left[i + 1].copy()
        if hyp[i] in need:
            suffix_left[i][hyp[i]] += 1

    used = [False] * len(ref)
    best = m + 1  # any alignment has at most m chunks
    budget = _ALIGN_NODE_BUDGET

    def dfs(i: int, left: int, last_i: int, last_j: int, chunks: int, need_left: dict) -> None:
        nonlocal best, budget
        if chunks >= best or budget <= 0:
            return
        budget -= 1
        if left == 0:
            best = chunks
            return
        if i >= len(hyp):
            return
        tok = hyp[i]
        want = need_left.get(tok, 0)
        if want > 0:
            candidates = [j for j in ref_positions[tok] if not used[j]]
            # continuation first: same chunk when both sides advance by one
            candidates.sort(key=lambda j: (not (i == last_i + 1 and j == last_j + 1), j))
            for j in candidates:
                used[j] = True
                need_left[tok] = want - 1
                extra = 0 if (i == last_i + 1 and j == last_j + 1) else 1
                dfs(i + 1, left - 1, i, j, chunks + extra, need_left)
                need_left[tok] = want
                used[j] = False
        if want == 0 or suffix_left[i][tok] - 1 >= want:
            dfs(i + 1, left, last_i, last_j, chunks, need_left)

    dfs(0, m, -2, -2, 0, dict(need))
    return m, best


def meteor(hyp: Tokens, ref: Tokens) -> float:
    """Exact-match METEOR: F_mean = 10PR/(R+9P), chunk penalty 0.5*(chunks/m)^3."""
    if len(ref) == 0:
        raise EmptyReference("reference must be nonempty")
    if len(hyp) == 0:
        return 0.0
    matches, chunks = _min_chunk_alignment(hyp, ref)
    if matches == 0:
        return 0.0
    precision = matches / len(hyp)
    recall = matches / len(ref)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (chunks / matches) ** 3
    return 100.0 * f_mean * (1.0 - penalty)


# ---------------------------------------------------------------------------
# ROUGE-L
# ---------------------------------------------------------------------------


def _lcs_length(a: Tokens, b: Tokens) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            curr.append(prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(hyp: Tokens, ref: Tokens) -> float:
    """ROUGE-L F1 (harmonic mean of LCS precision and recall), scaled to 0..100."""
    if len(ref) == 0:
        raise EmptyReference("reference must be nonempty")
    lcs = _lcs_length(hyp, ref)
    if lcs == 0:
        return 0.0
    recall = lcs / len(ref)
    precision = lcs / len(hyp)
    return 100.0 * 2.0 * precision * recall / (precision + recall)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScoreReport:
    s_bleu: float
    c_bleu: float
    meteor: float
    rouge_l: float

    def to_json(self) -> dict:
        return {
            "s_bleu": self.s_bleu,
            "c_bleu": self.c_bleu,
            "meteor": self.meteor,
            "rouge_l": self.rouge_l,
        }


def corpus_report(hyps: Sequence[Tokens], refs: Sequence[Tokens]) -> ScoreReport:
    """Mean sentence-level S-BLEU/METEOR/ROUGE-L plus corpus BLEU for a test set."""
    if len(hyps) != len(refs):
        raise LengthMismatch(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if len(hyps) == 0:
        raise EmptyInput("scoring an empty corpus")
    s_scores = [sentence_bleu_s4(h, r) for h, r in zip(hyps, refs)]
    m_scores = [meteor(h, r) for h, r in zip(hyps, refs)]
    r_scores = [rouge_l(h, r) for h, r in zip(hyps, refs)]
    return ScoreReport(
        s_bleu=sum(s_scores) / len(s_scores),
        c_bleu=corpus_bleu(hyps, refs),
        meteor=sum(m_scores) / len(m_scores),
        rouge_l=sum(r_scores) / len(r_scores),
    )
