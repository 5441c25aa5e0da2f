"""Independent reference implementations used only by the tests.

These are deliberately naive: plain Python loops, math.exp, exact
fractions where they help. Nothing here imports from quranqa's internals.
"""
import math
from fractions import Fraction


def softmax_oracle(logits, mask):
    keep = [i for i, m in enumerate(mask) if not m]
    top = max(logits[i] for i in keep)
    exps = {i: math.exp(logits[i] - top) for i in keep}
    total = math.fsum(exps.values())
    return [exps[i] / total if i in exps else 0.0 for i in range(len(logits))]


def decode_oracle(start_logits, end_logits, mask, n, max_span_len):
    """Exhaustive (s, e) enumeration sorted by (score desc, s asc, e asc)."""
    ps = softmax_oracle(start_logits, mask)
    pe = softmax_oracle(end_logits, mask)
    cands = []
    for s in range(len(mask)):
        for e in range(s, len(mask)):
            if mask[s] or mask[e] or e - s + 1 > max_span_len:
                continue
            cands.append((-(ps[s] * pe[e]), s, e))
    cands.sort()
    return [(s, e) for _, s, e in cands[:n]]


def interval_union_oracle(intervals):
    """Connected components of the "shares a token" graph, by union-find.

    Adjacent intervals such as (0, 2) and (3, 5) are not connected.
    """
    owner = list(range(len(intervals)))

    def find(i):
        while owner[i] != i:
            owner[i] = owner[owner[i]]
            i = owner[i]
        return i

    for i, (a, b) in enumerate(intervals):
        for j, (c, d) in enumerate(intervals[:i]):
            if a <= d and c <= b:
                owner[find(i)] = find(j)
    groups = {}
    for i, iv in enumerate(intervals):
        groups.setdefault(find(i), []).append(iv)
    return sorted((min(a for a, _ in g), max(b for _, b in g)) for g in groups.values())


def f1_oracle(pred_tokens, gold_tokens):
    """Token F1 over multisets in exact rational arithmetic."""
    if not pred_tokens or not gold_tokens:
        return Fraction(0)
    remaining = list(gold_tokens)
    same = 0
    for tok in pred_tokens:
        if tok in remaining:
            remaining.remove(tok)
            same += 1
    if same == 0:
        return Fraction(0)
    p = Fraction(same, len(pred_tokens))
    r = Fraction(same, len(gold_tokens))
    return 2 * p * r / (p + r)


def score_oracle(ranked, golds):
    """(pRR, EM, F1@1) for whitespace-tokenized strings without punctuation."""
    toks = [a.split() for a in ranked[:5]]
    gtoks = [g.split() for g in golds]

    def best(t):
        return max((f1_oracle(t, g) for g in gtoks), default=Fraction(0))

    f1_1 = best(toks[0]) if toks else Fraction(0)
    em = 1 if toks and toks[0] and any(" ".join(toks[0]) == " ".join(g) for g in gtoks) else 0
    prr = Fraction(0)
    for rank, t in enumerate(toks, start=1):
        b = best(t)
        if b > 0:
            prr = b / rank
            break
    return float(prr), em, float(f1_1)
