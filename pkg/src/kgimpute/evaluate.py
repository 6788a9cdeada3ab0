"""Word-pair similarity scoring against human gold judgments.

Similarity is the plain inner product of the two word vectors. Words
without a vector contribute a zero vector, so their pairs score 0 but
still count toward the correlation; missed words and missed pairs are
reported separately as percentages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError


@dataclass(frozen=True)
class SimilarityDataset:
    name: str
    pairs: tuple[tuple[str, str, float], ...]

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class EvalResult:
    pearson_r: float
    spearman_rho: float
    missed_words_pct: float
    missed_pairs_pct: float
    n_pairs: int

    def as_dict(self) -> dict:
        return {
            "pearson": self.pearson_r,
            "spearman": self.spearman_rho,
            "missed_words_pct": self.missed_words_pct,
            "missed_pairs_pct": self.missed_pairs_pct,
            "n_pairs": self.n_pairs,
        }


def load_dataset(path, name: str | None = None) -> SimilarityDataset:
    """Read `word1<TAB>word2<TAB>score` lines; `#` lines are comments."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    path, line_no,
                    f"expected 3 tab-separated fields, found {len(fields)}")
            w1, w2, raw = fields
            try:
                gold = float(raw)
            except ValueError:
                raise ParseError(path, line_no, f"score {raw!r} is not numeric") from None
            if not math.isfinite(gold):
                raise ParseError(path, line_no, "non-finite score")
            pairs.append((w1, w2, gold))
    if len(pairs) < 2:
        raise ParseError(path, 0, f"dataset has {len(pairs)} pairs, need at least 2")
    if name is None:
        name = _stem(path)
    return SimilarityDataset(name=name, pairs=tuple(pairs))


def _stem(path) -> str:
    import os
    return os.path.splitext(os.path.basename(str(path)))[0]


def _find_vector(vectors, word: str, lowercase: bool):
    vec = vectors.get(word)
    if vec is None and lowercase:
        vec = vectors.get(word.lower())
    return vec


def score_pairs(ds: SimilarityDataset, vectors, lowercase: bool = True):
    """Inner-product similarity per pair, plus missed-word accounting.

    Lookup tries the exact surface form, then the lowercased form when
    `lowercase` is on (mirroring the grounding normalization). Pairs
    with any missing word score 0 and stay in the list.
    """
    scores = []
    missing_words = set()
    seen_words = set()
    missed_pairs = 0
    for w1, w2, _ in ds.pairs:
        v1 = _find_vector(vectors, w1, lowercase)
        v2 = _find_vector(vectors, w2, lowercase)
        seen_words.update((w1, w2))
        if v1 is None:
            missing_words.add(w1)
        if v2 is None:
            missing_words.add(w2)
        if v1 is None or v2 is None:
            missed_pairs += 1
            scores.append(0.0)
        else:
            scores.append(float(np.dot(v1, v2)))
    missed_words_pct = 100.0 * len(missing_words) / len(seen_words)
    missed_pairs_pct = 100.0 * missed_pairs / ds.n_pairs
    return scores, missed_words_pct, missed_pairs_pct


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d sequences of equal length")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation undefined: zero variance input")
    return float(dx @ dy) / math.sqrt(vx * vy)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Rank correlation: Pearson on average-rank vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be 1-d sequences of equal length")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    return pearson(_average_ranks(x), _average_ranks(y))


def evaluate_dataset(ds: SimilarityDataset, vectors, lowercase: bool = True) -> EvalResult:
    """Full protocol for one dataset: score pairs and correlate with gold."""
    scores, missed_words_pct, missed_pairs_pct = score_pairs(ds, vectors, lowercase)
    gold = [g for _, _, g in ds.pairs]
    return EvalResult(
        pearson_r=pearson(scores, gold),
        spearman_rho=spearman(scores, gold),
        missed_words_pct=missed_words_pct,
        missed_pairs_pct=missed_pairs_pct,
        n_pairs=ds.n_pairs,
    )
