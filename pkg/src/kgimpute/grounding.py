"""Grounded-language records and graph vocabulary selection.

Each word carries a blob of grounding text (encyclopedia summary plus
dictionary definition). Its token set drives both edge construction and
node features downstream, so tokenization lives here and is the single
place where case folding happens.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .embeddings import EmbeddingTable
from .errors import ParseError

logger = logging.getLogger(__name__)

# Maximal runs of alphanumeric characters; underscore is treated as a
# separator so multi-word node keys still split into their parts.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(
    text: str,
    lowercase: bool = True,
    keep_digits: bool = False,
    stopwords: frozenset[str] | None = None,
) -> frozenset[str]:
    """Split text into the set of distinct alphanumeric tokens.

    Pure-digit tokens are dropped unless keep_digits is set. The result
    is a set: repeated tokens collapse.
    """
    if lowercase:
        text = text.lower()
    tokens = set(_TOKEN_RE.findall(text))
    if not keep_digits:
        tokens = {t for t in tokens if not t.isdigit()}
    if stopwords:
        tokens -= stopwords
    return frozenset(tokens)


@dataclass(frozen=True)
class GroundingRecord:
    """One word with its grounding text and derived token set."""

    word: str
    summary_text: str
    definition_text: str
    tokens: frozenset[str]


class GroundingCorpus(dict):
    """Map word -> GroundingRecord, with a count of overwritten duplicates."""

    duplicates: int = 0


def load_grounding_corpus(
    path,
    lowercase: bool = True,
    keep_digits: bool = False,
    stopwords: frozenset[str] | None = None,
) -> GroundingCorpus:
    """Read a grounding corpus TSV: word<TAB>summary<TAB>definition per line.

    Later records for the same word overwrite earlier ones. Token sets
    are computed eagerly with the given tokenizer settings.
    """
    corpus = GroundingCorpus()
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    path, line_no,
                    f"expected 3 tab-separated fields, found {len(fields)}")
            word, summary, definition = fields
            if not word:
                raise ParseError(path, line_no, "empty word field")
            if word in corpus:
                duplicates += 1
            tokens = tokenize(summary + " " + definition,
                              lowercase=lowercase,
                              keep_digits=keep_digits,
                              stopwords=stopwords)
            corpus[word] = GroundingRecord(
                word=word, summary_text=summary, definition_text=definition,
                tokens=tokens)
    if duplicates:
        logger.warning("%s: %d duplicate word(s) overwritten by later records", path, duplicates)
    corpus.duplicates = duplicates
    return corpus


@dataclass(frozen=True)
class FrequencyList:
    """Words ranked by corpus frequency, descending, ties lexicographic."""

    ranked_words: tuple[tuple[str, int], ...]

    @classmethod
    def from_counts(cls, counts) -> "FrequencyList":
        ranked = sorted(counts, key=lambda wc: (-wc[1], wc[0]))
        return cls(ranked_words=tuple(ranked))


def load_frequency_list(path) -> FrequencyList:
    """Read `word count` lines and return the ranked frequency list."""
    counts = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != 2:
                raise ParseError(path, line_no, f"expected `word count`, found {len(tokens)} fields")
            word, raw = tokens
            try:
                count = int(raw)
            except ValueError:
                raise ParseError(path, line_no, f"count {raw!r} is not an integer") from None
            if count < 0:
                raise ParseError(path, line_no, "negative count")
            counts.append((word, count))
    return FrequencyList.from_counts(counts)


@dataclass(frozen=True)
class VocabSelection:
    """Outcome of selecting graph vocabulary from a frequency ranking."""

    skipped: tuple[str, ...]
    selected: tuple[str, ...]


def select_vocabulary(
    freq: FrequencyList,
    table: EmbeddingTable,
    skip_top: int = 2000,
    v_prime_size: int = 9000,
) -> VocabSelection:
    """Skip the most frequent words, then pick the next in-table words.

    Words absent from the embedding table are passed over: selected
    nodes need supervision targets. Selection is a pure function of the
    inputs.
    """
    if skip_top < 0:
        raise ValueError("skip_top must be >= 0")
    if v_prime_size < 1:
        raise ValueError("v_prime_size must be >= 1")
    ranked = [w for w, _ in freq.ranked_words]
    skipped = tuple(ranked[:skip_top])
    selected = []
    for word in ranked[skip_top:]:
        if word in table:
            selected.append(word)
            if len(selected) == v_prime_size:
                break
    if not selected:
        raise ValueError(
            "no eligible words remain after skipping "
            f"{skip_top} and filtering to the embedding table")
    return VocabSelection(skipped=skipped, selected=tuple(selected))


def load_word_list(path) -> list[str]:
    """Read one word per line, skipping blanks and `#` comments."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                words.append(word)
    return words


def load_stopwords(path) -> frozenset[str]:
    return frozenset(load_word_list(path))
