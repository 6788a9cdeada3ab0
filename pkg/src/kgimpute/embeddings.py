"""Loading, saving and querying pre-trained word embeddings in text format.

The format is the usual GloVe export: one word per line followed by its
vector components, whitespace separated. A leading word2vec-style header
line ("<count> <dim>", two integer tokens) is detected and skipped.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import ParseError

logger = logging.getLogger(__name__)


class EmbeddingTable:
    """Immutable map from word to dense vector, all of one dimensionality.

    Treat instances as read-only after construction; they are then safe
    for concurrent lookups.
    """

    def __init__(self, dim: int, entries: dict[str, np.ndarray], duplicates: int = 0):
        if dim <= 0:
            raise ValueError("embedding dimension must be positive")
        self.dim = dim
        self._entries = entries
        self.duplicates = duplicates

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def lookup(self, word: str) -> np.ndarray | None:
        """Return the stored vector for `word`, or None if absent.

        No case folding happens here; normalize before calling if the
        pipeline is configured to lowercase.
        """
        return self._entries.get(word)

    def words(self):
        return self._entries.keys()

    def items(self):
        return self._entries.items()


def _is_header(tokens: list[str]) -> bool:
    if len(tokens) != 2:
        return False
    try:
        int(tokens[0])
        int(tokens[1])
    except ValueError:
        return False
    return True


def load_embeddings(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Parse a text embedding file into an EmbeddingTable.

    Duplicate words keep their first occurrence; the number of dropped
    duplicates is logged and stored on the returned table.
    """
    entries: dict[str, np.ndarray] = {}
    dim = None
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if line_no == 1 and _is_header(tokens):
                continue
            word = tokens[0]
            if len(tokens) < 2:
                raise ParseError(path, line_no, "line has a word but no vector components")
            try:
                vec = np.array([float(t) for t in tokens[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(path, line_no, "non-numeric vector component") from None
            if not np.all(np.isfinite(vec)):
                raise ParseError(path, line_no, "non-finite vector component")
            if dim is None:
                dim = vec.shape[0]
                if expected_dim is not None and dim != expected_dim:
                    raise ParseError(
                        path, line_no,
                        f"dimension {dim} does not match expected {expected_dim}")
            elif vec.shape[0] != dim:
                raise ParseError(
                    path, line_no,
                    f"dimension {vec.shape[0]} does not match dimension {dim} of earlier lines")
            if word in entries:
                duplicates += 1
                continue
            entries[word] = vec
    if dim is None:
        raise ParseError(path, 0, "embedding file contains no vectors")
    if duplicates:
        logger.warning("%s: dropped %d duplicate word(s), first occurrence wins", path, duplicates)
    return EmbeddingTable(dim=dim, entries=entries, duplicates=duplicates)


def format_component(x: float, precision: int = 9) -> str:
    """Render one vector component with `precision` significant digits."""
    if x == 0 and not math.copysign(1.0, x) < 0:
        return "0"
    return f"{x:.{precision}g}"


def save_embeddings(table_or_items, path, precision: int = 9) -> None:
    """Write embeddings in the same text format load_embeddings reads.

    Accepts an EmbeddingTable or an iterable of (word, vector) pairs.
    Components are written with `precision` significant digits, which is
    enough to round-trip 32-bit values.
    """
    items = table_or_items.items() if hasattr(table_or_items, "items") else table_or_items
    with open(path, "w", encoding="utf-8") as fh:
        for word, vec in items:
            comps = " ".join(format_component(float(x), precision) for x in vec)
            fh.write(f"{word} {comps}\n")
