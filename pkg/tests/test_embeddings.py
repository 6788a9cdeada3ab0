import numpy as np
import pytest

from kgimpute.embeddings import (EmbeddingTable, load_embeddings,
                                 save_embeddings)
from kgimpute.errors import ParseError


def write(tmp_path, text, name="emb.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_basic(tmp_path):
    path = write(tmp_path, "a 1.0 0.0\nb 0.0 1.0\n")
    table = load_embeddings(path)
    assert table.dim == 2
    assert len(table) == 2
    assert np.array_equal(table.lookup("a"), [1.0, 0.0])


def test_duplicate_first_wins(tmp_path):
    path = write(tmp_path, "a 1.0 0.0\na 9.9 9.9\n")
    table = load_embeddings(path)
    assert np.array_equal(table.lookup("a"), [1.0, 0.0])
    assert table.duplicates == 1


def test_dimension_mismatch_names_line(tmp_path):
    path = write(tmp_path, "a 1.0\nb 2.0 3.0\n")
    with pytest.raises(ParseError) as exc:
        load_embeddings(path)
    assert exc.value.line_no == 2


def test_non_numeric_component(tmp_path):
    path = write(tmp_path, "a 1.0 zebra\n")
    with pytest.raises(ParseError):
        load_embeddings(path)


def test_non_finite_component(tmp_path):
    path = write(tmp_path, "a 1.0 nan\n")
    with pytest.raises(ParseError):
        load_embeddings(path)


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        load_embeddings(write(tmp_path, ""))


def test_word2vec_header_skipped(tmp_path):
    path = write(tmp_path, "2 2\na 1.0 0.0\nb 0.0 1.0\n")
    table = load_embeddings(path)
    assert len(table) == 2 and table.dim == 2


def test_expected_dim_checked(tmp_path):
    path = write(tmp_path, "a 1.0 0.0\n")
    assert load_embeddings(path, expected_dim=2).dim == 2
    with pytest.raises(ParseError):
        load_embeddings(path, expected_dim=3)


def test_lookup_is_exact_match():
    table = EmbeddingTable(dim=2, entries={"a": np.array([1.0, 0.0])})
    assert np.array_equal(table.lookup("a"), [1.0, 0.0])
    assert table.lookup("A") is None
    assert table.lookup("x") is None
    assert "a" in table and "A" not in table


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    table = EmbeddingTable(dim=4, entries={
        f"w{i}": rng.normal(size=4) * 10.0 ** float(rng.integers(-3, 4))
        for i in range(20)})
    first = tmp_path / "first.txt"
    second = tmp_path / "second.txt"
    save_embeddings(table, first)
    save_embeddings(load_embeddings(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_lookup_absent_iff_not_stored(tmp_path):
    path = write(tmp_path, "cat 1 2\ndog 3 4\n")
    table = load_embeddings(path)
    for word in ["cat", "dog"]:
        assert table.lookup(word) is not None
    for word in ["Cat", "mouse", ""]:
        assert table.lookup(word) is None
