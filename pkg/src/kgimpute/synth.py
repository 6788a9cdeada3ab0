"""Synthetic cluster world for end-to-end pipeline checks and demos.

Builds a small vocabulary of concept words whose ground-truth vectors
sit near well-separated cluster centers. Definitions are assembled from
per-cluster token pools so that words in the same cluster overlap
heavily (enough to pass the 0.5 edge threshold) while words in
different clusters share almost nothing. A balanced subset of words is
held out of the embedding table to act as pseudo-OOV targets whose
vectors the pipeline must recover.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import save_embeddings

CLUSTER_NAMES = ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta")


def _letter_ids(count: int):
    pairs = itertools.product(string.ascii_lowercase, repeat=2)
    return ["".join(p) for _, p in zip(range(count), pairs)]


@dataclass
class SynthWorld:
    dim: int
    n_clusters: int
    words: list[str]
    cluster_of: dict[str, int]
    truth: dict[str, np.ndarray]
    held_out: list[str]
    table_entries: list[tuple[str, np.ndarray]]
    corpus_rows: list[tuple[str, str, str]]
    freq_rows: list[tuple[str, int]]
    dataset_rows: list[tuple[str, str, float]]

    @property
    def kept(self) -> list[str]:
        held = set(self.held_out)
        return [w for w in self.words if w not in held]


def generate_world(
    seed: int = 42,
    n_clusters: int = 4,
    words_per_cluster: int = 15,
    held_out_per_cluster: int = 3,
    dim: int = 20,
    center_scale: float = 3.0,
    word_noise: float = 0.2,
    token_noise: float = 0.5,
    pool_size: int = 24,
    core_size: int = 10,
    extras_per_word: int = 2,
    n_dataset_pairs: int = 40,
) -> SynthWorld:
    """Deterministic synthetic world; everything flows from the seed."""
    if n_clusters > min(len(CLUSTER_NAMES), dim):
        raise ValueError("too many clusters for the configured names/dim")
    rng = np.random.default_rng(seed)

    # Orthonormal directions scaled to equal norm keep inner-product
    # nearest-neighbor queries from favoring any one cluster.
    basis, _ = np.linalg.qr(rng.normal(size=(dim, n_clusters)))
    centers = basis.T * center_scale

    words: list[str] = []
    cluster_of: dict[str, int] = {}
    truth: dict[str, np.ndarray] = {}
    for k in range(n_clusters):
        for i in range(words_per_cluster):
            word = f"{CLUSTER_NAMES[k]}{i:02d}"
            words.append(word)
            cluster_of[word] = k
            truth[word] = centers[k] + word_noise * rng.normal(size=dim)

    # Per-cluster token pools; every definition shares the cluster core,
    # so same-cluster Jaccard stays comfortably above 0.5 while
    # cross-cluster pairs only ever share the single common token.
    token_vecs: list[tuple[str, np.ndarray]] = []
    pools: list[list[str]] = []
    for k in range(n_clusters):
        pool = [f"{CLUSTER_NAMES[k]}tok{suffix}" for suffix in _letter_ids(pool_size)]
        pools.append(pool)
        for tok in pool:
            token_vecs.append((tok, centers[k] + token_noise * rng.normal(size=dim)))
    common_token = "commontok"
    token_vecs.append((common_token, 0.1 * rng.normal(size=dim)))

    corpus_rows = []
    for word in words:
        pool = pools[cluster_of[word]]
        core = pool[:core_size]
        extras = rng.choice(pool[core_size:], size=extras_per_word,
                            replace=False).tolist()
        summary = " ".join(core)
        definition = " ".join(sorted(extras) + [common_token])
        corpus_rows.append((word, summary, definition))

    held_out = []
    for k in range(n_clusters):
        members = [w for w in words if cluster_of[w] == k]
        chosen = rng.choice(members, size=held_out_per_cluster, replace=False)
        held_out.extend(sorted(chosen.tolist()))

    held = set(held_out)
    table_entries = [(w, truth[w]) for w in words if w not in held]
    table_entries.extend(token_vecs)

    freq_rows = [(w, 1000 - i) for i, w in enumerate(words)]

    dataset_rows = []
    for _ in range(n_dataset_pairs):
        w1, w2 = rng.choice(words, size=2, replace=False)
        dataset_rows.append((str(w1), str(w2), float(truth[str(w1)] @ truth[str(w2)])))
    # Two pairs with a word nobody has, to exercise the zero-vector rule.
    dataset_rows.append((words[0], "mysteryword", 0.5))
    dataset_rows.append(("mysteryword", words[-1], 0.25))

    return SynthWorld(
        dim=dim, n_clusters=n_clusters, words=words, cluster_of=cluster_of,
        truth=truth, held_out=held_out, table_entries=table_entries,
        corpus_rows=corpus_rows, freq_rows=freq_rows, dataset_rows=dataset_rows)


def write_fixture(world: SynthWorld, out_dir, config_defaults: dict | None = None) -> dict:
    """Write the world as pipeline input files plus a run-all config.

    Returns a map of logical names to paths. Ground-truth vectors for
    every word (held-out included) land in truth.txt at full precision
    for scoring.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "embeddings": out / "embeddings.txt",
        "corpus": out / "corpus.tsv",
        "freq": out / "freq.txt",
        "oov": out / "oov.txt",
        "dataset": out / "dataset.tsv",
        "truth": out / "truth.txt",
        "config": out / "run.cfg",
        "out_dir": out / "artifacts",
    }
    save_embeddings(world.table_entries, paths["embeddings"])
    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        for word, summary, definition in world.corpus_rows:
            fh.write(f"{word}\t{summary}\t{definition}\n")
    with open(paths["freq"], "w", encoding="utf-8") as fh:
        for word, count in world.freq_rows:
            fh.write(f"{word} {count}\n")
    with open(paths["oov"], "w", encoding="utf-8") as fh:
        for word in world.held_out:
            fh.write(word + "\n")
    with open(paths["dataset"], "w", encoding="utf-8") as fh:
        fh.write("# synthetic word-pair similarity fixture\n")
        for w1, w2, gold in world.dataset_rows:
            fh.write(f"{w1}\t{w2}\t{gold!r}\n")
    save_embeddings(((w, world.truth[w]) for w in world.words),
                    paths["truth"], precision=17)

    config = {
        "embeddings": paths["embeddings"],
        "corpus": paths["corpus"],
        "freq": paths["freq"],
        "oov": paths["oov"],
        "datasets": paths["dataset"],
        "out_dir": paths["out_dir"],
        "eta": 0.5,
        "skip_top": 0,
        "vprime": 9000,
        "layers": 3,
        "seed": 42,
    }
    config.update(config_defaults or {})
    with open(paths["config"], "w", encoding="utf-8") as fh:
        for key, value in config.items():
            fh.write(f"{key} = {value}\n")
    return paths


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="Write the synthetic pipeline fixture to a directory.")
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)
    paths = write_fixture(generate_world(seed=args.seed), args.out_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
