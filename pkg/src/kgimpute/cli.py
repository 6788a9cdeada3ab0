"""Command-line entry point: fetch, build-graph, train, impute, eval, run-all.

Every stage is a plain function shared between its subcommand and
run-all, so the convenience command and the manual sequence produce the
same artifacts. Report-writing stages drop a rendered figure next to
each machine-readable output.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import dataclass, fields
from pathlib import Path

import click

from . import __version__
from .embeddings import load_embeddings
from .errors import KgimputeError
from .evaluate import evaluate_dataset, load_dataset, score_pairs
from .gcn import load_model, save_model
from .graphbuild import build_graph, load_graph, save_graph
from .grounding import (load_frequency_list, load_grounding_corpus,
                        load_stopwords, load_word_list, select_vocabulary)
from .imputer import impute
from .trainer import TrainConfig, train, write_report_jsonl
from .wikifetch import FetchConfig, build_corpus


@dataclass
class PipelineConfig:
    """Everything run-all needs, with the standard pipeline defaults."""

    embeddings: str | None = None
    corpus: str | None = None
    freq: str | None = None
    oov: str | None = None
    datasets: tuple[str, ...] = ()
    words: str | None = None
    cache_dir: str | None = None
    offline: bool = False
    max_rps: float = 2.0
    out_dir: str | None = None
    eta: float = 0.5
    skip_top: int = 2000
    v_prime_size: int = 9000
    layers: int = 3
    epochs: int = 200
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 42
    val_fraction: float = 0.1
    patience: int = 20
    lowercase: bool = True
    keep_digits: bool = False
    stopword_file: str | None = None
    hidden_dims: tuple[int, ...] | None = None
    mode: str = "gnn"


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_paths(raw: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


def _parse_dims(raw: str) -> tuple[int, ...]:
    return tuple(int(p) for p in raw.split(",") if p.strip())


_CONFIG_KEYS = {
    "embeddings": ("embeddings", str),
    "corpus": ("corpus", str),
    "freq": ("freq", str),
    "oov": ("oov", str),
    "datasets": ("datasets", _parse_paths),
    "words": ("words", str),
    "cache_dir": ("cache_dir", str),
    "offline": ("offline", _parse_bool),
    "max_rps": ("max_rps", float),
    "out_dir": ("out_dir", str),
    "eta": ("eta", float),
    "skip_top": ("skip_top", int),
    "vprime": ("v_prime_size", int),
    "layers": ("layers", int),
    "epochs": ("epochs", int),
    "lr": ("learning_rate", float),
    "optimizer": ("optimizer", str),
    "seed": ("seed", int),
    "val_fraction": ("val_fraction", float),
    "patience": ("patience", int),
    "lowercase": ("lowercase", _parse_bool),
    "keep_digits": ("keep_digits", _parse_bool),
    "stopword_file": ("stopword_file", str),
    "hidden_dims": ("hidden_dims", _parse_dims),
    "mode": ("mode", str),
}


def parse_config_file(path) -> dict:
    """Read `key = value` lines into PipelineConfig field values."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise click.ClickException(
                    f"{path}:{line_no}: expected `key = value`, got {stripped!r}")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise click.ClickException(f"{path}:{line_no}: unknown key {key!r}")
            field_name, coerce = _CONFIG_KEYS[key]
            try:
                values[field_name] = coerce(raw.strip())
            except ValueError as exc:
                raise click.ClickException(f"{path}:{line_no}: {exc}") from exc
    return values


def make_pipeline_config(config_path, overrides: dict) -> PipelineConfig:
    """Config file values first, then explicit flags on top (flags win)."""
    values = parse_config_file(config_path) if config_path else {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "datasets" and not value:
            continue
        values[key] = value
    known = {f.name for f in fields(PipelineConfig)}
    return PipelineConfig(**{k: v for k, v in values.items() if k in known})


@contextmanager
def _stage(name: str):
    try:
        yield
    except click.ClickException:
        raise
    except (KgimputeError, ValueError, OSError) as exc:
        raise click.ClickException(f"[{name}] {exc}") from exc


def run_fetch(words_path, cache_dir, out_path, offline: bool, max_rps: float) -> dict:
    words = load_word_list(words_path)
    config = FetchConfig(max_rps=max_rps)
    counts = build_corpus(words, cache_dir, out_path, offline=offline, config=config)
    return counts


def run_build_graph(embeddings_path, corpus_path, freq_path, oov_path, out_path,
                    eta, skip_top, v_prime_size, lowercase, keep_digits,
                    stopword_file):
    if not corpus_path:
        raise ValueError("no corpus path configured")
    stopwords = load_stopwords(stopword_file) if stopword_file else None
    table = load_embeddings(embeddings_path)
    corpus = load_grounding_corpus(
        corpus_path, lowercase=lowercase, keep_digits=keep_digits,
        stopwords=stopwords)
    freq = load_frequency_list(freq_path)
    selection = select_vocabulary(freq, table, skip_top=skip_top,
                                  v_prime_size=v_prime_size)
    oov_words = load_word_list(oov_path) if oov_path else []
    graph = build_graph(selection, oov_words, corpus, table, eta=eta,
                        meta={"v_prime_size": v_prime_size,
                              "lowercase": lowercase})
    save_graph(graph, out_path)
    return graph


def run_train(graph_path, model_path, report_path, cfg: TrainConfig):
    graph = load_graph(graph_path)
    model, report = train(graph, cfg)
    save_model(model, model_path)
    if report_path:
        write_report_jsonl(report, report_path)
        from .figures import render_train_curves
        render_train_curves(report, Path(report_path).with_suffix(".png"))
    return report


def run_impute(graph_path, model_path, embeddings_path, mode, out_path,
               report_path, requested_path):
    graph = load_graph(graph_path)
    table = load_embeddings(embeddings_path)
    model = load_model(model_path) if model_path else None
    requested = load_word_list(requested_path) if requested_path else None
    result = impute(graph, model, table, mode=mode, requested=requested)
    result.save(out_path)
    if report_path:
        counts: dict[str, int] = {}
        for prov in result.provenance.values():
            counts[prov] = counts.get(prov, 0) + 1
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump({"counts": counts, "warnings": result.report}, fh,
                      sort_keys=True, indent=2)
            fh.write("\n")
        from .figures import render_norm_histogram
        render_norm_histogram(result, Path(report_path).with_suffix(".png"))
    return result


def run_eval(embeddings_path, dataset_paths, out_path, lowercase: bool):
    table = load_embeddings(embeddings_path)
    vectors = dict(table.items())
    results = {}
    panels = []
    for path in dataset_paths:
        ds = load_dataset(path)
        name = ds.name
        suffix = 2
        while name in results:
            name = f"{ds.name}_{suffix}"
            suffix += 1
        result = evaluate_dataset(ds, vectors, lowercase=lowercase)
        results[name] = result.as_dict()
        scores, _, _ = score_pairs(ds, vectors, lowercase=lowercase)
        panels.append((name, [g for _, _, g in ds.pairs], scores, results[name]))
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(results, fh, sort_keys=True, indent=2)
        fh.write("\n")
    from .figures import render_eval_panels
    render_eval_panels(panels, Path(out_path).with_suffix(".png"))
    return results


def _echo_eval_summary(results: dict) -> None:
    for name in sorted(results):
        r = results[name]
        click.echo(
            f"{name}: pearson {100 * r['pearson']:.1f}  "
            f"spearman {100 * r['spearman']:.1f}  "
            f"missed words {r['missed_words_pct']:.2f}%  "
            f"missed pairs {r['missed_pairs_pct']:.2f}%  "
            f"({r['n_pairs']} pairs)")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="kgimpute",
                      message="%(prog)s %(version)s (definition-graph embedding imputation)")
def main():
    """Impute embeddings for out-of-vocabulary words from a definition graph."""


@main.command("fetch")
@click.option("--words", "words_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="File with one word per line.")
@click.option("--cache", "cache_dir", required=True, type=click.Path(file_okay=False),
              help="Directory for the on-disk fetch cache.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False),
              help="Grounding corpus TSV to write.")
@click.option("--offline", is_flag=True, help="Never touch the network; cache only.")
@click.option("--max-rps", type=float, default=2.0, show_default=True,
              help="Request rate limit.")
def fetch_cmd(words_path, cache_dir, out_path, offline, max_rps):
    """Assemble a grounding corpus from wiki summary/definition endpoints."""
    with _stage("fetch"):
        counts = run_fetch(words_path, cache_dir, out_path, offline, max_rps)
    click.echo(f"wrote {out_path}: ok {counts['ok']}, "
               f"not_found {counts['not_found']}, error {counts['error']}")


@main.command("build-graph")
@click.option("--embeddings", "embeddings_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--freq", "freq_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--oov", "oov_path", type=click.Path(exists=True, dir_okay=False),
              help="Words to add as OOV nodes, one per line.")
@click.option("--eta", type=float, default=0.5, show_default=True,
              help="Edge threshold on the Jaccard overlap (strict).")
@click.option("--skip-top", type=int, default=2000, show_default=True)
@click.option("--vprime", "v_prime_size", type=int, default=9000, show_default=True)
@click.option("--keep-case", is_flag=True, help="Do not lowercase grounding text.")
@click.option("--keep-digits", is_flag=True, help="Keep pure-digit tokens.")
@click.option("--stopword-file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def build_graph_cmd(embeddings_path, corpus_path, freq_path, oov_path, eta,
                    skip_top, v_prime_size, keep_case, keep_digits,
                    stopword_file, out_path):
    """Build the definition-overlap knowledge graph."""
    with _stage("build-graph"):
        graph = run_build_graph(
            embeddings_path, corpus_path, freq_path, oov_path, out_path,
            eta=eta, skip_top=skip_top, v_prime_size=v_prime_size,
            lowercase=not keep_case, keep_digits=keep_digits,
            stopword_file=stopword_file)
    click.echo(f"wrote {out_path}: {graph.n_nodes} nodes "
               f"({int(graph.supervised.sum())} supervised), {graph.n_edges} edges")


@main.command("train")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "model_path", required=True, type=click.Path(dir_okay=False))
@click.option("--epochs", type=int, default=200, show_default=True)
@click.option("--lr", "learning_rate", type=float, default=1e-3, show_default=True)
@click.option("--layers", type=int, default=3, show_default=True,
              help="Number of aggregation layers.")
@click.option("--hidden-dims", type=str, default=None,
              help="Comma-separated inner layer sizes (default: embedding dim).")
@click.option("--optimizer", type=click.Choice(["adam", "sgd"]), default="adam",
              show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--val-fraction", type=float, default=0.1, show_default=True)
@click.option("--patience", type=int, default=20, show_default=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write per-epoch JSON lines (and a curve figure) here.")
def train_cmd(graph_path, model_path, epochs, learning_rate, layers, hidden_dims,
              optimizer, seed, val_fraction, patience, report_path):
    """Train the network to regress node outputs onto dictionary vectors."""
    with _stage("train"):
        cfg = TrainConfig(
            epochs=epochs, learning_rate=learning_rate, optimizer=optimizer,
            seed=seed, val_fraction=val_fraction, patience=patience,
            layers=layers,
            hidden_dims=_parse_dims(hidden_dims) if hidden_dims else None)
        report = run_train(graph_path, model_path, report_path, cfg)
    best = (f"best val MSE {report.best_val_mse:.6g} at epoch {report.best_epoch}"
            if report.best_val_mse is not None
            else f"final train MSE {report.epochs[-1].train_mse:.6g}")
    click.echo(f"wrote {model_path}: {report.provenance['epochs_run']} epochs, {best}")


@main.command("impute")
@click.option("--graph", "graph_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              help="Trained model (required for gnn mode).")
@click.option("--embeddings", "embeddings_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["gnn", "node-feature"]), default="gnn",
              show_default=True)
@click.option("--oov", "requested_path", type=click.Path(exists=True, dir_okay=False),
              help="Words that must appear in the output even if unknown.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False),
              help="Write provenance counts and warnings (plus a figure) here.")
def impute_cmd(graph_path, model_path, embeddings_path, mode, requested_path,
               out_path, report_path):
    """Emit final embeddings: dictionary vectors plus imputed OOV vectors."""
    with _stage("impute"):
        result = run_impute(graph_path, model_path, embeddings_path,
                            mode.replace("-", "_"), out_path, report_path,
                            requested_path)
    click.echo(f"wrote {out_path}: {len(result.vectors)} vectors, "
               f"{len(result.report)} warnings")


@main.command("eval")
@click.option("--embeddings", "embeddings_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", "dataset_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Word-pair TSV; repeat for several benchmarks.")
@click.option("--keep-case", is_flag=True,
              help="Disable the lowercased-form lookup fallback.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def eval_cmd(embeddings_path, dataset_paths, keep_case, out_path):
    """Score embeddings on word-pair similarity benchmarks."""
    with _stage("eval"):
        results = run_eval(embeddings_path, dataset_paths, out_path,
                           lowercase=not keep_case)
    _echo_eval_summary(results)
    click.echo(f"wrote {out_path}")


@main.command("run-all")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key = value file; explicit flags override it.")
@click.option("--embeddings", type=click.Path(), default=None)
@click.option("--corpus", type=click.Path(), default=None)
@click.option("--freq", type=click.Path(), default=None)
@click.option("--oov", type=click.Path(), default=None)
@click.option("--dataset", "datasets", multiple=True, type=click.Path())
@click.option("--words", type=click.Path(), default=None)
@click.option("--cache-dir", type=click.Path(), default=None)
@click.option("--offline/--online", default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--eta", type=float, default=None)
@click.option("--skip-top", type=int, default=None)
@click.option("--vprime", "v_prime_size", type=int, default=None)
@click.option("--layers", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--lr", "learning_rate", type=float, default=None)
@click.option("--optimizer", type=click.Choice(["adam", "sgd"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--val-fraction", type=float, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--mode", type=click.Choice(["gnn", "node-feature"]), default=None)
@click.option("--lowercase/--keep-case", default=None)
def run_all_cmd(config_path, **overrides):
    """Run the full pipeline, persisting every intermediate artifact."""
    if overrides.get("mode"):
        overrides["mode"] = overrides["mode"].replace("-", "_")
    cfg = make_pipeline_config(config_path, overrides)
    artifacts = run_all(cfg)
    for name in ("graph", "model", "imputed", "results"):
        if name in artifacts:
            click.echo(f"{name}: {artifacts[name]}")


def run_all(cfg: PipelineConfig) -> dict:
    """Execute fetch, build-graph, train, impute and eval in sequence."""
    if not cfg.out_dir:
        raise click.ClickException("[run-all] out_dir is required")
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts: dict = {}

    corpus_path = cfg.corpus
    if cfg.words:
        corpus_path = str(out_dir / "corpus.tsv")
        with _stage("fetch"):
            cache_dir = cfg.cache_dir or str(out_dir / "fetch_cache")
            run_fetch(cfg.words, cache_dir, corpus_path, cfg.offline, cfg.max_rps)
        artifacts["corpus"] = corpus_path

    graph_path = str(out_dir / "graph.json")
    with _stage("build-graph"):
        if not cfg.embeddings:
            raise ValueError("no embeddings path configured")
        if not cfg.freq:
            raise ValueError("no frequency list configured")
        run_build_graph(
            cfg.embeddings, corpus_path, cfg.freq, cfg.oov, graph_path,
            eta=cfg.eta, skip_top=cfg.skip_top, v_prime_size=cfg.v_prime_size,
            lowercase=cfg.lowercase, keep_digits=cfg.keep_digits,
            stopword_file=cfg.stopword_file)
    artifacts["graph"] = graph_path

    model_path = str(out_dir / "model.json")
    report_path = str(out_dir / "train_report.jsonl")
    with _stage("train"):
        train_cfg = TrainConfig(
            epochs=cfg.epochs, learning_rate=cfg.learning_rate,
            optimizer=cfg.optimizer, seed=cfg.seed,
            val_fraction=cfg.val_fraction, patience=cfg.patience,
            layers=cfg.layers, hidden_dims=cfg.hidden_dims)
        run_train(graph_path, model_path, report_path, train_cfg)
    artifacts["model"] = model_path
    artifacts["train_report"] = report_path

    imputed_path = str(out_dir / "imputed.txt")
    impute_report_path = str(out_dir / "impute_report.json")
    with _stage("impute"):
        run_impute(graph_path, model_path, cfg.embeddings, cfg.mode,
                   imputed_path, impute_report_path, cfg.oov)
    artifacts["imputed"] = imputed_path
    artifacts["impute_report"] = impute_report_path

    if cfg.datasets:
        results_path = str(out_dir / "results.json")
        with _stage("eval"):
            results = run_eval(imputed_path, cfg.datasets, results_path,
                               lowercase=cfg.lowercase)
        _echo_eval_summary(results)
        artifacts["results"] = results_path

    return artifacts


if __name__ == "__main__":
    main()
