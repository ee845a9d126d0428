"""Command-line pipeline: data generation through evaluation reports.

Every subcommand reads and writes persisted artifacts under the configured
working directory, so the pipeline can be resumed at any stage. Exit codes:
0 success, 1 usage error, 2 data error, 3 training divergence.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .ann.forest import ProjectionForest
from .baselines.aggregate import WeightModel, discount_taste, weight_taste
from .baselines.classifier import SoftmaxClassifier
from .corpus import (
    filter_playlists,
    generate_catalog,
    generate_histories,
    generate_playlists,
    read_catalog,
    read_histories,
    read_playlists,
    write_catalog,
    write_histories,
    write_playlists,
)
from .embeddings.cbow import train_cbow
from .embeddings.matrix import EmbeddingMatrix
from .embeddings.vocab import build_vocabulary
from .errors import DataError, TrainingDivergedError
from .evaluation import (
    CurveReport,
    backward_analysis,
    forward_analysis,
    listening_stats,
    popularity_recommender,
    precision_table,
    write_curves_tsv,
    write_loss_history,
    write_precision_tsv,
    write_stats_summary,
    write_stats_tsv,
)
from .pipeline.config import PipelineConfig
from .pipeline.data import history_datasets, playlist_datasets
from .taste.model import TasteRegressor

pass_config = click.make_pass_decorator(PipelineConfig)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--workdir", type=click.Path(file_okay=False))
@click.option("--seed", type=int)
@click.pass_context
def cli(ctx, config_path, workdir, seed):
    """Music-discovery pipeline over synthetic listening data."""
    cfg = PipelineConfig.from_yaml(config_path) if config_path else PipelineConfig()
    if workdir is not None:
        cfg.workdir = Path(workdir)
    if seed is not None:
        cfg.seed = seed
    ctx.obj = cfg


# -- artifact loading helpers ------------------------------------------------


def _require(path: Path, produced_by: str) -> Path:
    if not path.exists():
        raise DataError(f"missing artifact {path} (run `{produced_by}` first)")
    return path


def _load_embeddings(cfg: PipelineConfig) -> EmbeddingMatrix:
    return EmbeddingMatrix.load(_require(cfg.embeddings_path, "train-embeddings"))


def _history_splits(cfg, embeddings):
    catalog = read_catalog(_require(cfg.catalog_path, "gen-data"))
    histories = read_histories(_require(cfg.histories_path, "gen-data"))
    return catalog, history_datasets(histories, catalog, embeddings, cfg)


# -- commands ------------------------------------------------------------------


@cli.command("gen-data")
@pass_config
def gen_data(cfg: PipelineConfig):
    """Generate the synthetic catalog, playlists, and listening histories."""
    cfg.workdir.mkdir(parents=True, exist_ok=True)
    catalog = generate_catalog(cfg.num_songs, cfg.num_artists, cfg.num_genres, cfg.seed)
    write_catalog(catalog, cfg.catalog_path)
    playlists = generate_playlists(
        catalog,
        cfg.num_playlists,
        (cfg.playlist_min_length, cfg.playlist_max_length),
        cfg.genre_coherence,
        cfg.seed,
    )
    write_playlists(playlists, cfg.playlists_path)
    histories = generate_histories(
        catalog,
        cfg.num_users,
        cfg.history_length,
        cfg.fixation_mean,
        cfg.seed,
        artist_focus=cfg.artist_focus,
    )
    write_histories(histories, cfg.histories_path)
    click.echo(
        f"wrote {cfg.num_songs} songs, {len(playlists)} playlists, "
        f"{len(histories)} histories to {cfg.workdir}"
    )


@cli.command("filter")
@click.option("--top-n", type=int, default=None, help="popularity cutoff")
@pass_config
def filter_cmd(cfg: PipelineConfig, top_n):
    """Apply the playlist filtering rules and persist the survivors."""
    catalog = read_catalog(_require(cfg.catalog_path, "gen-data"))
    playlists = read_playlists(_require(cfg.playlists_path, "gen-data"))
    cutoff = top_n or cfg.top_n or catalog.num_songs
    kept = filter_playlists(playlists, catalog, cutoff)
    write_playlists(kept, cfg.filtered_playlists_path)
    click.echo(f"kept {len(kept)}/{len(playlists)} playlists (top_n={cutoff})")


@cli.command("train-embeddings")
@click.option("--dims", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@pass_config
def train_embeddings(cfg: PipelineConfig, dims, epochs):
    """Learn song vectors from the filtered playlist corpus."""
    catalog = read_catalog(_require(cfg.catalog_path, "gen-data"))
    source = (
        cfg.filtered_playlists_path
        if cfg.filtered_playlists_path.exists()
        else _require(cfg.playlists_path, "gen-data")
    )
    playlists = read_playlists(source)
    vocab = build_vocabulary(playlists, catalog, cfg.top_n or catalog.num_songs)
    embeddings = train_cbow(
        playlists,
        vocab,
        dims=dims or cfg.dims,
        window=cfg.window,
        negatives=cfg.negatives,
        epochs=epochs if epochs is not None else cfg.embedding_epochs,
        seed=cfg.seed,
    )
    embeddings.save(cfg.embeddings_path)
    click.echo(
        f"trained {len(embeddings)}x{embeddings.dim} embeddings from "
        f"{len(playlists)} playlists -> {cfg.embeddings_path}"
    )


@cli.command("train-model")
@click.option(
    "--variant",
    type=click.Choice(["rPST", "rPLT", "rHST", "rHLT"]),
    default="rHST",
    show_default=True,
)
@click.option("--l-min", type=int, default=None, help="minimum prediction offset")
@click.option("--l-max", type=int, default=None, help="maximum prediction offset")
@click.option("--d-hid", type=int, default=None, help="recurrent hidden size")
@click.option("--epochs", type=int, default=None)
@click.option("--context/--no-context", "context", default=None)
@pass_config
def train_model(cfg: PipelineConfig, variant, l_min, l_max, d_hid, epochs, context):
    """Train one taste-vector regressor variant."""
    embeddings = _load_embeddings(cfg)
    if variant.startswith("rP"):
        playlists = read_playlists(
            _require(
                cfg.filtered_playlists_path
                if cfg.filtered_playlists_path.exists()
                else cfg.playlists_path,
                "gen-data",
            )
        )
        train, valid, _ = playlist_datasets(playlists, cfg, embeddings)
    else:
        _, (train, valid, _) = _history_splits(cfg, embeddings)
    if not train:
        raise DataError("no training sequences survived filtering")
    model = TasteRegressor(
        variant=variant,
        offset_min=l_min,
        offset_max=l_max,
        hidden_size=d_hid or cfg.hidden_size,
        context_enabled=cfg.context_enabled if context is None else context,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        epochs=epochs if epochs is not None else cfg.train_epochs,
        seed=cfg.seed,
    )
    model.fit(train, embeddings, validation=valid or None)
    model.save(cfg.model_path(variant))
    write_loss_history(model.history_, cfg.loss_history_path(variant))
    final = model.history_[-1]
    click.echo(
        f"trained {variant} on {len(train)} sequences "
        f"(epoch {final[0]}: train {final[1]:.3f}, valid {final[2]:.3f}) "
        f"-> {cfg.model_path(variant)}"
    )


@cli.command("train-baseline")
@click.option("--kind", type=click.Choice(["weight", "classifier"]), required=True)
@click.option(
    "--term",
    type=click.Choice(["short", "long"]),
    default="short",
    show_default=True,
)
@click.option(
    "--loss",
    "loss_mode",
    type=click.Choice(["cross_entropy", "bpr"]),
    default="cross_entropy",
    show_default=True,
)
@click.option("--epochs", type=int, default=None)
@pass_config
def train_baseline(cfg: PipelineConfig, kind, term, loss_mode, epochs):
    """Train a weight-based or classification baseline on history data."""
    embeddings = _load_embeddings(cfg)
    _, (train, _, _) = _history_splits(cfg, embeddings)
    if not train:
        raise DataError("no training sequences survived filtering")
    offsets = (1, 10) if term == "short" else (25, 50)
    if kind == "weight":
        model = WeightModel(
            history_length=len(train[0].inputs),
            reg_lambda=cfg.weight_reg,
            offset_min=offsets[0],
            offset_max=offsets[1],
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            epochs=epochs if epochs is not None else cfg.train_epochs,
            seed=cfg.seed,
        )
        model.fit(train, embeddings)
        model.save_weights(cfg.weights_path(term))
        write_loss_history(model.history_, cfg.loss_history_path(f"weight_{term}"))
        click.echo(f"trained {term}-term weight model -> {cfg.weights_path(term)}")
    else:
        model = SoftmaxClassifier(
            loss=loss_mode,
            num_negatives=cfg.bpr_negatives,
            zipf_exponent=cfg.zipf_exponent,
            hidden_size=cfg.hidden_size,
            offset_min=offsets[0],
            offset_max=offsets[1],
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            epochs=epochs if epochs is not None else cfg.classifier_epochs,
            seed=cfg.seed,
        )
        model.fit(train, embeddings)
        model.save(cfg.classifier_path(loss_mode))
        write_loss_history(model.history_, cfg.loss_history_path(f"classifier_{loss_mode}"))
        click.echo(
            f"trained {loss_mode} classifier ({len(embeddings)} outputs) "
            f"-> {cfg.classifier_path(loss_mode)}"
        )


@cli.command("build-index")
@click.option("--trees", type=int, default=None)
@click.option("--max-leaf-size", type=int, default=None)
@pass_config
def build_index_cmd(cfg: PipelineConfig, trees, max_leaf_size):
    """Build the retrieval forest over the trained embeddings."""
    embeddings = _load_embeddings(cfg)
    forest = ProjectionForest(
        num_trees=trees or cfg.num_trees,
        max_leaf_size=max_leaf_size or cfg.max_leaf_size,
        seed=cfg.seed,
    ).fit(embeddings)
    forest.save(cfg.index_path)
    click.echo(
        f"indexed {len(embeddings)} vectors with {forest.num_trees} trees "
        f"-> {cfg.index_path}"
    )


@cli.command("recommend")
@click.option(
    "--history",
    "history_path",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="history TSV of users to recommend for",
)
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=None)
@click.option("--exclude-heard/--include-heard", default=True, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False))
@pass_config
def recommend(cfg: PipelineConfig, history_path, model_path, k, exclude_heard, output):
    """Emit top-k recommendations (song id + distance) per user."""
    embeddings = _load_embeddings(cfg)
    forest = ProjectionForest.load(_require(cfg.index_path, "build-index"), embeddings)
    model_file = Path(model_path) if model_path else cfg.model_path("rHST")
    model = TasteRegressor.load(_require(model_file, "train-model"), embeddings)
    k = k or cfg.recommend_k
    n, _, _ = model._resolved()

    lines = []
    for history in read_histories(history_path):
        songs = [e.song_id for e in history.events if e.song_id in embeddings]
        if not songs:
            raise DataError(f"user {history.user_id}: no songs with embeddings")
        taste = model.taste_vector(songs[-n:])
        exclude = set(songs) if exclude_heard else set()
        results = forest.query(taste, k=k, search_k=cfg.search_k, exclude=exclude)
        for song_id, dist in results:
            lines.append(f"{history.user_id}\t{song_id}\t{dist!r}")
    text = "\n".join(lines) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _evaluation_recommenders(cfg: PipelineConfig, embeddings: EmbeddingMatrix):
    """Assemble (vector taste functions, score functions) from artifacts."""
    taste_fns = {}
    score_fns = {}
    for variant in ("rPST", "rPLT", "rHST", "rHLT"):
        path = cfg.model_path(variant)
        if path.exists():
            model = TasteRegressor.load(path, embeddings)
            taste_fns[variant] = lambda seq, m=model: m.taste_vector(
                seq.inputs, seq.events if m.context_enabled else None
            )
    for term, label in (("short", "bWST"), ("long", "bWLT")):
        path = cfg.weights_path(term)
        if path.exists():
            weights = WeightModel.load_weights(path)
            taste_fns[label] = lambda seq, w=weights: weight_taste(
                embeddings.take(seq.inputs), w
            )
    for gamma in cfg.gammas:
        taste_fns[f"discount_{gamma}"] = lambda seq, g=gamma: discount_taste(
            embeddings.take(seq.inputs), g
        )
    score_fns["popularity"] = popularity_recommender(embeddings)
    for loss_mode in ("cross_entropy", "bpr"):
        path = cfg.classifier_path(loss_mode)
        if path.exists():
            clf = SoftmaxClassifier.load(path, embeddings)
            score_fns[f"classifier_{loss_mode}"] = lambda seq, c=clf: c.scores(seq.inputs)
    return taste_fns, score_fns


@cli.command("evaluate")
@pass_config
def evaluate(cfg: PipelineConfig):
    """Forward/backward curves and precision table over the test split."""
    embeddings = _load_embeddings(cfg)
    forest = ProjectionForest.load(_require(cfg.index_path, "build-index"), embeddings)
    _, (_, _, test) = _history_splits(cfg, embeddings)
    if not test:
        raise DataError("no test sequences survived filtering")
    taste_fns, score_fns = _evaluation_recommenders(cfg, embeddings)

    cfg.reports_dir.mkdir(parents=True, exist_ok=True)
    forward = CurveReport(kind="forward")
    backward = CurveReport(kind="backward")
    for name, fn in taste_fns.items():
        forward.merge(forward_analysis(fn, test, embeddings, name=name))
        backward.merge(backward_analysis(fn, test, embeddings, name=name))
    write_curves_tsv(forward, cfg.reports_dir / "forward.tsv")
    write_curves_tsv(backward, cfg.reports_dir / "backward.tsv")

    report = precision_table(
        {**taste_fns, **score_fns},
        test,
        forest,
        embeddings,
        search_k=cfg.search_k,
        score_models=set(score_fns),
    )
    write_precision_tsv(report, cfg.reports_dir / "precision.tsv")

    click.echo(f"evaluated {len(test)} test sequences -> {cfg.reports_dir}")
    for model in sorted(report.values):
        cells = "  ".join(
            f"{metric}={value * 100:.2f}%"
            for metric, value in report.values[model].items()
        )
        click.echo(f"  {model:24s} {cells}")


@cli.command("stats")
@pass_config
def stats_cmd(cfg: PipelineConfig):
    """Distance statistics over the test split of listening histories."""
    embeddings = _load_embeddings(cfg)
    _, (_, _, test) = _history_splits(cfg, embeddings)
    if not test:
        raise DataError("no test sequences survived filtering")
    stats = listening_stats(test, embeddings)
    cfg.reports_dir.mkdir(parents=True, exist_ok=True)
    write_stats_tsv(stats, cfg.reports_dir / "stats.tsv")
    write_stats_summary(stats, cfg.reports_dir / "stats_summary.txt")
    click.echo(
        f"all-pairs median {stats.all_pairs.median:.3f}, "
        f"subsequent median {stats.subsequent_pairs.median:.3f}, "
        f"median transitions {stats.median_transitions:.1f} "
        f"-> {cfg.reports_dir}"
    )


@cli.command("refresh")
@click.pass_context
def refresh(ctx):
    """Full model update: embeddings, then taste models, then the index.

    Order matters: retrained embeddings land in a new vector space, so the
    regressors and the retrieval forest must both be rebuilt after them.
    """
    cfg = ctx.obj
    ctx.invoke(train_embeddings)
    for variant in cfg.variants:
        ctx.invoke(train_model, variant=variant)
    ctx.invoke(build_index_cmd)
    click.echo("refresh complete (embeddings -> models -> index)")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except (DataError, FileNotFoundError, NotADirectoryError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except TrainingDivergedError as exc:
        click.echo(f"training diverged: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
