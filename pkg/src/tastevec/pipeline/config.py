"""Pipeline configuration: one YAML file plus command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml


@dataclass
class PipelineConfig:
    seed: int = 7
    workdir: Path = Path("artifacts")

    # catalog generation
    num_songs: int = 2000
    num_artists: int = 1000
    num_genres: int = 20

    # playlist generation / filtering
    num_playlists: int = 500
    playlist_min_length: int = 40
    playlist_max_length: int = 160
    genre_coherence: float = 0.92
    top_n: int | None = None  # None keeps the whole catalog

    # listening-history generation
    num_users: int = 600
    history_length: int = 300
    fixation_mean: int = 21
    artist_focus: float = 0.15

    # embedding training
    dims: int = 40
    window: int = 5
    negatives: int = 5
    embedding_epochs: int = 3

    # taste-model training
    variants: list[str] = field(default_factory=lambda: ["rHST", "rHLT"])
    hidden_size: int = 50
    train_epochs: int = 8
    batch_size: int = 32
    learning_rate: float = 1e-3
    context_enabled: bool = False

    # baseline models
    gammas: list[float] = field(default_factory=lambda: [1.0, 0.97, 0.85])
    weight_reg: float = 0.001
    bpr_negatives: int = 100
    zipf_exponent: float = 1.05
    classifier_epochs: int = 4

    # data split (by user / by playlist)
    train_fraction: float = 0.85
    valid_fraction: float = 0.075

    # retrieval index
    num_trees: int = 10
    max_leaf_size: int = 16
    search_k: int = 4000
    recommend_k: int = 50

    # -- artifact locations -------------------------------------------------

    def path(self, name: str) -> Path:
        return Path(self.workdir) / name

    @property
    def catalog_path(self) -> Path:
        return self.path("catalog.tsv")

    @property
    def playlists_path(self) -> Path:
        return self.path("playlists.tsv")

    @property
    def filtered_playlists_path(self) -> Path:
        return self.path("playlists_filtered.tsv")

    @property
    def histories_path(self) -> Path:
        return self.path("histories.tsv")

    @property
    def embeddings_path(self) -> Path:
        return self.path("embeddings.txt")

    @property
    def index_path(self) -> Path:
        return self.path("index.tidx")

    def model_path(self, variant: str) -> Path:
        return self.path(f"model_{variant}.tseq")

    def weights_path(self, term: str) -> Path:
        return self.path(f"weights_{term}.tsv")

    def classifier_path(self, loss: str) -> Path:
        return self.path(f"classifier_{loss}.tseq")

    def loss_history_path(self, name: str) -> Path:
        return self.path(f"loss_{name}.tsv")

    @property
    def reports_dir(self) -> Path:
        return self.path("reports")

    # -- loading --------------------------------------------------------------

    @classmethod
    def from_yaml(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "workdir" in raw:
            raw["workdir"] = Path(raw["workdir"])
        return cls(**raw)

    def to_yaml(self, path: str | Path) -> None:
        data = {}
        for f in fields(self):
            value = getattr(self, f.name)
            data[f.name] = str(value) if isinstance(value, Path) else value
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(data, fh, sort_keys=False)
