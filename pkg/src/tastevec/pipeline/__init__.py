"""Pipeline configuration and dataset assembly."""

from .config import PipelineConfig
from .data import history_datasets, playlist_datasets, three_way_split

__all__ = ["PipelineConfig", "history_datasets", "playlist_datasets", "three_way_split"]
