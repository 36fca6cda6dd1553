"""Limit order book forecasting: data handling, models, training and evaluation."""

from ._core import (
    Dataset,
    LobcastError,
    Pipeline,
    default_config,
    evaluate,
    forecast,
    ingest,
    inverse_percent_change,
    parse_lobster,
    percent_change,
    read_dataset,
    structure_loss,
    synth,
    train,
)

__all__ = [
    "Dataset",
    "LobcastError",
    "Pipeline",
    "default_config",
    "evaluate",
    "forecast",
    "ingest",
    "inverse_percent_change",
    "parse_lobster",
    "percent_change",
    "read_dataset",
    "structure_loss",
    "synth",
    "train",
]
