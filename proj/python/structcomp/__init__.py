"""Train graph contrastive models on cluster-compressed graphs."""

import json

from ._core import (
    DataError,
    DegenerateError,
    Error,
    NumericalError,
    ValidationError,
    __version__,
    check_appendix_c,
    check_theorem1,
    compress_features,
    edge_cut,
    gen_sbm,
    infer,
    lift,
    linear_probe,
    partition,
)
from . import _core


def train(edges, x, full_graph=False, **config):
    """Train with TrainConfig fields given as keyword arguments.

    Returns a dict with the weights, arch, activations, per-epoch loss and
    the partition used.
    """
    fn = _core.full_graph_train if full_graph else _core.train
    return fn(edges, x, json.dumps(config))


def embed(edges, x, result):
    """Full-graph embeddings from a `train` result."""
    return infer(edges, x, result["weights"], result["arch"], tuple(result["activations"]))


__all__ = [
    "DataError",
    "DegenerateError",
    "Error",
    "NumericalError",
    "ValidationError",
    "check_appendix_c",
    "check_theorem1",
    "compress_features",
    "edge_cut",
    "embed",
    "gen_sbm",
    "infer",
    "lift",
    "linear_probe",
    "partition",
    "train",
]
