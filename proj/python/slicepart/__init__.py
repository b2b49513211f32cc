"""Python bindings for the slicepart VNF forwarding-graph partitioner."""

from ._core import (
    Chain,
    GnnModel,
    Graph,
    Infeasible,
    InvalidInput,
    TrainingDiverged,
    Weights,
    build_corpus,
    is_feasible,
    kl_sample,
    objective,
    random_dag,
    solve,
    taylor_xlogx,
    train,
)

__all__ = [
    "Chain",
    "GnnModel",
    "Graph",
    "Infeasible",
    "InvalidInput",
    "TrainingDiverged",
    "Weights",
    "build_corpus",
    "is_feasible",
    "kl_sample",
    "objective",
    "random_dag",
    "solve",
    "taylor_xlogx",
    "train",
]
