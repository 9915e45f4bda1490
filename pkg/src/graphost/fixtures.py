"""Standard desk-scale benchmark fixtures: a CSBM family, trained classifier
and homophily predictor, and per-seed noisy test samples.

Feature noise models test-time attribute shift; with variance 0.5 it is
N(0, 0.5 I) on top of the unit-variance class Gaussians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .csbm import CsbmParams, generate_csbm, perturb_features, symmetric_binary_params
from .experiments import derive_seed
from .graphs import LabeledGraph
from .models import (
    ArchitectureSpec,
    Checkpoint,
    OptimizerConfig,
    train_classifier,
    train_homophily_predictor,
)
from .transform import TransformConfig, resolve_mode

__all__ = ["TrainedFixture", "make_fixture"]

DEFAULT_NOISE_STD = math.sqrt(0.5)


@dataclass(frozen=True)
class TrainedFixture:
    params: CsbmParams
    noise_std: float
    base_seed: int
    train_graph: LabeledGraph
    val_graph: LabeledGraph
    classifier: Checkpoint
    predictor: Checkpoint
    mode: str
    config: TransformConfig

    def test_graph(self, seed: int) -> LabeledGraph:
        """Fresh test sample for one experiment seed: a new CSBM draw plus
        feature noise, independent of the training graphs."""
        clean = generate_csbm(self.params, derive_seed(self.base_seed, 100 + seed))
        return perturb_features(
            clean, self.noise_std, derive_seed(self.base_seed, 7_000_000 + seed)
        )


def make_fixture(
    intra_prob: float = 0.05,
    inter_prob: float = 0.02,
    nodes_per_class: int = 300,
    mean_distance: float = 2.0,
    feature_dim: int = 16,
    noise_std: float = DEFAULT_NOISE_STD,
    seed: int = 0,
    hidden: int = 32,
    num_layers: int = 2,
    predictor_kind: str = "gcn",
    predictor_hidden: int | None = None,
    predictor_layers: int = 2,
    learning_rate: float = 1e-2,
    max_epochs: int = 400,
    patience: int = 50,
    predictor_loss: str = "wbce",
    delta: float = 0.3,
) -> TrainedFixture:
    params = symmetric_binary_params(
        mean_distance=mean_distance,
        feature_dim=feature_dim,
        class_sizes=(nodes_per_class, nodes_per_class),
        intra_prob=intra_prob,
        inter_prob=inter_prob,
    )
    train_graph = generate_csbm(params, derive_seed(seed, 0))
    val_graph = generate_csbm(params, derive_seed(seed, 1))
    optimizer = OptimizerConfig(
        learning_rate=learning_rate, max_epochs=max_epochs, patience=patience
    )
    classifier = train_classifier(
        train_graph,
        val_graph,
        ArchitectureSpec.default("gcn", feature_dim, 2, hidden, num_layers),
        optimizer,
        seed=derive_seed(seed, 2),
    )
    p_hidden = hidden if predictor_hidden is None else predictor_hidden
    predictor = train_homophily_predictor(
        train_graph,
        val_graph,
        ArchitectureSpec.default(
            predictor_kind, feature_dim, p_hidden, p_hidden, predictor_layers
        ),
        optimizer,
        seed=derive_seed(seed, 3),
        loss=predictor_loss,
    )
    mode = resolve_mode(train_graph)
    return TrainedFixture(
        params=params,
        noise_std=noise_std,
        base_seed=seed,
        train_graph=train_graph,
        val_graph=val_graph,
        classifier=classifier,
        predictor=predictor,
        mode=mode,
        config=TransformConfig(mode=mode, delta=delta),
    )
