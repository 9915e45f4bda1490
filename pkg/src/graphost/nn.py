"""Dense numerical engine: aggregation operators, activations, losses with
exact gradients, and Adam.

Matrices are float64 C-order numpy arrays throughout. Aggregation is a
weighted mean over neighbours: h_i = sum_j w_ij x_j / sum_j w_ij, realised
as a sparse row-normalised operator whose stored column order is ascending,
which fixes the summation order and keeps results bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import LabeledGraph

__all__ = [
    "MeanAggregator",
    "mean_aggregate",
    "gcn_layer_forward",
    "relu",
    "relu_grad",
    "sigmoid",
    "softmax",
    "cosine_similarity",
    "wbce_loss",
    "bce_loss",
    "cross_entropy_loss",
    "AdamState",
    "adam_step",
]

PROB_EPS = 1e-7  # log-loss probability clamp


def _require_finite(name: str, a: np.ndarray) -> None:
    if not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf")


class MeanAggregator:
    """Weighted-mean neighbourhood aggregation for a fixed graph.

    With self_loops=True every node also receives its own row with weight 1
    (the practical GNN layer); with self_loops=False aggregation is over
    strict neighbours and nodes with zero total incident weight -- isolated
    ones, or nodes whose incident weights all vanish -- copy their own
    feature instead.
    """

    def __init__(
        self,
        graph: LabeledGraph,
        edge_weights: np.ndarray | None = None,
        self_loops: bool = False,
    ):
        n = graph.num_nodes
        if edge_weights is None:
            w = np.ones(graph.num_edges, dtype=np.float64)
        else:
            w = np.asarray(edge_weights, dtype=np.float64).reshape(-1)
            if w.shape[0] != graph.num_edges:
                raise ValueError(
                    f"{w.shape[0]} edge weights for {graph.num_edges} edges"
                )
            _require_finite("edge_weights", w)

        if graph.directed:
            dst = graph.edges[:, 1]
            src = graph.edges[:, 0]
            weights = w
        else:
            dst = np.concatenate([graph.edges[:, 1], graph.edges[:, 0]])
            src = np.concatenate([graph.edges[:, 0], graph.edges[:, 1]])
            weights = np.concatenate([w, w])

        if self_loops:
            loop = np.arange(n, dtype=np.int64)
            dst = np.concatenate([dst, loop])
            src = np.concatenate([src, loop])
            weights = np.concatenate([weights, np.ones(n)])

        totals = np.bincount(dst, weights=weights, minlength=n)
        fallback = np.flatnonzero(totals == 0.0)
        if fallback.size:
            dst = np.concatenate([dst, fallback])
            src = np.concatenate([src, fallback])
            weights = np.concatenate([weights, np.ones(fallback.size)])
            totals[fallback] = 1.0

        coef = weights / totals[dst]
        mat = sp.csr_matrix((coef, (dst, src)), shape=(n, n))
        mat.sort_indices()
        adj = mat.T.tocsr()
        adj.sort_indices()
        self._mat = mat
        self._adj = adj
        self.num_nodes = n

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.num_nodes:
            raise ValueError(f"expected {self.num_nodes} rows, got {x.shape[0]}")
        return self._mat @ x

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        return self._adj @ g


def mean_aggregate(
    graph: LabeledGraph,
    features: np.ndarray,
    edge_weights: np.ndarray | None = None,
) -> np.ndarray:
    """Strict-neighbour weighted mean; isolated nodes copy their own feature."""
    features = np.asarray(features, dtype=np.float64)
    return MeanAggregator(graph, edge_weights, self_loops=False).apply(features)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(pre: np.ndarray) -> np.ndarray:
    return (pre > 0.0).astype(np.float64)


_ACTIVATIONS = {
    "relu": (relu, relu_grad),
    "identity": (lambda x: x, lambda pre: np.ones_like(pre)),
}


def gcn_layer_forward(
    graph: LabeledGraph,
    h_in: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray,
    edge_weights: np.ndarray | None = None,
    activation: str = "relu",
) -> np.ndarray:
    """One graph-convolution layer: weighted-mean aggregation over
    neighbours plus a unit self-loop, then an affine map and activation."""
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    h_in = np.asarray(h_in, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    bias = np.asarray(bias, dtype=np.float64)
    if h_in.shape[1] != weight.shape[0] or weight.shape[1] != bias.shape[0]:
        raise ValueError(
            f"shape mismatch: h {h_in.shape}, W {weight.shape}, b {bias.shape}"
        )
    agg = MeanAggregator(graph, edge_weights, self_loops=True)
    act, _ = _ACTIVATIONS[activation]
    return act(agg.apply(h_in) @ weight + bias)


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    arr = np.asarray(x, dtype=np.float64)
    _require_finite("sigmoid input", arr)
    flat = np.atleast_1d(arr).copy()
    pos = flat >= 0
    flat[pos] = 1.0 / (1.0 + np.exp(-flat[pos]))
    ex = np.exp(flat[~pos])
    flat[~pos] = ex / (1.0 + ex)
    return float(flat[0]) if arr.ndim == 0 else flat.reshape(arr.shape)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax; rows sum to 1 and every entry is positive."""
    logits = np.asarray(logits, dtype=np.float64)
    _require_finite("softmax input", logits)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between u and v; 0 if either vector is zero."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _require_finite("cosine input", u)
    _require_finite("cosine input", v)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def wbce_loss(
    predictions: np.ndarray, labels: np.ndarray, alpha: float
) -> tuple[float, np.ndarray]:
    """Weighted binary cross-entropy, summed over samples.

    loss = -sum_i [ alpha * y_i * log(p_i) + (1 - alpha) * (1 - y_i) * log(1 - p_i) ]

    Predictions are clamped to [1e-7, 1 - 1e-7] before the log; the returned
    gradient is with respect to the (clamped) predictions.
    """
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise ValueError("predictions and labels must have the same length")
    _require_finite("predictions", p)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    loss = -np.sum(alpha * y * np.log(p) + (1.0 - alpha) * (1.0 - y) * np.log1p(-p))
    grad = -alpha * y / p + (1.0 - alpha) * (1.0 - y) / (1.0 - p)
    return float(loss), grad


def bce_loss(predictions: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Unweighted binary cross-entropy, summed over samples."""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise ValueError("predictions and labels must have the same length")
    _require_finite("predictions", p)
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    loss = -np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    grad = -y / p + (1.0 - y) / (1.0 - p)
    return float(loss), grad


def cross_entropy_loss(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy; returns (loss, gradient w.r.t. logits)."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    _require_finite("logits", logits)
    if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
        raise ValueError("logits must be (n, c) with one label per row")
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_z - shifted[np.arange(n), labels]))
    grad = softmax(logits)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


@dataclass
class AdamState:
    """Adam accumulators; single-owner, mutated by adam_step."""

    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], learning_rate: float = 1e-2) -> "AdamState":
        state = cls(learning_rate=learning_rate)
        for name, value in params.items():
            state.first_moment[name] = np.zeros_like(value)
            state.second_moment[name] = np.zeros_like(value)
        return state


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> dict[str, np.ndarray]:
    """One bias-corrected Adam update; returns the new parameter dict."""
    if set(params) != set(grads):
        raise ValueError("params and grads must share the same keys")
    state.step += 1
    t = state.step
    out: dict[str, np.ndarray] = {}
    for name, value in params.items():
        g = grads[name]
        if g.shape != value.shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {value.shape}")
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        out[name] = value - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return out
