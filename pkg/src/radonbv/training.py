"""Hinge-loss empirical risk minimization for clamped two-hidden-layer nets.

The trainable architecture is (d, width, 2, 1) with a clamp-to-[0, 1] head
relu(z) - relu(z - 1) applied to the scalar output (itself ReLU-expressible,
so clamped models stay inside the bounded-output network class).  Training
is minibatch Adam with per-step projection of all weights onto [-B, B] and
best-iterate selection on the full-batch hinge risk; restarts are trained
simultaneously as a stacked tensor and the best one is returned.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .networks import ArchitectureBudget, LayeredNet, eval_layered, size_architecture


@dataclass(frozen=True)
class LabeledSample:
    points: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) in {0, 1}

    def __post_init__(self):
        p = np.asarray(self.points)
        y = np.asarray(self.labels)
        if p.ndim != 2 or y.shape != (p.shape[0],):
            raise ValueError("points must be (n, d) with one label per row")
        if p.shape[0] < 1:
            raise ValueError("sample must be nonempty")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class TrainingSettings:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 500
    batch_size: int = 128
    restarts: int = 3


@dataclass(frozen=True)
class TrainReport:
    final_empirical_risk: float
    epochs_run: int
    projection_clips: int
    risk_trajectory: np.ndarray  # cumulative best full-batch hinge risk per epoch
    nonzero_weights: int
    weight_budget: int


def clamp01(z):
    return np.clip(z, 0.0, 1.0)


def hinge_empirical_risk(outputs, labels) -> float:
    """Mean of max(0, 1 - (2y-1)(2h-1)) over the sample."""
    h = np.asarray(outputs, dtype=float)
    y = np.asarray(labels, dtype=float)
    if h.size == 0 or h.shape != y.shape:
        raise ValueError("outputs and labels must be nonempty and aligned")
    margins = (2.0 * y - 1.0) * (2.0 * h - 1.0)
    return float(np.mean(np.maximum(0.0, 1.0 - margins)))


# --- stacked forward/backward core -----------------------------------------
# Parameters live in a flat (restarts, P) array; layer views are cut per call.


@dataclass(frozen=True)
class _Layout:
    d: int
    width: int

    @property
    def size(self) -> int:
        return self.width * (self.d + 3) + 5

    def unpack(self, flat: np.ndarray):
        r = flat.shape[0]
        d, w = self.d, self.width
        i = 0
        a1 = flat[:, i:i + w * d].reshape(r, w, d); i += w * d
        b1 = flat[:, i:i + w]; i += w
        a2 = flat[:, i:i + 2 * w].reshape(r, 2, w); i += 2 * w
        b2 = flat[:, i:i + 2]; i += 2
        a3 = flat[:, i:i + 2].reshape(r, 1, 2); i += 2
        b3 = flat[:, i:i + 1]; i += 1
        return a1, b1, a2, b2, a3, b3

    def pack(self, a1, b1, a2, b2, a3, b3) -> np.ndarray:
        r = a1.shape[0]
        return np.concatenate([a1.reshape(r, -1), b1, a2.reshape(r, -1), b2,
                               a3.reshape(r, -1), b3], axis=1)


def _stacked_raw(layout: _Layout, flat: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Pre-clamp scalar outputs, shape (restarts, n)."""
    a1, b1, a2, b2, a3, b3 = layout.unpack(flat)
    h1 = np.maximum(x @ a1.transpose(0, 2, 1) + b1[:, None, :], 0.0)
    h2 = np.maximum(h1 @ a2.transpose(0, 2, 1) + b2[:, None, :], 0.0)
    return (h2 @ a3.transpose(0, 2, 1))[:, :, 0] + b3


def _stacked_risks(layout: _Layout, flat: np.ndarray, x: np.ndarray, sy: np.ndarray) -> np.ndarray:
    out = clamp01(_stacked_raw(layout, flat, x))
    return np.mean(np.maximum(0.0, 1.0 - sy[None, :] * (2.0 * out - 1.0)), axis=1)


def _stacked_hinge_gradient(layout: _Layout, flat: np.ndarray, x: np.ndarray,
                            sy: np.ndarray) -> np.ndarray:
    """Gradient of the batch hinge risk for every restart, packed flat.

    Subgradient conventions: relu'(0) = 0, hinge'(margin = 1) = 0, and the
    clamp head has derivative 0 outside the open interval (0, 1).
    """
    a1, b1, a2, b2, a3, _ = layout.unpack(flat)
    n = x.shape[0]
    z1 = x @ a1.transpose(0, 2, 1) + b1[:, None, :]
    h1 = np.maximum(z1, 0.0)
    z2 = h1 @ a2.transpose(0, 2, 1) + b2[:, None, :]
    h2 = np.maximum(z2, 0.0)
    raw = (h2 @ a3.transpose(0, 2, 1))[:, :, 0] + flat[:, -1:]
    out = clamp01(raw)
    margin = sy[None, :] * (2.0 * out - 1.0)
    live = (margin < 1.0) & (raw > 0.0) & (raw < 1.0)
    g_raw = np.where(live, (-2.0 / n) * sy[None, :], 0.0)
    g_h2 = g_raw[:, :, None] * a3[:, 0][:, None, :]
    g_z2 = np.where(z2 > 0.0, g_h2, 0.0)
    g_h1 = g_z2 @ a2
    g_z1 = np.where(z1 > 0.0, g_h1, 0.0)
    ga1 = g_z1.transpose(0, 2, 1) @ x
    gb1 = g_z1.sum(axis=1)
    ga2 = g_z2.transpose(0, 2, 1) @ h1
    gb2 = g_z2.sum(axis=1)
    ga3 = (g_raw[:, None, :] @ h2)
    gb3 = g_raw.sum(axis=1, keepdims=True)
    return layout.pack(ga1, gb1, ga2, gb2, ga3, gb3)


def _layout_for(net: LayeredNet) -> _Layout:
    arch = net.architecture
    if len(arch) != 4 or arch[2] != 2 or arch[3] != 1:
        raise ValueError("expected a (d, width, 2, 1) architecture")
    return _Layout(d=arch[0], width=arch[1])


def _net_to_flat(net: LayeredNet) -> tuple:
    layout = _layout_for(net)
    (a1, b1), (a2, b2), (a3, b3) = net.layers
    flat = layout.pack(a1[None], b1[None], a2[None], b2[None], a3[None], b3[None])
    return layout, flat


def _flat_to_net(layout: _Layout, flat_row: np.ndarray) -> LayeredNet:
    a1, b1, a2, b2, a3, b3 = layout.unpack(flat_row[None, :])
    return LayeredNet(layers=((a1[0].copy(), b1[0].copy()),
                              (a2[0].copy(), b2[0].copy()),
                              (a3[0].copy(), b3[0].copy())))


def hinge_gradient(net: LayeredNet, batch: LabeledSample) -> list:
    """Per-layer (dA, db) gradients of the batch hinge risk through the clamp."""
    layout, flat = _net_to_flat(net)
    sy = 2.0 * np.asarray(batch.labels, dtype=float) - 1.0
    g = _stacked_hinge_gradient(layout, flat, np.asarray(batch.points, dtype=float), sy)
    a1, b1, a2, b2, a3, b3 = layout.unpack(g)
    return [(a1[0].copy(), b1[0].copy()), (a2[0].copy(), b2[0].copy()),
            (a3[0].copy(), b3[0].copy())]


# --- optimizer ---------------------------------------------------------------


@dataclass
class AdamState:
    lr: float
    beta1: float
    beta2: float
    eps: float
    step_count: int
    m: list
    v: list


def init_adam(params: list, lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    return AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, step_count=0,
                     m=[np.zeros_like(p) for p in params],
                     v=[np.zeros_like(p) for p in params])


def adam_step(params: list, grads: list, state: AdamState) -> tuple[list, AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and state must be aligned")
    t = state.step_count + 1
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        new_params.append(p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(lr=state.lr, beta1=state.beta1, beta2=state.beta2,
                                 eps=state.eps, step_count=t, m=new_m, v=new_v)


def project_weights(net: LayeredNet, bound: float) -> tuple[LayeredNet, int]:
    """Clip every entry of every layer to [-bound, bound]; returns clip count."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    clipped = 0
    layers = []
    for a, b in net.layers:
        clipped += int(np.count_nonzero(np.abs(a) > bound)) + int(np.count_nonzero(np.abs(b) > bound))
        layers.append((np.clip(a, -bound, bound), np.clip(b, -bound, bound)))
    return LayeredNet(layers=tuple(layers)), clipped


# --- training loop -----------------------------------------------------------


def _init_flat(layout: _Layout, restarts: int, rng) -> np.ndarray:
    d, w = layout.d, layout.width
    flat = np.empty((restarts, layout.size))
    for r in range(restarts):
        child = np.random.default_rng(rng.integers(2**63))
        a1 = child.uniform(-1.0 / np.sqrt(d), 1.0 / np.sqrt(d), (w, d))
        b1 = child.uniform(-1.0, 1.0, w)
        a2 = child.uniform(-1.0 / np.sqrt(w), 1.0 / np.sqrt(w), (2, w))
        # the two head units must start alive: a negative bias here can turn
        # a head relu off on every input, and a fully dead head is a saddle
        # the hinge gradient never escapes
        b2 = child.uniform(0.0, 1.0, 2)
        a3 = child.uniform(-1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0), (1, 2))
        # output bias starts inside the clamp's responsive range, otherwise
        # the clamp subgradient can zero out an entire restart
        b3 = child.uniform(0.25, 0.75, 1)
        flat[r] = layout.pack(a1[None], b1[None], a2[None], b2[None], a3[None], b3[None])[0]
    return flat


def train_erm(arch: ArchitectureBudget, data: LabeledSample,
              settings: TrainingSettings, rng) -> tuple[LayeredNet, TrainReport]:
    """Minibatch Adam on the hinge risk over the sized, clamped network class.

    All restarts share the minibatch schedule and differ by initialization;
    weights are projected onto [-weight_bound, weight_bound] after every
    step.  Returns the best iterate (lowest full-batch hinge risk seen at
    any epoch end, across restarts) and a report whose risk_trajectory is
    that running best per epoch.
    """
    if settings.epochs < 1 or settings.restarts < 1:
        raise ValueError("epochs and restarts must be >= 1")
    rng = np.random.default_rng(rng)
    x = np.asarray(data.points, dtype=float)
    y = np.asarray(data.labels, dtype=float)
    n, d = x.shape
    if d != arch.d:
        raise ValueError(f"data dimension {d} does not match sized architecture d={arch.d}")
    sy = 2.0 * y - 1.0
    layout = _Layout(d=d, width=arch.n_tilde + 2)
    flat = _init_flat(layout, settings.restarts, rng)
    bound = float(arch.weight_bound)
    np.clip(flat, -bound, bound, out=flat)
    state = init_adam([flat], settings.lr, settings.beta1, settings.beta2, settings.eps)
    bs = min(settings.batch_size, n)
    clips = 0
    best_risk = np.inf
    best_row = flat[0].copy()
    trajectory = np.empty(settings.epochs)
    for epoch in range(settings.epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            sel = order[start:start + bs]
            g = _stacked_hinge_gradient(layout, flat, x[sel], sy[sel])
            (flat,), state = adam_step([flat], [g], state)
            clips += int(np.count_nonzero(np.abs(flat) > bound))
            np.clip(flat, -bound, bound, out=flat)
        risks = _stacked_risks(layout, flat, x, sy)
        r_best = int(np.argmin(risks))
        if risks[r_best] < best_risk:
            best_risk = float(risks[r_best])
            best_row = flat[r_best].copy()
        trajectory[epoch] = best_risk
    net = _flat_to_net(layout, best_row)
    nonzero = sum(int(np.count_nonzero(a)) + int(np.count_nonzero(b)) for a, b in net.layers)
    report = TrainReport(final_empirical_risk=best_risk, epochs_run=settings.epochs,
                         projection_clips=clips, risk_trajectory=trajectory,
                         nonzero_weights=nonzero, weight_budget=arch.weight_budget)
    return net, report


def clamped_output(net: LayeredNet, x) -> np.ndarray:
    """Clamp-to-[0,1] head applied to the net's scalar output."""
    return clamp01(eval_layered(net, np.asarray(x, dtype=float))[:, 0])


def zero_one_risk(net: LayeredNet, sample: LabeledSample, threshold: float = 0.5) -> float:
    """Misclassification rate of the thresholded (inclusive) clamped output."""
    pred = clamped_output(net, sample.points) >= threshold
    return float(np.mean(pred != (np.asarray(sample.labels) == 1)))


class HorizonErmClassifier(ClassifierMixin, BaseEstimator):
    """Binary classifier over the sized, clamped ReLU class.

    The architecture grows with the training sample through
    size_architecture(d, m, q, tau); optimization follows train_erm.
    """

    def __init__(self, tau: float = 1.0, q: float = 1.0, lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 epochs: int = 500, batch_size: int = 128, restarts: int = 3,
                 random_state=None):
        self.tau = tau
        self.q = q
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.epochs = epochs
        self.batch_size = batch_size
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.size > 2:
            raise ValueError("binary classification only")
        y01 = np.searchsorted(self.classes_, y)
        if self.classes_.size == 1:
            y01 = np.zeros(len(y), dtype=int)
        self.n_features_in_ = X.shape[1]
        arch = size_architecture(X.shape[1], X.shape[0], q=self.q, tau=self.tau)
        settings = TrainingSettings(lr=self.lr, beta1=self.beta1, beta2=self.beta2,
                                    eps=self.eps, epochs=self.epochs,
                                    batch_size=self.batch_size, restarts=self.restarts)
        data = LabeledSample(points=np.asarray(X, dtype=float), labels=np.asarray(y01))
        rng = np.random.default_rng(self.random_state)
        self.net_, self.report_ = train_erm(arch, data, settings, rng)
        self.architecture_ = arch
        return self

    def decision_function(self, X):
        check_is_fitted(self, "net_")
        X = check_array(X)
        return clamped_output(self.net_, X)

    def predict(self, X):
        scores = self.decision_function(X)
        idx = (scores >= 0.5).astype(int)
        if self.classes_.size == 1:
            idx = np.zeros_like(idx)
        return self.classes_[idx]
