"""Shallow and layered ReLU network containers, audits, and constructions.

Layered networks realize x_{l} = relu(A_l x_{l-1} + b_l) with no activation
on the final layer.  Shallow networks carry an explicit affine part:
f(x) = sum_k outer_k relu(weights_k . x - biases_k) + slope . x + offset.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


def relu(z):
    return np.maximum(z, 0.0)


@dataclass(frozen=True)
class ShallowNet:
    weights: np.ndarray  # (N, dim) inner weights
    biases: np.ndarray  # (N,) inner offsets
    outer: np.ndarray  # (N,) outer weights
    slope: np.ndarray  # (dim,) affine slope
    offset: float  # affine constant

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2:
            raise ValueError("weights must be a (N, dim) matrix")
        n, d = w.shape
        if np.asarray(self.biases).shape != (n,) or np.asarray(self.outer).shape != (n,):
            raise ValueError("biases and outer must have one entry per unit")
        if np.asarray(self.slope).shape != (d,):
            raise ValueError("slope must have one entry per input")

    @property
    def units(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def max_weight_magnitude(self) -> float:
        parts = [self.weights, self.biases, self.outer, self.slope, [self.offset]]
        return max(float(np.max(np.abs(np.asarray(p, dtype=float)))) for p in parts)


def eval_shallow(net: ShallowNet, x) -> np.ndarray:
    """Evaluate a ShallowNet on x of shape (n, dim) or a single (dim,) point."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != net.dim:
        raise ValueError(f"expected points in R^{net.dim}")
    vals = relu(pts @ net.weights.T - net.biases) @ net.outer + pts @ net.slope + net.offset
    return float(vals[0]) if single else vals


@dataclass(frozen=True)
class LayeredNet:
    layers: tuple  # of (A, b) pairs, A: (n_out, n_in), b: (n_out,)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a network needs at least one layer")
        prev = None
        for a, b in self.layers:
            if a.ndim != 2 or b.shape != (a.shape[0],):
                raise ValueError("each layer needs A (n_out, n_in) and b (n_out,)")
            if prev is not None and a.shape[1] != prev:
                raise ValueError("layer input width must match previous output width")
            prev = a.shape[0]

    @property
    def architecture(self) -> tuple:
        return (self.layers[0][0].shape[1],) + tuple(a.shape[0] for a, _ in self.layers)

    @property
    def dim(self) -> int:
        return self.layers[0][0].shape[1]


def eval_layered(net: LayeredNet, x) -> np.ndarray:
    """Realize a LayeredNet on (n, dim) inputs; returns (n, out_width)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != net.dim:
        raise ValueError(f"expected points in R^{net.dim}")
    last = len(net.layers) - 1
    for k, (a, b) in enumerate(net.layers):
        h = h @ a.T + b
        if k != last:
            h = relu(h)
    return h[0] if single else h


def shallow_to_layered(net: ShallowNet) -> LayeredNet:
    """Exact one-hidden-layer form; the affine part becomes the ReLU pair
    relu(slope.x) - relu(-slope.x), adding two hidden units."""
    a1 = np.vstack([net.weights, net.slope[None, :], -net.slope[None, :]])
    b1 = np.concatenate([-net.biases, [0.0, 0.0]])
    a2 = np.concatenate([net.outer, [1.0, -1.0]])[None, :]
    b2 = np.array([net.offset])
    return LayeredNet(layers=((a1, b1), (a2, b2)))


def heaviside_surrogate(z, delta: float):
    """Ramp (relu(z) - relu(z - delta)) / delta, computed as clip(z/delta, 0, 1)
    so it matches the unit step exactly outside (0, delta)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return np.clip(np.asarray(z, dtype=float) / delta, 0.0, 1.0)


def default_transition_width(n_units: int, d: int) -> float:
    """Transition width N^{-(d+3)/(2d)} used by the horizon construction."""
    if n_units < 1 or d < 2:
        raise ValueError("need n_units >= 1 and d >= 2")
    return float(n_units) ** (-(d + 3.0) / (2.0 * d))


def compose_horizon_net(fn: ShallowNet, axis: int, delta: float) -> LayeredNet:
    """Two-hidden-layer net realizing H_delta(fn(x^{[axis]}) - x_axis).

    x^{[axis]} drops coordinate ``axis`` (1-based).  Architecture is exactly
    (d, N+2, 2, 1) for an N-unit shallow net on d-1 inputs: the first hidden
    layer holds the N embedded units plus the pair relu(+-(x_axis - slope .
    x^{[axis]})), which lifts the remaining affine-minus-coordinate part
    through the layer; the second computes relu(u) and relu(u - delta); the
    output scales their difference by 1/delta, so it lands in [0, 1].
    """
    d = fn.dim + 1
    if not 1 <= axis <= d:
        raise ValueError(f"axis must be in 1..{d}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = fn.units
    keep = [j for j in range(d) if j != axis - 1]
    a1 = np.zeros((n + 2, d))
    a1[:n, keep] = fn.weights
    a1[n, axis - 1] = 1.0
    a1[n, keep] = -fn.slope
    a1[n + 1] = -a1[n]
    b1 = np.concatenate([-fn.biases, [0.0, 0.0]])
    row = np.concatenate([fn.outer, [-1.0, 1.0]])
    a2 = np.vstack([row, row])
    b2 = np.array([fn.offset, fn.offset - delta])
    a3 = np.array([[1.0 / delta, -1.0 / delta]])
    b3 = np.array([0.0])
    return LayeredNet(layers=((a1, b1), (a2, b2), (a3, b3)))


@dataclass(frozen=True)
class ArchitectureBudget:
    """Sample-size driven class sizing: hidden width seed n_tilde, neuron
    count, nonzero-weight budget, and weight magnitude bound."""

    d: int
    m: int
    q: float
    tau: float
    n_tilde: int
    neurons: int
    weight_budget: int
    weight_bound: int


def size_architecture(d: int, m: int, q: float = 1.0, tau: float = 1.0) -> ArchitectureBudget:
    """Grow the hypothesis class with the sample count m.

    n_tilde = ceil(tau * m^{2d/(3d+3)}); neurons = n_tilde + d + 3;
    weight budget = (d+4) n_tilde + 3; weight bound =
    ceil(max(1, sqrt(2) q n_tilde^{(d+3)/(2d)})).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    if q <= 0:
        raise ValueError("q must be positive")
    if tau < 1.0:
        raise ValueError("tau must be >= 1")
    n_tilde = math.ceil(tau * float(m) ** (2.0 * d / (3.0 * d + 3.0)))
    neurons = math.ceil(n_tilde + d + 3)
    weight_budget = math.ceil((d + 4) * n_tilde + 3)
    weight_bound = math.ceil(max(1.0, math.sqrt(2.0) * q * float(n_tilde) ** ((d + 3.0) / (2.0 * d))))
    return ArchitectureBudget(d=d, m=m, q=q, tau=tau, n_tilde=n_tilde, neurons=neurons,
                              weight_budget=weight_budget, weight_bound=weight_bound)


@dataclass(frozen=True)
class NetworkAudit:
    neurons: int
    nonzero_weights: int
    max_weight_magnitude: float
    in_unit_range_on_grid: Optional[bool]


def audit_network(net: LayeredNet, points: Optional[np.ndarray] = None) -> NetworkAudit:
    """Count neurons (inputs plus all layer widths), nonzero weights, and the
    max weight magnitude; optionally check the output stays in [0, 1] on a
    point cloud."""
    arch = net.architecture
    neurons = int(sum(arch))
    nonzero = 0
    maxmag = 0.0
    for a, b in net.layers:
        nonzero += int(np.count_nonzero(a)) + int(np.count_nonzero(b))
        maxmag = max(maxmag, float(np.max(np.abs(a))) if a.size else 0.0,
                     float(np.max(np.abs(b))) if b.size else 0.0)
    in_range = None
    if points is not None:
        out = eval_layered(net, np.asarray(points, dtype=float))
        # membership up to float cancellation in relu pairs like
        # (relu(u) - relu(u - delta)) / delta, which can overshoot by ~1e-15
        tol = 64.0 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(out), initial=0.0)))
        in_range = bool(np.all(out >= -tol) and np.all(out <= 1.0 + tol))
    return NetworkAudit(neurons=neurons, nonzero_weights=nonzero,
                        max_weight_magnitude=maxmag, in_unit_range_on_grid=in_range)


def net_to_json(net: LayeredNet) -> str:
    """Serialize a LayeredNet; floats survive bit-exact (finite doubles only)."""
    payload = {
        "architecture": list(net.architecture),
        "layers": [
            {"weights": [float(v) for v in a.ravel(order="C")], "bias": [float(v) for v in b]}
            for a, b in net.layers
        ],
    }
    return json.dumps(payload, allow_nan=False)


def net_from_json(text: str) -> LayeredNet:
    payload = json.loads(text)
    arch = payload["architecture"]
    layers = []
    for k, layer in enumerate(payload["layers"]):
        n_in, n_out = arch[k], arch[k + 1]
        a = np.array(layer["weights"], dtype=float).reshape(n_out, n_in)
        b = np.array(layer["bias"], dtype=float)
        layers.append((a, b))
    return LayeredNet(layers=tuple(layers))
