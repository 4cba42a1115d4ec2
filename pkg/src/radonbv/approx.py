"""Integral representations over cylinder measures and their shallow-net
subsampling, plus Monte Carlo error and set-measure estimators."""

from dataclasses import dataclass

import numpy as np

from .geometry import lift_to_sphere, lift_weight, sample_unit_ball, sample_unit_sphere
from .networks import LayeredNet, ShallowNet, eval_layered, relu


@dataclass(frozen=True)
class DiscreteRadonMeasure:
    """Finitely many signed atoms on the cylinder S^{d-1} x [-1, 1]."""

    directions: np.ndarray  # (r, d) unit rows
    offsets: np.ndarray  # (r,) in [-1, 1]
    weights: np.ndarray  # (r,) signed

    def __post_init__(self):
        w = np.asarray(self.directions, dtype=float)
        if w.ndim != 2:
            raise ValueError("directions must be an (r, d) matrix")
        r = w.shape[0]
        if np.asarray(self.offsets).shape != (r,) or np.asarray(self.weights).shape != (r,):
            raise ValueError("offsets and weights must have one entry per atom")
        if r and np.max(np.abs(np.linalg.norm(w, axis=1) - 1.0)) > 1e-9:
            raise ValueError("atom directions must be unit vectors")
        if r and np.max(np.abs(np.asarray(self.offsets))) > 1.0 + 1e-12:
            raise ValueError("atom offsets must lie in [-1, 1]")

    @property
    def atom_count(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))


def random_atomic_measure(d: int, atoms: int, total_variation: float, rng) -> DiscreteRadonMeasure:
    """Random signed atoms: uniform directions and offsets, Gaussian weights
    rescaled to the requested total variation."""
    if atoms < 1:
        raise ValueError("need at least one atom")
    if total_variation <= 0:
        raise ValueError("total variation must be positive")
    rng = np.random.default_rng(rng)
    dirs = sample_unit_sphere(d, atoms, rng)
    offs = rng.uniform(-1.0, 1.0, atoms)
    w = rng.standard_normal(atoms)
    w *= total_variation / np.sum(np.abs(w))
    return DiscreteRadonMeasure(directions=dirs, offsets=offs, weights=w)


@dataclass(frozen=True)
class IntegralRepFunction:
    """f(x) = sum_j weight_j relu(w_j . x - b_j) + slope . x + offset."""

    measure: DiscreteRadonMeasure
    slope: np.ndarray
    offset: float

    def __post_init__(self):
        if np.asarray(self.slope).shape != (self.measure.dim,):
            raise ValueError("slope must live in the measure's ambient dimension")

    @property
    def dim(self) -> int:
        return self.measure.dim

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        m = self.measure
        vals = relu(pts @ m.directions.T - m.offsets) @ m.weights + pts @ np.asarray(self.slope, dtype=float) + self.offset
        return float(vals[0]) if single else vals

    @classmethod
    def zeroed_at_origin(cls, measure: DiscreteRadonMeasure, slope=None) -> "IntegralRepFunction":
        """Pick the constant so that f(0) = 0."""
        slope = np.zeros(measure.dim) if slope is None else np.asarray(slope, dtype=float)
        at_zero = float(relu(-measure.offsets) @ measure.weights)
        return cls(measure=measure, slope=slope, offset=-at_zero)


def rep_norm_bound(g: IntegralRepFunction) -> float:
    """Exact BV-norm bound of an atomic representation: the measure's total
    variation plus |f(0)| plus the canonical-basis increments."""
    pts = np.vstack([np.zeros(g.dim), np.eye(g.dim)])
    vals = g.evaluate(pts)
    return g.measure.total_variation + abs(float(vals[0])) + float(np.sum(np.abs(vals[1:] - vals[0])))


def audit_rep_bounds(g: IntegralRepFunction) -> dict:
    """Check |offset| <= bound and max|slope| <= 4 * bound against
    rep_norm_bound; returns the audited quantities."""
    bound = rep_norm_bound(g)
    return {
        "norm_bound": bound,
        "offset_ok": abs(g.offset) <= bound + 1e-12,
        "slope_ok": float(np.max(np.abs(g.slope), initial=0.0)) <= 4.0 * bound + 1e-12,
    }


def change_of_variables_check(m: DiscreteRadonMeasure, z: np.ndarray) -> tuple[float, float]:
    """Both sides of the cylinder-to-sphere substitution at a unit vector z.

    lhs = sum_j weight_j |w_j . z - b_j|; rhs rewrites each term through the
    lifted atom v_j = (w_j, b_j)/sqrt(1 + b_j^2) with the density correction
    (1 - v_{d+1}^2)^{-1/2} applied to |v_j . (z, -1)|.
    """
    z = np.asarray(z, dtype=float)
    if abs(np.linalg.norm(z) - 1.0) > 1e-9:
        raise ValueError("z must be a unit vector")
    lhs = float(m.weights @ np.abs(m.directions @ z - m.offsets))
    v = lift_to_sphere(m.directions, m.offsets)
    z_tilde = np.concatenate([z, [-1.0]])
    rhs = float(m.weights @ (lift_weight(v) * np.abs(v @ z_tilde)))
    return lhs, rhs


def jordan_split(m: DiscreteRadonMeasure) -> tuple[DiscreteRadonMeasure, DiscreteRadonMeasure, float, float]:
    """Split into positive and negative parts (both with nonnegative weights);
    returns (m_plus, m_minus, mass_plus, mass_minus).  Zero atoms are dropped."""
    w = np.asarray(m.weights, dtype=float)
    pos = w > 0
    neg = w < 0
    m_plus = DiscreteRadonMeasure(m.directions[pos], m.offsets[pos], w[pos])
    m_minus = DiscreteRadonMeasure(m.directions[neg], m.offsets[neg], -w[neg])
    return m_plus, m_minus, m_plus.total_variation, m_minus.total_variation


def subsample_to_shallow(g: IntegralRepFunction, n_units: int, rng) -> ShallowNet:
    """Monte Carlo compression of an integral representation to <= n_units
    ReLU units.

    Writes g as the half-sum of a linear functional of the measure (computed
    exactly) and an absolute-value integral, draws floor(n_units/4)
    i.i.d. atoms from each normalized Jordan part, and expands each sampled
    |w.x - b| via relu(w.x - b) + relu(-(w.x - b)).  Outer weights are
    +-mass/(2r); leftover budget is zero-padded.
    """
    if n_units < 4:
        raise ValueError("need at least 4 units (each sampled atom expands to a ReLU pair)")
    rng = np.random.default_rng(rng)
    m = g.measure
    d = g.dim
    r = n_units // 4
    w_rows, b_rows, v_rows = [], [], []
    m_plus, m_minus, mass_plus, mass_minus = jordan_split(m)
    for part, mass, sign in ((m_plus, mass_plus, 1.0), (m_minus, mass_minus, -1.0)):
        if mass <= 0.0 or part.atom_count == 0:
            continue
        idx = rng.choice(part.atom_count, size=r, replace=True, p=part.weights / mass)
        coeff = sign * mass / (2.0 * r)
        for i in idx:
            w_rows.extend([part.directions[i], -part.directions[i]])
            b_rows.extend([part.offsets[i], -part.offsets[i]])
            v_rows.extend([coeff, coeff])
    pad = n_units - len(v_rows)
    if pad:
        w_rows.extend([np.zeros(d)] * pad)
        b_rows.extend([0.0] * pad)
        v_rows.extend([0.0] * pad)
    # the linear half integrates exactly: (1/2) sum w_j (w.x - b) d mu
    lin_slope = 0.5 * (m.weights @ m.directions) if m.atom_count else np.zeros(d)
    lin_offset = -0.5 * float(m.weights @ m.offsets) if m.atom_count else 0.0
    return ShallowNet(
        weights=np.array(w_rows, dtype=float).reshape(n_units, d),
        biases=np.array(b_rows, dtype=float),
        outer=np.array(v_rows, dtype=float),
        slope=lin_slope + np.asarray(g.slope, dtype=float),
        offset=lin_offset + g.offset,
    )


def sup_error(f, g, probe_points: int, d: int, rng) -> float:
    """Max |f - g| over uniform probes in the unit ball; f, g map (n, d) to (n,)."""
    if probe_points < 1:
        raise ValueError("need at least one probe point")
    rng = np.random.default_rng(rng)
    pts = sample_unit_ball(d, probe_points, rng)
    return float(np.max(np.abs(np.asarray(f(pts), dtype=float) - np.asarray(g(pts), dtype=float))))


def fit_rate(ns, errs) -> float:
    """Least-squares slope of log(err) against log(n)."""
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if ns.shape != errs.shape or ns.ndim != 1 or ns.size < 3:
        raise ValueError("need matching 1-D arrays with at least 3 points")
    if np.any(ns <= 0) or np.any(errs <= 0):
        raise ValueError("rates need positive sizes and errors")
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


def disagreement_measure(labeler, net: LayeredNet, threshold: float,
                         probe_points: int, domain_sampler, rng) -> float:
    """Fraction of sampled domain points where thresholding the net's output
    disagrees with the reference labels.

    ``labeler`` is either a callable X -> {0,1} labels or an object with a
    ``label`` method; ``domain_sampler(n, rng)`` draws the probe points.
    """
    if probe_points < 1:
        raise ValueError("need at least one probe point")
    rng = np.random.default_rng(rng)
    pts = domain_sampler(probe_points, rng)
    label_fn = labeler.label if hasattr(labeler, "label") else labeler
    ref = np.asarray(label_fn(pts)).astype(bool)
    pred = eval_layered(net, pts)[:, 0] >= threshold
    return float(np.mean(pred != ref))


@dataclass(frozen=True)
class TubeQuery:
    """Tube of half-width epsilon around the graph x_axis = f(x^{[axis]})."""

    boundary: "object"  # anything with .evaluate((n, d-1)) -> (n,)
    axis: int  # 1-based coordinate the graph fills in
    epsilon: float

    def __post_init__(self):
        if self.axis < 1:
            raise ValueError("axis is 1-based")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


def tube_mass(query: TubeQuery, probe_points: int, domain_sampler, rng) -> float:
    """Probability mass of the tube under the sampler's distribution."""
    if probe_points < 1:
        raise ValueError("need at least one probe point")
    rng = np.random.default_rng(rng)
    pts = domain_sampler(probe_points, rng)
    ax = query.axis - 1
    if ax >= pts.shape[1]:
        raise ValueError("axis exceeds sampled dimension")
    rest = np.delete(pts, ax, axis=1)
    gap = np.abs(pts[:, ax] - np.asarray(query.boundary.evaluate(rest), dtype=float))
    return float(np.mean(gap <= query.epsilon))
