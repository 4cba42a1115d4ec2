"""Experiment harness: boundary families, horizon datasets, and the sweep
over (dimension, normalization, boundary, sample size, trial) cells.

Every cell derives its RNG seed from a stable cryptographic hash of the
cell coordinates and the master seed, so results are independent of
execution order and worker count; rows are sorted before writing.
"""

import csv
import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .geometry import sample_unit_ball
from .networks import size_architecture
from .radon import BoundaryFunction, NORM_KINDS, NormEstimationSettings, normalize_boundary
from .training import LabeledSample, train_erm, zero_one_risk

log = logging.getLogger(__name__)


def stable_seed(*parts) -> int:
    """64-bit seed from a SHA-256 hash of the argument tuple; platform and
    process independent."""
    digest = hashlib.sha256(repr(tuple(parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _sine_product(freqs: tuple) -> BoundaryFunction:
    def _eval(x: np.ndarray, _f=np.asarray(freqs, dtype=float)) -> np.ndarray:
        return np.prod(np.sin(2.0 * math.pi * _f * x), axis=1)

    return _eval


def base_family(d: int) -> list:
    """Sine-product boundaries on the ball B_1^{d-1} for ambient dimension d.

    d=2: 25 functions sin(2 pi k x), k = 1 + s/24.  d=3: 36 products with
    k, l in {1 + s/5}.  d=4: 64 products with frequencies in {1, 4/3, 7/3, 2}.
    """
    members = []
    if d == 2:
        for s in range(25):
            k = 1.0 + s / 24.0
            members.append(BoundaryFunction(dim=1, evaluate=_sine_product((k,)),
                                            frequency_sum=k, closed_form_id=f"d2_{s:02d}"))
    elif d == 3:
        for a in range(6):
            for b in range(6):
                k, l = 1.0 + a / 5.0, 1.0 + b / 5.0
                members.append(BoundaryFunction(dim=2, evaluate=_sine_product((k, l)),
                                                frequency_sum=k + l,
                                                closed_form_id=f"d3_{a}{b}"))
    elif d == 4:
        vals = (1.0, 4.0 / 3.0, 7.0 / 3.0, 2.0)
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    k, l, j = vals[a], vals[b], vals[c]
                    members.append(BoundaryFunction(dim=3, evaluate=_sine_product((k, l, j)),
                                                    frequency_sum=k + l + j,
                                                    closed_form_id=f"d4_{a}{b}{c}"))
    else:
        raise ValueError("base families are defined for d in {2, 3, 4}")
    return members


@dataclass(frozen=True)
class HorizonClassifier:
    """Indicator of the region on one side of a graph x_axis = boundary(rest).

    With positive_below (the default orientation) the positive class is
    {x : x_axis <= boundary(x^{[axis]})}; the flag flips to the opposite
    convention {x : boundary(x^{[axis]}) <= x_axis}.
    """

    boundary: BoundaryFunction
    axis: int  # 1-based
    positive_below: bool = True

    def __post_init__(self):
        d = self.boundary.dim + 1
        if not 1 <= self.axis <= d:
            raise ValueError(f"axis must be in 1..{d}")

    @property
    def dim(self) -> int:
        return self.boundary.dim + 1

    def label(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ax = self.axis - 1
        vals = self.boundary.evaluate(np.delete(x, ax, axis=1))
        if self.positive_below:
            return (x[:, ax] <= vals).astype(int)
        return (vals <= x[:, ax]).astype(int)


def label_points(h: HorizonClassifier, x) -> np.ndarray:
    return h.label(x)


def slab_sampler(d: int, axis: int = 0, half_width: float = 2.0):
    """Sampler for the slab: unit ball in the non-axis coordinates, uniform
    [-half_width, half_width] along the axis (1-based; 0 means the last)."""
    if d < 2:
        raise ValueError("slab needs d >= 2")
    ax = (axis if axis else d) - 1
    if not 0 <= ax < d:
        raise ValueError("axis out of range")

    def _draw(n: int, rng) -> np.ndarray:
        rng = np.random.default_rng(rng)
        pts = np.empty((n, d))
        ball = sample_unit_ball(d - 1, n, rng)
        cols = [j for j in range(d) if j != ax]
        pts[:, cols] = ball
        pts[:, ax] = rng.uniform(-half_width, half_width, n)
        return pts

    return _draw


def make_dataset(h: HorizonClassifier, m: int, rng) -> LabeledSample:
    """m labeled points from the slab measure for the given horizon."""
    if m < 10:
        raise ValueError("need at least 10 samples")
    rng = np.random.default_rng(rng)
    pts = slab_sampler(h.dim, h.axis)(m, rng)
    return LabeledSample(points=pts, labels=h.label(pts))


def split_train_test(s: LabeledSample, train_fraction: float, rng) -> tuple:
    """Random split; the train part gets round(train_fraction * m) points."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if s.count < 10:
        raise ValueError("need at least 10 samples to split")
    rng = np.random.default_rng(rng)
    n_train = int(round(train_fraction * s.count))
    n_train = min(max(n_train, 1), s.count - 1)
    perm = rng.permutation(s.count)
    tr, te = perm[:n_train], perm[n_train:]
    return (LabeledSample(s.points[tr], s.labels[tr]),
            LabeledSample(s.points[te], s.labels[te]))


@dataclass(frozen=True)
class CellResult:
    dim: int
    norm_kind: str
    function_id: str
    m: int
    trial: int
    test_error: float
    train_risk: float
    seed: int
    wall_time: float

    def key(self):
        return (self.dim, self.norm_kind, self.function_id, self.m, self.trial)


@dataclass(frozen=True)
class CellFailure:
    dim: int
    norm_kind: str
    function_id: str
    m: int
    trial: int
    error: str


@dataclass(frozen=True)
class ExperimentResult:
    rows: list
    failures: list


_NORMALIZED_CACHE: dict = {}


def _normalized_family(dim: int, norm: str, settings: NormEstimationSettings) -> dict:
    key = (dim, norm, settings)
    table = _NORMALIZED_CACHE.get(key)
    if table is None:
        table = {f.closed_form_id: normalize_boundary(f, norm, settings)
                 for f in base_family(dim)}
        _NORMALIZED_CACHE[key] = table
    return table


def train_cell(cfg: ExperimentConfig, dim: int, norm: str, function_id: str,
               m: int, trial: int) -> tuple:
    """One sweep cell: normalize the boundary, draw the dataset, split 80/20,
    size the architecture from m, train, and score the 0-1 test error.

    Returns (CellResult, trained net, training report).
    """
    start = time.perf_counter()
    seed = stable_seed(cfg.master_seed, dim, norm, function_id, m, trial)
    boundary = _normalized_family(dim, norm, cfg.norm_estimation)[function_id]
    h = HorizonClassifier(boundary=boundary, axis=dim)
    rng = np.random.default_rng(seed)
    data = make_dataset(h, m, rng)
    balance = float(np.mean(data.labels))
    if not 0.2 <= balance <= 0.8:
        log.warning("label balance %.3f outside [0.2, 0.8] for cell %s",
                    balance, (dim, norm, function_id, m, trial))
    train, test = split_train_test(data, 0.8, rng)
    arch = size_architecture(dim, m, q=1.0, tau=cfg.tau)
    net, report = train_erm(arch, train, cfg.training, rng)
    err = zero_one_risk(net, test)
    result = CellResult(dim=dim, norm_kind=norm, function_id=function_id, m=m,
                        trial=trial, test_error=err,
                        train_risk=report.final_empirical_risk, seed=seed,
                        wall_time=time.perf_counter() - start)
    return result, net, report


def run_cell(cfg: ExperimentConfig, dim: int, norm: str, function_id: str,
             m: int, trial: int) -> CellResult:
    return train_cell(cfg, dim, norm, function_id, m, trial)[0]


def _cell_worker(args):
    cfg, cell = args
    try:
        return ("ok", cell, run_cell(cfg, *cell))
    except Exception as exc:  # cell failures are recorded, the run continues
        return ("err", cell, f"{type(exc).__name__}: {exc}")


def experiment_cells(cfg: ExperimentConfig) -> list:
    cells = []
    for dim in sorted(cfg.dims):
        ids = [f.closed_form_id for f in base_family(dim)]
        for norm in cfg.norms:
            for fid in ids:
                for m in sorted(cfg.sample_sizes):
                    for trial in range(cfg.trials):
                        cells.append((dim, norm, fid, m, trial))
    return sorted(cells)


def run_experiment(cfg: ExperimentConfig, output_dir, workers: int = 1) -> ExperimentResult:
    """Run every cell (optionally in a process pool), sort, and write the
    report, aggregate, per-dimension plot data, and timing CSVs.

    Output bytes are independent of the worker count: cells are seeded by
    content, results are sorted, and wall times go to a separate file.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = experiment_cells(cfg)
    jobs = [(cfg, cell) for cell in cells]
    if workers <= 1:
        outcomes = [_cell_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_cell_worker, jobs, chunksize=1))
    rows, failures = [], []
    for status, cell, payload in outcomes:
        if status == "ok":
            rows.append(payload)
        else:
            failures.append(CellFailure(*cell, error=payload))
    rows.sort(key=lambda r: r.key())
    failures.sort(key=lambda f: (f.dim, f.norm_kind, f.function_id, f.m, f.trial))
    write_report_csv(rows, out / "report.csv")
    write_timings_csv(rows, out / "timings.csv")
    write_aggregate_csv(aggregate_rows(rows), out / "aggregate.csv")
    for dim in sorted(cfg.dims):
        write_plotdata_csv(rows, cfg.norms, dim, out / f"plotdata_d{dim}.csv")
    if failures:
        write_failures_csv(failures, out / "failures.csv")
    return ExperimentResult(rows=rows, failures=failures)


def aggregate_rows(rows: list) -> list:
    """Mean and spread of the test error over boundaries and trials, per
    (dim, norm, m)."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.dim, r.norm_kind, r.m), []).append(r.test_error)
    table = []
    for (dim, norm, m) in sorted(groups):
        errs = np.asarray(groups[(dim, norm, m)], dtype=float)
        table.append((dim, norm, m, float(np.mean(errs)), float(np.std(errs)), errs.size))
    return table


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_report_csv(rows: list, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "norm_kind", "function_id", "m", "trial",
                    "test_error", "train_risk", "seed"])
        for r in rows:
            w.writerow([r.dim, r.norm_kind, r.function_id, r.m, r.trial,
                        _fmt(r.test_error), _fmt(r.train_risk), r.seed])


def read_report_csv(path) -> list:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(CellResult(dim=int(rec["dim"]), norm_kind=rec["norm_kind"],
                                   function_id=rec["function_id"], m=int(rec["m"]),
                                   trial=int(rec["trial"]),
                                   test_error=float(rec["test_error"]),
                                   train_risk=float(rec["train_risk"]),
                                   seed=int(rec["seed"]), wall_time=float("nan")))
    return rows


def write_timings_csv(rows: list, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "norm_kind", "function_id", "m", "trial", "wall_time"])
        for r in rows:
            w.writerow([r.dim, r.norm_kind, r.function_id, r.m, r.trial, f"{r.wall_time:.6f}"])


def write_failures_csv(failures: list, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "norm_kind", "function_id", "m", "trial", "error"])
        for f in failures:
            w.writerow([f.dim, f.norm_kind, f.function_id, f.m, f.trial, f.error])


def write_aggregate_csv(table: list, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "norm_kind", "m", "mean_error", "std_error", "n_cells"])
        for dim, norm, m, mean, std, n in table:
            w.writerow([dim, norm, m, _fmt(mean), _fmt(std), n])


def write_plotdata_csv(rows: list, norms, dim: int, path) -> None:
    """One row per sample size: m and the mean test error per norm at dim."""
    norms = [n for n in NORM_KINDS if n in norms]
    table = {(r.m, r.norm_kind): [] for r in rows if r.dim == dim}
    for r in rows:
        if r.dim == dim:
            table[(r.m, r.norm_kind)].append(r.test_error)
    ms = sorted({m for (m, _) in table})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m"] + [f"mean_error_{n}" for n in norms])
        for m in ms:
            row = [m]
            for n in norms:
                errs = table.get((m, n), [])
                row.append(_fmt(float(np.mean(errs))) if errs else "")
            w.writerow(row)
