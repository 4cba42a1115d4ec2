"""Acceptance suite.

One test per criterion, run in order; each emits one live PASS/FAIL line
(bypassing capture) so the run log shows the verdicts directly.  Criterion
12 trains the full desk-scale sweep and dominates the suite's runtime.
"""

import math
import time

import numpy as np
import pytest

from radonbv.approx import (
    IntegralRepFunction,
    change_of_variables_check,
    disagreement_measure,
    fit_rate,
    random_atomic_measure,
    subsample_to_shallow,
    sup_error,
)
from radonbv.bench import HorizonClassifier, aggregate_rows, make_dataset, run_experiment, slab_sampler
from radonbv.config import validate_config
from radonbv.geometry import lift_to_sphere, lift_weight, sample_unit_sphere
from radonbv.networks import (
    LayeredNet,
    audit_network,
    compose_horizon_net,
    default_transition_width,
    eval_shallow,
    heaviside_surrogate,
    size_architecture,
)
from radonbv.radon import BoundaryFunction, rtv2_estimate, sup_norms, tv2_1d
from radonbv.training import (
    LabeledSample,
    TrainingSettings,
    clamped_output,
    hinge_empirical_risk,
    hinge_gradient,
    train_erm,
    zero_one_risk,
)


def _report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {n:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {n}: {detail}"


def test_criterion_01_change_of_variables(capsys):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(3, 6))
        atoms = int(rng.integers(1, 201))
        m = random_atomic_measure(d, atoms, float(rng.uniform(0.1, 5.0)), rng)
        zs = sample_unit_sphere(d, 100, rng)
        for z in zs:
            lhs, rhs = change_of_variables_check(m, z)
            worst = max(worst, abs(lhs - rhs))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    _report(capsys, 1, ok, f"worst |lhs-rhs| = {worst:.3e} over 1e3 measures x 100 z, {elapsed:.1f}s")


def test_criterion_02_lift_constraints(capsys):
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    w = sample_unit_sphere(3, 1_000_000, rng)
    b = rng.uniform(-1.0, 1.0, 1_000_000)
    v = lift_to_sphere(w, b)
    norm_err = float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)))
    last_ok = bool(np.all(np.abs(v[:, -1]) <= 1.0 / math.sqrt(2.0) + 1e-15))
    h = lift_weight(v)
    weight_ok = bool(np.all(h >= 1.0 - 1e-12) and np.all(h <= math.sqrt(2.0) + 1e-12))
    elapsed = time.perf_counter() - t0
    ok = norm_err < 1e-12 and last_ok and weight_ok and elapsed < 5.0
    _report(capsys, 2, ok, f"1e6 lifts: norm err {norm_err:.2e}, last-coord and weight ranges hold, {elapsed:.1f}s")


def test_criterion_03_step_surrogate_exact(capsys):
    rng = np.random.default_rng(103)
    ok = True
    for delta in (1.0, 0.1, 1e-3):
        z = rng.uniform(-3.0, 3.0, 100_000)
        outside = (z <= 0.0) | (z >= delta)
        got = heaviside_surrogate(z[outside], delta)
        want = (z[outside] > 0.0).astype(float)
        ok = ok and bool(np.array_equal(got, want))
    _report(capsys, 3, ok, "surrogate equals the unit step outside (0, delta) for delta in {1, 0.1, 1e-3}")


def test_criterion_04_architecture_sizing(capsys):
    # independent recompute straight from the formulas
    def expect(d, m, q, tau):
        nt = math.ceil(tau * m ** (2 * d / (3 * d + 3)))
        return (nt, nt + d + 3, (d + 4) * nt + 3,
                math.ceil(max(1.0, math.sqrt(2) * q * nt ** ((d + 3) / (2 * d)))))

    got_a = size_architecture(2, 100)
    got_b = size_architecture(4, 1000)
    ok = ((got_a.n_tilde, got_a.neurons, got_a.weight_budget, got_a.weight_bound)
          == expect(2, 100, 1.0, 1.0) == (8, 13, 51, 20))
    ok = ok and ((got_b.n_tilde, got_b.neurons, got_b.weight_budget, got_b.weight_bound)
                 == expect(4, 1000, 1.0, 1.0) == (40, 47, 323, 36))
    _report(capsys, 4, ok, "(2,100)->(8,13,51,20) and (4,1000)->(40,47,323,36), exact")


def test_criterion_05_composed_net_audits(capsys):
    rng = np.random.default_rng(105)
    ok = True
    details = []
    for d in (2, 3, 4):
        for n in (8, 32, 128):
            mu = random_atomic_measure(d - 1, 40, 1.0, rng)
            fn = subsample_to_shallow(IntegralRepFunction.zeroed_at_origin(mu), n, rng)
            delta = default_transition_width(n, d)
            net = compose_horizon_net(fn, axis=d, delta=delta)
            audit = audit_network(net)
            arch_ok = net.architecture == (d, n + 2, 2, 1)
            neuron_ok = audit.neurons <= d + n + 5
            weight_ok = audit.nonzero_weights <= (d + 3) * n + 2 * d + 11
            bound = max(1.0 / delta, fn.max_weight_magnitude())
            mag_ok = audit.max_weight_magnitude <= bound * (1 + 1e-12)
            if not (arch_ok and neuron_ok and weight_ok and mag_ok):
                ok = False
                details.append(f"d={d} N={n}")
    _report(capsys, 5, ok, "architecture/neuron/weight/magnitude audits hold for N in {8,32,128}, d in {2,3,4}"
            + (f"; failed: {details}" if details else ""))


def test_criterion_06_one_dimensional_norms(capsys):
    t0 = time.perf_counter()
    f = BoundaryFunction(dim=1, evaluate=lambda x: np.sin(2 * np.pi * x[:, 0]),
                         frequency_sum=1.0, closed_form_id="sin1")
    tv2 = tv2_1d(f)
    sups = sup_norms(f)
    # oracles at 10x the default grid resolutions, from the analytic derivatives
    x10 = np.linspace(-1, 1, 40961)
    tv2_oracle = np.trapezoid(np.abs((2 * np.pi) ** 2 * np.sin(2 * np.pi * x10)), x10)
    xs = np.linspace(-1, 1, 40961)
    l1_oracle = np.trapezoid(np.abs(np.sin(2 * np.pi * xs)), xs)
    c1_oracle = float(np.max(np.abs(2 * np.pi * np.cos(2 * np.pi * xs))))
    elapsed = time.perf_counter() - t0
    ok = (abs(tv2 - 16 * np.pi) < 0.5 and abs(tv2 - tv2_oracle) < 0.5
          and abs(sups["l1"] - 4 / np.pi) < 0.02 and abs(sups["l1"] - l1_oracle) < 0.02
          and abs(sups["c1"] - 2 * np.pi) < 0.05 and abs(sups["c1"] - c1_oracle) < 0.05
          and elapsed < 1.0)
    _report(capsys, 6, ok, f"tv2={tv2:.4f} (16pi={16*np.pi:.4f}), l1={sups['l1']:.4f}, "
            f"c1={sups['c1']:.4f}, {elapsed:.2f}s")


def test_criterion_07_radon_cross_check(capsys):
    from radonbv.bench import base_family

    t0 = time.perf_counter()
    worst = 0.0
    for f in base_family(2):
        tv = tv2_1d(f)
        est = rtv2_estimate(f)
        worst = max(worst, abs(est - tv) / tv)
    elapsed = time.perf_counter() - t0
    ok = worst < 0.15 and elapsed < 120.0
    _report(capsys, 7, ok, f"worst relative gap {worst:.3%} over 25 members, {elapsed:.1f}s")


def test_criterion_08_approximation_rate(capsys):
    t0 = time.perf_counter()
    ns = (16, 64, 256, 1024)
    errs = {n: [] for n in ns}
    for seed in range(20):
        rng = np.random.default_rng(10_800 + seed)
        mu = random_atomic_measure(3, 200, 1.0, rng)
        g = IntegralRepFunction.zeroed_at_origin(mu)
        probe_rng_state = int(rng.integers(2 ** 63))
        for n in ns:
            fn = subsample_to_shallow(g, n, rng)
            errs[n].append(sup_error(g.evaluate, lambda p: eval_shallow(fn, p),
                                     20_000, 3, np.random.default_rng(probe_rng_state)))
    medians = np.array([np.median(errs[n]) for n in ns])
    slope = fit_rate(np.array(ns, dtype=float), medians)
    elapsed = time.perf_counter() - t0
    ok = slope <= -0.4 and elapsed < 300.0
    _report(capsys, 8, ok, f"median sup errors {np.round(medians, 4).tolist()}, slope {slope:.3f} "
            f"(need <= -0.4), {elapsed:.1f}s")


def test_criterion_09_horizon_disagreement(capsys):
    t0 = time.perf_counter()
    d = 3
    mu = random_atomic_measure(d - 1, 150, 1.0, np.random.default_rng(10_900))
    g = IntegralRepFunction.zeroed_at_origin(mu)
    boundary = BoundaryFunction(dim=d - 1, evaluate=g.evaluate, frequency_sum=None,
                                closed_form_id="fixed")
    labeler = HorizonClassifier(boundary=boundary, axis=d)
    sampler = slab_sampler(d, half_width=1.0)
    ns = (16, 64, 256)
    dis = {n: [] for n in ns}
    for seed in range(10):
        sub_rng = np.random.default_rng(20_900 + seed)
        probe_seed = 30_900 + seed
        for n in ns:
            fn = subsample_to_shallow(g, n, sub_rng)
            net = compose_horizon_net(fn, axis=d, delta=default_transition_width(n, d))
            dis[n].append(disagreement_measure(labeler, net, 0.5, 200_000, sampler,
                                               np.random.default_rng(probe_seed)))
    medians = np.array([np.median(dis[n]) for n in ns])
    elapsed = time.perf_counter() - t0
    ok = bool(np.all(np.diff(medians) <= 0.0) and medians[-1] < 0.05 and elapsed < 300.0)
    _report(capsys, 9, ok, f"median disagreements {np.round(medians, 4).tolist()} "
            f"(monotone, last < 0.05), {elapsed:.1f}s")


def _random_gradient_config(rng, margin=1e-3, tries=50):
    """Draw (net, batch) with all activation and loss inputs at least
    ``margin`` away from their kinks, resampling the points if needed."""
    d = int(rng.integers(2, 5))
    width = int(rng.integers(4, 10))
    sizes = [d, width, 2, 1]
    layers = tuple((rng.standard_normal((sizes[i + 1], sizes[i])) * 0.7,
                    rng.standard_normal(sizes[i + 1]) * 0.5) for i in range(3))
    net = LayeredNet(layers=layers)
    (a1, b1), (a2, b2), (a3, b3) = net.layers
    n = int(rng.integers(5, 25))
    for _ in range(tries):
        x = rng.uniform(-1.5, 1.5, (n, d))
        y = rng.integers(0, 2, n)
        z1 = x @ a1.T + b1
        h1 = np.maximum(z1, 0.0)
        z2 = h1 @ a2.T + b2
        h2 = np.maximum(z2, 0.0)
        raw = h2 @ a3.T[:, 0] + b3[0]
        out = np.clip(raw, 0.0, 1.0)
        m = (2 * y - 1) * (2 * out - 1)
        near_kink = (np.abs(z1) < margin).any() or (np.abs(z2) < margin).any() \
            or (np.abs(raw) < margin).any() or (np.abs(raw - 1.0) < margin).any() \
            or (np.abs(m - 1.0) < margin).any()
        if not near_kink:
            return net, LabeledSample(points=x, labels=y)
    return None


def test_criterion_10_gradient_correctness(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(110)
    checked = 0
    worst = 0.0
    while checked < 100:
        drawn = _random_gradient_config(rng)
        if drawn is None:
            continue
        net, batch = drawn
        got = hinge_gradient(net, batch)
        eps = 1e-6

        def risk(layers):
            return hinge_empirical_risk(
                clamped_output(LayeredNet(layers=tuple(layers)), batch.points), batch.labels)

        ga, gn = [], []
        for li in range(3):
            for which in (0, 1):
                arr = net.layers[li][which]
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    pert = [[a.copy(), b.copy()] for a, b in net.layers]
                    pert[li][which][idx] += eps
                    rp = risk([tuple(p) for p in pert])
                    pert[li][which][idx] -= 2 * eps
                    rm = risk([tuple(p) for p in pert])
                    gn.append((rp - rm) / (2 * eps))
                    ga.append(got[li][which][idx])
        ga = np.asarray(ga)
        gn = np.asarray(gn)
        rel = np.linalg.norm(ga - gn) / max(np.linalg.norm(gn), 1e-8)
        worst = max(worst, rel)
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-4 and elapsed < 30.0
    _report(capsys, 10, ok, f"worst relative gradient gap {worst:.2e} over 100 configs, {elapsed:.1f}s")


def test_criterion_11_erm_sanity(capsys):
    t0 = time.perf_counter()
    flat = BoundaryFunction(dim=1, evaluate=lambda x: np.zeros(len(x)),
                            frequency_sum=None, closed_form_id="flat")
    h = HorizonClassifier(boundary=flat, axis=2)
    rng = np.random.default_rng(111)
    train = make_dataset(h, 200, rng)
    test = make_dataset(h, 2000, rng)
    arch = size_architecture(2, 200)
    net, report = train_erm(arch, train, TrainingSettings(), rng)
    test_err = zero_one_risk(net, test)
    elapsed = time.perf_counter() - t0
    ok = report.final_empirical_risk < 0.05 and test_err < 0.05 and elapsed < 30.0
    _report(capsys, 11, ok, f"hinge risk {report.final_empirical_risk:.4f}, "
            f"test 0-1 error {test_err:.4f}, {elapsed:.1f}s")


def test_criterion_12_ordering_reproduction(capsys, tmp_path):
    t0 = time.perf_counter()
    cfg = validate_config({
        "dims": [2, 3],
        "norms": ["rbv2", "barron", "linf", "l1"],
        "sample_sizes": [250, 1000, 4000],
        "trials": 3,
    })
    result = run_experiment(cfg, tmp_path / "sweep", workers=1)
    assert not result.failures, f"cells failed: {result.failures[:3]}"
    table = {(dim, norm, m): mean
             for dim, norm, m, mean, _, _ in aggregate_rows(result.rows)}
    checks = []
    for dim in (2, 3):
        big = {norm: table[(dim, norm, 4000)] for norm in ("rbv2", "barron", "linf", "l1")}
        checks.append((f"d{dim} rbv2<=barron", big["rbv2"] <= big["barron"]))
        checks.append((f"d{dim} barron<=linf", big["barron"] <= big["linf"]))
        checks.append((f"d{dim} rbv2<=l1", big["rbv2"] <= big["l1"]))
        for norm in ("rbv2", "barron", "linf", "l1"):
            checks.append((f"d{dim} {norm} improves",
                           table[(dim, norm, 4000)] < table[(dim, norm, 250)]))
    elapsed = time.perf_counter() - t0
    failed = [name for name, good in checks if not good]
    ok = not failed and elapsed < 7200.0
    summary = "; ".join(f"d{dim}@4000 " + " ".join(
        f"{norm}={table[(dim, norm, 4000)]:.4f}" for norm in ("rbv2", "barron", "linf", "l1"))
        for dim in (2, 3))
    _report(capsys, 12, ok, f"{summary}; {elapsed/60:.1f} min"
            + (f"; failed: {failed}" if failed else ""))


def test_criterion_13_worker_determinism(capsys, tmp_path):
    t0 = time.perf_counter()
    raw = {"dims": [2], "sample_sizes": [250], "trials": 1}
    out1 = run_experiment(validate_config(raw), tmp_path / "w1", workers=1)
    out8 = run_experiment(validate_config(raw), tmp_path / "w8", workers=8)
    assert not out1.failures and not out8.failures
    b1 = (tmp_path / "w1" / "report.csv").read_bytes()
    b8 = (tmp_path / "w8" / "report.csv").read_bytes()
    elapsed = time.perf_counter() - t0
    ok = b1 == b8 and len(b1) > 0
    _report(capsys, 13, ok, f"report.csv byte-identical across workers 1 and 8 "
            f"({len(b1)} bytes), {elapsed:.1f}s")
