"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import math
import subprocess
import sys
import time
from itertools import product

import numpy as np
import pytest

import ifsdim as F

LOG23 = math.log(2) / math.log(3)
DECADE_S = 0.378436011604392
DECADE_LAMBDA = -1.614186  # quoted target; analytic value -1.6141812...
DECADE_ETA = -0.610864


def report(num, name, ok, detail=""):
    line = f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_flagship_estimates():
    ns = F.decade_band_system(0.7)
    t0 = time.time()
    traj = F.chaos_game(ns.system, 2.0, n_steps=1_000_000, burn_in=10_000, seed=1)
    lam = F.lyapunov_exponent(traj)
    eta = F.entropy_rate(traj)
    s = F.dimension_ratio(eta.value, lam.value)
    elapsed = time.time() - t0
    ok = (abs(s - DECADE_S) / DECADE_S <= 0.02
          and abs(lam.value - DECADE_LAMBDA) / abs(DECADE_LAMBDA) <= 0.01
          and abs(eta.value - DECADE_ETA) / abs(DECADE_ETA) <= 0.01
          and elapsed < 30.0)
    report(1, "flagship dimension ratio on the band example", ok,
           f"s={s:.6f} lambda={lam.value:.6f} eta={eta.value:.6f} t={elapsed:.1f}s")


def test_criterion_02_dimension_pipeline_closed_forms():
    t0 = time.time()
    results = {}
    for name, want in (("cantor", LOG23), ("half-pair", 1.0)):
        ns = F.named_system(name)
        traj = F.chaos_game(ns.system, ns.default_x0, n_steps=1_000_000,
                            burn_in=10_000, seed=2)
        measure = F.empirical_measure([traj])
        summary = F.measure_dimension(measure, n_centers=64, levels=16, seed=2)
        results[name] = (summary.median, want)
    elapsed = time.time() - t0
    ok = all(abs(med - want) <= 0.05 for med, want in results.values()) and elapsed < 120
    detail = " ".join(f"{k}={med:.4f}(want {want:.4f})"
                      for k, (med, want) in results.items())
    report(2, "dimension pipeline on closed-form systems", ok,
           f"{detail} t={elapsed:.1f}s")


def test_criterion_03_cover_bound_brackets(cantor, cantor_measure_1m,
                                           half_pair, half_measure_1m,
                                           quarter_pair, quarter_measure_1m,
                                           decade, decade_measure_1m):
    cases = [
        ("cantor", cantor, cantor_measure_1m, LOG23, dict(n=12), dict(levels=16)),
        ("half-pair", half_pair, half_measure_1m, 1.0, dict(n=12), dict(levels=16)),
        ("quarter-pair", quarter_pair, quarter_measure_1m, 2 / 3, dict(n=12), dict(levels=16)),
        ("decade-bands", decade, decade_measure_1m, DECADE_S, dict(n=800),
         dict(r0=1.0, levels=24)),
    ]
    lines = []
    ok = True
    for name, ns, measure, s, cover_kw, dim_kw in cases:
        summary = F.measure_dimension(measure, n_centers=64, seed=3, **dim_kw)
        rep = F.cover_upper_bound(ns.system, measure, epsilon=0.05, seed=3, **cover_kw)
        lo, hi = summary.median - 0.05, s + 0.1
        good = lo <= rep.critical_exponent <= hi
        ok &= good
        lines.append(f"{name}: crit={rep.critical_exponent:.4f} in [{lo:.3f},{hi:.3f}] {good}")
    report(3, "cover exponent brackets the measured dimension", ok, "; ".join(lines))


def test_criterion_04_closed_form_identity_grid():
    thr = F.p1_threshold()
    worst = 0.0
    for p1 in np.linspace(thr + 1e-9, 0.99, 100):
        p2 = 1.0 - p1
        eta = p1 * math.log(p1) + p2 * math.log(p2)
        lam = p1 * math.log(1 / 20) + p2 * math.log(5)
        worst = max(worst, abs(F.decade_band_dimension(p1) - F.dimension_ratio(eta, lam)))
    report(4, "closed-form dimension equals entropy/Lyapunov ratio", worst <= 1e-12,
           f"worst |diff|={worst:.2e} over 100-point grid")


def test_criterion_05_contraction_margins(decade):
    sim = F.IfsSystem(1, [F.Affine1D(0.5, 0.0), F.Affine1D(0.5, 0.5)],
                      F.ConstantField([0.5, 0.5]))
    m_sim = F.average_contraction_margin(sim, ((0.0,), (1.0,)), budget=2048, seed=5)
    U = F.OpenSet.from_intervals(F.catalog.band_intervals(3))
    m_dec = F.average_contraction_margin(decade.system, U, budget=8192, seed=5)
    exp = F.named_system("expanding-pair")
    m_exp = F.average_contraction_margin(exp.system, ((0.0,), (1.0,)), budget=2048, seed=5)
    ok = (abs(m_sim.sup_estimate - math.log(0.5)) <= 1e-6
          and m_dec.sup_estimate < 0.0
          and m_exp.sup_estimate > 0.0)
    report(5, "average-contraction margins", ok,
           f"similitude={m_sim.sup_estimate:.8f} band={m_dec.sup_estimate:.4f} "
           f"expanding={m_exp.sup_estimate:.4f}")


def test_criterion_06_chebyshev_tail_suite(quarter_pair):
    trajs = F.chaos_game_many(quarter_pair.system, 0.5, n_traj=1000,
                              n_steps=10_000, burn_in=100, master_seed=6)
    reports = F.deviation_diagnostic(trajs, [10.0, 20.0, 50.0, 100.0])
    ok = all(r.within_bound for r in reports)
    detail = " ".join(f"K=e^{r.log_k:.0f}:{r.empirical_tail:.3f}<={r.chebyshev_bound:.3f}"
                      for r in reports)
    report(6, "Chebyshev tail bound over 1000 trajectories", ok, detail)


def test_criterion_07_oracle_equivalences(cantor, cantor_measure_1m):
    # ball mass vs linear scan
    rng = np.random.default_rng(7)
    pts = rng.normal(size=10_000)
    m = F.EmpiricalMeasure(pts)
    w0 = m.weights[0]
    scan_ok = all(
        m.ball_mass(x, r) == int(np.sum(np.abs(pts - x) <= r)) * w0
        for x, r in [(0.0, 0.1), (0.5, 1.0), (-1.0, 2.5), (2.0, 1e-3)])

    # transfer operator conserves mass to 1e-12 per step
    g = F.GridMeasure.uniform(0.0, 1.0, 1024)
    conserve_ok = True
    for _ in range(30):
        g = F.transfer_iterate_1d(cantor.system, g, 1)
        conserve_ok &= abs(g.mass.sum() + g.overflow_mass - 1.0) <= 1e-12

    # cylinder masses sum to 1 over all words up to length 6
    cyl_ok = True
    for n in range(1, 7):
        total = 0.0
        pooled = 0.0
        for word in product((1, 2), repeat=n):
            est = F.cylinder_measure_plus(cantor.system, word, cantor_measure_1m)
            total += est.value
            pooled += est.stderr ** 2
        cyl_ok &= abs(total - 1.0) <= max(3 * math.sqrt(pooled), 1e-9)

    # reversal identity exact for constant fields
    rev_ok = True
    for word in [(1, 2), (2, 2, 1), (1, 2, 1)]:
        minus = F.cylinder_measure_minus(cantor.system, word, cantor_measure_1m)
        plus_rev = F.cylinder_measure_plus(cantor.system, word[::-1], cantor_measure_1m)
        rev_ok &= minus.value == plus_rev.value

    ok = scan_ok and conserve_ok and cyl_ok and rev_ok
    report(7, "oracle equivalences", ok,
           f"scan={scan_ok} conserve={conserve_ok} cylinders={cyl_ok} reversal={rev_ok}")


def test_criterion_08_coding_map_suite(cantor):
    tol = 1e-10
    half_up = F.IfsSystem(1, [F.Affine1D(0.5, 1.0)], F.ConstantField([1.0]))
    fp = F.coding_map(half_up, F.FixedStream([1]), 0.0, tol=tol, max_n=400)
    fixed_ok = fp.converged and abs(fp.point - 2.0) <= tol * 10

    cyc = F.coding_map(cantor.system, F.FixedStream([1, 2], tail="cycle"), 0.0,
                       tol=tol, max_n=400)
    cycle_ok = cyc.converged and abs(cyc.point - 0.25) <= tol * 10

    equiv_ok = True
    for seed in (1, 2, 3):
        stream = F.RandomStream(2, seed=seed)
        pi = F.coding_map(cantor.system, stream, 0.0, tol=tol, max_n=400)
        for sym in (1, 2):
            pre = F.coding_map(cantor.system, F.PrependedStream(sym, stream), 0.0,
                               tol=tol, max_n=400)
            equiv_ok &= abs(pre.point - cantor.system.eval_map(sym, pi.point)) <= 10 * tol

    indep_ok = True
    for seed in (4, 5):
        a = F.coding_map(cantor.system, F.RandomStream(2, seed=seed), 0.0, tol=tol, max_n=400)
        b = F.coding_map(cantor.system, F.RandomStream(2, seed=seed), 100.0, tol=tol, max_n=400)
        indep_ok &= a.converged and b.converged and abs(a.point - b.point) <= 10 * tol

    ok = fixed_ok and cycle_ok and equiv_ok and indep_ok
    report(8, "coding map suite", ok,
           f"fixed={fixed_ok} cycle={cycle_ok} equivariance={equiv_ok} x0-indep={indep_ok}")


def test_criterion_09_geometry_suite(cantor):
    r1_cantor = F.check_sosc(cantor.system, cantor.open_set)
    touching = F.IfsSystem(1, [F.Affine1D(0.5, 0.0), F.Affine1D(0.5, 0.5)],
                           F.ConstantField([0.5, 0.5]))
    u01 = F.OpenSet.from_intervals([[0.0, 1.0]])
    r1_touch = F.check_sosc(touching, u01)
    _, r3 = F.check_rosc(touching, u01, seed=9)
    osc = F.check_osc(cantor.system, cantor.open_set)
    ok = (osc.containment_pass and osc.disjointness_pass
          and r1_cantor == 1 / 3 and r1_touch == 0.0
          and abs(r3 - 1.0) <= 1e-6)
    report(9, "geometry suite", ok,
           f"cantor R1={r1_cantor} touching R1={r1_touch} unit-interval R3={r3:.8f}")


def test_criterion_10_cli_determinism(tmp_path):
    base = ["--seed", "11"]
    commands = [
        ["validate", "--system", "cantor", "--budget", "500"],
        ["simulate", "--system", "cantor", "--steps", "20000", "--burn-in", "200"],
        ["simulate", "--system", "cantor", "--steps", "5000", "--burn-in", "100",
         "--trajectories", "3", "--threads", "3"],
        ["estimate", "--system", "paper-example", "--p1", "0.7",
         "--steps", "50000", "--burn-in", "1000"],
        ["dimension", "--system", "cantor", "--steps", "100000", "--burn-in", "500",
         "--centers", "24", "--levels", "12"],
        ["dimension", "--system", "cantor", "--steps", "50000", "--burn-in", "500",
         "--trajectories", "4", "--threads", "2", "--centers", "16", "--levels", "10"],
        ["cover-bound", "--system", "cantor", "--steps", "100000", "--burn-in", "500",
         "--n", "10"],
        ["check-osc", "--system", "cantor"],
        ["cylinder", "--system", "cantor", "--steps", "20000", "--burn-in", "200",
         "--word", "12", "--word", "121"],
    ]
    ok = True
    details = []
    for i, cmd in enumerate(commands):
        outs = []
        for rep_i in (0, 1):
            out = tmp_path / f"c{i}_{rep_i}.out"
            code = subprocess.run(
                [sys.executable, "-m", "ifsdim.cli", *cmd, *base, "--out", str(out)],
                capture_output=True).returncode
            assert code == 0, f"{cmd} exited {code}"
            outs.append(out.read_bytes())
        same = outs[0] == outs[1]
        ok &= same
        details.append(f"{cmd[0]}={'ok' if same else 'DIFFERS'}")
    report(10, "byte-identical reruns for every subcommand", ok, " ".join(details))
