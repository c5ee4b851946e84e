"""Acceptance criteria, one test per criterion, each at its stated tolerance.

A pass/fail line per criterion is printed in the terminal summary. The
experiments live in ``acceptance_runs`` so that criterion 9 can re-execute
them in a fresh interpreter.
"""

import json
import os
import subprocess
import sys

import pytest

import acceptance_runs as runs
from conftest import record_criterion

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


def check(number, ok, detail):
    record_criterion(number, bool(ok), detail)
    assert ok, detail


def test_criterion_1_operator_correctness():
    r = runs.c1_operators()
    ok = r["worst_dense"] <= 1e-10 and r["worst_adjoint"] <= 1e-10 and r["seconds"] < 10
    check(1, ok, f"dense rel {r['worst_dense']:.1e}, adjoint rel {r['worst_adjoint']:.1e} "
                 f"(tol 1e-10), {r['seconds']:.1f}s (< 10s)")


def test_criterion_2_coherence_bounds():
    rows = runs.c2_coherence()["rows"]
    gauss = [r for r in rows if r[0] == "gaussian"]
    conc = [r for r in rows if r[0] == "time-concentrated"]
    spikes = [r for r in rows if r[0] == "spike"]
    in_bounds = all(1 - 1e-9 <= mu <= W / Rn + 1e-9 for _, _, W, _, _, Rn, mu in gauss)
    conc_ok = all(mu >= 0.99 * W / R for _, _, W, R, _, _, mu in conc)
    spike_ok = all(mu <= 1 + 1e-9 for *_, mu in spikes)
    worst_conc = min(mu / (W / R) for _, _, W, R, _, _, mu in conc)
    worst_spike = max(mu for *_, mu in spikes)
    check(2, in_bounds and conc_ok and spike_ok,
          f"{len(gauss)} ensembles within [1, W/R]: {in_bounds}; concentrated min mu2/(W/R) = {worst_conc:.6f} "
          f"(>= 0.99); spike max mu2 = {worst_spike:.12f} (<= 1+1e-9)")


def test_criterion_3_exact_recovery():
    r = runs.c3_exact_recovery()
    ok = r["successes"] >= 95 and r["seconds"] < 15 * 60
    worst = max(m.rel_error for m in r["records"])
    check(3, ok, f"{r['successes']}/100 trials with rel error <= 1e-3 (need >= 95), worst {worst:.1e}, "
                 f"{r['seconds']:.0f}s (< 900s)")


def test_criterion_4_universality():
    r3 = runs.c3_exact_recovery()
    r = runs.c4_universality()
    reference = r3["successes"] / len(r3["records"])
    frac = sum(d <= 0.3 for d in r["deltas"]) / len(r["deltas"])
    ok = r["mmux_rate"] <= 0.5 and abs(r["fmmux_rate"] - reference) <= 0.05 and frac >= 0.95
    check(4, ok, f"time-concentrated: mmux {r['mmux_rate']:.3f} (<= 0.5), fmmux {r['fmmux_rate']:.3f} vs "
                 f"generic mmux {reference:.3f} (within 0.05); rip at omega={r['rip_omega']}: "
                 f"{frac:.2f} of seeds with delta <= 0.3 (>= 0.95), max delta {max(r['deltas']):.3f}")


def test_criterion_5_noise_behavior():
    r = runs.c5_noise()
    gap = r["mean_db"][0] - r["mean_db"][-1]
    ok = abs(r["slope"] + 1) <= 0.2 and gap >= 25
    db = ", ".join(f"{v:.1f}" for v in r["mean_db"])
    check(5, ok, f"mean rel error dB at 10/20/30/40 dB SNR = {db}; slope {r['slope']:.3f} (-1 +- 0.2); "
                 f"gap {gap:.1f} dB (>= 25)")


def test_criterion_6_klt_vs_lasso():
    r = runs.c6_klt_vs_lasso()
    n = runs.C6["trials"]
    ok = r["wins"] >= 0.9 * n and r["violations"] == 0
    check(6, ok, f"lasso better in {r['wins']}/{n} paired trials (>= 90%); "
                 f"{r['violations']} perturbation violations in {runs.C6['perturbations']}")


def test_criterion_7_min_rate_scaling():
    r = runs.c7_min_rate()
    a1, a2 = r["alpha_omega"]
    ratio = a2 / a1
    ok = r["r2"] >= 0.9 and ratio <= 2.5
    check(7, ok, f"omega* for R=1..4: {[int(v) for v in r['omega_star']]}, line fit r2 {r['r2']:.4f} (>= 0.9); "
                 f"alpha family omega* {a1} -> {a2}, ratio {ratio:.2f} (<= 2.5) while MW grows 4x")


def _all_records():
    out = []
    for fn in (runs.c3_exact_recovery, runs.c4_universality, runs.c5_noise, runs.c6_klt_vs_lasso,
               runs.c7_min_rate):
        out += fn()["records"]
    return out


def test_criterion_8_solver_numerics():
    r = runs.c8_numerics()
    recs = _all_records()
    monotone = all(m.trace_monotone for m in recs)
    ok = r["worst_grad"] <= 1e-5 and monotone and r["worst_solve"] <= 1e-6
    check(8, ok, f"gradient vs finite differences worst rel {r['worst_grad']:.1e} (<= 1e-5); "
                 f"objective traces nonincreasing in {sum(m.trace_monotone for m in recs)}/{len(recs)} runs; "
                 f"determined solve vs direct {r['worst_solve']:.1e} (<= 1e-6)")


def test_criterion_9_reproducibility():
    first = {fn.__name__: runs.csv_hash(fn()) for fn in runs.EXPERIMENTS}
    here = os.path.dirname(__file__)
    env = dict(os.environ, PYTHONPATH=here + os.pathsep + os.environ.get("PYTHONPATH", ""))
    proc = subprocess.run([sys.executable, os.path.join(here, "acceptance_runs.py")], capture_output=True,
                          text=True, env=env, check=True)
    second = json.loads(proc.stdout)
    same = [k for k in first if first[k] == second.get(k)]
    check(9, len(same) == len(first), f"{len(same)}/{len(first)} acceptance runs re-executed in a fresh "
                                      f"process gave bit-identical metric CSVs")
