"""One test per acceptance criterion, each logging a PASS/FAIL line with its measured values."""

import json
import math
import os
import subprocess
import sys
import time

import pytest

from hardylab.corpus import demo_field, demo_tau, psi_family
from hardylab.suites import (TWO_SQRT2, Quadrature, bezout_roundtrip_suite, bezout_suite,
                             branch_suite, correcting_suite, embedding_corpus_suite,
                             form_corpus_suite, green_closure, identities_suite)
from hardylab.disk_core import PolyVecField, ScalarPoly


def report(log, number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    print(line)
    log.append(line)
    assert ok, line


def test_criterion_1_green_closure(acceptance_log):
    t0 = time.perf_counter()
    worst, arg, mass = green_closure(Quadrature(64, 256), max_degree=6)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and abs(mass - 1) <= 1e-10 and dt < 5
    report(acceptance_log, 1, "Green closure", ok,
           f"worst residual {worst:.2e} at {arg} (<= 1e-8), mass error {abs(mass - 1):.1e} "
           f"(<= 1e-10), {dt:.2f} s (< 5 s)")


@pytest.fixture(scope="module")
def identities():
    t0 = time.perf_counter()
    res = identities_suite(seed=0, fields=100, points=100, max_dim=4, max_degree=5, h=1e-4)
    return res, time.perf_counter() - t0


def test_criterion_2_projection_identities(acceptance_log, identities):
    res, dt = identities
    alg = res.check("pdp_algebraic")
    lap = res.check("laplacian_Pi_fd")
    order = res.check("laplacian_Pi_order")
    n = res.data["samples"]
    ok = alg.passed and lap.passed and order.passed and n >= 10_000 and dt < 30
    report(acceptance_log, 2, "projection identities", ok,
           f"{n} samples, algebraic {alg.value:.1e} (<= 1e-10), Laplacian {lap.value:.2e} "
           f"(<= 1e-5), order {order.value:.3f} (>= 1.8), {dt:.1f} s (< 30 s)")


def test_criterion_3_curvature(acceptance_log, identities):
    res, _ = identities
    fd = res.check("curvature_vs_laplacian")
    closed = res.check("curvature_closed_form")
    ok = fd.passed and closed.passed
    report(acceptance_log, 3, "curvature identity", ok,
           f"finite-difference {fd.value:.2e} (<= 1e-5), closed form {closed.value:.1e} at 1000 points (<= 1e-10)")


def test_criterion_4_correcting_factor(acceptance_log):
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, psi in psi_family().items():
        res, _ = correcting_suite(psi)
        det = res.check("condition_min_determinant")
        want = ("condition_min_determinant", "M_at_zero_error", "mass_telescoping",
                "domination_refinement_change", "domination_constant_finite")
        ok &= all(res.check(k).passed for k in want)
        dom = res.data["domination"]
        parts.append(f"{name}: det {det.value:.1e}, M(0)-1 {res.check('M_at_zero_error').value:.0e}, "
                     f"mass {res.check('mass_telescoping').value:.1e}, C {dom['fine']:.3g} "
                     f"({dom['relative_change']:.1%})")
    dt = time.perf_counter() - t0
    ok &= dt < 5
    report(acceptance_log, 4, "correcting factor", ok, "; ".join(parts) + f"; {dt:.2f} s (< 5 s)")


def test_criterion_5_embedding_margins(acceptance_log):
    t0 = time.perf_counter()
    res = embedding_corpus_suite(seed=0, sections=20, refine=True)
    dt = time.perf_counter() - t0
    ok = res.passed and dt < 300
    d = res.data
    report(acceptance_log, 5, "embedding margins", ok,
           f"{d['reports']} reports, worst margin {d['worst_margin']:.2e} (>= -1e-8), "
           f"refinement change {d['worst_refinement_change']:.1e} (< 0.1), "
           f"size gate {d['size_condition_worst']:.2e}, {dt:.0f} s (< 300 s)")


def test_criterion_6_branch_freedom(acceptance_log):
    res = branch_suite(seed=0, count=1000)
    c = res.check("branch_free_dbar")
    report(acceptance_log, 6, "branch-free weighted norm", c.passed,
           f"{res.data['samples']} samples, worst relative {c.value:.1e} (<= 1e-12)")


def test_criterion_7_hankel_form(acceptance_log):
    t0 = time.perf_counter()
    res = form_corpus_suite(seed=0, pairs=10, degrees=range(1, 9))
    dt = time.perf_counter() - t0
    ok = res.passed and dt < 300
    d = res.data
    report(acceptance_log, 7, "Hankel form", ok,
           f"|I| {d['part_I']:.1e} (<= 1e-6), symmetry {d['symmetry']:.1e} (<= 1e-7), "
           f"bound ratio {d['bound_ratio']:.3f}, estimate {d['estimate']:.3f} "
           f"(<= {TWO_SQRT2 + 1e-6:.6f}), monotone drop {d['monotone_drop']:.1e}, {dt:.0f} s (< 300 s)")


def test_criterion_8_bezout(acceptance_log):
    t0 = time.perf_counter()
    demo = bezout_suite(demo_field(), demo_tau(), g_sup_limit=math.sqrt(2) + 1e-9)
    rt = bezout_roundtrip_suite(seed=0, count=50)
    bad = bezout_suite(PolyVecField([[0, 1], [0, 2]]), ScalarPoly([1.0]))
    dt = time.perf_counter() - t0
    cert = demo.data["certificate"]
    infeasible = not bad.check("feasible").passed and "infeasible" in bad.data
    ok = demo.passed and rt.passed and infeasible and dt < 60
    report(acceptance_log, 8, "Bezout solver", ok,
           f"demo coefficient residual {cert['coefficient_residual']:.0e} (<= 1e-12), boundary "
           f"{cert['boundary_residual']:.1e}, g_sup {cert['g_sup']:.12f} (<= sqrt2 + 1e-9), "
           f"round trips {'ok' if rt.passed else 'failed'} ({rt.data['worst_gap']:.1e} gap), "
           f"common zero reported infeasible: {infeasible}, {dt:.1f} s (< 60 s)")


COMMANDS = ("identities", "correcting-factor", "embeddings", "form", "bezout")


def _run(command, threads):
    env = dict(os.environ, HARDYLAB_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "hardylab", command, "--seed", "7"], env=env,
                          capture_output=True, check=False)


def test_criterion_9_determinism(acceptance_log):
    ok, parts = True, []
    for cmd in COMMANDS:
        runs = [_run(cmd, 1), _run(cmd, 1), _run(cmd, 4)]
        same = all(r.stdout == runs[0].stdout for r in runs) and runs[0].returncode == 0
        json.loads(runs[0].stdout)
        ok &= same
        parts.append(f"{cmd} {'identical' if same else 'DIFFERS'}")
    report(acceptance_log, 9, "determinism across HARDYLAB_THREADS=1,1,4", ok, ", ".join(parts))
