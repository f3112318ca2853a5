"""Acceptance criteria A1-A10, each at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are echoed at the end
of the pytest run (see conftest.py) and printed immediately under ``-s``.
"""

import math
import time

import pytest

from besovkit.harness import (
    DRIFT_LIMIT,
    SuiteConfig,
    atom_reports,
    exact_reports,
    nesc_reports,
    nikolskii_reports,
    phi_reports,
    reduction_reports,
    resolution_reports,
    run_suite,
    truncation_reports,
)

pytestmark = pytest.mark.slow

LINES = []
DEFAULT = SuiteConfig()  # d=1, m=0, n=9, J_max=7, seed 0
BOUNDED_SUITES = ("ggl", "maximal", "peetre", "multiplier", "embeddings")


def record(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def by_id(reports):
    return {r.check_id: r for r in reports}


def test_a1_gp_catalog():
    reps, dt = timed(phi_reports, DEFAULT)
    r = by_id(reps)["gp_catalog"]
    ok = r.passed and r.worst_ratio == 0 and dt < 5.0
    record("A1", ok, f"weight catalog: {int(r.worst_ratio)} misclassified of 4x{r.params['instances']}, {dt:.1f}s (limit 5s)")


def test_a2_epsilon_integrals():
    reps, dt = timed(phi_reports, DEFAULT)
    r = by_id(reps)["epsilon_integral"]
    ok = r.passed and not r.extra["failed"] and r.worst_ratio <= 0.01 and dt < 30.0
    record("A2", ok, f"tail integrals finite, worst deviation from closed form {r.worst_ratio:.2e} (limit 1e-2), {dt:.1f}s")


def test_a3_resolution_identities():
    reps = by_id(resolution_reports(DEFAULT, count=100))
    pou, rec = reps["partition_of_unity"], reps["block_reconstruction"]
    ok = pou.worst_ratio < 1e-14 and rec.worst_ratio < 1e-10 and rec.extra["instances"] == 100
    record("A3", ok, f"partition defect {pou.worst_ratio:.1e} (<1e-14), block reconstruction {rec.worst_ratio:.1e} (<1e-10) on 100 fields")


def test_a4_reductions():
    reps = by_id(reduction_reports(DEFAULT, count=100))
    c, t, bf = reps["reduction_classical"], reps["reduction_tau"], reps["fubini_b_equals_f"]
    ok = c.worst_ratio <= 1e-12 and t.worst_ratio <= 1e-12 and bf.worst_ratio <= 1e-10
    ok = ok and all(r.extra["instances"] == 100 for r in (c, t, bf))
    record("A4", ok, f"classical {c.worst_ratio:.1e}, |P|^tau {t.worst_ratio:.1e} (<=1e-12), B=F at p=q {bf.worst_ratio:.1e} (<=1e-10)")


def test_a5_exact_inequalities():
    reps = exact_reports(DEFAULT)
    worst = max(r.worst_ratio for r in reps)
    ok = all(r.passed for r in reps) and worst <= 1 + 1e-10 and all(r.extra["instances"] >= 200 for r in reps)
    record("A5", ok, f"{len(reps)} exact checks over 200 instances each, worst ratio {worst:.12f} (<=1+1e-10)")


def _bounded(cfg):
    t0 = time.perf_counter()
    reps = []
    for suite in BOUNDED_SUITES:
        reps += run_suite(suite, cfg)
    return reps, time.perf_counter() - t0


def _bounded_summary(reps):
    bounded = [r for r in reps if r.kind in ("bounded", "two_sided")]
    finite = all(math.isfinite(r.worst_ratio) for r in bounded)
    drift = max(max(r.extra["drift_refine"], r.extra["drift_count"]) for r in bounded)
    base = [r.extra.get("baseline_rel") for r in bounded if r.extra.get("baseline_rel") is not None]
    return bounded, finite, drift, base


def test_a6_bounded_ratios_d1():
    reps, dt = _bounded(DEFAULT)
    bounded, finite, drift, base = _bounded_summary(reps)
    failed = sorted({r.check_id for r in reps if not r.passed})
    pinned = len(base) == len(bounded)
    ok = not failed and finite and drift < DRIFT_LIMIT and pinned and max(base) <= 0.2 and dt < 300
    record(
        "A6",
        ok,
        f"d=1 n=9: {len(reps)} reports, {len(bounded)} constants finite, max drift {drift:.2f} (<2), "
        f"max baseline change {max(base, default=float('nan')):.1%} (<=20%), {dt:.0f}s (<300s); failed {failed}",
    )


def test_a6_bounded_ratios_d2():
    cfg = SuiteConfig(d=2, n=6)
    reps, dt = _bounded(cfg)
    bounded, finite, drift, _ = _bounded_summary(reps)
    failed = sorted({r.check_id for r in reps if not r.passed})
    ok = not failed and finite and drift < DRIFT_LIMIT and dt < 900
    record("A6", ok, f"d=2 n=6: {len(reps)} reports, max drift {drift:.2f} (<2), {dt:.0f}s (<900s); failed {failed}")


def test_a7_nikolskii():
    reps = nikolskii_reports(DEFAULT)
    mode = [r for r in reps if r.check_id == "nikolskii_single_mode"][0]
    rand = [r for r in reps if r.check_id == "nikolskii"]
    worst = max(r.worst_ratio for r in rand)
    ok = mode.worst_ratio <= 1e-12 and worst <= 4 and all(r.params["levels"] == list(range(6)) for r in rand)
    record("A7", ok, f"single mode |C-1| {mode.worst_ratio:.1e} (<=1e-12), random worst C {worst:.3f} (<=4) over j=0..5")


def test_a8_calderon_and_atoms():
    reps = by_id(atom_reports(DEFAULT))
    cal, atom, band = reps["calderon_roundtrip"], reps["atomic_roundtrip"], reps["atomic_roundtrip_band_limited"]
    adbf = [r for r in run_suite("atoms", DEFAULT) if r.check_id.startswith("adbf")]
    drift = max(max(r.extra["drift_refine"], r.extra["drift_count"]) for r in adbf)
    ok = (
        cal.worst_ratio < 1e-8
        and cal.extra["instances"] == 50
        and atom.worst_ratio < 1e-6
        and band.worst_ratio < 1e-6
        and all(r.passed for r in adbf)
        and drift < DRIFT_LIMIT
    )
    record(
        "A8",
        ok,
        f"Calderon {cal.worst_ratio:.1e} (<1e-8, 50 fields), atomic {atom.worst_ratio:.1e} / {band.worst_ratio:.1e} (<1e-6), "
        f"{len(adbf)} norm-bound constants, max drift {drift:.2f} (<2)",
    )


def test_a9_nesc_verdicts():
    r = nesc_reports(DEFAULT)[0]
    record("A9", r.passed and r.worst_ratio == 0, f"series convergence verdicts: {int(r.worst_ratio)} wrong")


def test_a10_truncation():
    r = truncation_reports(DEFAULT)[0]
    record("A10", r.passed and r.worst_ratio < 0.01, f"worst relative norm change {r.worst_ratio:.2e} (<1e-2) for m 0->1->2 and J_max+1")
