"""End-to-end acceptance criteria, one test per criterion.

Every criterion records a PASS/FAIL line that is printed in the pytest
terminal summary. Run on its own with::

    pytest tests/test_acceptance.py -v
    ADULT_CSV=/path/to/adult.csv pytest tests/test_acceptance.py -v

or ``python tests/test_acceptance.py`` for the lines alone. The Adult
criterion needs a CSV with columns ``sex`` and ``income_gt_50k`` (path in the
``ADULT_CSV`` environment variable) and is skipped without one.
"""
from __future__ import annotations

import functools
import os
import time

import numpy as np
import pytest

from pidfair.audit import audit, check_impossibility, compute_gaps
from pidfair.pid import blackwell_check, decompose
from pidfair.polytope import MarginalPolytope
from pidfair.report import ingest_csv, run_audit, sweep_rows
from pidfair.scenarios import ScenarioSpec, degraded_joint, generate_scenario, random_joint
from pidfair.dist import JointDist
from pidfair.solver import brute_force_unique, unique_information

RESULTS: dict[int, str] = {}

R = 1.0 - (-0.9 * np.log2(0.9) - 0.1 * np.log2(0.1))  # 1 - H_b(0.9)


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                ok, detail = fn(*args, **kwargs)
            except pytest.skip.Exception as exc:
                RESULTS[number] = f"[criterion {number}] SKIP  {title}: {exc}"
                raise
            elapsed = time.perf_counter() - start
            line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail} ({elapsed:.1f}s)"
            RESULTS[number] = line
            print(line)
            assert ok, line

        return run

    return wrap


def _shape(rng):
    return tuple(int(x) for x in rng.integers(2, 5, size=3))


@functools.lru_cache(maxsize=None)
def random_corpus():
    """500 seeded joints with alphabet sizes in {2, 3, 4}, audited once."""
    rng = np.random.default_rng(20240501)
    out = []
    for _ in range(500):
        d = random_joint(rng, _shape(rng))
        out.append((d, audit(d)))
    return out


# -- 1 ------------------------------------------------------------------------


@criterion(1, "canonical examples 1-4")
def test_criterion_1_canonical_examples():
    expected = {
        "example1": ((1, 1, 0), (1, 0, 0, 0)),
        "example2": ((R, 0, 0), (0, R, 0, 0)),
        "example3": ((0, 1, 1), (0, 0, 1, 0)),
        "example4": ((0, 0, R), (0, 0, 0, R)),
    }
    start = time.perf_counter()
    worst = 0.0
    for kind, (gaps, terms) in expected.items():
        a = audit(generate_scenario(ScenarioSpec(kind)))
        got_gaps = (a.gaps.sp_gap, a.gaps.eo_gap, a.gaps.pp_gap)
        got_terms = (a.pid.uni_a, a.pid.red, a.pid.syn, a.pid.uni_b)
        worst = max(worst, *(abs(x - y) for x, y in zip(got_gaps + got_terms, gaps + terms)))
    elapsed = time.perf_counter() - start
    return worst <= 1e-3 and elapsed < 5.0, f"max deviation {worst:.2e} bits, runtime {elapsed:.2f}s"


# -- 2 ------------------------------------------------------------------------


@criterion(2, "motivational example")
def test_criterion_2_motivational():
    start = time.perf_counter()
    p = decompose(generate_scenario(ScenarioSpec("motivational")))
    elapsed = time.perf_counter() - start
    dev = max(abs(p.uni_a - 1), abs(p.red - 1), abs(p.syn - 1), abs(p.uni_b))
    total_dev = abs(sum(p.terms) - 3.0)
    ok = dev <= 1e-3 and total_dev <= 1e-6 and elapsed < 60
    return ok, f"term deviation {dev:.2e}, total deviation {total_dev:.2e}, runtime {elapsed:.2f}s"


# -- 3 ------------------------------------------------------------------------


@criterion(3, "grid-oracle equivalence on 100 binary joints")
def test_criterion_3_oracle():
    rng = np.random.default_rng(3)
    worst_diff = worst_gap = 0.0
    unconverged = 0
    for _ in range(100):
        poly = MarginalPolytope.from_dist(random_joint(rng))
        r = unique_information(poly)
        worst_diff = max(worst_diff, abs(r.objective - brute_force_unique(poly, 2001)))
        worst_gap = max(worst_gap, r.certified_gap)
        unconverged += not r.converged
    ok = worst_diff <= 1e-5 and worst_gap <= 1e-9 and unconverged == 0
    return ok, f"max |solver - oracle| {worst_diff:.2e}, max certified gap {worst_gap:.2e}, unconverged {unconverged}"


# -- 4 ------------------------------------------------------------------------


@criterion(4, "nonnegativity and identities on 500 random joints")
def test_criterion_4_identities():
    worst_neg = 0.0
    worst_identity = 0.0
    for _, a in random_corpus():
        worst_neg = min(worst_neg, *a.pid.terms)
        worst_identity = max(worst_identity, *(abs(v) for v in a.identity_defects().values()))
    ok = worst_neg >= -1e-6 and worst_identity <= 1e-6
    return ok, f"most negative term {worst_neg:.2e}, max identity defect {worst_identity:.2e}"


# -- 5 ------------------------------------------------------------------------


@criterion(5, "relation regimes and Blackwell equivalence")
def test_criterion_5_regimes():
    parts = []
    ok = True

    rows = sweep_rows(ScenarioSpec("markov_sweep", {"steps": 101}))
    t5 = max(abs(r["sp_gap"] + r["pp_gap"] - r["dataset_mi"]) for r in rows)
    ok &= len(rows) == 101 and t5 <= 1e-9
    parts.append(f"tradeoff identity max defect {t5:.1e} over {len(rows)} points")

    family = generate_scenario(ScenarioSpec("sp_zero_family", {"samples": 50, "seed": 5}))
    t3_fail = 0
    for _, d in family:
        g = audit(d).gaps
        t3_fail += not (g.pp_gap >= g.eo_gap - 1e-6)
    ok &= t3_fail == 0
    parts.append(f"sp-zero dominance failures {t3_fail}/50")

    # both directions: the random corpus has positive total information,
    # product-form joints have none
    rng = np.random.default_rng(11)
    t1_fail = sum(not check_impossibility(a).holds for _, a in random_corpus())
    for _ in range(50):
        shape = _shape(rng)
        pz = rng.dirichlet(np.ones(shape[0]))
        pay = rng.dirichlet(np.ones(shape[1] * shape[2])).reshape(shape[1:])
        indep = JointDist.from_array(pz[:, None, None] * pay[None])
        g = compute_gaps(indep)
        t1_fail += not (max(g.sp_gap, g.eo_gap, g.pp_gap) <= 1e-6)
        t1_fail += not check_impossibility(audit(indep)).holds
    ok &= t1_fail == 0
    parts.append(f"impossibility failures {t1_fail}/550")

    rng = np.random.default_rng(7)
    disagree = feasible = 0
    for i in range(200):
        shape = _shape(rng)
        d = (degraded_joint if i % 2 else random_joint)(rng, shape)
        v = blackwell_check(d, "z", "y")
        feasible += v.feasible
        disagree += v.feasible != (decompose(d).uni_a < 1e-6)
    ok &= disagree == 0
    parts.append(f"Blackwell disagreements {disagree}/200 ({feasible} feasible)")
    return bool(ok), "; ".join(parts)


# -- 6 ------------------------------------------------------------------------


@criterion(6, "Adult dataset label dependence")
def test_criterion_6_adult():
    path = os.environ.get("ADULT_CSV")
    if not path:
        pytest.skip("ADULT_CSV not set; point it at a CSV with columns sex, income_gt_50k")
    dist, n = ingest_csv(path, "sex", "income_gt_50k")
    rep = run_audit(dist, n_records=n, dataset_only=True)
    mi = rep.gaps["dataset_mi"]
    return abs(mi - 0.037) <= 0.005, f"I(Z;Y) = {mi:.6f} bits over {n} rows"


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for t in tests:
        try:
            t()
        except AssertionError:
            pass
        except pytest.skip.Exception:
            print(RESULTS.get(int(t.__name__.split("_")[2])))
