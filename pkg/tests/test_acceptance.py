"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances."""
import os
import random

import pytest
from gmpy2 import mpq

from helpers import (float_solve, headline_params, random_lp, thin_corpus, two_window_params,
                     window_sizes)
from sidonbound.cells import (BoundParams, build_cell, enumerate_interlacings, lemma1_form,
                              locate_cell, nonempty_cells)
from sidonbound.certfile import write_certificate
from sidonbound.certify import certify, two_window_certify
from sidonbound.lp import Status, lp_solve, verify_result
from sidonbound.numerics import AffineForm
from sidonbound.segments import check_segments
from sidonbound.sidon import (SidonSet, etsse_residual, generate_sidon, pair_window_identity,
                              s_g_statistic, v_statistic)
from sidonbound.thin import thin_report

HEADLINE_WITNESS = ("0.13398", "0.30015", "0.46220", "0.96476", "0.97795", "1")


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail=""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def headline():
    return certify(headline_params(), workers=1)


def _two_window(workers):
    return two_window_certify("1.07950", "0.72720", "1.31609", "0.86838", workers=workers)


def test_1_headline_reproduction(report, headline):
    c = headline
    w = [c.witness[j] for j in range(1, 7)]
    checks = {
        "cells": c.cell_counts == (127, 127, 127),
        "bound": mpq("1.9631") <= c.certified_bound <= mpq("1.9642"),
        "printed": mpq(c.printed_bound) <= mpq("1.96370"),
        "witness": all(abs(a - mpq(b)) <= mpq(1, 1000) for a, b in zip(w, HEADLINE_WITNESS)),
        "triples": abs(c.feasible_combinations - 24822) <= 248,
        "cases": abs(c.feasible_cases - 40964) <= 409,
    }
    detail = (f"cells={c.cell_counts} bound={c.printed_bound} triples={c.feasible_combinations} "
              f"cases={c.feasible_cases} failed={[k for k, v in checks.items() if not v]}")
    report(1, all(checks.values()), detail)


def test_2_two_window_reproduction(report):
    cert = _two_window(1)
    f = lemma1_form(two_window_params())
    printed = (mpq("1.7901428"), mpq("-0.0803363"), mpq("0.1078559"))
    ours = (f.constant, f.coefficient(1) / 2, f.coefficient(2) / 2)
    coeff_ok = all(abs(a - b) <= mpq(1, 10**7) for a, b in zip(ours, printed))
    bound_ok = mpq("1.99050") <= cert.certified_bound <= mpq("1.99065")
    report(2, coeff_ok and bound_ok,
           f"bound={cert.printed_bound} lemma1_on_[0,2]=({', '.join('%.8f' % float(x) for x in ours)})")


def test_3_diameter_identity(report):
    rng = random.Random(3)
    fixed = [SidonSet((0, 1, 3)), SidonSet((0, 1, 2))]
    ok = (etsse_residual(fixed[0], 2, 1) == 0 and v_statistic(fixed[0], 2) == mpq(4, 5)
          and s_g_statistic(fixed[0], 2, 1) == 0 and etsse_residual(fixed[1], 2, 2) == 0)
    corpus = thin_corpus()
    n = 0
    for s, g in corpus:
        sizes = window_sizes(rng, s)
        ok &= len(sizes) >= 3
        for T in sizes:
            ok &= etsse_residual(s, T, g) == 0
            n += 1
    report(3, ok and len(corpus) >= 200, f"{len(corpus)} sets, {n} (set, T) pairs, residual exactly 0")


def test_4_pair_window_identity(report):
    rng = random.Random(3)
    ok, n = True, 0
    for s, g in thin_corpus():
        for T in window_sizes(rng, s):
            lhs, rhs = pair_window_identity(s, T, g)
            ok &= lhs == rhs
            n += 1
    report(4, ok, f"{n} (set, T) pairs")


def test_5_cell_fidelity(report):
    w1, w2, w3 = (AffineForm.variable(j) for j in (1, 2, 3))
    c = mpq(3, 10)
    p3 = BoundParams(1, (mpq(1, 2), 1, mpq(3, 2)), (c,))
    a = build_cell((0, 2, 2, 4, 4), c, p3)
    ok = (list(a.breakpoints) == [AffineForm(0), AffineForm(c), w1, w2, w1 + c, w2 + c, w3, AffineForm(1)]
          and a.zeta == (0, 1, 1, 1, 2, 3, 3) and a.eta == (1, 1, 2, 3, 3, 3, 4)
          and all(f in a.constraints for f in (w1 - c, w1 + c - w2, w3 - w2 - c, w3 + c - 1)))
    c2 = mpq(9, 10)
    b = build_cell((1, 1, 3, 3), c2, BoundParams(1, (mpq(4, 5), mpq(6, 5)), (c2,)))
    ok &= (list(b.breakpoints) == [AffineForm(0), w1, AffineForm(c2), w1 + c2, w2, AffineForm(1)]
           and b.eta == (1, 2, 2, 2, 3) and b.zeta == (0, 0, 1, 2, 2))
    ok &= enumerate_interlacings(1) == [(0, 1, 2), (0, 2, 2), (1, 1, 2), (1, 2, 2), (2, 2, 2)]
    cells = nonempty_cells(BoundParams(1, (mpq(1, 2),), (mpq(3, 5),)), mpq(3, 5))
    ok &= len(cells) == 3
    report(5, ok, "K=3 and K=2 worked cells, K=1 enumeration, 3 nonempty cells at c=0.6")


def test_6_coverage(report):
    rng = random.Random(6)
    configs = [(headline_params(), c) for c in headline_params().cs]
    configs.append((two_window_params(), two_window_params().cs[0]))
    for params, c in configs:
        cells = nonempty_cells(params, c)
        for _ in range(10_000):
            den = rng.choice([100, 99991, 10**9])
            pt = sorted(mpq(rng.randint(0, den), den) for _ in range(params.K))
            locate_cell(cells, dict(enumerate(pt, 1)))
    report(6, True, f"{len(configs)} configurations x 10^4 points located")


def test_7_segment_validity(report):
    params = headline_params()
    cells = {c: nonempty_cells(params, c) for c in params.cs}

    def run():
        out = []
        for k in (100, 200, 400):
            s = generate_sidon(k)
            for c in params.cs:
                rep = check_segments(s, params, c, cells[c])
                out.append((k, rep.cell.interlacing, rep.offsets_checked,
                            tuple(v.to_text() for v in rep.violations)))
        return out

    first, second = run(), run()
    violations = sum(len(r[3]) for r in first)
    report(7, first == second and violations == 0,
           f"{len(first)} runs, {sum(r[2] for r in first)} offsets, {violations} violations, deterministic")


def test_8_thin_algebra(report):
    ok = True
    for g in range(2, 101):
        r = thin_report(g)
        ok &= r.identity_holds and r.c_in_range and r.gap_positive
    r2 = thin_report(2)
    ok &= r2.gap == mpq(399, 237600) and r2.epsilon == mpq(297, 30200) and r2.c == mpq(297, 302)
    report(8, ok, "g in [2, 100]; g=2 gap 399/237600")


def test_9_lp_soundness(report):
    rng = random.Random(20240601)
    ok, statuses = True, {}
    for _ in range(100):
        lp = random_lp(rng)
        res = lp_solve(lp)
        status, value = float_solve(lp)
        statuses[res.status.value] = statuses.get(res.status.value, 0) + 1
        ok &= res.status is status
        if status is Status.OPTIMAL and res.status is Status.OPTIMAL:
            ok &= abs(float(res.value) - value) <= 1e-9 * max(1.0, abs(value))
        if res.status is not Status.UNBOUNDED:
            ok &= verify_result(lp, res)
    report(9, ok, f"100 LPs {statuses}")


def test_10_determinism(report, headline):
    counts = sorted({1, 4, os.cpu_count() or 1})
    tw = {write_certificate(_two_window(w)) for w in counts}
    base = write_certificate(headline)
    hl = {base} | {write_certificate(certify(headline_params(), workers=w)) for w in counts if w != 1}
    report(10, len(tw) == 1 and len(hl) == 1, f"worker counts {counts}")
