import random
from itertools import product

import pytest
from gmpy2 import mpq

from helpers import closed_form_second_bound, maxmin_on_triangle, two_window_params
from sidonbound.cells import BoundParams, InvalidParams, lemma1_form, nonempty_cells
from sidonbound.certfile import parse_certificate, recheck, write_certificate
from sidonbound.certify import (_scale, certify, corollary_bound, feasible_combinations,
                                merged_constraints, min_bound_at, two_window_certify)
from sidonbound.lp import Relation, feasible
from sidonbound.numerics import format_fraction
from sidonbound.thin import thin_params, thin_report

SMALL = BoundParams.from_decimals("1.1", ["0.7", "0.9", "1.2"], ["0.6", "0.75"])


@pytest.fixture(scope="module")
def two_window():
    return two_window_certify("1.07950", "0.72720", "1.31609", "0.86838", workers=1,
                              keep_cases=True, keep_certificates=True)


def test_no_levels_is_min_of_constants():
    for tau, c in [(mpq(1), mpq(1, 2)), (mpq(3, 2), mpq(9, 10)), (mpq(1, 3), mpq(1, 5))]:
        cert = certify(BoundParams(tau, (), (c,)), workers=1)
        assert cert.certified_bound == min(tau + 1 / tau, c * tau + 1 / (c * tau))


def test_requires_a_window_ratio():
    with pytest.raises(InvalidParams):
        certify(BoundParams(1, (mpq(1, 2),)))


def test_two_window_value(two_window):
    p = two_window_params()
    oracle, _ = maxmin_on_triangle(lemma1_form(p), closed_form_second_bound(p.tau, *p.alphas, p.cs[0]))
    assert two_window.certified_bound == oracle
    assert mpq("1.99050") <= two_window.certified_bound <= mpq("1.99065")
    assert two_window.printed_bound == "1.990580"
    assert any(k.startswith("long_window") for k, _ in two_window.notes)


def test_two_window_rejects_level_order():
    with pytest.raises(InvalidParams):
        two_window_certify(1, mpq(1, 2), mpq(9, 10), mpq(1, 2))


def test_witness_reproduces_bound(two_window):
    vals = [f.evaluate(two_window.witness) for f in two_window.bound_forms]
    assert min(vals) == two_window.certified_bound
    assert mpq(two_window.printed_bound) >= two_window.certified_bound


@pytest.mark.parametrize("params", [two_window_params(), SMALL])
def test_certified_bound_is_a_true_maximum(params):
    cert = certify(params, workers=1)
    cells = [nonempty_cells(params, c) for c in params.cs]
    rng = random.Random(5)
    for _ in range(1000):
        den = rng.choice([10, 997, 10**6])
        pt = sorted(mpq(rng.randint(0, den), den) for _ in range(params.K))
        assert min_bound_at(params, cells, dict(enumerate(pt, 1))) <= cert.certified_bound


def test_adding_a_window_never_helps_the_adversary():
    one = certify(SMALL.replace(cs=SMALL.cs[:1]), workers=1).certified_bound
    two = certify(SMALL, workers=1).certified_bound
    assert two <= one


def test_degenerate_parameters():
    tiny = certify(BoundParams(mpq("1.0795"), (mpq(1, 10**6), mpq("1.31609")), (mpq("0.86838"),)),
                   workers=1)
    assert tiny.certified_bound > mpq("1.99058")
    flat = certify(BoundParams(1, (mpq(1, 2), mpq(3, 2)), (mpq("0.999"),)), workers=1)
    assert flat.certified_bound <= 2


def test_dbm_screen_matches_lp_feasibility():
    cells = [nonempty_cells(SMALL, c) for c in SMALL.cs]
    fast = set(feasible_combinations(cells, _scale(SMALL)))
    for combo in product(*(range(len(x)) for x in cells)):
        chosen = [cells[i][j] for i, j in enumerate(combo)]
        cons = [(f, Relation.GE) for f in merged_constraints(chosen)]
        assert (combo in fast) == feasible(cons, range(1, SMALL.K + 1))


def test_worker_count_does_not_change_output():
    texts = {write_certificate(certify(SMALL, workers=w)) for w in (1, 2, 4)}
    assert len(texts) == 1


@pytest.mark.parametrize("tau, v, expected", [(1, 0, 2), (1, 1, 1), (2, 0, mpq(5, 2))])
def test_corollary_bound(tau, v, expected):
    assert corollary_bound(tau, v) == expected


def test_corollary_rejects_nonpositive_tau():
    with pytest.raises(ValueError):
        corollary_bound(0, 1)


def test_certificate_roundtrip(two_window):
    text = write_certificate(two_window)
    assert recheck(text).ok
    data = parse_certificate(text)
    assert data["tau"] == "1.07950 = 2159/2000"
    assert data["arithmetic"] == "exact"


def test_verbose_certificate_rechecks_every_case(two_window):
    rep = recheck(write_certificate(two_window, verbose=True))
    assert rep.ok
    assert ("case_table", True, "14 cases, 0 failed") in rep.checks


@pytest.mark.parametrize("field", ["certified_bound", "witness[2]", "bound[1]", "worst_cells[1]"])
def test_tampering_detected(two_window, field):
    lines = write_certificate(two_window).splitlines()
    for i, line in enumerate(lines):
        key, _, value = line.partition(": ")
        if key == field:
            if field == "worst_cells[1]":
                lines[i] = f"{key}: 1 2 3 3"
            elif field == "bound[1]":
                lines[i] = f"{key}: 2 " + " ".join(value.split()[1:])
            else:
                lines[i] = f"{key}: {format_fraction(mpq(value) + mpq(1, 10**6))}"
    assert not recheck("\n".join(lines)).ok


def test_tampered_case_multiplier_detected(two_window):
    lines = write_certificate(two_window, verbose=True).splitlines()
    i = next(i for i, l in enumerate(lines) if l.startswith("case:") and "mu=" in l)
    head, mu = lines[i].split("mu=")
    vals = mu.split(",")
    vals[0] = format_fraction(mpq(vals[0]) + 1)
    lines[i] = head + "mu=" + ",".join(vals)
    assert not recheck("\n".join(lines)).ok


def test_thin_report_g2():
    r = thin_report(2)
    assert r.epsilon == mpq(297, 30200) and r.c == mpq(297, 302)
    assert r.gap == mpq(399, 237600) and r.gap_positive and r.identity_holds
    assert r.eps_g_times_50g2 == mpq(2970, 3020) and not r.eps_g_at_least_1_over_50g2
    assert not r.cell_function_matches_printed


def test_thin_report_all_g():
    for g in range(2, 101):
        r = thin_report(g)
        assert r.identity_holds and r.gap_positive and r.c_in_range
        assert 151 * g * g - 126 * g + 47 > 0


def test_thin_report_rejects_small_g():
    with pytest.raises(ValueError):
        thin_report(1)


def test_thin_parameters_certify_below_trivial():
    for g in (2, 3):
        assert certify(thin_params(g), workers=1).certified_bound < mpq(2, g)
