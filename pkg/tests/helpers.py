"""Independent oracles shared by the unit and acceptance tests."""
import random

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linprog

from sidonbound.cells import BoundParams
from sidonbound.lp import LinearProgram, Relation, Status
from sidonbound.numerics import AffineForm

HEADLINE = dict(
    tau="1.12733",
    alphas=["0.70749", "0.78822", "0.87175", "1.12464", "1.18020", "1.24610"],
    cs=["0.66461", "0.67780", "0.71884"],
)
TWO_WINDOW = dict(tau="1.07950", alphas=["0.72720", "1.31609"], cs=["0.86838"])


def headline_params() -> BoundParams:
    return BoundParams.from_decimals(**HEADLINE)


def two_window_params() -> BoundParams:
    return BoundParams.from_decimals(**TWO_WINDOW)


def random_lp(rng: random.Random) -> LinearProgram:
    n = rng.randint(1, 8)
    m = rng.randint(1, 20)
    cons = []
    for _ in range(m):
        form = AffineForm(rng.randint(-6, 6), {j: rng.randint(-4, 4) for j in range(1, n + 1)})
        rel = rng.choices([Relation.GE, Relation.LE, Relation.EQ], [6, 6, 1])[0]
        cons.append((form, rel))
    if rng.random() < 0.6:  # a box keeps most instances bounded
        for j in range(1, n + 1):
            cons.append((AffineForm(5, {j: -1}), Relation.GE))
            cons.append((AffineForm(5, {j: 1}), Relation.GE))
    objective = AffineForm(rng.randint(-3, 3), {j: rng.randint(-3, 3) for j in range(1, n + 1)})
    return LinearProgram(tuple(range(1, n + 1)), objective, tuple(cons), rng.choice(["max", "min"]))


def float_solve(lp: LinearProgram):
    """(status, value) from HiGHS in double precision."""
    n = len(lp.variables)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for f, rel in lp.constraints:
        row = [float(f.coefficient(j)) for j in lp.variables]
        c0 = float(f.constant)
        if rel is Relation.GE:
            A_ub.append([-v for v in row])
            b_ub.append(c0)
        elif rel is Relation.LE:
            A_ub.append(row)
            b_ub.append(-c0)
        else:
            A_eq.append(row)
            b_eq.append(-c0)
    sign = -1.0 if lp.sense == "max" else 1.0
    c = [sign * float(lp.objective.coefficient(j)) for j in lp.variables]
    res = linprog(c, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                  bounds=[(None, None)] * n, method="highs")
    status = {0: Status.OPTIMAL, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}[res.status]
    value = sign * res.fun + float(lp.objective.constant) if res.status == 0 else None
    return status, value


def closed_form_second_bound(tau, a1, a2, c) -> AffineForm:
    """Short-window bound for two levels written directly from its derivation.

    Symmetrized scale (cutoffs in [0, 1]); on the cell where
    ``w1 <= c <= w2 <= w1 + c`` and the count lies in
    ``[0, a1]``, ``[a1, a2]``, ``[a2, inf)`` across the three levels.
    """
    pos = lambda x: x if x > 0 else mpq(0)
    w1, w2 = AffineForm.variable(1), AffineForm.variable(2)
    gain = (2 * w2 - 2 * w1 - 2 * c) * pos(c - (a2 - a1)) ** 2 + 2 * w1 * pos(c - a1) ** 2
    return AffineForm(c * tau + 1 / (c * tau)) - gain * (tau / c ** 2)


def maxmin_on_triangle(f: AffineForm, g: AffineForm):
    """``max min(f, g)`` over ``0 <= w1 <= w2 <= 1`` by vertex enumeration."""
    verts = [(mpq(0), mpq(0)), (mpq(0), mpq(1)), (mpq(1), mpq(1))]
    d = f - g  # zero set is a line a + b w1 + e w2 = 0
    a, b, e = d.constant, d.coefficient(1), d.coefficient(2)
    cands = list(verts)
    # intersect with w1 = 0, w2 = 1, w1 = w2
    if e:
        cands.append((mpq(0), -a / e))
    if b:
        cands.append(((-a - e) / b, mpq(1)))
    if b + e:
        t = -a / (b + e)
        cands.append((t, t))
    best = None
    for w1, w2 in cands:
        if 0 <= w1 <= w2 <= 1:
            p = {1: w1, 2: w2}
            v = min(f.evaluate(p), g.evaluate(p))
            if best is None or v > best[0]:
                best = (v, p)
    return best


def random_thin_set(rng: random.Random, k: int, g: int):
    """Random g-thin set: scan upward, keep each admissible integer with probability p."""
    from collections import Counter
    from sidonbound.sidon import SidonSet

    p = rng.choice([0.3, 0.6, 1.0])
    start = rng.randint(-50, 50)
    elems, hist, x = [start], Counter(), start
    while len(elems) < k:
        x += 1
        if all(hist[x - a] < g for a in elems) and rng.random() < p:
            for a in elems:
                hist[x - a] += 1
            elems.append(x)
    return SidonSet(tuple(elems))


def thin_corpus(seed: int = 7, per_g: int = 70):
    """``3 * per_g`` pairs ``(set, g)`` with ``k <= 40`` and ``g in {1, 2, 3}``."""
    rng = random.Random(seed)
    return [(random_thin_set(rng, rng.randint(1, 40), g), g)
            for g in (1, 2, 3) for _ in range(per_g)]


def window_sizes(rng: random.Random, s):
    top = s.diameter + 3
    return sorted({1, rng.randint(2, max(2, top // 2)), rng.randint(2, max(2, top)), top + 5})
