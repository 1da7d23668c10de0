"""Exact rational linear programming with checkable certificates.

The solver works on the dual of the inequality-form program.  A program over
``n`` free variables with ``m`` inequality rows ``G x <= h`` has the dual

    minimize h.y   subject to   G^T y = c,  y >= 0,

whose tableau has only ``n`` rows.  The programs built by the certifier have
six variables and a few dozen constraints, so pivoting on the dual is several
times cheaper than pivoting on the primal.  Bland's rule (lowest index enters,
lowest basic index leaves on ratio ties) guarantees termination and makes the
pivot sequence a deterministic function of the input.

Certificates are reported against the caller's original constraints:

* optimal, maximize: multipliers ``mu`` with ``objective + sum(mu_i f_i)``
  identically equal to ``value``; for minimize the identity is
  ``objective - sum(mu_i f_i) == value``.
* infeasible: ``sum(mu_i f_i)`` is identically a negative constant.

In both cases ``mu_i >= 0`` for ``f_i >= 0`` rows, ``mu_i <= 0`` for
``f_i <= 0`` rows and free for equalities, so either identity is a proof by
substitution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from gmpy2 import mpq

from .numerics import AffineForm, Rational

ZERO = mpq(0)
ONE = mpq(1)


class Relation(str, Enum):
    GE = ">="
    LE = "<="
    EQ = "=="


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class MalformedProgram(ValueError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    variables: tuple[int, ...]
    objective: AffineForm
    constraints: tuple[tuple[AffineForm, Relation], ...]
    sense: str = "max"

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        cons = tuple((f, Relation(r)) for f, r in self.constraints)
        object.__setattr__(self, "constraints", cons)
        if self.sense not in ("max", "min"):
            raise MalformedProgram(f"sense must be 'max' or 'min', got {self.sense!r}")
        known = set(self.variables)
        for form in [self.objective] + [f for f, _ in cons]:
            missing = set(form.variables) - known
            if missing:
                raise MalformedProgram(f"variables {sorted(missing)} not declared")


@dataclass(frozen=True)
class LPResult:
    status: Status
    value: Rational | None = None
    witness: Mapping[int, Rational] | None = None
    multipliers: tuple | None = None
    ray: Mapping[int, Rational] | None = field(default=None)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def feasible(self) -> bool:
        return self.status is not Status.INFEASIBLE


def _pivot(T, z, basis, p, q):
    prow = T[p]
    piv = prow[q]
    if piv != ONE:
        inv = ONE / piv
        prow = [v * inv if v else v for v in prow]
        T[p] = prow
    nz = [j for j, v in enumerate(prow) if v]
    for r, row in enumerate(T):
        if r != p:
            f = row[q]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
    f = z[q]
    if f:
        for j in nz:
            z[j] -= f * prow[j]
    basis[p] = q


def _run(T, z, basis, m):
    """Bland pivoting over structural columns ``0..m-1``.

    Returns ``None`` at optimality or the entering column of an unbounded ray.
    """
    while True:
        q = -1
        for j in range(m):
            if z[j] < 0:
                q = j
                break
        if q < 0:
            return None
        p = -1
        best = None
        for r, row in enumerate(T):
            a = row[q]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[p]):
                    best, p = ratio, r
        if p < 0:
            return q
        _pivot(T, z, basis, p, q)


def _solve_dual(cols: Sequence[Sequence[Rational]], h: Sequence[Rational], c: Sequence[Rational]):
    """Minimize ``h.y`` s.t. ``sum_i y_i cols[i] = c``, ``y >= 0``.

    ``cols[i]`` is row ``i`` of ``G``.  Returns one of

    * ``("optimal", y, x)`` with ``x`` the primal solution (``G x <= h``),
    * ``("unbounded", ray)`` with ``G^T ray = 0``, ``ray >= 0``, ``h.ray < 0``,
    * ``("infeasible", d)`` with ``G d <= 0`` and ``c.d > 0``.
    """
    n, m = len(c), len(cols)
    sgn = [-1 if c[r] < 0 else 1 for r in range(n)]
    T = []
    for r in range(n):
        s = sgn[r]
        row = [s * col[r] if s < 0 else col[r] for col in cols]
        row += [ZERO] * n
        row.append(abs(c[r]))
        row[m + r] = ONE
        T.append(row)
    basis = [m + r for r in range(n)]

    # phase 1: minimise the sum of artificials
    z = [ZERO] * (m + n + 1)
    for row in T:
        for j in range(m):
            if row[j]:
                z[j] -= row[j]
        z[-1] -= row[-1]
    if z[-1]:
        _run(T, z, basis, m)
        if z[-1]:
            d = [sgn[r] * (ONE - z[m + r]) for r in range(n)]
            return ("infeasible", d)

    for r in range(n):
        if basis[r] >= m:
            row = T[r]
            for j in range(m):
                if row[j]:
                    _pivot(T, z, basis, r, j)
                    break

    # phase 2
    cost = list(h) + [ZERO] * n
    z = [cost[j] for j in range(m + n)] + [ZERO]
    for r, row in enumerate(T):
        cb = cost[basis[r]]
        if cb:
            for j, v in enumerate(row):
                if v:
                    z[j] -= cb * v
    q = _run(T, z, basis, m)
    if q is not None:
        ray = [ZERO] * m
        ray[q] = ONE
        for r, row in enumerate(T):
            if basis[r] < m:
                ray[basis[r]] = -row[q]
        return ("unbounded", ray)
    y = [ZERO] * m
    for r, row in enumerate(T):
        if basis[r] < m:
            y[basis[r]] = row[-1]
    x = [-sgn[r] * z[m + r] for r in range(n)]
    return ("optimal", y, x)


def _lower(lp: LinearProgram):
    """Rewrite constraints as ``G x <= h`` rows tagged with (index, sign)."""
    index = {v: k for k, v in enumerate(lp.variables)}
    n = len(index)
    cols, h, tags = [], [], []
    for i, (form, rel) in enumerate(lp.constraints):
        a = [ZERO] * n
        for j, coef in form.coefficients.items():
            a[index[j]] = coef
        if rel in (Relation.GE, Relation.EQ):
            # f >= 0  <=>  -a.x <= a0
            cols.append([-v for v in a])
            h.append(form.constant)
            tags.append((i, 1))
        if rel in (Relation.LE, Relation.EQ):
            cols.append(a)
            h.append(-form.constant)
            tags.append((i, -1))
    sign = 1 if lp.sense == "max" else -1
    c = [ZERO] * n
    for j, coef in lp.objective.coefficients.items():
        c[index[j]] = sign * coef
    return index, cols, h, tags, c


def _multipliers(lp, tags, y):
    mu = [ZERO] * len(lp.constraints)
    for (i, s), v in zip(tags, y):
        if v:
            mu[i] += s * v
    return tuple(mu)


def lp_solve(lp: LinearProgram) -> LPResult:
    """Solve ``lp`` exactly; every non-unbounded result carries a certificate."""
    index, cols, h, tags, c = _lower(lp)
    out = _solve_dual(cols, h, c)
    if out[0] == "optimal":
        _, y, x = out
        witness = {v: x[k] for v, k in index.items()}
        value = lp.objective.evaluate(witness)
        return LPResult(Status.OPTIMAL, value, witness, _multipliers(lp, tags, y))
    if out[0] == "unbounded":
        return LPResult(Status.INFEASIBLE, multipliers=_multipliers(lp, tags, out[1]))
    # dual infeasible: the primal is unbounded if it has any feasible point
    direction = out[1]
    feas = _solve_dual(cols, h, [ZERO] * len(c))
    if feas[0] == "unbounded":
        return LPResult(Status.INFEASIBLE, multipliers=_multipliers(lp, tags, feas[1]))
    x = feas[2]
    return LPResult(
        Status.UNBOUNDED,
        witness={v: x[k] for v, k in index.items()},
        ray={v: direction[k] for v, k in index.items()},
    )


def feasible(constraints: Sequence[tuple[AffineForm, Relation]], variables: Sequence[int]) -> bool:
    lp = LinearProgram(tuple(variables), AffineForm(), tuple(constraints))
    return lp_solve(lp).feasible


def _holds(value: Rational, rel: Relation) -> bool:
    if rel is Relation.GE:
        return value >= 0
    if rel is Relation.LE:
        return value <= 0
    return value == 0


def _sign_ok(mu: Rational, rel: Relation) -> bool:
    if rel is Relation.GE:
        return mu >= 0
    if rel is Relation.LE:
        return mu <= 0
    return True


def verify_result(lp: LinearProgram, result: LPResult) -> bool:
    """Re-check ``result`` against ``lp`` by exact substitution."""
    if result.status is Status.UNBOUNDED:
        w, d = result.witness, result.ray
        if not all(_holds(f.evaluate(w), r) for f, r in lp.constraints):
            return False
        for f, r in lp.constraints:
            slope = sum((a * d[j] for j, a in f.coefficients.items()), ZERO)
            if not _holds(slope, r):
                return False
        gain = sum((a * d[j] for j, a in lp.objective.coefficients.items()), ZERO)
        return gain > 0 if lp.sense == "max" else gain < 0

    mu = result.multipliers
    if mu is None or len(mu) != len(lp.constraints):
        return False
    if not all(_sign_ok(m, r) for m, (_, r) in zip(mu, lp.constraints)):
        return False
    combo = AffineForm()
    for m, (f, _) in zip(mu, lp.constraints):
        if m:
            combo = combo + f * m
    if result.status is Status.INFEASIBLE:
        return combo.is_constant() and combo.constant < 0

    w = result.witness
    if not all(_holds(f.evaluate(w), r) for f, r in lp.constraints):
        return False
    if lp.objective.evaluate(w) != result.value:
        return False
    ident = lp.objective + combo if lp.sense == "max" else lp.objective - combo
    return ident.is_constant() and ident.constant == result.value
