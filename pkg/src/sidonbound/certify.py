"""Max-min certification over all cell combinations.

Every bound (the long-window form and one cell function per window ratio)
is an upper bound on the constant at the true cutoff vector, so the
constant is at most ``max_w min_i bound_i(w)``.  The cube of cutoff vectors
is split into combinations of one cell per window ratio; inside a
combination every bound is affine and, for each governing bound ``i``, the
program

    maximize bound_i  subject to  cell constraints,  bound_i <= bound_j

is solved exactly.  The certified value is the largest optimum.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cells import BoundParams, Cell, InvalidParams, lemma1_form, locate_cell, nonempty_cells
from .lp import LinearProgram, LPResult, Relation, Status, lp_solve
from .numerics import AffineForm, Rational, format_decimal, to_rational

DEFAULT_PLACES = 6
WORKERS_ENV = "SIDONBOUND_WORKERS"

_NEG = -(1 << 40)
_CAP = 1 << 41


class InternalInconsistency(RuntimeError):
    pass


@dataclass(frozen=True)
class CaseRecord:
    case_id: int
    combination: tuple  # cell index per window ratio
    governing: int  # 0 = long window, i = i-th window ratio
    status: Status
    value: Rational | None = None
    witness: dict | None = None
    multipliers: tuple | None = None


@dataclass(frozen=True)
class Certificate:
    params: BoundParams
    cell_counts: tuple
    feasible_combinations: int
    cases_examined: int
    feasible_cases: int
    certified_bound: Rational
    worst_case: CaseRecord
    worst_cells: tuple  # interlacing per window ratio
    bound_forms: tuple  # long-window form, then the worst combination's cell functions
    places: int = DEFAULT_PLACES
    cases: tuple | None = field(default=None, repr=False)
    notes: tuple = ()
    cell_table: tuple = field(default=(), repr=False)  # interlacings of the nonempty cells per ratio

    @property
    def printed_bound(self) -> str:
        return format_decimal(self.certified_bound, self.places, "up")

    @property
    def witness(self) -> dict:
        return self.worst_case.witness

    @property
    def arithmetic_mode(self) -> str:
        return "exact"


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


# -- combination enumeration -------------------------------------------------
#
# Cell constraints are all of the form w_a - w_b >= d, so a set of cells has a
# common point iff the constraint graph has no positive cycle.  After scaling
# every d to an integer the closure is exact integer arithmetic.


def _scale(params: BoundParams) -> int:
    s = 1
    for c in params.cs:
        s = math.lcm(s, int(c.denominator))
    return s


def _dbm(cell: Cell, scale: int) -> np.ndarray:
    n = cell.K + 2
    D = np.full((n, n), _NEG, dtype=np.int64)
    np.fill_diagonal(D, 0)
    D[n - 1, 0] = scale
    D[0, n - 1] = -scale
    for a, b, d in cell.differences:
        v = d * scale
        if v.denominator != 1:
            raise InternalInconsistency("difference constant not on the scaled grid")
        D[a, b] = max(D[a, b], int(v))
    return D


def _close(D: np.ndarray) -> np.ndarray:
    n = D.shape[-1]
    for k in range(n):
        np.maximum(D, D[..., :, k, None] + D[..., None, k, :], out=D)
        np.clip(D, _NEG, _CAP, out=D)
    return D


def _consistent(D: np.ndarray) -> np.ndarray:
    return (np.diagonal(D, axis1=-2, axis2=-1) <= 0).all(-1)


def feasible_combinations(cell_lists: Sequence[Sequence[Cell]], scale: int) -> list[tuple]:
    """All index tuples (one cell per list) whose closed cells intersect, lexicographic."""
    mats = [_close(np.stack([_dbm(c, scale) for c in cells])) for cells in cell_lists]
    m = len(mats)
    compat = {}
    for a in range(m):
        for b in range(a + 1, m):
            merged = _close(np.maximum(mats[a][:, None], mats[b][None, :]))
            compat[a, b] = _consistent(merged)

    partial = [((i,), mats[0][i]) for i in range(len(cell_lists[0]))]
    for b in range(1, m):
        nxt = []
        for combo, D in partial:
            mask = np.ones(len(cell_lists[b]), dtype=bool)
            for a, i in enumerate(combo):
                mask &= compat[a, b][i]
            ks = np.nonzero(mask)[0]
            if len(ks) == 0:
                continue
            merged = _close(np.maximum(D[None], mats[b][ks]))
            ok = _consistent(merged)
            for k, good, Dk in zip(ks, ok, merged):
                if good:
                    nxt.append((combo + (int(k),), Dk))
        partial = nxt
    return [combo for combo, _ in partial]


# -- case programs --------------------------------------------------------------


def case_program(bounds: Sequence[AffineForm], constraints: Sequence[AffineForm],
                 governing: int, K: int) -> LinearProgram:
    cons = [(f, Relation.GE) for f in constraints]
    top = bounds[governing]
    cons += [(top - b, Relation.LE) for i, b in enumerate(bounds) if i != governing]
    return LinearProgram(tuple(range(1, K + 1)), top, tuple(cons), "max")


def merged_constraints(cells: Sequence[Cell]) -> list[AffineForm]:
    out, seen = [], set()
    for cell in cells:
        for f in cell.constraints:
            if f not in seen:
                seen.add(f)
                out.append(f)
    return out


def solve_combination(lemma1: AffineForm, cells: Sequence[Cell], K: int,
                      first_id: int = 0, keep_certificates: bool = False) -> list[CaseRecord]:
    bounds = [lemma1] + [c.cell_function for c in cells]
    constraints = merged_constraints(cells)
    out = []
    for gov in range(len(bounds)):
        res = lp_solve(case_program(bounds, constraints, gov, K))
        if res.status is Status.UNBOUNDED:
            raise InternalInconsistency("case program over the unit cube is unbounded")
        if res.optimal:
            vals = [b.evaluate(res.witness) for b in bounds]
            if min(vals) != res.value or vals[gov] != res.value:
                raise InternalInconsistency(f"case {first_id + gov}: bounds disagree at witness")
        out.append(_record(first_id + gov, gov, res, keep_certificates))
    return out


def _record(case_id, gov, res: LPResult, keep: bool) -> CaseRecord:
    return CaseRecord(
        case_id, (), gov, res.status, res.value,
        dict(res.witness) if res.optimal else None,
        res.multipliers if keep else None,
    )


# worker-process state, filled by _init_worker
_STATE: dict = {}


def _init_worker(params: BoundParams):
    _STATE["params"] = params
    _STATE["cells"] = [nonempty_cells(params, c) for c in params.cs]
    _STATE["lemma1"] = lemma1_form(params)


def _solve_chunk(args):
    chunk, keep = args
    params, cells, lemma1 = _STATE["params"], _STATE["cells"], _STATE["lemma1"]
    nb = len(params.cs) + 1
    out = []
    for idx, combo in chunk:
        chosen = [cells[a][i] for a, i in enumerate(combo)]
        recs = solve_combination(lemma1, chosen, params.K, idx * nb, keep)
        out.extend(CaseRecord(r.case_id, combo, r.governing, r.status, r.value, r.witness,
                              r.multipliers) for r in recs)
    return out


def _chunks(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]


def certify(params: BoundParams, workers: int | None = None, places: int = DEFAULT_PLACES,
            keep_cases: bool = False, keep_certificates: bool = False,
            progress=None) -> Certificate:
    """Exact ``max_w min_i bound_i(w)`` over the cube ``0 <= w_1 <= ... <= w_K <= 1``."""
    if not params.cs:
        raise InvalidParams("at least one window ratio is required")
    workers = resolve_workers(workers)
    _init_worker(params)
    cells = _STATE["cells"]
    lemma1 = _STATE["lemma1"]
    combos = feasible_combinations(cells, _scale(params))
    indexed = list(enumerate(combos))
    size = max(1, min(256, len(indexed) // (8 * workers) or 1))
    jobs = [(chunk, keep_certificates) for chunk in _chunks(indexed, size)]

    records: list[CaseRecord] = []
    if workers == 1:
        for job in jobs:
            records.extend(_solve_chunk(job))
            if progress:
                progress(len(records) // (len(params.cs) + 1), len(combos))
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(params,)) as ex:
            for part in ex.map(_solve_chunk, jobs):
                records.extend(part)
                if progress:
                    progress(len(records) // (len(params.cs) + 1), len(combos))
    records.sort(key=lambda r: r.case_id)

    feasible = [r for r in records if r.status is Status.OPTIMAL]
    if not feasible:
        raise InternalInconsistency("no feasible case: the cells do not cover the cube")
    best = max(r.value for r in feasible)
    worst = next(r for r in feasible if r.value == best)
    worst_cells = [cells[a][i] for a, i in enumerate(worst.combination)]
    forms = (lemma1,) + tuple(c.cell_function for c in worst_cells)
    if min(f.evaluate(worst.witness) for f in forms) != best:
        raise InternalInconsistency("worst-case witness does not reproduce the bound")

    return Certificate(
        params=params,
        cell_counts=tuple(len(c) for c in cells),
        feasible_combinations=len(combos),
        cases_examined=len(records),
        feasible_cases=len(feasible),
        certified_bound=best,
        worst_case=worst,
        worst_cells=tuple(c.interlacing for c in worst_cells),
        bound_forms=forms,
        places=places,
        cases=tuple(records) if keep_cases else None,
        cell_table=tuple(tuple(c.interlacing for c in cs) for cs in cells),
    )


def two_window_certify(tau, alpha1, alpha2, c, workers: int | None = None,
                       places: int = DEFAULT_PLACES, **kw) -> Certificate:
    """Two levels, one short window.

    The certificate notes the long-window bound rescaled to cutoffs in
    ``[0, 2]`` (the unsymmetrized convention ``w' = 2 w``).
    """
    if all(isinstance(v, str) for v in (tau, alpha1, alpha2, c)):
        params = BoundParams.from_decimals(tau, [alpha1, alpha2], [c])
    else:
        params = BoundParams(tau, (alpha1, alpha2), (c,))
    if not (0 < params.alphas[0] < 1 < params.alphas[1]):
        raise InvalidParams("two-window levels need alpha1 < 1 < alpha2")
    cert = certify(params, workers=workers, places=places, **kw)
    lem = lemma1_form(params)
    unsym = AffineForm(lem.constant, {j: a / 2 for j, a in lem.coefficients.items()})
    note = ("long_window_bound_on_[0,2]_scale", unsym.to_text())
    return Certificate(**{**cert.__dict__, "notes": cert.notes + (note,)})


def min_bound_at(params: BoundParams, cell_lists, point: dict) -> Rational:
    """``min_i bound_i(w)`` at a point, locating the governing cell of each ratio."""
    vals = [lemma1_form(params).evaluate(point)]
    for cells in cell_lists:
        vals.append(locate_cell(cells, point).cell_function.evaluate(point))
    return min(vals)


def corollary_bound(tau, v) -> Rational:
    """``tau + 1/tau - v/tau^2``: the constant implied by a variance bound ``v k^{5/2}``."""
    tau, v = to_rational(tau), to_rational(v)
    if tau <= 0:
        raise ValueError("tau must be positive")
    return tau + 1 / tau - v / tau ** 2
