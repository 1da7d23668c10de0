"""Coordinate descent over (tau, window ratios, levels) on the exact certified bound."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from gmpy2 import mpq
from scipy.optimize import linprog

from .cells import BoundParams, InvalidParams, build_cell, lemma1_form
from .certify import Certificate, case_program, certify, merged_constraints
from .lp import Relation
from .numerics import format_fraction, to_float, to_rational

MODES = ("exact", "float-screen")
SCREEN_CASES = 64


@dataclass(frozen=True)
class SearchSchedule:
    initial_step: object
    shrink_factor: object = mpq(1, 10)
    min_step: object = mpq(1, 100000)
    max_rounds: int = 1
    mode: str = "exact"
    restarts: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("initial_step", "shrink_factor", "min_step"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))
        if self.min_step <= 0 or self.initial_step <= 0:
            raise ValueError("steps must be positive")
        if not 0 < self.shrink_factor < 1:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class Probe:
    round: int
    coordinate: str
    step: object  # signed
    screened: float | None
    exact: object | None
    accepted: bool

    def to_text(self) -> str:
        scr = "-" if self.screened is None else repr(self.screened)
        ex = "-" if self.exact is None else format_fraction(self.exact)
        return (f"round={self.round} coordinate={self.coordinate} step={format_fraction(self.step)} "
                f"screened={scr} exact={ex} accepted={int(self.accepted)}")


@dataclass
class SearchResult:
    params: BoundParams
    certificate: Certificate
    trace: list = field(default_factory=list)

    def write_trace(self, path) -> None:
        Path(path).write_text("".join(p.to_text() + "\n" for p in self.trace))


def coordinates(params: BoundParams) -> list[str]:
    return (["tau"] + [f"c{i + 1}" for i in range(len(params.cs))]
            + [f"alpha{j + 1}" for j in range(params.K)])


def nudge(params: BoundParams, coordinate: str, delta) -> BoundParams | None:
    """``params`` with one scalar moved by ``delta``; None if the result is invalid."""
    cs, alphas, tau = list(params.cs), list(params.alphas), params.tau
    if coordinate == "tau":
        tau += delta
    elif coordinate.startswith("c"):
        cs[int(coordinate[1:]) - 1] += delta
    else:
        alphas[int(coordinate[5:]) - 1] += delta
    try:
        return BoundParams(tau, tuple(alphas), tuple(cs), params.g)
    except InvalidParams:
        return None


def _key(p: BoundParams):
    return (p.tau, p.alphas, p.cs, p.g)


class _Evaluator:
    def __init__(self, workers):
        self.workers = workers
        self.cache: dict = {}

    def exact(self, params: BoundParams) -> Certificate:
        k = _key(params)
        if k not in self.cache:
            self.cache[k] = certify(params, workers=self.workers, keep_cases=True)
        return self.cache[k]


def top_cases(cert: Certificate, n: int = SCREEN_CASES) -> list[tuple]:
    """The ``n`` largest optimal cases as (interlacings, governing), largest first."""
    opt = [r for r in cert.cases if r.value is not None]
    opt.sort(key=lambda r: (-r.value, r.case_id))
    return [(tuple(cert.cell_table[a][i] for a, i in enumerate(r.combination)), r.governing)
            for r in opt[:n]]


def screen_value(params: BoundParams, cases) -> float:
    """Floating max over a subset of case programs: approximately a lower bound on the certificate."""
    lemma1 = lemma1_form(params)
    K = params.K
    best = -math.inf
    for interlacings, gov in cases:
        cells = [build_cell(s, c, params) for s, c in zip(interlacings, params.cs)]
        lp = case_program([lemma1] + [c.cell_function for c in cells],
                          merged_constraints(cells), gov, K)
        A, b = [], []
        for f, rel in lp.constraints:
            row = np.array([to_float(f.coefficient(j)) for j in range(1, K + 1)])
            # f >= 0  ->  -a.x <= a0 ;  f <= 0  ->  a.x <= -a0
            if rel is Relation.GE:
                A.append(-row)
                b.append(to_float(f.constant))
            else:
                A.append(row)
                b.append(-to_float(f.constant))
        obj = np.array([-to_float(lp.objective.coefficient(j)) for j in range(1, K + 1)])
        res = linprog(obj, A_ub=np.array(A), b_ub=np.array(b), bounds=[(None, None)] * K,
                      method="highs")
        if res.status == 0:
            best = max(best, to_float(lp.objective.constant) - res.fun)
    return best


def _descend(start: BoundParams, schedule: SearchSchedule, ev: _Evaluator, trace: list):
    params = start
    cert = ev.exact(params)
    step = schedule.initial_step
    rnd = 0
    while rnd < schedule.max_rounds:
        rnd += 1
        improved = False
        for coord in coordinates(params):
            for delta in (step, -step):
                probe = nudge(params, coord, delta)
                if probe is None:
                    continue
                screened = None
                if schedule.mode == "float-screen":
                    screened = screen_value(probe, top_cases(cert))
                    if screened >= to_float(cert.certified_bound):
                        trace.append(Probe(rnd, coord, delta, screened, None, False))
                        continue
                cand = ev.exact(probe)
                accept = cand.certified_bound < cert.certified_bound
                trace.append(Probe(rnd, coord, delta, screened, cand.certified_bound, accept))
                if accept:
                    params, cert, improved = probe, cand, True
                    break
        if not improved:
            step *= schedule.shrink_factor
            if step < schedule.min_step:
                break
    return params, cert


def _jitter(start: BoundParams, rng: random.Random, scale) -> BoundParams:
    p = start
    for coord in coordinates(start):
        q = nudge(p, coord, scale * mpq(rng.randint(-1000, 1000), 1000))
        if q is not None:
            p = q
    return p


def local_search(start: BoundParams, schedule: SearchSchedule, workers: int | None = None) -> SearchResult:
    """Deterministic first-improvement coordinate descent.

    Each round probes every coordinate at ``+step`` then ``-step`` in fixed
    order and moves on the first strict improvement of the exact certified
    bound.  A round without improvement shrinks the step; the search stops
    after ``max_rounds`` rounds or once the step drops below ``min_step``.
    In float-screen mode a probe is exactly certified only if the floating
    max over the current top cases does not already rule it out.
    """
    ev = _Evaluator(workers)
    trace: list = []
    best_p, best_c = _descend(start, schedule, ev, trace)
    rng = random.Random(schedule.seed)
    for _ in range(schedule.restarts):
        p, c = _descend(_jitter(start, rng, schedule.initial_step), schedule, ev, trace)
        if c.certified_bound < best_c.certified_bound:
            best_p, best_c = p, c
    return SearchResult(best_p, best_c, trace)
