"""Empirical check of the per-segment count intervals on concrete sets.

For a set of size ``k`` take ``T = ceil(tau k^{3/2})`` and ``T' = ceil(c T)``.
The cutoff vector of the length-``T`` profile selects a cell; inside segment
``j`` of that cell every normalized short-window count ``B^{(T')}_o / mean``
should lie in the interval the cell assigns to the segment.  A slack of
``5 / mean`` absorbs the discretization.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from gmpy2 import mpq

from .cells import BoundParams, Cell, locate_cell, nonempty_cells
from .numerics import INF, format_fraction, to_rational
from .sidon import SidonSet, cutoff_vector, symmetrized_counts, window_mean


@dataclass(frozen=True)
class SegmentViolation:
    k: int
    c: object
    offset: int
    segment: int
    interlacing: tuple
    z: object
    lo: object
    hi: object

    def to_text(self) -> str:
        s = ",".join(map(str, self.interlacing))
        hi = "inf" if self.hi == INF else format_fraction(self.hi)
        return (f"violation k={self.k} c={format_fraction(self.c)} i={self.offset} "
                f"segment={self.segment} cell=({s}) z={format_fraction(self.z)} "
                f"lo={format_fraction(self.lo)} hi={hi}")


@dataclass(frozen=True)
class SegmentCheck:
    k: int
    c: object
    T: int
    T_short: int
    cutoffs: tuple
    cell: Cell
    offsets_checked: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def ceil_tau_k32(tau, k: int) -> int:
    """Exact ``ceil(tau * k^{3/2})`` for rational ``tau > 0``."""
    tau = to_rational(tau)
    # T >= tau k^{3/2}  <=>  T^2 >= tau^2 k^3
    target = tau * tau * k ** 3
    T = isqrt(int(target.numerator // target.denominator))
    while T * T < target:
        T += 1
    while T > 0 and (T - 1) ** 2 >= target:
        T -= 1
    return T


def _ceil(q) -> int:
    q = to_rational(q)
    return -((-q.numerator) // q.denominator)


def check_segments(s: SidonSet, params: BoundParams, c, cells=None, slack=5) -> SegmentCheck:
    c = to_rational(c)
    T = ceil_tau_k32(params.tau, s.k)
    Ts = _ceil(c * T)
    w = cutoff_vector(s, T, params.alphas)
    if cells is None:
        cells = nonempty_cells(params, c)
    cell = locate_cell(cells, w)
    point = w.point()
    mean = window_mean(s, T)
    delta = slack / mean
    B = symmetrized_counts(s, Ts, range(1, T + 1))

    bps = [f.evaluate(point) for f in cell.breakpoints]
    violations = []
    checked = 0
    for j in range(1, cell.L + 1):
        lo = params.level(cell.eta[j - 1] - 1)
        lo = max(mpq(0), lo - params.level(cell.zeta[j - 1])) if lo != INF else lo
        top = params.level(cell.eta[j - 1])
        hi = top - params.level(cell.zeta[j - 1] - 1) if top != INF else INF
        first = max(1, int(bps[j - 1] * T) + 1)
        last = min(T, int(bps[j] * T))
        for o in range(first, last + 1):
            if not (bps[j - 1] * T < o <= bps[j] * T):
                continue
            checked += 1
            z = B[o - 1] / mean
            if z < lo - delta or (hi != INF and z > hi + delta):
                violations.append(SegmentViolation(s.k, c, o, j, cell.interlacing, z, lo, hi))
    return SegmentCheck(s.k, c, T, Ts, w.w, cell, checked, tuple(violations))
