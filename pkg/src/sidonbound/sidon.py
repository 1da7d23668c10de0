"""Concrete Sidon and g-thin sets, window statistics and the diameter identity."""
from __future__ import annotations

from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from itertools import accumulate
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

from gmpy2 import mpq

from .numerics import Rational, format_fraction, to_rational

EXHAUSTIVE_MAX_K = 12


class NotThinError(ValueError):
    def __init__(self, g: int, report: "ThinReport"):
        self.g = g
        self.report = report
        super().__init__(f"set is only {report.g_required}-thin, not {g}-thin")


class DegenerateWindowError(ValueError):
    pass


@dataclass(frozen=True)
class SidonSet:
    """Strictly increasing integers; thinness is checked separately."""

    elements: tuple[int, ...]

    def __post_init__(self):
        elems = tuple(int(a) for a in self.elements)
        if not elems:
            raise ValueError("a set needs at least one element")
        if any(b <= a for a, b in zip(elems, elems[1:])):
            raise ValueError("elements must be strictly increasing")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def of(cls, values: Iterable[int]) -> "SidonSet":
        return cls(tuple(sorted(set(int(v) for v in values))))

    @property
    def k(self) -> int:
        return len(self.elements)

    @property
    def min(self) -> int:
        return self.elements[0]

    @property
    def max(self) -> int:
        return self.elements[-1]

    @property
    def diameter(self) -> int:
        return self.elements[-1] - self.elements[0]

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class ThinReport:
    g_required: int
    histogram: dict = field(repr=False)

    @property
    def is_sidon(self) -> bool:
        return self.g_required <= 1


def difference_histogram(s: SidonSet) -> Counter:
    """Ordered pairs ``(a, b)`` with ``a - b = d > 0``, counted per ``d``."""
    e = s.elements
    return Counter(e[j] - e[i] for i in range(len(e)) for j in range(i + 1, len(e)))


def check_thin(s: SidonSet, g: int) -> tuple[bool, ThinReport]:
    hist = difference_histogram(s)
    report = ThinReport(max(hist.values(), default=0), dict(sorted(hist.items())))
    return report.g_required <= g, report


def _require_thin(s: SidonSet, g: int) -> dict:
    ok, report = check_thin(s, g)
    if not ok:
        raise NotThinError(g, report)
    return report.histogram


@dataclass(frozen=True)
class WindowProfile:
    T: int
    first: int  # raw: index i of counts[0]; symmetrized: offset of counts[0]
    counts: tuple
    kind: str
    mean: Rational

    @property
    def indices(self) -> range:
        return range(self.first, self.first + len(self.counts))

    def __getitem__(self, i: int):
        return self.counts[i - self.first]


def _prefix(s: SidonSet, lo: int, hi: int) -> list[int]:
    """``P[x - lo] = #{a < x}`` for ``x`` in ``[lo, hi]``."""
    present = set(s.elements)
    base = bisect_left(s.elements, lo)
    flags = [1 if x in present else 0 for x in range(lo, hi)]
    return [base] + [base + v for v in accumulate(flags)]


def raw_counts(s: SidonSet, T: int, lo: int, hi: int) -> list[int]:
    """``A_i = #(set & [i - T, i))`` for ``i`` in ``[lo, hi]``."""
    P = _prefix(s, lo - T, hi)
    return [P[i - lo + T] - P[i - lo] for i in range(lo, hi + 1)]


def window_mean(s: SidonSet, T: int) -> Rational:
    return mpq(s.k * T, T + s.diameter)


def symmetrized_counts(s: SidonSet, T: int, offsets: range) -> list[Rational]:
    """``B_o = (A_{min+o} + A_{max+T+1-o}) / 2`` for each offset ``o``."""
    lo = min(s.min + offsets.start, s.max + T + 1 - (offsets.stop - 1))
    hi = max(s.min + offsets.stop - 1, s.max + T + 1 - offsets.start)
    A = raw_counts(s, T, lo, hi)
    return [mpq(A[s.min + o - lo] + A[s.max + T + 1 - o - lo], 2) for o in offsets]


def window_profile(s: SidonSet, T: int, kind: str = "raw") -> WindowProfile:
    if T < 1:
        raise ValueError("window length must be positive")
    first, last = s.min + 1, s.max + T
    if kind == "raw":
        counts = tuple(raw_counts(s, T, first, last))
        return WindowProfile(T, first, counts, kind, window_mean(s, T))
    if kind == "symmetrized":
        counts = tuple(symmetrized_counts(s, T, range(1, s.diameter + T + 1)))
        return WindowProfile(T, 1, counts, kind, window_mean(s, T))
    raise ValueError(f"unknown profile kind {kind!r}")


def v_statistic(s: SidonSet, T: int) -> Rational:
    """Total squared deviation of the raw window counts from their mean."""
    counts = raw_counts(s, T, s.min + 1, s.max + T)
    mean = window_mean(s, T)
    total = sum(counts)
    squares = sum(a * a for a in counts)
    return squares - 2 * mean * total + len(counts) * mean * mean


def s_g_statistic(s: SidonSet, T: int, g: int = 1) -> int:
    hist = _require_thin(s, g)
    return sum((g - hist.get(r, 0)) * (T - r) for r in range(1, T))


def etsse_denominator(s: SidonSet, T: int, g: int = 1) -> Rational:
    return g * T * (T - 1) + s.k * T - (2 * s_g_statistic(s, T, g) + v_statistic(s, T))


def etsse_residual(s: SidonSet, T: int, g: int = 1) -> Rational:
    """``diam - (k^2 T^2 / denominator - T)``; identically zero for g-thin sets."""
    den = etsse_denominator(s, T, g)
    if den == 0:
        raise DegenerateWindowError(f"zero denominator at T={T}")
    return s.diameter - (mpq(s.k * s.k * T * T) / den - T)


def pair_window_identity(s: SidonSet, T: int, g: int = 1) -> tuple[int, int]:
    """Both sides of ``sum_i C(A_i, 2) = g C(T, 2) - S_g``.

    ``A_i`` are the length-``T`` window counts over ``i`` in
    ``[min+1, max+T]``; every pair at distance ``r < T`` shares ``T - r``
    windows, which is what the right-hand side counts.
    """
    counts = raw_counts(s, T, s.min + 1, s.max + T)
    lhs = sum(comb(a, 2) for a in counts)
    rhs = g * comb(T, 2) - s_g_statistic(s, T, g)
    return lhs, rhs


@dataclass(frozen=True)
class CutoffVector:
    """``(w_0 = 0, w_1, ..., w_K, w_{K+1} = 1)``."""

    w: tuple

    def __post_init__(self):
        w = tuple(to_rational(v) for v in self.w)
        if w[0] != 0 or w[-1] != 1:
            raise ValueError("cutoff vector must start at 0 and end at 1")
        if any(b < a for a, b in zip(w, w[1:])):
            raise ValueError("cutoff vector must be weakly increasing")
        object.__setattr__(self, "w", w)

    @property
    def K(self) -> int:
        return len(self.w) - 2

    def point(self) -> dict[int, Rational]:
        return {j: self.w[j] for j in range(1, self.K + 1)}

    def __str__(self):
        return "(" + ", ".join(format_fraction(v) for v in self.w) + ")"


def cutoff_vector(s: SidonSet, T: int, alphas: Sequence) -> CutoffVector:
    """First scaled offset at which the symmetrized profile reaches each level."""
    alphas = [to_rational(a) for a in alphas]
    if any(a <= 0 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("levels must be positive and strictly increasing")
    B = symmetrized_counts(s, T, range(0, T + 1))
    mean = window_mean(s, T)
    w = [mpq(0)]
    o = 0
    for a in alphas:
        target = a * mean
        while o <= T and B[o] < target:
            o += 1
        w.append(mpq(o, T) if o <= T else mpq(1))
    w.append(mpq(1))
    return CutoffVector(tuple(w))


def _greedy(k: int, g: int) -> list[int]:
    elems = [0]
    hist = Counter()
    x = 0
    while len(elems) < k:
        x += 1
        if all(hist[x - a] < g for a in reversed(elems)):
            for a in elems:
                hist[x - a] += 1
            elems.append(x)
    return elems


def _golomb_of_length(k: int, L: int) -> list[int] | None:
    """Some k-mark Sidon set in ``[0, L]`` using both endpoints, or None."""
    if k == 1:
        return [0] if L == 0 else None
    if k == 2:
        return [0, L]
    marks = [0, L]
    used = 1 << L
    inner = k - 2

    def dfs(start: int, used: int, left: int) -> bool:
        if left == 0:
            return True
        for p in range(start, L - left + 1):
            bits = 0
            ok = True
            for m in marks:
                b = 1 << abs(p - m)
                if used & b or bits & b:
                    ok = False
                    break
                bits |= b
            if ok:
                marks.append(p)
                if dfs(p + 1, used | bits, left - 1):
                    return True
                marks.pop()
        return False

    if dfs(1, used, inner):
        return sorted(marks)
    return None


def generate_sidon(k: int, method: str = "greedy", g: int = 1) -> SidonSet:
    """Zero-based test sets.

    ``greedy`` adds the smallest integer that keeps the set ``g``-thin (the
    Mian-Chowla rule for ``g = 1``).  ``exhaustive`` returns a Sidon set of
    minimum diameter by complete search and is limited to small ``k``.
    """
    if k < 1 or g < 1:
        raise ValueError("k and g must be positive")
    if method == "greedy":
        return SidonSet(tuple(_greedy(k, g)))
    if method == "exhaustive":
        if g != 1 or k > EXHAUSTIVE_MAX_K:
            raise ValueError(
                f"exhaustive search supports g=1 and k <= {EXHAUSTIVE_MAX_K}; use method='greedy'"
            )
        L = k * (k - 1) // 2
        while True:
            found = _golomb_of_length(k, L)
            if found is not None:
                return SidonSet(tuple(found))
            L += 1
    raise ValueError(f"unknown method {method!r}")


def bound_form_convert(c, direction: str) -> Rational:
    """Switch between diameter constants ``k^2 - c k^{3/2}`` and ``R(n)`` constants."""
    c = to_rational(c)
    if c < 0:
        raise ValueError("constant must be nonnegative")
    if direction == "diam-to-R":
        return c / 2
    if direction == "R-to-diam":
        return 2 * c
    raise ValueError(f"unknown direction {direction!r}")


def read_set_file(path) -> SidonSet:
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            values.append(int(line))
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{path}: integers must be strictly ascending")
    return SidonSet(tuple(values))


def write_set_file(path, s: SidonSet, comment: str | None = None) -> None:
    lines = [f"# {comment}"] if comment else []
    lines += [str(a) for a in s.elements]
    Path(path).write_text("\n".join(lines) + "\n")


__all__ = [
    "SidonSet", "ThinReport", "WindowProfile", "CutoffVector", "NotThinError",
    "DegenerateWindowError", "check_thin", "difference_histogram", "window_profile",
    "raw_counts", "symmetrized_counts", "window_mean", "v_statistic", "s_g_statistic",
    "etsse_residual", "pair_window_identity", "cutoff_vector", "generate_sidon",
    "bound_form_convert", "read_set_file", "write_set_file",
]
