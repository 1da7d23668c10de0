"""Symbolic bounds on the limiting diameter constant as affine forms in the cutoffs.

Cutoff ``w_j`` (``1 <= j <= K``) is the scaled offset where the symmetrized
window profile first reaches level ``alpha_j`` times its mean.  The long
window yields one affine bound (:func:`lemma1_form`).  Each shorter window
of relative length ``c`` yields a bound that is affine only on the *cells*
cut out by the order pattern between the breakpoints ``r_j = w_j`` and
``q_j = w_j + c``; :func:`build_cell` produces the constraints and the
affine function of one such cell.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .lp import Relation, feasible
from .numerics import INF, AffineForm, Rational, format_fraction, to_rational


class InvalidParams(ValueError):
    pass


class LocateError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundParams:
    """``tau``, the finite levels ``alpha_1 < ... < alpha_K``, window ratios ``cs`` and ``g``.

    ``sources`` optionally keeps the decimal strings the values were read
    from, so certificates can print both.
    """

    tau: Rational
    alphas: tuple
    cs: tuple = ()
    g: int = 1
    sources: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tau", to_rational(self.tau))
        object.__setattr__(self, "alphas", tuple(to_rational(a) for a in self.alphas))
        object.__setattr__(self, "cs", tuple(to_rational(c) for c in self.cs))
        object.__setattr__(self, "g", int(self.g))
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.tau <= 0:
            raise InvalidParams("tau must be positive")
        if any(a <= 0 for a in self.alphas):
            raise InvalidParams("levels must be positive")
        if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
            raise InvalidParams("levels must be strictly increasing")
        if any(not 0 < c < 1 for c in self.cs):
            raise InvalidParams("every window ratio must lie in (0, 1)")
        if self.g < 1:
            raise InvalidParams("g must be a positive integer")

    @classmethod
    def from_decimals(cls, tau: str, alphas: Sequence[str], cs: Sequence[str] = (), g: int = 1):
        src = (("tau", tau),) + tuple(("alpha", a) for a in alphas) + tuple(("c", c) for c in cs)
        return cls(tau, tuple(alphas), tuple(cs), g, src)

    @property
    def K(self) -> int:
        return len(self.alphas)

    def level(self, j: int):
        """``alpha_j`` with ``alpha_j = 0`` for ``j <= 0`` and ``alpha_{K+1} = INF``."""
        if j <= 0:
            return mpq(0)
        if j <= self.K:
            return self.alphas[j - 1]
        if j == self.K + 1:
            return INF
        raise IndexError(j)

    def replace(self, **changes) -> "BoundParams":
        fields = dict(tau=self.tau, alphas=self.alphas, cs=self.cs, g=self.g)
        fields.update(changes)
        return BoundParams(**fields)


def _level_gap(params: BoundParams, a: int, b: int):
    """``alpha_a - alpha_b`` where at most one side is infinite."""
    x, y = params.level(a), params.level(b)
    if x == INF:
        return INF
    if y == INF:
        return -INF
    return x - y


def minsq(lo, hi, center) -> Rational:
    """``min (z - center)^2`` over ``lo <= z <= hi``; ``lo`` may be ``-INF``, ``hi`` ``INF``."""
    if lo > hi:
        raise ValueError("empty interval")
    center = to_rational(center)
    if lo <= center <= hi:
        return mpq(0)
    if center < lo:
        return (lo - center) ** 2
    return (hi - center) ** 2


def _w(j: int, K: int) -> AffineForm:
    if j == 0:
        return AffineForm(0)
    if j == K + 1:
        return AffineForm(1)
    return AffineForm.variable(j)


def lemma1_form(params: BoundParams) -> AffineForm:
    """Bound from the long window alone, affine in ``w_1..w_K``."""
    K, tau, g2 = params.K, params.tau, params.g ** 2
    total = AffineForm()
    for j in range(K + 1):
        m = minsq(params.level(j), params.level(j + 1), 1)
        if m:
            total = total + (_w(j + 1, K) - _w(j, K)) * m
    return AffineForm(tau + 1 / (tau * g2)) - total * (2 * tau / g2)


def enumerate_interlacings(K: int) -> list[tuple[int, ...]]:
    """Weakly increasing ``(s_0..s_{K+1})`` with ``j <= s_j <= K+1``, lexicographic."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    out = []

    def rec(prefix):
        j = len(prefix)
        if j == K + 1:
            out.append(tuple(prefix) + (K + 1,))
            return
        lo = max(j, prefix[-1] if prefix else 0)
        for v in range(lo, K + 2):
            prefix.append(v)
            rec(prefix)
            prefix.pop()

    rec([])
    return out


def validate_interlacing(s: Sequence[int], K: int) -> None:
    if len(s) != K + 2 or s[-1] != K + 1:
        raise ValueError(f"interlacing must have length {K + 2} and end with {K + 1}")
    if any(s[j] < j or s[j] > K + 1 for j in range(K + 2)):
        raise ValueError("interlacing needs j <= s_j <= K+1")
    if any(b < a for a, b in zip(s, s[1:])):
        raise ValueError("interlacing must be weakly increasing")


@dataclass(frozen=True)
class Cell:
    """One closed polytope of cutoff vectors and the affine bound valid on it.

    ``breakpoints`` are ``p_0..p_L`` with ``labels`` naming each one
    (``"r3"`` is ``w_3``, ``"q1"`` is ``w_1 + c``).  ``zeta``/``eta`` are
    1-indexed by segment.  ``constraints`` are forms that must be ``>= 0``;
    ``differences`` holds the same constraints as ``(a, b, d)`` meaning
    ``w_a - w_b >= d`` over nodes ``0..K+1``.
    """

    interlacing: tuple
    c: Rational
    K: int
    breakpoints: tuple
    labels: tuple
    zeta: tuple
    eta: tuple
    constraints: tuple
    differences: tuple
    cell_function: AffineForm

    @property
    def L(self) -> int:
        return len(self.breakpoints) - 1

    def contains(self, point) -> bool:
        return all(f.evaluate(point) >= 0 for f in self.constraints)

    def describe(self) -> str:
        s = ",".join(str(v) for v in self.interlacing)
        return f"s=({s}) c={format_fraction(self.c)}"


def _order(s: Sequence[int], K: int) -> list[tuple[str, int]]:
    seq = []
    for t in range(K + 2):
        seq.append(("r", t))
        seq.extend(("q", j) for j in range(K + 2) if s[j] == t)
    return seq


def build_cell(s: Sequence[int], c, params: BoundParams) -> Cell:
    K = params.K
    s = tuple(int(v) for v in s)
    validate_interlacing(s, K)
    c = to_rational(c)
    g2 = params.g ** 2

    seq = _order(s, K)
    L = seq.index(("r", K + 1))
    # node and shift: the breakpoint equals w_node + shift
    node = [j for _, j in seq]
    shift = [c if kind == "q" else mpq(0) for kind, _ in seq]

    def form(pos: int) -> AffineForm:
        return _w(node[pos], K) + shift[pos]

    breakpoints = tuple(form(i) for i in range(L + 1))
    labels = tuple(f"{kind}{j}" for kind, j in seq[: L + 1])

    zeta, eta = [], []
    for pos in range(1, L + 1):
        zeta.append(next(j for kind, j in seq[pos:] if kind == "q"))
        eta.append(next(j for kind, j in seq[pos:] if kind == "r"))

    # w_a - w_b >= d
    diffs: list[tuple[int, int, Rational]] = []
    for j in range(1, K + 2):
        diffs.append((j, j - 1, mpq(0)))
    for pos in range(1, L + 1):
        diffs.append((node[pos], node[pos - 1], shift[pos - 1] - shift[pos]))
    for j in range(K + 2):
        diffs.append((j, s[j], -c))
        if s[j] < K + 1:
            diffs.append((s[j] + 1, j, c))

    constraints, kept, seen = [], [], set()
    for a, b, d in diffs:
        f = _w(a, K) - _w(b, K) - d
        if f.is_constant() and f.constant >= 0:
            continue
        if f in seen:
            continue
        seen.add(f)
        constraints.append(f)
        kept.append((a, b, d))

    total = AffineForm()
    for j in range(1, L + 1):
        lo = _level_gap(params, eta[j - 1] - 1, zeta[j - 1])
        hi = _level_gap(params, eta[j - 1], zeta[j - 1] - 1)
        m = minsq(lo, hi, c)
        if m:
            total = total + (breakpoints[j] - breakpoints[j - 1]) * m
    tau = params.tau
    fn = AffineForm(c * tau + 1 / (c * tau * g2)) - total * (2 * tau / (c * c * g2))

    return Cell(s, c, K, breakpoints, labels, tuple(zeta), tuple(eta),
                tuple(constraints), tuple(kept), fn)


def cell_is_nonempty(cell: Cell) -> bool:
    return feasible([(f, Relation.GE) for f in cell.constraints], range(1, cell.K + 1))


def nonempty_cells(params: BoundParams, c) -> list[Cell]:
    cells = (build_cell(s, c, params) for s in enumerate_interlacings(params.K))
    return [cell for cell in cells if cell_is_nonempty(cell)]


def locate_cell(cells: Sequence[Cell], w) -> Cell:
    """First cell (in the given order) whose closed region contains ``w``."""
    point = w.point() if hasattr(w, "point") else dict(w)
    for cell in cells:
        if cell.contains(point):
            return cell
    raise LocateError(f"no cell contains w={point}")
