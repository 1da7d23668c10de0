"""Exact rational algebra of the g-thin improvement over the trivial (2/g) constant.

For ``g >= 2`` the choice

    eps = (100 g^2 - 7 g - 89) / (50 g^2 (50 g^2 - 49)),   c = 25 g^2 eps

makes the two-level bound with ``tau = 1/g``, levels ``0.8 < 1 < 1.2`` and a
single short window of ratio ``c`` beat ``(2 - eps/2) / g``.  Everything here
is exact; nothing is asserted that the algebra does not prove.
"""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .cells import BoundParams, build_cell
from .numerics import AffineForm, Rational

LOW_LEVEL = mpq(4, 5)
HIGH_LEVEL = mpq(6, 5)
# the interlacing whose cell carries the improvement
GAIN_CELL = (1, 1, 3, 3)


@dataclass(frozen=True)
class ThinBoundReport:
    g: int
    epsilon: Rational
    c: Rational
    c_in_range: bool  # 0.8 < c < 1
    bound_at_c: Rational  # (c + 1/c)/g - (0.8 - c)^2/(c g^3)
    gap: Rational  # (2 - eps/2)/g - bound_at_c
    gap_closed_form: Rational
    identity_holds: bool
    gap_positive: bool
    eps_g: Rational  # eps/2
    eps_g_times_50g2: Rational
    eps_g_at_least_1_over_50g2: bool
    cell_function: AffineForm  # engine's affine bound on the gain cell
    printed_form: AffineForm  # (c + 1/c)/g - 2 (c - w1)(0.8 - c)^2 / (c^2 g^3)
    cell_function_matches_printed: bool

    def row(self) -> str:
        return (f"g={self.g} eps={self.epsilon} c={self.c} c_in_range={self.c_in_range} "
                f"gap={self.gap} identity={self.identity_holds} gap_positive={self.gap_positive} "
                f"eps_g*50g^2={self.eps_g_times_50g2} "
                f"eps_g>=1/(50g^2)={self.eps_g_at_least_1_over_50g2} "
                f"cell_matches_printed={self.cell_function_matches_printed}")


def thin_params(g: int) -> BoundParams:
    eps = mpq(100 * g * g - 7 * g - 89, 50 * g * g * (50 * g * g - 49))
    return BoundParams(mpq(1, g), (LOW_LEVEL, HIGH_LEVEL), (25 * g * g * eps,), g)


def thin_report(g: int) -> ThinBoundReport:
    if int(g) != g or g < 2:
        raise ValueError("g must be an integer >= 2")
    g = int(g)
    eps = mpq(100 * g * g - 7 * g - 89, 50 * g * g * (50 * g * g - 49))
    c = 25 * g * g * eps
    x = (c + 1 / c) / g - (LOW_LEVEL - c) ** 2 / (c * g ** 3)
    gap = (2 - eps / 2) / g - x
    closed = mpq(151 * g * g - 126 * g + 47, 100 * g ** 3 * (100 * g * g - 7 * g - 89))
    eps_g = eps / 2
    ratio = eps_g * 50 * g * g

    params = BoundParams(mpq(1, g), (LOW_LEVEL, HIGH_LEVEL), (c,), g)
    fn = build_cell(GAIN_CELL, c, params).cell_function
    w1 = AffineForm.variable(1)
    printed = (AffineForm((c + 1 / c) / g)
               - (AffineForm(c) - w1) * (2 * (LOW_LEVEL - c) ** 2 / (c * c * g ** 3)))
    return ThinBoundReport(
        g=g, epsilon=eps, c=c, c_in_range=LOW_LEVEL < c < 1, bound_at_c=x, gap=gap,
        gap_closed_form=closed, identity_holds=gap == closed, gap_positive=gap > 0,
        eps_g=eps_g, eps_g_times_50g2=ratio, eps_g_at_least_1_over_50g2=ratio >= 1,
        cell_function=fn, printed_form=printed, cell_function_matches_printed=fn == printed,
    )
