"""Gauss-Kronrod 7/15 abscissae and weights on [-1, 1], 40 significant digits.

Generated by ``gk_generate.py``; ``XGK`` lists the non-negative abscissae in
decreasing order (odd positions 1, 3, 5 are the Gauss nodes, the last entry is
the centre), ``WGK`` the matching Kronrod weights, ``WG`` the Gauss weights of
nodes ``XGK[1], XGK[3], XGK[5], XGK[7]``.
"""

from fractions import Fraction

XGK = (
    "9.914553711208126392068546975263285166420e-1",
    "9.491079123427585245261896840478512624008e-1",
    "8.648644233597690727897127886409262012110e-1",
    "7.415311855993944398638647732807884070741e-1",
    "5.860872354676911302941448382587295984368e-1",
    "4.058451513773971669066064120769614633474e-1",
    "2.077849550078984676006894037732449134798e-1",
    "0",
)

WGK = (
    "2.293532201052922496373200805896959199356e-2",
    "6.309209262997855329070066318920428666507e-2",
    "1.047900103222501838398763225415180174438e-1",
    "1.406532597155259187451895905102379203999e-1",
    "1.690047266392679028265834265985502841062e-1",
    "1.903505780647854099132564024210136828261e-1",
    "2.044329400752988924141619992346490847165e-1",
    "2.094821410847278280129991748917142636978e-1",
)

WG = (
    "1.294849661688696932706114326790820183286e-1",
    "2.797053914892766679014677714237795824869e-1",
    "3.818300505051189449503697754889751338784e-1",
    "4.179591836734693877551020408163265306122e-1",
)


def as_double(values) -> list[float]:
    return [float(Fraction(v)) for v in values]


def as_double_double(values) -> list[tuple[float, float]]:
    """Split each constant into an unevaluated sum ``hi + lo`` of two doubles."""
    out = []
    for v in values:
        q = Fraction(v)
        hi = float(q)
        out.append((hi, float(q - Fraction(hi))))
    return out
