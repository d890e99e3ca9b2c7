"""Scripted reductions of three-cylinder pillowcases to staircases.

Every reduction is a sequence of primitive operations (cylinder shear, height
change, quarter-turn rotation) applied to exact surfaces.  Shear amounts are
not free parameters: each step searches the finite lattice of twists of one
cylinder for the first amount that produces the configuration the step aims
for.  The trace keeps a snapshot and the invariant checks after every
operation, and :func:`replay` re-runs the operations from the first snapshot.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Callable

from staircase import flatsurf as fs
from staircase.flatsurf import (
    FlatSurface,
    FlatSurfaceError,
    NonPeriodic,
    area_total,
    build_stack,
    check_invariants,
    isomorphic,
    polydisk_act,
    rot,
    shear,
    stratum,
    trace_vertical,
)

PILLOW_STRATUM = (1, 1, -1, -1, -1, -1, -1, -1)
MAX_SHEAR_CANDIDATES = 4096


class SurgeryError(FlatSurfaceError):
    pass


class NotTypeB(SurgeryError):
    pass


class NotTypeC(SurgeryError):
    pass


class RotFailed(SurgeryError):
    def __init__(self, step: str, twists):
        super().__init__(f"vertical tracing not periodic at step {step}; twists {[str(t) for t in twists]}")
        self.step = step
        self.twists = twists


class StepFailed(SurgeryError):
    pass


@dataclass
class TraceStep:
    label: str
    op: dict
    surface: FlatSurface
    checks: dict

    def to_json(self) -> dict:
        return {"label": self.label, "op": self.op, "surface": fs.to_json_obj(self.surface), "checks": self.checks}


@dataclass
class SurgeryTrace:
    script: str
    steps: list[TraceStep] = field(default_factory=list)

    @property
    def first(self) -> FlatSurface:
        return self.steps[0].surface

    @property
    def last(self) -> FlatSurface:
        return self.steps[-1].surface

    def scale_factor(self) -> Fraction:
        """Product of the area factors of all height changes; equals last area over first area."""
        f = Fraction(1)
        for st in self.steps:
            if st.op["op"] == "act":
                f *= Fraction(st.op["area_factor"])
        return f

    def to_json(self) -> dict:
        return {"script": self.script, "steps": [s.to_json() for s in self.steps]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, obj: dict) -> "SurgeryTrace":
        steps = [TraceStep(s["label"], s["op"], fs.from_json_obj(s["surface"]), s["checks"]) for s in obj["steps"]]
        return cls(obj["script"], steps)


def step_checks(surface: FlatSurface, reference_area: Fraction) -> dict:
    """Invariant checks recorded after each operation; ``reference_area`` already includes height factors."""
    checks = check_invariants(surface)
    checks["stratum"] = stratum(surface) == PILLOW_STRATUM
    checks["area"] = area_total(surface) == reference_area
    return checks


def apply_op(surface: FlatSurface, op: dict) -> FlatSurface:
    kind = op["op"]
    if kind == "start":
        return surface
    if kind == "shear":
        return shear(surface, op["cyl"], Fraction(op["amount"]))
    if kind == "act":
        return polydisk_act(surface, op["cyl"], (Fraction(op["re"]), Fraction(op["im"])))
    if kind == "rot":
        return rot(surface)
    raise SurgeryError(f"unknown operation {kind!r}")


def replay(trace: SurgeryTrace) -> FlatSurface:
    surface = trace.first
    for st in trace.steps[1:]:
        surface = apply_op(surface, st.op)
    return surface


class _Recorder:
    def __init__(self, script: str, surface: FlatSurface):
        self.trace = SurgeryTrace(script)
        self.surface = surface
        self.area = area_total(surface)
        self.trace.steps.append(TraceStep("start", {"op": "start"}, surface, step_checks(surface, self.area)))

    def apply(self, label: str, op: dict) -> FlatSurface:
        try:
            new = apply_op(self.surface, op)
        except fs.VerticalNotPeriodic as exc:
            raise RotFailed(label, [c.twist for c in self.surface.cylinders]) from exc
        if op["op"] == "act":
            # height changes rescale one cylinder; the trace records the induced area factor
            cyl = self.surface.cylinders[op["cyl"]]
            new_area = self.area + cyl.circ * cyl.height * (Fraction(op["im"]) - 1)
            op = dict(op, area_factor=fs._rat_str(new_area / self.area))
            self.area = new_area
        checks = step_checks(new, self.area)
        if not all(checks.values()):
            failed = [k for k, v in checks.items() if not v]
            raise SurgeryError(f"step {label}: invariant check failed: {failed}")
        self.trace.steps.append(TraceStep(label, op, new, checks))
        self.surface = new
        return new


# ---------------------------------------------------------------------------
# cylinder chain helpers


def cylinder_chain(surface: FlatSurface) -> list[int]:
    """Cylinders of a three-cylinder surface in the order in which they are glued.

    The end with the smaller index comes first.
    """
    n = len(surface.cylinders)
    adj = {i: set() for i in range(n)}
    for g in surface.segments:
        o = surface.partner(g)
        if o.cyl != g.cyl:
            adj[g.cyl].add(o.cyl)
    ends = sorted(i for i in range(n) if len(adj[i]) == 1)
    if n == 1:
        return [0]
    if len(ends) != 2:
        raise SurgeryError("cylinders are not glued in a chain")
    chain = [ends[0]]
    while len(chain) < n:
        nxt = [j for j in adj[chain[-1]] if j not in chain]
        if len(nxt) != 1:
            raise SurgeryError("cylinders are not glued in a chain")
        chain.append(nxt[0])
    return chain


def _circs(surface: FlatSurface, chain) -> list[Fraction]:
    return [surface.cylinders[i].circ for i in chain]


def pillow_type(surface: FlatSurface) -> str | None:
    """``"a"`` (monotone), ``"b"`` (middle narrowest), ``"c"`` (middle widest) or ``None``."""
    if len(surface.cylinders) != 3 or stratum(surface) != PILLOW_STRATUM:
        return None
    try:
        chain = cylinder_chain(surface)
    except SurgeryError:
        return None
    l1, l2, l3 = _circs(surface, chain)
    if l2 < l1 and l2 < l3:
        return "b"
    if l2 > l1 and l2 > l3:
        return "c"
    if l1 > l2 > l3 or l1 < l2 < l3:
        return "a"
    return None


def staircase_model(surface: FlatSurface) -> FlatSurface | None:
    """Left-aligned staircase double with the circumferences and heights of ``surface``."""
    if len(surface.cylinders) != 3:
        return None
    try:
        chain = cylinder_chain(surface)
    except SurgeryError:
        return None
    circs = _circs(surface, chain)
    if circs[0] < circs[2]:
        chain = chain[::-1]
        circs = circs[::-1]
    if not (circs[0] > circs[1] > circs[2]):
        return None
    strips = [(0, surface.cylinders[i].circ / 2, surface.cylinders[i].height) for i in chain]
    return build_stack(strips)


def is_staircase(surface: FlatSurface, model: FlatSurface | None = None) -> bool:
    """Three cylinders, circumferences strictly monotone along the chain, glued like a staircase double.

    ``model`` may be passed to reuse :func:`staircase_model` across shears of one surface.
    """
    if len(surface.cylinders) != 3 or stratum(surface) != PILLOW_STRATUM:
        return False
    if model is None:
        model = staircase_model(surface)
    return model is not None and isomorphic(surface, model, labels=False)


def n_vertical_cylinders(surface: FlatSurface) -> int | None:
    try:
        dec = trace_vertical(surface, max_steps=2000)
    except fs.VerticalNotPeriodic:
        return None
    if isinstance(dec, NonPeriodic):
        return None
    return len(dec.cylinders)


def _lattice_unit(surface: FlatSurface) -> Fraction:
    nums, dens = 0, 1
    values = [c.circ for c in surface.cylinders] + [c.twist for c in surface.cylinders]
    values += [g.start for g in surface.segments] + [g.length for g in surface.segments]
    for v in values:
        if v:
            nums = gcd(nums, v.numerator)
            dens = lcm(dens, v.denominator)
    return Fraction(nums, dens)


def shear_candidates(surface: FlatSurface, j: int) -> list[Fraction]:
    """Shear amounts in ``[0, circ)`` on the half-lattice of the surface coordinates."""
    unit = _lattice_unit(surface) / 2
    c = surface.circ(j)
    count = int(c / unit)
    if count > MAX_SHEAR_CANDIDATES:
        # fall back to the twists that align two vertices of this cylinder directly
        tw = surface.cylinders[j].twist
        return sorted({(t - tw) % c for t in fs.twist_candidates(surface, j)})
    return [k * unit for k in range(count)]


def _search_shear(surface: FlatSurface, j: int, goal: Callable[[FlatSurface], bool]) -> Fraction | None:
    for amount in shear_candidates(surface, j):
        try:
            if goal(shear(surface, j, amount)):
                return amount
        except (fs.VerticalNotPeriodic, SurgeryError):
            continue
    return None


def _shear_step(rec: _Recorder, label: str, goal, what: str) -> None:
    surface = rec.surface
    mid = cylinder_chain(surface)[1]
    amount = _search_shear(surface, mid, goal)
    if amount is None:
        raise StepFailed(f"step {label}: no shear of the middle cylinder gives {what}")
    rec.apply(label, {"op": "shear", "cyl": mid, "amount": fs._rat_str(amount)})


def _height_factors(heights: list[Fraction], increasing: bool) -> list[Fraction]:
    """Factors that make heights strictly monotone along the chain; 1 where nothing needs to move."""
    hs = heights if increasing else heights[::-1]
    targets = [hs[0]]
    for h in hs[1:]:
        targets.append(h if h > targets[-1] else 2 * targets[-1])
    factors = [t / h for t, h in zip(targets, hs)]
    return factors if increasing else factors[::-1]


def _reorder_heights(rec: _Recorder, label: str, increasing: bool) -> None:
    chain = cylinder_chain(rec.surface)
    heights = [rec.surface.cylinders[i].height for i in chain]
    factors = _height_factors(heights, increasing)
    if all(f == 1 for f in factors):
        rec.apply(label, {"op": "act", "cyl": chain[0], "re": "0/1", "im": "1/1"})
        return
    for i, f in zip(chain, factors):
        if f != 1:
            rec.apply(label, {"op": "act", "cyl": i, "re": "0/1", "im": fs._rat_str(f)})


def _alignment_shears(surface: FlatSurface, j: int) -> list[Fraction]:
    # shears that put a vertex of the top circle of cylinder j straight above a vertex of its bottom circle
    c = surface.cylinders[j]
    return sorted({(t - c.twist) % c.circ for t in fs.twist_candidates(surface, j)})


def _finish_staircase(rec: _Recorder, label: str) -> None:
    """Shear the middle cylinder, then align the two end cylinders as in a staircase double.

    The end-cylinder shears create the vertical saddle connections of the
    staircase pattern (pole to pole across the widest cylinder, zero to pole
    across the narrowest one).
    """
    surface = rec.surface
    if is_staircase(surface):
        return
    first, mid, last = cylinder_chain(surface)
    model = staircase_model(surface)
    if model is None:
        raise StepFailed(f"step {label}: circumferences are not monotone along the chain")
    for m in shear_candidates(surface, mid):
        s1 = shear(surface, mid, m)
        for a in _alignment_shears(s1, first):
            s2 = shear(s1, first, a)
            for b in _alignment_shears(s2, last):
                if is_staircase(shear(s2, last, b), model):
                    rec.apply(label, {"op": "shear", "cyl": mid, "amount": fs._rat_str(m)})
                    for j, amount in ((first, a), (last, b)):
                        if amount:
                            rec.apply(label + " align", {"op": "shear", "cyl": j, "amount": fs._rat_str(amount)})
                    return
    raise StepFailed(f"step {label}: no shear of the middle cylinder leads to a staircase")


# ---------------------------------------------------------------------------
# scripts


def reduce_pillow_b(surface: FlatSurface) -> tuple[FlatSurface, SurgeryTrace]:
    """Deform a pillowcase with the narrowest middle cylinder into a staircase."""
    if pillow_type(surface) != "b":
        raise NotTypeB("input is not a pillowcase of type (b): three cylinders with the middle one narrowest")
    rec = _Recorder("fig4", surface)

    # (i) middle shear: the double of a Z-shaped polygon
    chain = cylinder_chain(surface)
    w = [surface.cylinders[i].circ / 2 for i in chain]
    h = [surface.cylinders[i].height for i in chain]
    z_shape = build_stack([(0, w[0], h[0]), (w[0] - w[1], w[1], h[1]), (w[0] - w[1], w[2], h[2])])
    _shear_step(rec, "(i)", lambda s: isomorphic(s, z_shape, labels=False), "the Z-shaped double")

    # (ii) heights h1 < h2 < h3
    _reorder_heights(rec, "(ii)", increasing=True)

    # (iii) rot, shear the middle, rotate back: bottom cylinder becomes the widest
    rec.apply("(iii)", {"op": "rot"})
    _shear_step(rec, "(iii)", lambda s: pillow_type(rot(s)) == "a", "a monotone chain after rotating back")
    rec.apply("(iii)", {"op": "rot"})

    # (iv) shear the middle into a staircase
    _finish_staircase(rec, "(iv)")
    if not is_staircase(rec.surface):
        raise StepFailed("final surface is not a staircase")
    return rec.surface, rec.trace


def reduce_pillow_c(surface: FlatSurface) -> tuple[FlatSurface, SurgeryTrace]:
    """Deform a pillowcase with the widest middle cylinder into a staircase."""
    if pillow_type(surface) != "c":
        raise NotTypeC("input is not a pillowcase of type (c): three cylinders with the middle one widest")
    chain = cylinder_chain(surface)
    ends_equal = surface.cylinders[chain[0]].circ == surface.cylinders[chain[2]].circ
    rec = _Recorder("fig5" if ends_equal else "fig5-short", surface)

    if ends_equal:
        # (i) make the two vertical cylinders unequal, then shear for a third one
        rec.apply("(i)", {"op": "rot"})
        vchain = cylinder_chain(rec.surface)
        widths = [rec.surface.cylinders[i].height for i in vchain]
        if len(set(widths)) == 1:
            rec.apply("(i)", {"op": "act", "cyl": vchain[0], "re": "0/1", "im": "1/2"})
        rec.apply("(i)", {"op": "rot"})
        _shear_step(rec, "(i)", lambda s: n_vertical_cylinders(s) == 3, "three vertical cylinders")

        # (ii) heights strictly decreasing from top to bottom
        _reorder_heights(rec, "(ii)", increasing=True)

        # (iii) rot and shear the middle: three vertical cylinders again
        rec.apply("(iii)", {"op": "rot"})
        _shear_step(rec, "(iii)", lambda s: n_vertical_cylinders(s) == 3 and pillow_type(rot(s)) == "a",
                    "three vertical cylinders")

        # (iv) rot and shear the middle into a staircase
        rec.apply("(iv)", {"op": "rot"})
        _finish_staircase(rec, "(iv)")
    else:
        if n_vertical_cylinders(surface) != 3:
            raise StepFailed("type (c) with unequal ends is expected to have three vertical cylinders")
        rec.apply("(i)", {"op": "rot"})
        _finish_staircase(rec, "(ii)")
    if not is_staircase(rec.surface):
        raise StepFailed("final surface is not a staircase")
    return rec.surface, rec.trace


def run(script: str, surface: FlatSurface) -> tuple[FlatSurface, SurgeryTrace]:
    if script == "fig4":
        return reduce_pillow_b(surface)
    if script == "fig5":
        return reduce_pillow_c(surface)
    raise SurgeryError(f"unknown script {script!r}; expected fig4 or fig5")
