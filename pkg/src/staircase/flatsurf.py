"""Exact half-translation surfaces given as horizontal cylinder diagrams.

A surface is a list of horizontal cylinders.  Every cylinder has a bottom and a
top boundary circle, each tiled by segments; segments are glued in pairs.  A
gluing between a top and a bottom circle is a translation, a gluing between two
circles of the same kind is a half-turn ("fold").  All coordinates are
:class:`fractions.Fraction` so that every identity checked here is exact.

Circle coordinates run left to right in ``[0, circ)``.  The vertical line that
leaves the bottom circle of a cylinder at offset ``u`` reaches its top circle
at offset ``u - twist``.

Doubling convention: a polygon strip of width ``w`` becomes a cylinder of
circumference ``2 w``; :func:`area_total` therefore returns twice the polygon
area.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence, Union

__all__ = [
    "FlatSurfaceError",
    "InvalidSpec",
    "VerticalNotPeriodic",
    "Cylinder",
    "Segment",
    "Point",
    "FlatSurface",
    "StaircaseSpec",
    "Rectangle",
    "VerticalCylinder",
    "CylinderDecomposition",
    "NonPeriodic",
    "as_rational",
    "build_stack",
    "build_staircase",
    "build_rect_marked",
    "build_pillowcase",
    "polydisk_act",
    "shear",
    "trace_vertical",
    "rot",
    "stratum",
    "area_total",
    "vertex_classes",
    "check_invariants",
    "isomorphic",
    "twist_candidates",
]

TOP = "top"
BOTTOM = "bottom"
TRANSLATION = "translation"
FOLD = "fold"

RationalLike = Union[Fraction, int, str, float]


class FlatSurfaceError(ValueError):
    """Base class for domain errors raised by this module."""


class InvalidSpec(FlatSurfaceError):
    pass


class VerticalNotPeriodic(FlatSurfaceError):
    def __init__(self, report: "NonPeriodic"):
        super().__init__(
            f"vertical foliation not periodic within {report.max_steps} steps "
            f"(separatrix from {report.start})"
        )
        self.report = report


def as_rational(value: RationalLike) -> Fraction:
    """Exact conversion; floats are converted bit-exactly, strings parsed as ``n/d``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, (int, float, str)):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to a rational")


def _rat_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Cylinder:
    circ: Fraction
    height: Fraction
    twist: Fraction = Fraction(0)


@dataclass(frozen=True)
class Segment:
    id: int
    cyl: int
    side: str
    start: Fraction
    length: Fraction
    partner: int


@dataclass(frozen=True, order=True)
class Point:
    cyl: int
    side: str
    offset: Fraction


@dataclass(frozen=True)
class FlatSurface:
    cylinders: tuple[Cylinder, ...]
    segments: tuple[Segment, ...]
    labels: tuple[tuple[str, Point], ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", _build_index(self))

    # -- lookups -----------------------------------------------------------
    def segment(self, sid: int) -> Segment:
        return self.segments[sid]

    def partner(self, seg: Segment) -> Segment:
        return self.segments[seg.partner]

    def kind(self, seg: Segment) -> str:
        return TRANSLATION if self.partner(seg).side != seg.side else FOLD

    def circle(self, cyl: int, side: str) -> list[Segment]:
        """Segments of one boundary circle, sorted by start offset."""
        return self._index[(cyl, side)][1]

    def circ(self, cyl: int) -> Fraction:
        return self.cylinders[cyl].circ

    def label(self, name: str) -> Point:
        for key, pt in self.labels:
            if key == name:
                return pt
        raise KeyError(name)

    @property
    def label_map(self) -> dict[str, Point]:
        return dict(self.labels)

    def locate(self, cyl: int, side: str, offset: Fraction) -> tuple[Segment, Fraction]:
        """Segment containing ``offset`` on a circle and the distance from its start."""
        c = self.circ(cyl)
        offset = offset % c
        starts, segs = self._index[(cyl, side)]
        k = bisect_right(starts, offset) - 1
        seg = segs[k]  # k == -1 picks the wrapping last segment
        return seg, (offset - seg.start) % c

    def is_vertex(self, cyl: int, side: str, offset: Fraction) -> bool:
        _, d = self.locate(cyl, side, offset)
        return d == 0

    def end(self, seg: Segment) -> Fraction:
        return (seg.start + seg.length) % self.circ(seg.cyl)

    def glue(self, seg: Segment, d: Fraction) -> tuple[Segment, Fraction]:
        """Image of the point at distance ``d`` from ``seg.start`` on the partner segment."""
        other = self.partner(seg)
        if other.side != seg.side:
            return other, d
        return other, other.length - d

    def __repr__(self) -> str:
        cyl = ", ".join(f"({c.circ}, {c.height}, {c.twist})" for c in self.cylinders)
        return f"FlatSurface(cylinders=[{cyl}], segments={len(self.segments)})"


def _build_index(s: FlatSurface) -> dict:
    index: dict = {}
    for i in range(len(s.cylinders)):
        for side in (BOTTOM, TOP):
            segs = sorted((g for g in s.segments if g.cyl == i and g.side == side), key=lambda g: g.start)
            index[(i, side)] = ([g.start for g in segs], segs)
    return index


# ---------------------------------------------------------------------------
# JSON


def to_json_obj(surface: FlatSurface) -> dict:
    return {
        "cylinders": [
            {"circ": _rat_str(c.circ), "height": _rat_str(c.height), "twist": _rat_str(c.twist)}
            for c in surface.cylinders
        ],
        "segments": [
            {
                "id": g.id,
                "circle": g.cyl,
                "side": g.side,
                "start": _rat_str(g.start),
                "len": _rat_str(g.length),
                "partner": g.partner,
                "kind": surface.kind(g),
            }
            for g in surface.segments
        ],
        "labels": {
            name: {"circle": p.cyl, "side": p.side, "offset": _rat_str(p.offset)}
            for name, p in surface.labels
        },
    }


def from_json_obj(obj: Mapping) -> FlatSurface:
    cylinders = tuple(
        Cylinder(Fraction(c["circ"]), Fraction(c["height"]), Fraction(c.get("twist", "0")))
        for c in obj["cylinders"]
    )
    segments = tuple(
        Segment(
            id=int(g["id"]),
            cyl=int(g["circle"]),
            side=g["side"],
            start=Fraction(g["start"]),
            length=Fraction(g["len"]),
            partner=int(g["partner"]),
        )
        for g in sorted(obj["segments"], key=lambda g: int(g["id"]))
    )
    labels = tuple(
        (name, Point(int(p["circle"]), p["side"], Fraction(p["offset"])))
        for name, p in obj.get("labels", {}).items()
    )
    surface = FlatSurface(cylinders, segments, labels)
    for g in obj["segments"]:
        kind = g.get("kind")
        if kind is not None and kind != surface.kind(surface.segments[int(g["id"])]):
            raise InvalidSpec(f"segment {g['id']}: kind {kind!r} contradicts the glued sides")
    problems = check_invariants(surface)
    bad = [k for k, ok in problems.items() if not ok]
    if bad:
        raise InvalidSpec(f"invalid surface: failed {', '.join(bad)}")
    return surface


def dumps(surface: FlatSurface) -> str:
    return json.dumps(to_json_obj(surface), indent=2)


def loads(text: str) -> FlatSurface:
    return from_json_obj(json.loads(text))


# ---------------------------------------------------------------------------
# vertices, stratum, area


def _next_corner(s: FlatSurface, pt: Point) -> Point:
    # one step of the counterclockwise walk around a vertex; each step sweeps an angle pi
    if pt.side == TOP:
        seg, d = s.locate(pt.cyl, TOP, pt.offset)
        assert d == 0
        other = s.partner(seg)
        if other.side == BOTTOM:
            return Point(other.cyl, BOTTOM, other.start)
        return Point(other.cyl, TOP, s.end(other))
    # on a bottom circle the sector ends at the segment that ends at pt
    starts, segs = s._index[(pt.cyl, BOTTOM)]
    k = bisect_left(starts, pt.offset)
    assert starts[k] == pt.offset
    seg = segs[k - 1]
    other = s.partner(seg)
    if other.side == TOP:
        return Point(other.cyl, TOP, s.end(other))
    return Point(other.cyl, BOTTOM, other.start)


def vertex_classes(surface: FlatSurface) -> list[list[Point]]:
    """Vertex classes as lists of circle points; the cone angle is ``pi * len(cls)``."""
    points = sorted(Point(g.cyl, g.side, g.start) for g in surface.segments)
    seen: set[Point] = set()
    classes = []
    for p in points:
        if p in seen:
            continue
        cls = []
        q = p
        while q not in seen:
            seen.add(q)
            cls.append(q)
            q = _next_corner(surface, q)
        if q != p:
            raise InvalidSpec(f"corner walk from {p} does not close")
        classes.append(cls)
    return classes


def stratum(surface: FlatSurface) -> tuple[int, ...]:
    """Orders ``k - 2`` of the vertex classes (cone angle ``k pi``), sorted descending."""
    return tuple(sorted((len(c) - 2 for c in vertex_classes(surface)), reverse=True))


def area_total(surface: FlatSurface) -> Fraction:
    return sum((c.circ * c.height for c in surface.cylinders), Fraction(0))


def check_invariants(surface: FlatSurface) -> dict[str, bool]:
    """Structural checks; every value must be ``True`` for a valid surface."""
    out = {}
    cyls = surface.cylinders
    out["positive_dims"] = all(c.circ > 0 and c.height > 0 and 0 <= c.twist < c.circ for c in cyls)
    ids_ok = all(g.id == k for k, g in enumerate(surface.segments))
    tiling = ids_ok
    for i, c in enumerate(cyls):
        for side in (BOTTOM, TOP):
            segs = surface.circle(i, side)
            if not segs or sum(g.length for g in segs) != c.circ:
                tiling = False
                continue
            for a, b in zip(segs, segs[1:] + segs[:1]):
                if (a.start + a.length) % c.circ != b.start or not (0 <= a.start < c.circ) or a.length <= 0:
                    tiling = False
    out["circle_tiling"] = tiling
    inv = ids_ok
    if inv:
        for g in surface.segments:
            if not (0 <= g.partner < len(surface.segments)):
                inv = False
                break
            o = surface.segments[g.partner]
            if o.id == g.id or o.partner != g.id or o.length != g.length:
                inv = False
    out["gluing_involution"] = inv
    if tiling and inv:
        try:
            classes = vertex_classes(surface)
            out["gauss_bonnet"] = sum(len(c) - 2 for c in classes) == -4
            out["cone_angles"] = all(len(c) >= 1 for c in classes)
        except (InvalidSpec, ValueError, IndexError):
            out["gauss_bonnet"] = False
            out["cone_angles"] = False
        labels_ok = all(
            0 <= p.cyl < len(cyls) and surface.is_vertex(p.cyl, p.side, p.offset) for _, p in surface.labels
        )
    else:
        out["gauss_bonnet"] = False
        out["cone_angles"] = False
        labels_ok = False
    out["labels_on_vertices"] = labels_ok
    return out


def _require_valid(surface: FlatSurface) -> FlatSurface:
    bad = [k for k, ok in check_invariants(surface).items() if not ok]
    if bad:
        raise InvalidSpec(f"invalid surface: failed {', '.join(bad)}")
    return surface


# ---------------------------------------------------------------------------
# constructors


@dataclass(frozen=True)
class StaircaseSpec:
    """Dimensions of the staircase polygon; bottom edge 1, step widths ``p`` (top) and ``q``."""

    a: Fraction
    b: Fraction
    c: Fraction
    p: Fraction
    q: Fraction

    def __post_init__(self):
        for name in "abcpq":
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if not (self.a > 0 and self.b >= 0 and self.c >= 0 and self.p > 0 and self.q > 0 and self.p + self.q < 1):
            raise InvalidSpec(f"invalid staircase spec {self}")

    def polygon_area(self) -> Fraction:
        return self.a + self.b * (self.p + self.q) + self.c * self.p


def build_stack(
    strips: Sequence[tuple[RationalLike, RationalLike, RationalLike]],
    marked: Mapping[str, tuple[RationalLike, RationalLike]] | None = None,
) -> FlatSurface:
    """Double of a polygon made of stacked horizontal strips ``(x_left, width, height)``.

    Strips are listed bottom to top; consecutive strips must overlap in a
    segment of positive length.  ``marked`` maps label names to boundary
    points ``(x, y)`` of the polygon; when omitted, convex corners are named
    ``P1, P2, ...`` and reflex corners ``Q1, Q2, ...`` counterclockwise from
    the bottom-right corner.
    """
    rows = [(as_rational(x), as_rational(w), as_rational(h)) for x, w, h in strips]
    if not rows or any(w <= 0 or h <= 0 for _, w, h in rows):
        raise InvalidSpec("strips need positive widths and heights")
    ys = [Fraction(0)]
    for _, _, h in rows:
        ys.append(ys[-1] + h)
    for (x0, w0, _), (x1, w1, _) in zip(rows, rows[1:]):
        if min(x0 + w0, x1 + w1) - max(x0, x1) <= 0:
            raise InvalidSpec("consecutive strips must overlap")

    cylinders = tuple(Cylinder(2 * w, h, Fraction(0)) for _, w, h in rows)
    raw: list[dict] = []  # fine segments before merging

    def front(i, x):
        return x - rows[i][0]

    def back(i, x):
        x0, w, _ = rows[i]
        return (w + (x0 + w - x)) % (2 * w)

    def add_pair(i, side_i, j, side_j, xa, xb, fold):
        # front and back copies of [xa, xb]; ids are assigned later
        if fold:
            fa = dict(cyl=i, side=side_i, start=front(i, xa), length=xb - xa)
            ba = dict(cyl=i, side=side_i, start=back(i, xb), length=xb - xa)
            raw.append(fa)
            raw.append(ba)
            fa["partner"], ba["partner"] = ba, fa
            return
        fi = dict(cyl=i, side=side_i, start=front(i, xa), length=xb - xa)
        fj = dict(cyl=j, side=side_j, start=front(j, xa), length=xb - xa)
        bi = dict(cyl=i, side=side_i, start=back(i, xb), length=xb - xa)
        bj = dict(cyl=j, side=side_j, start=back(j, xb), length=xb - xa)
        raw.extend([fi, fj, bi, bj])
        fi["partner"], fj["partner"] = fj, fi
        bi["partner"], bj["partner"] = bj, bi

    n = len(rows)
    for i, (x0, w, _) in enumerate(rows):
        x1 = x0 + w
        for side, nb in ((BOTTOM, i - 1), (TOP, i + 1)):
            if 0 <= nb < n:
                y0, yw, _ = rows[nb]
                lo, hi = max(x0, y0), min(x1, y0 + yw)
            else:
                lo = hi = None
            cuts = [x0, x1] + ([lo, hi] if lo is not None else [])
            cuts = sorted(set(cuts))
            for xa, xb in zip(cuts, cuts[1:]):
                shared = lo is not None and lo <= xa and xb <= hi
                if shared:
                    if side == TOP:  # each interface pair is added once, from below
                        add_pair(i, TOP, nb, BOTTOM, xa, xb, fold=False)
                else:
                    add_pair(i, side, None, None, xa, xb, fold=True)

    corners = _stack_corners(rows, ys)
    if marked is None:
        named: dict[str, tuple[Fraction, Fraction]] = {}
        np_, nq = 0, 0
        for x, y, convex in corners:
            if convex:
                np_ += 1
                named[f"P{np_}"] = (x, y)
            else:
                nq += 1
                named[f"Q{nq}"] = (x, y)
    else:
        named = {k: (as_rational(x), as_rational(y)) for k, (x, y) in marked.items()}

    label_pts = []
    for name, (x, y) in named.items():
        label_pts.append((name, _boundary_point(rows, ys, x, y)))

    # split fine segments at labelled points that fall inside them
    for _, pt in label_pts:
        _split_raw_at(raw, cylinders, pt)

    surface = _freeze(cylinders, raw, ())
    # labels as circle points of the frozen surface
    labels = tuple((name, pt) for name, pt in label_pts)
    surface = FlatSurface(surface.cylinders, surface.segments, labels)
    surface = _merge_regular(surface)
    return _require_valid(surface)


def _stack_corners(rows, ys):
    """Corners of the stacked polygon, counterclockwise from the bottom-right one."""
    n = len(rows)
    right, left = [], []
    for i, (x0, w, _) in enumerate(rows):
        right.append((x0 + w, ys[i]))
        right.append((x0 + w, ys[i + 1]))
    for i in reversed(range(n)):
        x0 = rows[i][0]
        left.append((x0, ys[i + 1]))
        left.append((x0, ys[i]))
    loop = right + left
    # collapse repeated points and straight runs
    pts = []
    for p in loop:
        if not pts or pts[-1] != p:
            pts.append(p)
    if pts[0] == pts[-1]:
        pts.pop()
    out = []
    m = len(pts)
    for k in range(m):
        a, b, c = pts[k - 1], pts[k], pts[(k + 1) % m]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross != 0:
            out.append((b[0], b[1], cross > 0))
    # start at the bottom-right corner
    start = max((k for k in range(len(out)) if out[k][1] == 0), key=lambda k: out[k][0])
    return out[start:] + out[:start]


def _boundary_point(rows, ys, x, y) -> Point:
    for i, (x0, w, _) in enumerate(rows):
        if x0 <= x <= x0 + w:
            if y == ys[i]:
                return Point(i, BOTTOM, (x - x0) % (2 * w))
            if y == ys[i + 1]:
                return Point(i, TOP, (x - x0) % (2 * w))
    raise InvalidSpec(f"marked point {(x, y)} is not on a horizontal boundary circle")


def _split_raw_at(raw, cylinders, pt: Point):
    c = cylinders[pt.cyl].circ
    for g in list(raw):
        if g["cyl"] != pt.cyl or g["side"] != pt.side:
            continue
        d = (pt.offset - g["start"]) % c
        if 0 < d < g["length"]:
            _split_raw(raw, cylinders, g, d)
            return


def _split_raw(raw, cylinders, g, d):
    o = g["partner"]
    c_g = cylinders[g["cyl"]].circ
    c_o = cylinders[o["cyl"]].circ
    fold = o["side"] == g["side"]
    g2 = dict(cyl=g["cyl"], side=g["side"], start=(g["start"] + d) % c_g, length=g["length"] - d)
    g["length"] = d
    if not fold:
        o2 = dict(cyl=o["cyl"], side=o["side"], start=(o["start"] + d) % c_o, length=o["length"] - d)
        o["length"] = d
        g["partner"], o["partner"] = o, g
        g2["partner"], o2["partner"] = o2, g2
        raw.extend([g2, o2])
    else:
        # reversed: the first piece of g matches the last piece of o
        o2 = dict(cyl=o["cyl"], side=o["side"], start=(o["start"] + o["length"] - d) % c_o, length=d)
        o["length"] = o["length"] - d
        g["partner"], o2["partner"] = o2, g
        g2["partner"], o["partner"] = o, g2
        raw.extend([g2, o2])


def _freeze(cylinders, raw, labels) -> FlatSurface:
    order = sorted(range(len(raw)), key=lambda k: (raw[k]["cyl"], raw[k]["side"] != BOTTOM, raw[k]["start"]))
    ids = {id(raw[k]): n for n, k in enumerate(order)}
    segs = tuple(
        Segment(
            id=n,
            cyl=raw[k]["cyl"],
            side=raw[k]["side"],
            start=raw[k]["start"] % cylinders[raw[k]["cyl"]].circ,
            length=raw[k]["length"],
            partner=ids[id(raw[k]["partner"])],
        )
        for n, k in enumerate(order)
    )
    return FlatSurface(tuple(cylinders), segs, tuple(labels))


def _merge_regular(surface: FlatSurface) -> FlatSurface:
    """Merge adjacent segments across unlabelled regular points (cone angle 2 pi)."""
    protected = set()
    for _, p in surface.labels:
        seg, _ = surface.locate(p.cyl, p.side, p.offset)
        protected.add(Point(p.cyl, p.side, seg.start))
    junctions = [cls for cls in vertex_classes(surface) if len(cls) == 2 and not protected.intersection(cls)]
    if not junctions:
        return surface
    raw = [dict(cyl=g.cyl, side=g.side, start=g.start, length=g.length) for g in surface.segments]
    for g, r in zip(surface.segments, raw):
        r["partner"] = raw[g.partner]
    starting = {(r["cyl"], r["side"], r["start"]): r for r in raw}
    ending = {}
    for r in raw:
        ending[(r["cyl"], r["side"], (r["start"] + r["length"]) % surface.circ(r["cyl"]))] = r
    removed = set()
    changed = False
    for cls in junctions:
        p = cls[0]
        key = (p.cyl, p.side, p.offset)
        left, right = ending.get(key), starting.get(key)
        if left is None or right is None or left is right:
            continue
        lp, rp = left["partner"], right["partner"]
        if {id(left), id(right)} & {id(lp), id(rp)} or lp is rp:
            continue
        if lp["cyl"] != rp["cyl"] or lp["side"] != rp["side"]:
            continue
        c_p = surface.circ(lp["cyl"])
        fold = lp["side"] == left["side"]
        if not fold:
            if (lp["start"] + lp["length"]) % c_p != rp["start"]:
                continue
            head, tail = lp, rp
        else:
            if (rp["start"] + rp["length"]) % c_p != lp["start"]:
                continue
            head, tail = rp, lp
        c_l = surface.circ(left["cyl"])
        del starting[key]
        del ending[key]
        mid = (tail["cyl"], tail["side"], tail["start"])
        del starting[mid]
        del ending[mid]
        left["length"] += right["length"]
        head["length"] += tail["length"]
        left["partner"], head["partner"] = head, left
        ending[(left["cyl"], left["side"], (left["start"] + left["length"]) % c_l)] = left
        ending[(head["cyl"], head["side"], (head["start"] + head["length"]) % c_p)] = head
        removed.add(id(right))
        removed.add(id(tail))
        changed = True
    if not changed:
        return surface
    out = _freeze(surface.cylinders, [r for r in raw if id(r) not in removed], ())
    return FlatSurface(out.cylinders, out.segments, surface.labels)


def build_staircase(spec: StaircaseSpec | None = None, **dims) -> FlatSurface:
    """Double of the staircase polygon ``L(a, b, c, p, q)``.

    Cylinders are ordered bottom to top with circumferences ``2``,
    ``2(p+q)``, ``2p``; cylinders of zero height (``b`` or ``c`` equal to 0)
    are dropped.  Labels follow the polygon: ``P1`` bottom right, ``P6``
    bottom left, ``Q1``/``Q2`` the reflex corners.
    """
    if spec is None:
        spec = StaircaseSpec(**dims)
    a, b, c, p, q = spec.a, spec.b, spec.c, spec.p, spec.q
    strips = [(0, 1, a)]
    if b > 0:
        strips.append((0, p + q, b))
    if c > 0:
        strips.append((0, p, c))
    marked = {
        "P1": (1, 0),
        "P2": (1, a),
        "Q1": (p + q, a),
        "P3": (p + q, a + b),
        "Q2": (p, a + b),
        "P4": (p, a + b + c),
        "P5": (0, a + b + c),
        "P6": (0, 0),
    }
    return build_stack(strips, marked)


def build_rect_marked(a: RationalLike, p: RationalLike, q: RationalLike) -> FlatSurface:
    """Marked rectangle ``L(a, 0, 0, p, q)``: ``P3`` and ``P4`` are regular marked points on the top edge."""
    return build_staircase(StaircaseSpec(a, 0, 0, p, q))


def build_pillowcase(kind: str, widths: Sequence[RationalLike], heights: Sequence[RationalLike]) -> FlatSurface:
    """Three left-aligned strips; type ``b`` has the middle strip narrowest, type ``c`` widest."""
    if kind not in ("b", "c"):
        raise InvalidSpec(f"unknown pillowcase kind {kind!r}")
    if len(widths) != 3 or len(heights) != 3:
        raise InvalidSpec("pillowcase needs three widths and three heights")
    w = [as_rational(x) for x in widths]
    h = [as_rational(x) for x in heights]
    if min(w) <= 0 or min(h) <= 0:
        raise InvalidSpec("pillowcase dimensions must be positive")
    if kind == "b" and not (w[1] < w[0] and w[1] < w[2]):
        raise InvalidSpec(f"type b needs the middle strip strictly narrowest, got widths {w}")
    if kind == "c" and not (w[1] > w[0] and w[1] > w[2]):
        raise InvalidSpec(f"type c needs the middle strip strictly widest, got widths {w}")
    return build_stack([(0, w[k], h[k]) for k in range(3)])


# ---------------------------------------------------------------------------
# cylinder deformations


def polydisk_act(surface: FlatSurface, j: int, lam) -> FlatSurface:
    """Act by ``lam`` (upper half-plane) on cylinder ``j``.

    ``lam`` is a complex number or a pair ``(re, im)`` of rationals.  The
    height is multiplied by ``im`` and the top circle is sheared by
    ``re * height`` (reduced modulo the circumference).
    """
    if not (0 <= j < len(surface.cylinders)):
        raise IndexError(f"cylinder index {j} out of range")
    if isinstance(lam, complex):
        re, im = Fraction(lam.real), Fraction(lam.imag)
    else:
        re, im = (as_rational(v) for v in lam)
    if im <= 0:
        raise FlatSurfaceError(f"Im(lambda) must be positive, got {im}")
    cyl = surface.cylinders[j]
    new = Cylinder(cyl.circ, cyl.height * im, (cyl.twist + re * cyl.height) % cyl.circ)
    cylinders = surface.cylinders[:j] + (new,) + surface.cylinders[j + 1 :]
    return FlatSurface(cylinders, surface.segments, surface.labels)


def shear(surface: FlatSurface, j: int, amount: RationalLike) -> FlatSurface:
    """Add ``amount`` to the twist of cylinder ``j`` (the horocycle action on one cylinder)."""
    cyl = surface.cylinders[j]
    return polydisk_act(surface, j, (as_rational(amount) / cyl.height, 1))


def twist_candidates(surface: FlatSurface, j: int) -> list[Fraction]:
    """Twists of cylinder ``j`` that create a vertical saddle connection across it, ascending."""
    c = surface.circ(j)
    bottom = [g.start for g in surface.circle(j, BOTTOM)]
    top = [g.start for g in surface.circle(j, TOP)]
    return sorted({(u - v) % c for u in bottom for v in top})


def set_twist(surface: FlatSurface, j: int, twist: RationalLike) -> FlatSurface:
    cyl = surface.cylinders[j]
    new = replace(cyl, twist=as_rational(twist) % cyl.circ)
    return FlatSurface(surface.cylinders[:j] + (new,) + surface.cylinders[j + 1 :], surface.segments, surface.labels)


# vertical tracing, rotation and isomorphism live in a companion module to keep this one readable
from staircase._vertical import (  # noqa: E402
    CylinderDecomposition,
    NonPeriodic,
    Rectangle,
    VerticalCylinder,
    isomorphic,
    rot,
    trace_vertical,
)
