"""Vertical flow on cylinder diagrams: tracing, rotation by a quarter turn, isomorphism."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from staircase.flatsurf import (
    BOTTOM,
    TOP,
    Cylinder,
    FlatSurface,
    Point,
    VerticalNotPeriodic,
    _freeze,
    _merge_regular,
    _require_valid,
    vertex_classes,
)

UP, DOWN = 1, -1


@dataclass(frozen=True)
class Rectangle:
    """Piece of horizontal cylinder ``cyl`` between two consecutive vertical cuts.

    ``left`` and ``right`` are bottom-circle coordinates; ``right`` may wrap.
    """

    cyl: int
    left: Fraction
    width: Fraction
    height: Fraction


@dataclass(frozen=True)
class VerticalCylinder:
    circumference: Fraction
    width: Fraction
    chain: tuple[tuple[int, int], ...]  # (rectangle index, UP or DOWN)


@dataclass(frozen=True)
class CylinderDecomposition:
    rectangles: tuple[Rectangle, ...]
    cylinders: tuple[VerticalCylinder, ...]
    cuts: tuple[tuple[int, Fraction], ...]

    @property
    def circumferences(self) -> list[Fraction]:
        return sorted(c.circumference for c in self.cylinders)

    @property
    def area(self) -> Fraction:
        return sum((c.circumference * c.width for c in self.cylinders), Fraction(0))


@dataclass(frozen=True)
class NonPeriodic:
    start: Point
    max_steps: int


def _stop_points(surface: FlatSurface) -> set[Point]:
    labelled = {p for _, p in surface.labels}
    stops = set()
    for cls in vertex_classes(surface):
        if len(cls) != 2 or labelled.intersection(cls):
            stops.update(cls)
    return stops


def _follow(surface: FlatSurface, stops, cyl, side, offset, direction, max_steps, cuts):
    """Trace a vertical ray entering cylinder ``cyl`` from circle ``side``; record the cuts it makes."""
    start = Point(cyl, side, offset)
    for _ in range(max_steps):
        c = surface.cylinders[cyl]
        if direction == UP:
            bottom_u = offset % c.circ
            offset = (offset - c.twist) % c.circ
            side = TOP
        else:
            offset = (offset + c.twist) % c.circ
            bottom_u = offset
            side = BOTTOM
        cuts.add((cyl, bottom_u))
        seg, d = surface.locate(cyl, side, offset)
        if d == 0 and Point(cyl, side, seg.start) in stops:
            return None
        other, d2 = surface.glue(seg, d)
        cyl, offset = other.cyl, (other.start + d2) % surface.circ(other.cyl)
        if other.side == side:
            direction = -direction
    return NonPeriodic(start, max_steps)


def trace_vertical(surface: FlatSurface, max_steps: int = 10_000) -> CylinderDecomposition | NonPeriodic:
    """Decompose the vertical direction into cylinders, or report a non-closing separatrix."""
    stops = _stop_points(surface)
    cuts: set[tuple[int, Fraction]] = set()
    for p in sorted(stops):
        direction = UP if p.side == BOTTOM else DOWN
        res = _follow(surface, stops, p.cyl, p.side, p.offset, direction, max_steps, cuts)
        if res is not None:
            return res

    rects: list[Rectangle] = []
    by_left: dict[tuple[int, Fraction], int] = {}
    for i, cyl in enumerate(surface.cylinders):
        us = sorted(u for j, u in cuts if j == i)
        if not us:
            raise VerticalNotPeriodic(NonPeriodic(Point(i, BOTTOM, Fraction(0)), max_steps))
        for k, u in enumerate(us):
            nxt = us[(k + 1) % len(us)]
            width = (nxt - u) % cyl.circ or cyl.circ
            by_left[(i, u)] = len(rects)
            rects.append(Rectangle(i, u, width, cyl.height))
    cut_list = sorted(cuts)
    starts_of = {i: sorted(u for j, u in cuts if j == i) for i in range(len(surface.cylinders))}

    def rect_at(cyl: int, u: Fraction) -> int:
        # rectangle whose bottom interval starts at the cut at or left of u
        us = starts_of[cyl]
        return by_left[(cyl, us[bisect_right(us, u) - 1])]

    def step(r: int, direction: int) -> tuple[int, int]:
        rect = rects[r]
        c = surface.cylinders[rect.cyl]
        # image of the interior point at the middle of the exit edge
        mid = rect.left + rect.width / 2
        if direction == UP:
            side, off = TOP, (mid - c.twist) % c.circ
        else:
            side, off = BOTTOM, mid % c.circ
        seg, d = surface.locate(rect.cyl, side, off)
        other, d2 = surface.glue(seg, d)
        cc = surface.cylinders[other.cyl]
        pos = (other.start + d2) % cc.circ
        if other.side == side:
            direction = -direction
        bottom_pos = pos if other.side == BOTTOM else (pos + cc.twist) % cc.circ
        nr = rect_at(other.cyl, bottom_pos)
        nrect = rects[nr]
        if (bottom_pos - nrect.left) % cc.circ * 2 != nrect.width:
            raise AssertionError("vertical rectangles do not line up")
        return nr, direction

    seen = set()
    vcyls = []
    for r0 in range(len(rects)):
        if r0 in seen:
            continue
        chain = []
        r, direction = r0, UP
        while True:
            if r in seen:
                raise AssertionError("rectangle visited twice by a vertical cylinder")
            seen.add(r)
            chain.append((r, direction))
            r, direction = step(r, direction)
            if r == r0:
                if direction != UP:
                    raise AssertionError("vertical cylinder closes with reversed orientation")
                break
        width = rects[r0].width
        if any(rects[k].width != width for k, _ in chain):
            raise AssertionError("vertical cylinder with uneven width")
        circ = sum((rects[k].height for k, _ in chain), Fraction(0))
        vcyls.append(VerticalCylinder(circ, width, tuple(chain)))
    return CylinderDecomposition(tuple(rects), tuple(vcyls), tuple(cut_list))


def rot(surface: FlatSurface, max_steps: int = 10_000) -> FlatSurface:
    """Rotate by a quarter turn: the vertical cylinders become the horizontal ones."""
    dec = trace_vertical(surface, max_steps)
    if isinstance(dec, NonPeriodic):
        raise VerticalNotPeriodic(dec)
    rects = dec.rectangles
    cylinders = []
    raw = []
    pieces_by_cut: dict[tuple[int, Fraction], list[dict]] = {}
    origin_of = {}  # id(piece) -> original point at the piece start
    for n, vc in enumerate(dec.cylinders):
        cylinders.append(Cylinder(vc.circumference, vc.width, Fraction(0)))
        sigma = Fraction(0)
        for r, direction in vc.chain:
            rect = rects[r]
            c = surface.cylinders[rect.cyl]
            right = (rect.left + rect.width) % c.circ
            left_line, right_line = (rect.left, right) if direction == UP else (right, rect.left)
            start = (-sigma - rect.height) % vc.circumference
            for side, u in ((BOTTOM, left_line), (TOP, right_line)):
                piece = dict(cyl=n, side=side, start=start, length=rect.height)
                raw.append(piece)
                pieces_by_cut.setdefault((rect.cyl, u), []).append(piece)
                # larger sigma end is the piece start
                if direction == UP:
                    origin_of[id(piece)] = Point(rect.cyl, TOP, (u - c.twist) % c.circ)
                else:
                    origin_of[id(piece)] = Point(rect.cyl, BOTTOM, u)
            sigma += rect.height
    for key, pair in pieces_by_cut.items():
        if len(pair) != 2:
            raise AssertionError(f"cut {key} borders {len(pair)} rectangle sides")
        a, b = pair
        a["partner"], b["partner"] = b, a

    labels = []
    if surface.labels:
        class_of = {}
        for k, cls in enumerate(vertex_classes(surface)):
            for p in cls:
                class_of[p] = k
        candidates: dict[int, list[Point]] = {}
        for piece in raw:
            o = origin_of[id(piece)]
            seg, d = surface.locate(o.cyl, o.side, o.offset)
            if d == 0:
                k = class_of[Point(o.cyl, o.side, seg.start)]
                candidates.setdefault(k, []).append(Point(piece["cyl"], piece["side"], piece["start"]))
        for name, p in surface.labels:
            labels.append((name, min(candidates[class_of[p]])))

    out = _freeze(cylinders, raw, ())
    out = FlatSurface(out.cylinders, out.segments, tuple(labels))
    return _require_valid(_merge_regular(out))


# ---------------------------------------------------------------------------
# isomorphism


def _normalized(surface: FlatSurface):
    """Per cylinder: (circ, height, bottom segments, top segments) with zero twist.

    Segments are ``(start, length, id)``; top offsets are shifted by the twist.
    """
    out = []
    for i, c in enumerate(surface.cylinders):
        bottom = [(g.start, g.length, g.id) for g in surface.circle(i, BOTTOM)]
        top = [((g.start + c.twist) % c.circ, g.length, g.id) for g in surface.circle(i, TOP)]
        out.append((c.circ, c.height, bottom, top))
    return out


def _transform(circ, flip, alpha, side, start, length):
    if not flip:
        return side, (start - alpha) % circ
    return (TOP if side == BOTTOM else BOTTOM), (-start - length - alpha) % circ


def _point_transform(circ, flip, alpha, side, x):
    if not flip:
        return side, (x - alpha) % circ
    return (TOP if side == BOTTOM else BOTTOM), (-x - alpha) % circ


def _cylinder_maps(ca, cb):
    circ, h, bot_a, top_a = ca
    circ_b, h_b, bot_b, top_b = cb
    if circ != circ_b or h != h_b:
        return []
    keys_b = {BOTTOM: {(s, l) for s, l, _ in bot_b}, TOP: {(s, l) for s, l, _ in top_b}}
    maps = []
    for flip in (False, True):
        src = bot_a
        dst_side = TOP if flip else BOTTOM
        if len(src) != len(keys_b[dst_side]) or len(top_a) != len(keys_b[TOP if dst_side == BOTTOM else BOTTOM]):
            continue
        s0, l0, _ = src[0]
        for sb, lb in keys_b[dst_side]:
            if lb != l0:
                continue
            alpha = ((-s0 - l0 if flip else s0) - sb) % circ
            ok = True
            for side, segs in ((BOTTOM, bot_a), (TOP, top_a)):
                for s, l, _ in segs:
                    ns, nst = _transform(circ, flip, alpha, side, s, l)
                    if (nst, l) not in keys_b[ns]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                maps.append((flip, alpha))
    return maps


def isomorphic(a: FlatSurface, b: FlatSurface, labels: bool = True) -> bool:
    """Cut-and-paste equality of two cylinder diagrams.

    Cylinders may be permuted, turned by a half-turn, and have their circle
    origins moved.  With ``labels`` the named points must land in the same
    vertex classes.
    """
    a = _merge_regular(a)
    b = _merge_regular(b)
    if len(a.cylinders) != len(b.cylinders) or len(a.segments) != len(b.segments):
        return False
    if labels and sorted(n for n, _ in a.labels) != sorted(n for n, _ in b.labels):
        return False
    na, nb = _normalized(a), _normalized(b)
    options = []
    for i in range(len(na)):
        opts = [(j, f, al) for j in range(len(nb)) for f, al in _cylinder_maps(na[i], nb[j])]
        if not opts:
            return False
        options.append(opts)

    lookup_b = {}
    for j, (circ, _, bot, top) in enumerate(nb):
        for side, segs in ((BOTTOM, bot), (TOP, top)):
            for s, l, gid in segs:
                lookup_b[(j, side, s)] = gid
    seg_a = {}
    for i, (circ, _, bot, top) in enumerate(na):
        for side, segs in ((BOTTOM, bot), (TOP, top)):
            for s, l, gid in segs:
                seg_a[gid] = (i, side, s, l)

    class_b = {}
    if labels:
        for k, cls in enumerate(vertex_classes(b)):
            for p in cls:
                class_b[p] = k
    label_b = dict(b.labels)

    def norm_point(surface, p):
        c = surface.cylinders[p.cyl]
        return p.side, (p.offset + c.twist) % c.circ if p.side == TOP else p.offset

    for choice in product(*options):
        if len({j for j, _, _ in choice}) != len(choice):
            continue
        mapping = {}
        for gid, (i, side, s, l) in seg_a.items():
            j, f, al = choice[i]
            ns, nst = _transform(na[i][0], f, al, side, s, l)
            mapping[gid] = lookup_b[(j, ns, nst)]
        if any(mapping[g.partner] != b.segments[mapping[g.id]].partner for g in a.segments):
            continue
        if labels:
            ok = True
            for name, p in a.labels:
                j, f, al = choice[p.cyl]
                side, x = norm_point(a, p)
                ns, nx = _point_transform(na[p.cyl][0], f, al, side, x)
                cb = b.cylinders[j]
                off = (nx - cb.twist) % cb.circ if ns == TOP else nx
                q = Point(j, ns, off)
                seg, d = b.locate(q.cyl, q.side, q.offset)
                if d != 0 or class_b[Point(j, ns, seg.start)] != class_b[_canon(b, label_b[name])]:
                    ok = False
                    break
            if not ok:
                continue
        return True
    return False


def _canon(surface: FlatSurface, p: Point) -> Point:
    seg, d = surface.locate(p.cyl, p.side, p.offset)
    return Point(p.cyl, p.side, seg.start)
