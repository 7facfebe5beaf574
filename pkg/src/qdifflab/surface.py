"""Graded marked surfaces presented by full formal arc systems.

An arc system is given by its polygons.  Every polygon lists its sides in a
fixed cyclic direction (the same for all polygons); exactly one side is the
boundary segment ``"B"`` and the remaining sides are arc indices.  The arc
sides are read as ``gamma_1, ..., gamma_m`` starting right after the boundary
segment, and ``degrees[k]`` is the intersection index at the polygon's marked
point between the closed arcs dual to ``gamma_{k+1}`` and ``gamma_{k+2}``.

The arc orientations needed for gluing are implicit: an arc is oriented along
its first occurrence and its second occurrence traverses it backwards, which
is the only possibility on an oriented surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

BOUNDARY = "B"


class SurfaceError(ValueError):
    """Raised for inconsistent surface or arc-system input."""


@dataclass(frozen=True)
class MarkedSurfaceData:
    """Numerical data ``(g, b, k, l, LP)`` of a graded marked surface."""

    genus: int
    boundary_orders: tuple[int, ...]
    boundary_indices: tuple[int, ...]
    lp_data: Any = None

    def __post_init__(self):
        object.__setattr__(self, "boundary_orders", tuple(int(k) for k in self.boundary_orders))
        object.__setattr__(self, "boundary_indices", tuple(int(x) for x in self.boundary_indices))
        problems = self.violations()
        if problems:
            raise SurfaceError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if self.genus < 0:
            out.append(f"genus must be nonnegative, got {self.genus}")
        b = len(self.boundary_orders)
        if b < 1:
            out.append("at least one boundary component is required")
        if b != len(self.boundary_indices):
            out.append("boundary_orders and boundary_indices differ in length")
        if any(k < 1 for k in self.boundary_orders):
            out.append("every boundary component needs at least one marked point")
        if sum(self.boundary_indices) != 4 - 4 * self.genus:
            out.append(
                f"sum of indices is {sum(self.boundary_indices)}, expected {4 - 4 * self.genus}"
            )
        if self.genus == 0 and self.boundary_orders == (2,):
            out.append("the disk with two marked points is excluded")
        return out

    @property
    def b(self) -> int:
        return len(self.boundary_orders)

    @property
    def aleph(self) -> int:
        """Total number of marked points."""
        return sum(self.boundary_orders)

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.b

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "b": self.b,
            "k": list(self.boundary_orders),
            "l": list(self.boundary_indices),
            "aleph": self.aleph,
            "hat_rank": hat_rank(self),
            "lp_data": self.lp_data,
        }


@dataclass(frozen=True)
class Polygon:
    sides: tuple  # entries are BOUNDARY or arc indices
    degrees: tuple[int, ...]

    @property
    def arc_sides(self) -> tuple[int, ...]:
        """Arc sides in order, starting right after the boundary segment."""
        sides = list(self.sides)
        if sides.count(BOUNDARY) != 1:
            return tuple(s for s in sides if s != BOUNDARY)
        j = sides.index(BOUNDARY)
        rot = sides[j + 1:] + sides[:j]
        return tuple(rot)


@dataclass(frozen=True)
class ArcSystem:
    n_arcs: int
    polygons: tuple[Polygon, ...]
    labels: tuple[str, ...] = field(default=())

    @classmethod
    def from_lists(cls, polygons: Sequence[tuple[Sequence, Sequence[int]]],
                   n_arcs: int | None = None, labels: Sequence[str] = ()) -> "ArcSystem":
        polys = []
        for sides, degs in polygons:
            sides = tuple(s if s == BOUNDARY else int(s) for s in sides)
            polys.append(Polygon(sides, tuple(int(d) for d in degs)))
        if n_arcs is None:
            n_arcs = 1 + max((s for p in polys for s in p.sides if s != BOUNDARY), default=-1)
        return cls(n_arcs, tuple(polys), tuple(labels))

    def arc_label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"g{i}"

    def relabel(self, arc_perm: Sequence[int], poly_perm: Sequence[int] | None = None) -> "ArcSystem":
        """Rename arc ``i`` to ``arc_perm[i]`` and reorder polygons."""
        polys = [Polygon(tuple(s if s == BOUNDARY else arc_perm[s] for s in p.sides), p.degrees)
                 for p in self.polygons]
        if poly_perm is not None:
            polys = [polys[i] for i in poly_perm]
        labels = ()
        if self.labels:
            new = [""] * self.n_arcs
            for i, lab in enumerate(self.labels):
                new[arc_perm[i]] = lab
            labels = tuple(new)
        return ArcSystem(self.n_arcs, tuple(polys), labels)


def load_arc_system(data: dict) -> tuple[ArcSystem, int]:
    """Parse the JSON surface format; returns the arc system and the genus."""
    try:
        polys = [(p["sides"], p.get("degrees", [])) for p in data["polygons"]]
        n_arcs = data.get("arcs")
        labels = ()
        if isinstance(n_arcs, list):
            labels = tuple(str(a) for a in n_arcs)
            n_arcs = len(n_arcs)
        sysm = ArcSystem.from_lists(polys, n_arcs, labels)
        return sysm, int(data.get("genus", 0))
    except (KeyError, TypeError) as exc:
        raise SurfaceError(f"malformed surface file: {exc!r}") from exc


def dump_arc_system(sysm: ArcSystem, genus: int = 0) -> str:
    arcs = list(sysm.labels) if sysm.labels else sysm.n_arcs
    return json.dumps({
        "genus": genus,
        "arcs": arcs,
        "polygons": [{"sides": list(p.sides), "degrees": list(p.degrees)} for p in sysm.polygons],
    }, indent=2)


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class _Glued:
    """Cell structure obtained by gluing the polygons along their arc sides."""

    corner_vertex: dict  # (polygon, corner) -> vertex id
    vertices: list
    components: list     # list of lists of polygon indices whose B lies on the component
    comp_of_vertex: dict


def _glue(sysm: ArcSystem) -> _Glued:
    uf = _UnionFind()
    seen: dict[int, tuple[int, int]] = {}
    for p, poly in enumerate(sysm.polygons):
        N = len(poly.sides)
        for j, s in enumerate(poly.sides):
            uf.find((p, j))
            if s == BOUNDARY:
                continue
            if s not in seen:
                seen[s] = (p, j)
            else:
                q, i = seen[s]
                Nq = len(sysm.polygons[q].sides)
                uf.union((q, i), (p, (j + 1) % N))
                uf.union((q, (i + 1) % Nq), (p, j))
    corner_vertex = {}
    for p, poly in enumerate(sysm.polygons):
        for j in range(len(poly.sides)):
            corner_vertex[(p, j)] = uf.find((p, j))
    vertices = sorted(set(corner_vertex.values()))
    # boundary segments join consecutive midpoints; components are the cycles
    buf = _UnionFind()
    seg_ends = {}
    for p, poly in enumerate(sysm.polygons):
        N = len(poly.sides)
        for j, s in enumerate(poly.sides):
            if s == BOUNDARY:
                a, b = corner_vertex[(p, j)], corner_vertex[(p, (j + 1) % N)]
                buf.union(("v", a), ("v", b))
                seg_ends[p] = (a, b)
    for v in vertices:
        buf.find(("v", v))
    comps: dict = {}
    for p in sorted(seg_ends):
        comps.setdefault(buf.find(("v", seg_ends[p][0])), []).append(p)
    roots = sorted(comps, key=lambda r: min(comps[r]))
    comp_index = {r: i for i, r in enumerate(roots)}
    comp_of_vertex = {v: comp_index.get(buf.find(("v", v)), -1) for v in vertices}
    return _Glued(corner_vertex, vertices, [comps[r] for r in roots], comp_of_vertex)


def validate_arc_system(sysm: ArcSystem, surf: MarkedSurfaceData | None = None,
                        genus: int | None = None) -> list[str]:
    """Return every structural violation found (empty list means valid)."""
    out: list[str] = []
    counts = [0] * sysm.n_arcs
    for p, poly in enumerate(sysm.polygons):
        nb = sum(1 for s in poly.sides if s == BOUNDARY)
        if nb != 1:
            out.append(f"polygon {p}: not full formal ({nb} boundary segments)")
        arcs = [s for s in poly.sides if s != BOUNDARY]
        if not arcs:
            out.append(f"polygon {p}: no arc sides")
        for s in arcs:
            if not 0 <= s < sysm.n_arcs:
                out.append(f"polygon {p}: unknown arc {s}")
            else:
                counts[s] += 1
        if len(poly.degrees) != max(len(arcs) - 1, 0):
            out.append(f"polygon {p}: expected {max(len(arcs) - 1, 0)} angle degrees, "
                       f"got {len(poly.degrees)}")
    for i, c in enumerate(counts):
        if c != 2:
            out.append(f"arc {i}: appears on {c} polygon sides, expected 2")
    if out:
        return out
    glued = _glue(sysm)
    for v in glued.vertices:
        if glued.comp_of_vertex[v] < 0:
            out.append(f"vertex at polygon {v[0]} corner {v[1]} is not on the boundary")
    if out:
        return out
    b = len(glued.components)
    chi = len(sysm.polygons) - sysm.n_arcs
    g = surf.genus if surf is not None else genus
    if surf is not None:
        if b != surf.b:
            out.append(f"glued surface has {b} boundary components, data says {surf.b}")
        ks = sorted(len(c) for c in glued.components)
        if ks != sorted(surf.boundary_orders):
            out.append(f"marked points per component {ks} disagree with {sorted(surf.boundary_orders)}")
    if g is not None and chi != 2 - 2 * g - b:
        out.append(f"Euler characteristic mismatch: #polygons - #arcs = {chi}, "
                   f"but genus {g} with {b} boundary components gives {2 - 2 * g - b}")
    if g is None and (2 - b - chi) % 2:
        out.append(f"Euler characteristic {chi} has the wrong parity for {b} boundary components")
    return out


def _component_data(sysm: ArcSystem) -> tuple[list[int], list[int]]:
    """Orders and indices per boundary component.

    Uses the corner rule: in a closed-arc polygon with ``N`` sides the corner
    indices sum to ``N - 2``.  Each midpoint vertex of the open-arc cell
    structure is the centre of one closed-arc polygon whose interior corners are
    the arc-arc corners at that vertex.
    """
    glued = _glue(sysm)
    ncomp = len(glued.components)
    ks = [len(c) for c in glued.components]
    two_minus_l = [0] * ncomp
    comp_of_poly = {p: i for i, c in enumerate(glued.components) for p in c}
    for p, poly in enumerate(sysm.polygons):
        two_minus_l[comp_of_poly[p]] += sum(poly.degrees) - 1
    valence = {v: 0 for v in glued.vertices}
    interior = {v: 0 for v in glued.vertices}
    for p, poly in enumerate(sysm.polygons):
        N = len(poly.sides)
        for j, s in enumerate(poly.sides):
            if s != BOUNDARY:
                valence[glued.corner_vertex[(p, j)]] += 1
                valence[glued.corner_vertex[(p, (j + 1) % N)]] += 1
        jb = poly.sides.index(BOUNDARY)
        # corner between arc sides k and k+1 (after the boundary) sits at position jb+k+2
        for k, d in enumerate(poly.degrees):
            interior[glued.corner_vertex[(p, (jb + k + 2) % N)]] += d
    for v in glued.vertices:
        # each arc end is seen once from each of the arc's two sides
        n_sides = 1 + valence[v] // 2
        two_minus_l[glued.comp_of_vertex[v]] += n_sides - 2 - interior[v]
    return ks, [2 - x for x in two_minus_l]


def numerical_data(sysm: ArcSystem, g: int = 0, lp_data: Any = None) -> MarkedSurfaceData:
    problems = validate_arc_system(sysm, genus=g)
    if problems:
        raise SurfaceError("; ".join(problems))
    ks, ls = _component_data(sysm)
    if sum(ls) != 4 - 4 * g:
        raise SurfaceError(f"indices {ls} sum to {sum(ls)}, expected {4 - 4 * g}")
    return MarkedSurfaceData(g, tuple(ks), tuple(ls), lp_data)


def boundary_walk_indices(sysm: ArcSystem) -> list[int]:
    """Independent recomputation of the indices by walking each boundary.

    Builds the closed-arc polygons explicitly, grades their two boundary
    corners so that the corner rule holds (all slack on the first one), then
    sums ``i_Y(prev, next) - 1`` over the marked points of each component with
    the index at ``Y`` composed additively across the fan of closed arcs.
    """
    glued = _glue(sysm)
    comp_of_poly = {p: i for i, c in enumerate(glued.components) for p in c}
    # closed-arc polygon around midpoint v: sides = 1 boundary arc + arc ends at v
    corners_at = {v: [] for v in glued.vertices}  # (polygon, kind, value)
    for p, poly in enumerate(sysm.polygons):
        N = len(poly.sides)
        jb = poly.sides.index(BOUNDARY)
        m = N - 1
        for c in range(N):
            v = glued.corner_vertex[(p, (jb + c) % N)]
            if c == 0:
                corners_at[v].append((p, "end", None))     # last arc -> boundary
            elif c == 1:
                corners_at[v].append((p, "start", None))   # boundary -> first arc
            else:
                corners_at[v].append((p, "inner", poly.degrees[c - 2]))
        assert len(poly.degrees) == m - 1
    boundary_corner = {}
    for v, cs in corners_at.items():
        arc_ends = sum(1 for _ in cs) - 1  # corners around v = arc ends + 1
        n_sides = 1 + arc_ends
        slack = n_sides - 2 - sum(val for _, kind, val in cs if kind == "inner")
        edge = [(p, kind) for p, kind, _ in cs if kind != "inner"]
        for idx, key in enumerate(sorted(edge)):
            boundary_corner[key] = slack if idx == 0 else 0
    out = [0] * len(glued.components)
    for p, poly in enumerate(sysm.polygons):
        # i_Y(prev boundary arc, next boundary arc) = corner(start) + fan + corner(end)
        i_y = boundary_corner[(p, "start")] + sum(poly.degrees) + boundary_corner[(p, "end")]
        out[comp_of_poly[p]] += i_y - 1
    return [2 - w for w in out]


def hat_rank(surf: MarkedSurfaceData) -> int:
    return 2 * surf.genus - 2 + surf.b + sum(surf.boundary_orders)


# ---------------------------------------------------------------- corpus

def disk_chord_system(n_points: int, chords: Sequence[tuple[int, int]],
                      degrees: dict | None = None,
                      labels: Sequence[str] = ()) -> ArcSystem:
    """Arc system on a disk from non-crossing chords between boundary points.

    Points ``0..n_points-1`` sit counterclockwise on the circle; chord ``i``
    is the closed arc dual to open arc ``i``.  ``degrees`` maps a point to the
    list of angle degrees between its consecutive chords (default zeros).
    """
    degrees = degrees or {}
    at: dict[int, list[tuple[float, int]]] = {y: [] for y in range(n_points)}
    for i, (a, b) in enumerate(chords):
        at[a].append((((b - a) % n_points), i))
        at[b].append((((a - b) % n_points), i))
    polys = []
    for y in range(n_points):
        # clockwise at y: chords ordered by decreasing counterclockwise offset
        fan = [i for _, i in sorted(at[y], reverse=True)]
        degs = list(degrees.get(y, [0] * max(len(fan) - 1, 0)))
        polys.append(([BOUNDARY] + fan, degs))
    return ArcSystem.from_lists(polys, len(chords), labels)


def a_n_fan(n: int, degrees: Sequence[int] | None = None) -> ArcSystem:
    """Type A_n: n+1 marked points with all n arcs from point 0."""
    chords = [(0, j) for j in range(n, 0, -1)]
    degs = {0: list(degrees) if degrees is not None else [0] * (n - 1)}
    return disk_chord_system(n + 1, chords, degs)


def qr_system(degrees: Sequence[int] = (0, 0, 0), d45: int = 0, d56: int = 0) -> ArcSystem:
    """Seven marked points, four arcs from one point and a chain of two more."""
    # points 0..6 counterclockwise; Y = 5; eta1..eta4 go to 4,3,2,1; eta5 = 1-0, eta6 = 0-6
    chords = [(5, 4), (5, 3), (5, 2), (5, 1), (1, 0), (0, 6)]
    sysm = disk_chord_system(7, chords, labels=[f"eta{i}" for i in range(1, 7)])
    polys = []
    for y, poly in enumerate(sysm.polygons):
        fan = list(poly.arc_sides)
        if y == 5:
            degs = list(degrees)
        elif len(fan) == 2 and y == 1:
            degs = [d45]
        elif len(fan) == 2 and y == 0:
            degs = [d56]
        else:
            degs = [0] * (len(fan) - 1)
        polys.append(([BOUNDARY] + fan, degs))
    return ArcSystem.from_lists(polys, 6, sysm.labels)


def annulus_system(p: int, q: int, degree: int = 1) -> ArcSystem:
    """Annulus with p outer and q inner marked points.

    Arcs ``0..p+q-1`` all join the outer and inner boundary.  Each polygon
    carries two arc sides and one angle; with ``degree = 1`` every arrow of the
    resulting affine quiver has degree zero.
    """
    n = p + q
    # arc i sits between polygons; walk: outer polygons use arcs (i, i+1) in one
    # rotational direction, inner polygons in the other.
    polys = []
    kinds = ["o"] * p + ["i"] * q
    # choose a cyclic arrangement of the n arcs around the annulus; polygon j
    # lies between arcs j and j+1 and touches the outer or inner boundary.
    for j in range(n):
        a, b = j, (j + 1) % n
        if kinds[j] == "o":
            polys.append(([BOUNDARY, a, b], [degree]))
        else:
            polys.append(([BOUNDARY, b, a], [degree]))
    return ArcSystem.from_lists(polys, n)


def infer_genus(sysm: ArcSystem) -> int:
    """Genus forced by the Euler characteristic and the number of boundary cycles."""
    problems = validate_arc_system(sysm)
    if problems:
        raise SurfaceError("; ".join(problems))
    b = len(_glue(sysm).components)
    chi = len(sysm.polygons) - sysm.n_arcs
    twice = 2 - b - chi
    if twice < 0 or twice % 2:
        raise SurfaceError(f"no orientable surface has chi={chi} with {b} boundary components")
    return twice // 2
