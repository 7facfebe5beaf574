"""Graded quivers with superpotential and their Ginzburg differentials.

Paths compose left to right and are stored as tuples of arrow names; an
element of the path algebra is a ``dict`` from paths to integer coefficients.
Signs follow these rules, where ``|x|`` is the first degree (or the collapsed
degree after :func:`n_reduce`):

* cyclic derivative: for a cyclic word ``x1 x2 x3`` the derivative with respect
  to ``x_i`` is ``(-1)^{|y|} y z`` where ``y z`` is the word read on from
  ``x_i``; that is, ``d(abc) = (-1)^{|a|} ab + (-1)^{|b|} bc + (-1)^{|c|} ca``
  with the three summands attached to ``c``, ``a`` and ``b``;
* commutator: ``[a, a*] = (-1)^{|a|} a a* + (-1)^{|a*|} a* a``, summed over the
  original arrows;
* Leibniz rule: ``d(xy) = d(x) y + (-1)^{|x|} x d(y)``.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable

from .surface import ArcSystem, SurfaceError, validate_arc_system

Path = tuple[str, ...]
Element = dict  # Path -> int


class QuiverError(ValueError):
    pass


class DegreeError(QuiverError):
    pass


@dataclass(frozen=True)
class Arrow:
    name: str
    source: int
    target: int
    bidegree: tuple[int, int]
    kind: str  # "original", "dual" or "loop"
    partner: str | None = None
    polygon: int | None = None
    span: tuple[int, int] | None = None  # (i, j), 1-based positions in the polygon


@dataclass(frozen=True)
class GradedQuiver:
    vertices: tuple[int, ...]
    arrows: tuple[Arrow, ...]
    relations: tuple[tuple[str, str], ...] = ()
    extended: bool = False
    collapse_N: int | None = None
    vertex_labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {a.name: a for a in self.arrows})

    def arrow(self, name: str) -> Arrow:
        return self._by_name[name]

    def degree(self, name: str) -> int:
        """Degree used for signs: first degree, or ``a + bN`` once collapsed."""
        a, b = self._by_name[name].bidegree
        return a + b * self.collapse_N if self.collapse_N is not None else a

    def path_bidegree(self, path: Iterable[str]) -> tuple[int, int]:
        a = b = 0
        for x in path:
            da, db = self._by_name[x].bidegree
            a, b = a + da, b + db
        return a, b

    def path_degree(self, path: Iterable[str]) -> int:
        return sum(self.degree(x) for x in path)

    def originals(self) -> list[Arrow]:
        return [a for a in self.arrows if a.kind == "original"]

    def level_zero(self) -> list[Arrow]:
        """Original arrows coming from consecutive arc sides."""
        return [a for a in self.originals() if a.span and a.span[1] == a.span[0] + 1]

    def is_path(self, path: Path) -> bool:
        return all(self._by_name[x].target == self._by_name[y].source
                   for x, y in zip(path, path[1:]))

    def to_dict(self) -> dict:
        out = {
            "vertices": list(self.vertices),
            "arrows": [
                {"name": a.name, "source": a.source, "target": a.target,
                 "bidegree": list(a.bidegree), "kind": a.kind, "partner": a.partner}
                for a in self.arrows
            ],
            "relations": [list(r) for r in self.relations],
            "extended": self.extended,
        }
        if self.vertex_labels:
            out["vertex_labels"] = list(self.vertex_labels)
        if self.collapse_N is not None:
            out["N"] = self.collapse_N
            for entry in out["arrows"]:
                entry["degree"] = self.degree(entry["name"])
        return out


def build_quiver(sysm: ArcSystem) -> GradedQuiver:
    """Original arrows ``a_ij`` for every polygon and pair ``i < j``."""
    problems = validate_arc_system(sysm)
    if problems:
        raise SurfaceError("; ".join(problems))
    arrows = []
    for p, poly in enumerate(sysm.polygons):
        sides = poly.arc_sides
        m = len(sides)
        for i in range(m):
            for j in range(i + 1, m):
                d_ij = sum(poly.degrees[i:j])
                arrows.append(Arrow(f"a{p}_{i + 1}_{j + 1}", sides[i], sides[j], (1 - d_ij, 0),
                                    "original", polygon=p, span=(i + 1, j + 1)))
    q = GradedQuiver(tuple(range(sysm.n_arcs)), tuple(arrows), vertex_labels=sysm.labels)
    rels = []
    for x, y in itertools.product(q.level_zero(), repeat=2):
        if x.target == y.source and x.polygon != y.polygon:
            rels.append((x.name, y.name))
    return replace(q, relations=tuple(rels))


def _dual_name(name: str) -> str:
    return "s" + name[1:]


def extend_quiver(q: GradedQuiver) -> GradedQuiver:
    """Add a dual for every original arrow and a loop at every vertex."""
    if q.extended or any(a.kind != "original" for a in q.arrows):
        raise QuiverError("quiver is already extended")
    arrows = []
    for a in q.arrows:
        dual = _dual_name(a.name)
        arrows.append(replace(a, partner=dual))
        arrows.append(Arrow(dual, a.target, a.source, (2 - a.bidegree[0], -1), "dual",
                            partner=a.name, polygon=a.polygon, span=a.span))
    for v in q.vertices:
        arrows.append(Arrow(f"L{v}", v, v, (1, -1), "loop"))
    return replace(q, arrows=tuple(arrows), extended=True)


def rotation_normal_form(word: Path, degree) -> tuple[int, Path]:
    """Lexicographically least rotation of a cyclic word, with its Koszul sign."""
    best = None
    for i in range(len(word)):
        rot = word[i:] + word[:i]
        if best is None or rot < best[1]:
            head = sum(degree(x) for x in word[:i])
            tail = sum(degree(x) for x in word[i:])
            best = ((-1) ** ((head * tail) % 2), rot)
    return best


@dataclass(frozen=True)
class Superpotential:
    terms: tuple[tuple[int, Path], ...]

    def as_dict(self) -> dict:
        return {"terms": [[c, list(w)] for c, w in self.terms]}


def superpotential(sysm: ArcSystem, q: GradedQuiver | None = None) -> Superpotential:
    """Sum over polygons of ``a_ij a_jk a*_ki`` for ``i < j < k``."""
    if q is None:
        q = extend_quiver(build_quiver(sysm))
    terms: dict[Path, int] = defaultdict(int)
    for p, poly in enumerate(sysm.polygons):
        m = len(poly.arc_sides)
        for i, j, k in itertools.combinations(range(1, m + 1), 3):
            word = (f"a{p}_{i}_{j}", f"a{p}_{j}_{k}", f"s{p}_{i}_{k}")
            if not q.is_path(word) or q.arrow(word[0]).source != q.arrow(word[-1]).target:
                raise QuiverError(f"term {word} is not a composable cycle")
            bideg = q.path_bidegree(word)
            if bideg != (3, -1):
                raise DegreeError(f"term {word} has bidegree {bideg}, expected (3, -1)")
            sign, nf = rotation_normal_form(word, q.degree)
            terms[nf] += sign
    return Superpotential(tuple((c, w) for w, c in sorted(terms.items()) if c))


def cyclic_derivative(q: GradedQuiver, W: Superpotential, x: str) -> Element:
    out: Element = defaultdict(int)
    for c, word in W.terms:
        n = len(word)
        for i, y in enumerate(word):
            if y != x:
                continue
            rest = tuple(word[(i + 1 + t) % n] for t in range(n - 1))
            sign = (-1) ** (q.degree(rest[0]) % 2) if rest else 1
            out[rest] += c * sign
    return {p: c for p, c in out.items() if c}


@dataclass(frozen=True)
class GinzburgDGA:
    quiver: GradedQuiver
    potential: Superpotential
    differential: dict = field(hash=False)  # generator name -> Element
    truncation_length: int = 6

    def to_dict(self) -> dict:
        return {
            "quiver": self.quiver.to_dict(),
            "potential": self.potential.as_dict(),
            "truncation_length": self.truncation_length,
            "differential": {
                g: [[c, list(p)] for p, c in sorted(el.items())]
                for g, el in sorted(self.differential.items())
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _loop_images(q: GradedQuiver) -> dict[int, Element]:
    total: dict[int, Element] = {v: defaultdict(int) for v in q.vertices}
    for a in q.originals():
        dual = a.partner
        total[a.source][(a.name, dual)] += (-1) ** (q.degree(a.name) % 2)
        total[a.target][(dual, a.name)] += (-1) ** (q.degree(dual) % 2)
    return {v: {p: c for p, c in el.items() if c} for v, el in total.items()}


def _differential_images(q: GradedQuiver, W: Superpotential) -> dict[str, Element]:
    images: dict[str, Element] = {}
    for a in q.arrows:
        if a.kind != "loop":
            images[a.name] = cyclic_derivative(q, W, a.partner)
    loops = _loop_images(q)
    for v in q.vertices:
        images[f"L{v}"] = loops[v]
    return images


def _check_shift(q: GradedQuiver, images: dict[str, Element]) -> None:
    for g, el in images.items():
        for path in el:
            if not q.is_path(path):
                raise DegreeError(f"d({g}) contains the non-composable word {path}")
            if q.collapse_N is None:
                want = q.path_bidegree((g,))
                want = (want[0] + 1, want[1])
                got = q.path_bidegree(path)
            else:
                want, got = q.degree(g) + 1, q.path_degree(path)
            if got != want:
                raise DegreeError(f"d({g}) term {path} has degree {got}, expected {want}")


def ginzburg_differential(q: GradedQuiver, W: Superpotential,
                          truncation_length: int = 6) -> GinzburgDGA:
    if not q.extended:
        raise QuiverError("the Ginzburg differential needs the extended quiver")
    for c, word in W.terms:
        if q.collapse_N is None and q.path_bidegree(word) != (3, -1):
            raise DegreeError(f"potential term {word} is not homogeneous of bidegree (3, -1)")
        if q.collapse_N is not None and q.path_degree(word) != 3 - q.collapse_N:
            raise DegreeError(f"potential term {word} does not have degree {3 - q.collapse_N}")
    images = _differential_images(q, W)
    _check_shift(q, images)
    return GinzburgDGA(q, W, images, truncation_length)


def apply_d(dga: GinzburgDGA, element: Element) -> Element:
    """Extend the differential to paths by the graded Leibniz rule."""
    q, D, T = dga.quiver, dga.differential, dga.truncation_length
    out: Element = defaultdict(int)
    for path, c in element.items():
        sign = 1
        for i, x in enumerate(path):
            for img, ci in D.get(x, {}).items():
                new = path[:i] + img + path[i + 1:]
                if len(new) <= T:
                    out[new] += c * ci * sign
            if q.degree(x) % 2:
                sign = -sign
    return {p: c for p, c in out.items() if c}


def verify_d_squared(dga: GinzburgDGA) -> list[tuple[str, Element]]:
    """Residues ``d(d(x))`` that fail to vanish, one entry per generator."""
    longest = max((len(p) for el in dga.differential.values() for p in el), default=0)
    if dga.truncation_length < 2 * longest:
        raise ValueError(f"truncation_length {dga.truncation_length} is below {2 * longest}")
    residues = []
    for g in sorted(dga.differential):
        r = apply_d(dga, dga.differential[g])
        if r:
            residues.append((g, r))
    return residues


def collapse_quiver(q: GradedQuiver, N: int) -> GradedQuiver:
    if N < 2:
        raise ValueError("N must be at least 2")
    return replace(q, collapse_N=N)


def n_reduce(dga: GinzburgDGA, N: int) -> GinzburgDGA:
    """Collapse bidegrees ``(a, b)`` to ``a + bN``.

    The differential keeps its words; coefficient signs are re-evaluated with
    the collapsed degrees, which is what keeps ``d^2 = 0`` when ``N`` is odd.
    """
    cq = collapse_quiver(dga.quiver, N)
    return ginzburg_differential(cq, dga.potential, dga.truncation_length)


def build_dga(sysm: ArcSystem, truncation_length: int = 6) -> GinzburgDGA:
    q = extend_quiver(build_quiver(sysm))
    return ginzburg_differential(q, superpotential(sysm, q), truncation_length)
