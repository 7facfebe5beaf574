"""Bipartite matchings between simple zeros and pole components.

White vertices are simple zeros, black vertex ``i`` carries a demand ``k_i``.
A matching uses every white exactly once and every black ``i`` exactly
``k_i`` times.  The peeling induction runs first; when it gets stuck the
answer comes from a max-flow computation, which also produces a Hall-type
certificate when no matching exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .flatgeo import _pmap


class CutError(ValueError):
    pass


def gate_condition(s: complex, k, l) -> bool:
    """``Re(s) >= max_i (k_i + 3 - l_i)``."""
    k, l = list(k), list(l)
    if len(k) != len(l) or not k:
        raise CutError("k and l must be non-empty and of equal length")
    return complex(s).real >= max(ki + 3 - li for ki, li in zip(k, l))


def gate_threshold(k, l) -> int:
    return max(ki + 3 - li for ki, li in zip(k, l))


@dataclass(frozen=True)
class CutGraph:
    """Whites ``0..n_white-1``, blacks ``0..len(k)-1``, edges ``(white, black)``."""

    n_white: int
    k: tuple
    edges: tuple
    labels: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        k = tuple(int(x) for x in self.k)
        edges = tuple(sorted({(int(w), int(b)) for w, b in self.edges}))
        for w, b in edges:
            if not (0 <= w < self.n_white and 0 <= b < len(k)):
                raise CutError(f"edge {(w, b)} out of range")
        if any(x < 0 for x in k):
            raise CutError("demands must be non-negative")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_dict(cls, d: dict) -> "CutGraph":
        return cls(int(d["n_white"]), tuple(d["k"]), tuple(tuple(e) for e in d["edges"]),
                   dict(d.get("labels", {})))

    def to_dict(self) -> dict:
        out = {"n_white": self.n_white, "k": list(self.k), "edges": [list(e) for e in self.edges]}
        if self.labels:
            out["labels"] = dict(self.labels)
        return out

    @property
    def n_black(self) -> int:
        return len(self.k)

    def white_valence(self) -> list[int]:
        v = [0] * self.n_white
        for w, _ in self.edges:
            v[w] += 1
        return v

    def black_valence(self) -> list[int]:
        v = [0] * self.n_black
        for _, b in self.edges:
            v[b] += 1
        return v

    def violations(self) -> list[str]:
        """Failures of the valence invariants and of ``sum k = #whites``."""
        out = []
        for w, v in enumerate(self.white_valence()):
            if v < 1:
                out.append(f"white {w} has valence 0")
        for b, v in enumerate(self.black_valence()):
            if v < self.k[b]:
                out.append(f"black {b} has valence {v} < k = {self.k[b]}")
        if sum(self.k) != self.n_white:
            out.append(f"sum of demands {sum(self.k)} != number of whites {self.n_white}")
        return out


@dataclass
class MatchingResult:
    feasible: bool
    edges: tuple = ()
    method: str = ""
    certificate: dict | None = None
    induction_ok: bool = False
    steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "edges": [list(e) for e in self.edges],
                "method": self.method, "induction_ok": self.induction_ok,
                "certificate": self.certificate, "steps": self.steps}


def is_matching(g: CutGraph, edges) -> bool:
    edges = list(edges)
    if len(set(edges)) != len(edges) or not set(edges) <= set(g.edges):
        return False
    wv = [0] * g.n_white
    bv = [0] * g.n_black
    for w, b in edges:
        wv[w] += 1
        bv[b] += 1
    return all(x == 1 for x in wv) and list(bv) == list(g.k)


def peel_induction(g: CutGraph) -> tuple[tuple | None, list]:
    """The peeling induction with the lowest-index tie-break.

    Returns ``(edges, steps)``; ``edges`` is ``None`` when the induction
    reaches a graph where neither move applies.
    """
    k = list(g.k)
    edges = set(g.edges)
    alive = set(range(g.n_white))
    chosen, steps = [], []
    while alive:
        nbrs = {w: [] for w in alive}
        for w, b in sorted(edges):
            nbrs[w].append(b)
        if any(not nbrs[w] for w in alive):
            steps.append("stuck: isolated white")
            return None, steps
        pendant = [w for w in sorted(alive) if len(nbrs[w]) == 1]
        if pendant:
            w = pendant[0]
            b = nbrs[w][0]
            if k[b] == 0:
                steps.append(f"stuck: white {w} pendant at saturated black {b}")
                return None, steps
            k[b] -= 1
            chosen.append((w, b))
            alive.remove(w)
            edges.discard((w, b))
            steps.append(f"peel white {w} -> black {b}")
            continue
        bval = [0] * g.n_black
        for _, b in edges:
            bval[b] += 1
        over = [b for b in range(g.n_black) if bval[b] > k[b]]
        if not over:
            steps.append("stuck: no over-saturated black")
            return None, steps
        b = over[0]
        e = min(x for x in edges if x[1] == b)
        edges.remove(e)
        steps.append(f"drop edge {e}")
    if any(k):
        steps.append("stuck: unmet demand")
        return None, steps
    return tuple(sorted(chosen)), steps


def _flow_network(g: CutGraph) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_node("src")
    G.add_node("sink")
    for w in range(g.n_white):
        G.add_edge("src", ("w", w), capacity=1)
    for b, kb in enumerate(g.k):
        G.add_edge(("b", b), "sink", capacity=kb)
    for w, b in g.edges:
        G.add_edge(("w", w), ("b", b), capacity=1)
    return G


def flow_matching(g: CutGraph) -> MatchingResult:
    """Max-flow answer with a Hall certificate on failure."""
    G = _flow_network(g)
    value, flows = nx.maximum_flow(G, "src", "sink")
    if value == g.n_white and value == sum(g.k):
        edges = tuple(sorted((w, b) for w, b in g.edges if flows[("w", w)][("b", b)] > 0.5))
        return MatchingResult(True, edges, "flow")
    if value < g.n_white:
        # whites reachable from the source in the residual graph violate Hall
        R = nx.DiGraph()
        for u, nbrs in G.adj.items():
            for v, attr in nbrs.items():
                f = flows[u][v]
                if attr["capacity"] - f > 0.5:
                    R.add_edge(u, v)
                if f > 0.5:
                    R.add_edge(v, u)
        reach = nx.descendants(R, "src") if "src" in R else set()
        whites = sorted(x[1] for x in reach if isinstance(x, tuple) and x[0] == "w")
        blacks = sorted({b for w, b in g.edges if w in whites})
        cert = {"kind": "hall", "whites": whites, "neighbours": blacks,
                "capacity": sum(g.k[b] for b in blacks)}
    else:
        cert = {"kind": "demand", "total_demand": sum(g.k), "whites": g.n_white}
    return MatchingResult(False, (), "flow", cert)


def find_matching(g: CutGraph) -> MatchingResult:
    """Induction first, max-flow when the induction is stuck."""
    edges, steps = peel_induction(g)
    if edges is not None:
        return MatchingResult(True, edges, "induction", None, True, steps)
    res = flow_matching(g)
    res.steps = steps
    if not res.feasible and g.violations():
        res.certificate = dict(res.certificate or {}, violations=g.violations())
    return res


def match_many(graphs) -> list[MatchingResult]:
    return _pmap(find_matching, list(graphs))


def random_valid_graph(rng, max_black: int = 3, max_k: int = 3, density: float | None = None,
                       max_tries: int = 1000) -> CutGraph:
    """Rejection sample a graph with ``sum k = #whites`` and the valence invariants."""
    for _ in range(max_tries):
        nb = int(rng.integers(1, max_black + 1))
        k = tuple(int(x) for x in rng.integers(1, max_k + 1, size=nb))
        nw = sum(k)
        p = float(rng.uniform(0.2, 0.8)) if density is None else density
        edges = [(w, b) for w in range(nw) for b in range(nb) if rng.random() < p]
        g = CutGraph(nw, k, tuple(edges))
        if not g.violations():
            return g
    raise CutError("could not sample a valid graph")


def hall_deficiency(g: CutGraph) -> int:
    """``max_T |T| - capacity(N(T))`` over white sets (0 when a matching exists)."""
    value = nx.maximum_flow_value(_flow_network(g), "src", "sink")
    return int(round(g.n_white - value))
