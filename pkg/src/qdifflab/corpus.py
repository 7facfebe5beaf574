"""Built-in example inputs and the check suites run by ``qdifflab corpus``.

Every suite returns a list of rows ``{"case", "ok", ...}``; rows are
independent and deterministic for a given seed.
"""

from __future__ import annotations

import numpy as np

from .cuts import find_matching, flow_matching, random_valid_graph
from .flatgeo import FlatDifferential, _pmap, strip_decomposition
from .hurwitz import HurwitzCover, make_qdiff
from .periods import SheetPath, equivariance_residual
from .quiver import build_dga, extend_quiver, build_quiver, n_reduce, superpotential, verify_d_squared
from .surface import MarkedSurfaceData, a_n_fan, hat_rank, qr_system
from .winding import closed_form_suite

SUITES = ("winding", "quiver", "matching", "foliation", "periods")


def quiver_corpus() -> dict:
    return {
        "A2": a_n_fan(2, [0]),
        "A3": a_n_fan(3, [1, -1]),
        "A4": a_n_fan(4, [2, 0, -1]),
        "QR": qr_system((1, -2, 3), 2, -1),
        "QR0": qr_system((0, 0, 0)),
    }


def type_a_differential(rng, n: int) -> FlatDifferential:
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return FlatDifferential.polynomial([1, 0, *a])


def winding_suite(seed: int = 0, tol: float = 1e-6) -> list[dict]:
    return closed_form_suite(tol=tol, seed=seed)


def quiver_case(name: str, sysm, truncation: int = 6) -> dict:
    q = extend_quiver(build_quiver(sysm))
    W = superpotential(sysm, q)
    terms_ok = all(q.path_bidegree(w) == (3, -1) for _, w in W.terms)
    pairs_ok = True
    for a in q.originals():
        b = q.arrow(a.partner)
        pairs_ok &= (a.bidegree[0] + b.bidegree[0], a.bidegree[1] + b.bidegree[1]) == (2, -1)
    dga = build_dga(sysm, truncation)
    residues = verify_d_squared(dga)
    red = n_reduce(dga, 3)
    reduce_ok = True
    for a in dga.quiver.arrows:
        d = red.quiver.degree(a.name)
        if a.kind == "original":
            reduce_ok &= d == a.bidegree[0]
        elif a.kind == "dual":
            reduce_ok &= d == (2 - dga.quiver.arrow(a.partner).bidegree[0]) - 3
        else:
            reduce_ok &= d == -2
    return {"case": name, "terms": len(W.terms), "terms_bidegree": bool(terms_ok),
            "dual_pairs": bool(pairs_ok), "d2_residues": len(residues),
            "n3_reduction": bool(reduce_ok),
            "ok": bool(terms_ok and pairs_ok and not residues and reduce_ok)}


def quiver_suite(seed: int = 0) -> list[dict]:
    items = list(quiver_corpus().items())
    return _pmap(lambda kv: quiver_case(*kv), items)


def matching_suite(seed: int = 0, n: int = 500) -> list[dict]:
    rng = np.random.default_rng(seed)
    graphs = [random_valid_graph(rng) for _ in range(n)]
    results = _pmap(find_matching, graphs)
    agree = sum(r.feasible == flow_matching(g).feasible for g, r in zip(graphs, results))
    induction = sum(r.induction_ok for r in results)
    feasible = sum(r.feasible for r in results)
    return [
        {"case": "find_matching agrees with max-flow", "count": agree, "of": n, "ok": agree == n},
        {"case": "graphs admitting a matching", "count": feasible, "of": n, "ok": feasible == n},
        {"case": "induction alone succeeds", "count": induction, "of": n, "ok": induction == n},
    ]


def foliation_suite(seed: int = 0, tol: float = 1e-10) -> list[dict]:
    rng = np.random.default_rng(seed)
    jobs = []
    for n in (2, 3, 4):
        for _ in range(3):
            jobs.append((n, type_a_differential(rng, n), float(rng.uniform(0, np.pi))))

    def run(job):
        n, fd, theta = job
        dec = strip_decomposition(fd, theta, tol)
        want = hat_rank(MarkedSurfaceData(0, (n + 1,), (4,)))
        return {"case": f"A{n} theta={theta:.4f}", "strips": dec.counts[0],
                "half_planes": dec.counts[1], "hat_rank": want, "saddle_free": dec.saddle_free,
                "ok": dec.saddle_free and dec.counts == (want, n + 3)}

    return _pmap(run, jobs)


def periods_suite(seed: int = 0, tol: float = 1e-8) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for s in (3.0, 3.5, 4.2 + 0.7j, 7.0):
        qd = make_qdiff(HurwitzCover.polynomial([1.0, 0.0]), [4], s=s)
        for i in range(3):
            mid = complex(*rng.uniform(-0.5, 0.5, 2))
            path = SheetPath([0, mid + 0.5j, 1 + mid])
            r = equivariance_residual(qd, path)
            rows.append({"case": f"z^(s-2) s={s} path{i}", "residual": r, "ok": r < tol})
    return rows


def run_suite(name: str, seed: int = 0) -> list[dict]:
    if name == "winding":
        return winding_suite(seed)
    if name == "quiver":
        return quiver_suite(seed)
    if name == "matching":
        return matching_suite(seed)
    if name == "foliation":
        return foliation_suite(seed)
    if name == "periods":
        return periods_suite(seed)
    raise KeyError(name)
