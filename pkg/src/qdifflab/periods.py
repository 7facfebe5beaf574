"""Periods of ``sqrt(xi)`` along sheet-tracked paths and Laurent-lattice charges.

A :class:`SheetPath` is a polyline in the ``z`` plane together with a sheet
index.  On sheet ``m`` the branch of ``log f`` at the path's reference point
(its first regular sample) is the principal value plus ``2 pi i m``, so every
deck shift multiplies ``sqrt(xi)`` by ``exp(i pi (s - 2)) = exp(i pi s)``.
Declared cut crossings add further integer jumps part way along the path.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np
from scipy import integrate

from .hurwitz import QDifferential
from .surface import MarkedSurfaceData, hat_rank


class PeriodError(ValueError):
    pass


@dataclass(frozen=True)
class SheetPath:
    points: tuple[complex, ...]
    sheet: int = 0
    jumps: tuple[tuple[int, int], ...] = ()  # (segment index, sheet jump at its start)
    branch_sign: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        if len(self.points) < 2:
            raise PeriodError("a path needs two points")
        if self.branch_sign not in (1, -1):
            raise PeriodError("branch_sign must be +1 or -1")

    def to_dict(self) -> dict:
        return {"points": [[p.real, p.imag] for p in self.points], "sheet": self.sheet,
                "jumps": [list(j) for j in self.jumps], "branch_sign": self.branch_sign,
                "label": self.label}


def q_shift(path: SheetPath, m: int = 1) -> SheetPath:
    """Deck transformation applied ``m`` times."""
    return replace(path, sheet=path.sheet + m)


def reverse_path(qd: QDifferential, path: SheetPath) -> SheetPath:
    """The same lift traversed backwards, with sheet data expressed at its new start."""
    sheet, flips = _Branch(qd, path).end_offsets()
    nseg = len(path.points) - 1
    # a jump at vertex k is undone at vertex nseg - k of the reversed path
    jumps = tuple((nseg - k, -j) for k, j in path.jumps if 0 < k)
    sign = path.branch_sign * (-1) ** flips
    return SheetPath(path.points[::-1], sheet, jumps, sign, path.label)


def _local_order(qd: QDifferential, z: complex, tol: float = 1e-9):
    """Exponent of the coefficient at ``z`` if ``z`` is a zero of ``f``, else ``None``."""
    zeros = qd.cover.zeros()
    near = [w for w in zeros if abs(w - z) < tol * max(1.0, abs(w))]
    if not near:
        return None
    if qd.flavor == "exp_type":
        return None
    return qd.power * len(near)


def _principal_logs(qd: QDifferential, z):
    """Principal ``log f`` (or ``f`` itself for ``exp_type``) and ``log Omega``."""
    z = np.asarray(z, complex)
    lf = qd.cover(z) if qd.flavor == "exp_type" else np.log(qd.cover(z))
    return lf, np.log(qd.omega(z))


def _continue(vals: np.ndarray, start: complex, single_valued: bool = False) -> np.ndarray:
    if single_valued:
        return vals.astype(complex)
    steps = _wrap(np.diff(vals))
    if len(steps) and np.max(np.abs(steps.imag)) > 1.5:
        raise PeriodError("branch continuation failed: path too close to a singularity")
    return start + np.concatenate([[0], np.cumsum(steps)])


class _Branch:
    """Continuous ``log f`` and ``log Omega`` along one path."""

    def __init__(self, qd: QDifferential, path: SheetPath, grid: int = 64):
        self.qd = qd
        self.exp = qd.flavor == "exp_type"
        pts = path.points
        nseg = len(pts) - 1
        self.start_sing = _local_order(qd, pts[0])
        self.end_sing = _local_order(qd, pts[-1])
        for p in pts[1:-1]:
            if _local_order(qd, p) is not None:
                raise PeriodError("interior vertices of a path must avoid zeros")
        jumps = dict(path.jumps)
        turn = 0.0 if self.exp else 2j * math.pi
        self.nodes: list[np.ndarray] = []
        self.lf: list[np.ndarray] = []
        self.lo: list[np.ndarray] = []
        cur_f = cur_o = None
        for k in range(nseg):
            a, b = pts[k], pts[k + 1]
            u = np.linspace(0.0, 1.0, grid + 1)
            if k == 0 and self.start_sing is not None:
                u = u[1:]
            if k == nseg - 1 and self.end_sing is not None:
                u = u[:-1]
            z = a + u * (b - a)
            vf, vo = _principal_logs(qd, z)
            if not (np.all(np.isfinite(vf)) and np.all(np.isfinite(vo))):
                raise PeriodError("path meets a pole or zero")
            if cur_f is None:
                cur_f, cur_o = vf[0] + path.sheet * turn, vo[0]
            else:
                cur_f = cur_f + (0 if self.exp else _wrap(vf[0] - prev_f))
                cur_o = cur_o + _wrap(vo[0] - prev_o)
            cur_f = cur_f + jumps.get(k, 0) * turn
            of = _continue(vf, cur_f, self.exp)
            oo = _continue(vo, cur_o)
            cur_f, cur_o, prev_f, prev_o = of[-1], oo[-1], vf[-1], vo[-1]
            self.nodes.append(z)
            self.lf.append(of)
            self.lo.append(oo)
        self.sign = path.branch_sign

    def logs(self, k: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nodes = self.nodes[k]
        idx = np.argmin(np.abs(z[:, None] - nodes[None, :]), axis=1)
        vf, vo = _principal_logs(self.qd, z)
        bf, bo = _principal_logs(self.qd, nodes[idx])
        lf = vf if self.exp else self.lf[k][idx] + _wrap(vf - bf)
        return lf, self.lo[k][idx] + _wrap(vo - bo)

    def sqrt_xi(self, k: int, z: np.ndarray) -> np.ndarray:
        lf, lo = self.logs(k, z)
        power = 1.0 if self.exp else self.qd.power
        return self.sign * np.exp(0.5 * (power * lf + lo))

    def end_offsets(self) -> tuple[int, int]:
        """Sheet of ``log f`` and parity of ``log Omega`` reached at the last sample."""
        z = self.nodes[-1][-1:]
        vf, vo = _principal_logs(self.qd, z)
        sheet = 0 if self.exp else int(round(((self.lf[-1][-1] - vf[0]) / (2j * math.pi)).real))
        flips = int(round(((self.lo[-1][-1] - vo[0]) / (2j * math.pi)).real))
        return sheet, flips


def _wrap(x):
    """Shift imaginary parts into ``(-pi, pi]``."""
    x = np.asarray(x, complex)
    im = np.angle(np.exp(1j * x.imag))
    return x.real + 1j * im if x.ndim else complex(x.real, float(im))


def _graded_rule(n: int, levels: int, ratio: float = 0.15):
    """Gauss-Legendre panels refined geometrically towards ``0`` on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = [0.0] + [ratio ** k for k in range(levels, 0, -1)] + [1.0]
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(lo + (hi - lo) * (x + 1) / 2)
        ws.append(w * (hi - lo) / 2)
    return np.concatenate(xs), np.concatenate(ws)


def _segment_integral(br: _Branch, k: int, a: complex, b: complex,
                      sing_a, sing_b, n: int, method: str, tol: float) -> complex:
    """``\\int sqrt(xi) dz`` over the straight segment ``a -> b``."""
    if sing_a is not None and sing_b is not None:
        mid = (a + b) / 2
        return (_segment_integral(br, k, a, mid, sing_a, None, n, method, tol)
                + _segment_integral(br, k, mid, b, None, sing_b, n, method, tol))
    if sing_b is not None:
        # integrate from the singular end with the orientation reversed
        return -_segment_integral(br, k, b, a, sing_b, None, n, method, tol)
    d = b - a
    if sing_a is None:
        def g(t):
            z = a + np.asarray(t) * d
            return br.sqrt_xi(k, np.atleast_1d(z)) * d
    else:
        p = 2.0 / (sing_a.real + 2.0)  # u = t^p with p = 2 / s'

        def g(t):
            t = np.atleast_1d(np.asarray(t, float))
            u = t ** p
            z = a + u * d
            with np.errstate(divide="ignore", invalid="ignore"):
                out = br.sqrt_xi(k, z) * d * p * t ** (p - 1)
            return np.where(t > 0, out, 0.0)
    if method == "adaptive":
        val, err = integrate.quad(lambda t: complex(g(t)[0]), 0.0, 1.0, complex_func=True,
                                  epsabs=0.0, epsrel=tol, limit=400)
        return complex(val)
    if sing_a is None:
        x, w = np.polynomial.legendre.leggauss(n)
        t = (x + 1) / 2
        return complex(np.sum(w / 2 * g(t)))
    t, w = _graded_rule(n, levels=max(8, n))
    return complex(np.sum(w * g(t)))


def period(qd: QDifferential, path: SheetPath, n: int = 24, method: str = "graded",
           tol: float = 1e-10) -> complex:
    """``\\int sqrt(xi)`` along ``path`` on its declared sheet.

    ``method`` is ``"graded"`` (Gauss-Legendre with ``n`` nodes per panel and
    geometric refinement at singular endpoints) or ``"adaptive"`` (QUADPACK
    with relative tolerance ``tol`` per segment).
    """
    br = _Branch(qd, path)
    pts = path.points
    nseg = len(pts) - 1
    total = 0j
    for k in range(nseg):
        sa = br.start_sing if k == 0 else None
        sb = br.end_sing if k == nseg - 1 else None
        if sa is not None and (sa.real + 2) <= 0:
            raise PeriodError("endpoint singularity is not integrable")
        total += _segment_integral(br, k, pts[k], pts[k + 1], sa, sb, n, method, tol)
    return total


def sqrt_along(qd: QDifferential, path: SheetPath) -> tuple[np.ndarray, np.ndarray]:
    """Sample points and continued values of ``sqrt(xi)`` along the path."""
    br = _Branch(qd, path)
    zs = np.concatenate(br.nodes)
    vals = np.concatenate([br.sqrt_xi(k, br.nodes[k]) for k in range(len(br.nodes))])
    return zs, vals


# ---------------------------------------------------------------- Laurent lattice

LaurentPoly = Mapping[int, int]


def laurent_mul_q(p: LaurentPoly, m: int = 1) -> dict[int, int]:
    return {e + m: c for e, c in p.items() if c}


def laurent_eval(p: LaurentPoly, q: complex) -> complex:
    return complex(sum(c * q ** e for e, c in p.items()))


@dataclass(frozen=True)
class LaurentLattice:
    """Free ``Z[q, q^-1]``-module with a labelled basis."""

    labels: tuple[str, ...]

    @property
    def rank(self) -> int:
        return len(self.labels)

    def basis(self, label: str, power: int = 0) -> dict[str, dict[int, int]]:
        if label not in self.labels:
            raise KeyError(label)
        return {label: {power: 1}}

    def q_act(self, v: Mapping[str, LaurentPoly], m: int = 1) -> dict[str, dict[int, int]]:
        return {lab: laurent_mul_q(p, m) for lab, p in v.items()}

    def add(self, v, w) -> dict[str, dict[int, int]]:
        out: dict[str, dict[int, int]] = {}
        for vec in (v, w):
            for lab, p in vec.items():
                acc = out.setdefault(lab, {})
                for e, c in p.items():
                    acc[e] = acc.get(e, 0) + c
        return {lab: {e: c for e, c in p.items() if c} for lab, p in out.items()}

    def norm(self, v: Mapping[str, LaurentPoly]) -> int:
        """Sup-norm of the integer coefficients in the basis ``q^k * label``."""
        return max((abs(c) for p in v.values() for c in p.values()), default=0)


def q_value(s: complex) -> complex:
    """``exp(i pi s)``, exactly ``(-1)^N`` when ``s`` is an integer ``N``."""
    s = complex(s)
    if s.imag == 0 and s.real == round(s.real):
        return complex((-1) ** int(round(s.real)))
    return cmath.exp(1j * math.pi * s)


def specialize_charge(v: Mapping[str, LaurentPoly], s: complex,
                      base_charges: Mapping[str, complex]) -> complex:
    """Evaluate at ``q = exp(i pi s)`` and contract with the base charges."""
    q = q_value(s)
    return complex(sum(laurent_eval(p, q) * complex(base_charges[lab]) for lab, p in v.items()))


@dataclass
class RankAudit:
    strips: int
    hat_rank: int
    saddle_free: bool

    @property
    def equal(self) -> bool:
        return self.strips == self.hat_rank

    def to_dict(self) -> dict:
        return {"strips": self.strips, "hat_rank": self.hat_rank,
                "saddle_free": self.saddle_free, "equal": self.equal}


def lattice_rank_audit(surf: MarkedSurfaceData, n_strips: int, saddle_free: bool = True) -> RankAudit:
    """Compare the number of strips of a decomposition with the rank formula."""
    return RankAudit(int(n_strips), hat_rank(surf), bool(saddle_free))


def equivariance_residual(qd: QDifferential, path: SheetPath, **kw) -> float:
    """``|Z(q.path) - exp(i pi s) Z(path)| / |Z(path)|``."""
    z0 = period(qd, path, **kw)
    z1 = period(qd, q_shift(path), **kw)
    return abs(z1 - qd.q * z0) / abs(z0)
