"""Horizontal trajectories, strip decompositions and saddle connections.

Works with single-valued differentials ``phi = N(z)/D(z) dz^2`` on the Riemann
sphere whose point at infinity is a pole of order at least 3.  Trajectories
of phase ``psi`` solve ``dz/dt = e^{i psi} / sqrt(phi)``; the tracer uses
Euclidean arclength, an embedded Runge-Kutta 5(4) pair, and caps every step
at a fraction of the distance to the nearest critical point so that the
branch of ``sqrt(phi)`` can be followed by continuity.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .hurwitz import INF, QDifferential, _cluster, polynomial_roots

CAPTURE = 1e-5  # capture radius around zeros, in phi-metric units
INFINITY = "inf"


class FlatGeoError(ValueError):
    pass


class RingDomainError(FlatGeoError):
    pass


class RecurrentError(FlatGeoError):
    pass


class ClearanceError(FlatGeoError):
    pass


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("QDIFF_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(func: Callable, items: Sequence) -> list:
    n = _workers()
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(func, items))


def _horner(coeffs: list[complex], z: complex) -> complex:
    acc = 0j
    for c in coeffs:
        acc = acc * z + c
    return acc


# ---------------------------------------------------------------- differential

class FlatDifferential:
    """``phi = num(z)/den(z) dz^2`` with its critical points.

    Parameters
    ----------
    num, den : coefficient sequences, highest degree first.
    zeros : optional ``[(z, order)]``; computed from ``num`` when omitted.
    poles : optional finite ``[(z, order)]``; computed from ``den`` when omitted.
    """

    def __init__(self, num, den=(1.0,), zeros=None, poles=None, cluster_tol: float = 1e-7):
        self.num = np.trim_zeros(np.asarray(num, complex), "f")
        self.den = np.trim_zeros(np.asarray(den, complex), "f")
        if len(self.num) == 0 or len(self.den) == 0:
            raise FlatGeoError("numerator and denominator must be nonzero")
        self._n = [complex(c) for c in self.num]
        self._d = [complex(c) for c in self.den]
        if zeros is None:
            zeros = _cluster(polynomial_roots(self.num), cluster_tol) if len(self.num) > 1 else []
        if poles is None:
            poles = _cluster(polynomial_roots(self.den), cluster_tol) if len(self.den) > 1 else []
        self.zeros = [(complex(z), int(m)) for z, m in zeros if int(m) > 0]
        self.poles = [(complex(p), int(n)) for p, n in poles if int(n) > 0]
        self.inf_order = 4 + (len(self.num) - 1) - (len(self.den) - 1)
        if self.inf_order < 1:
            raise FlatGeoError(f"infinity must be a pole, got order {self.inf_order}")
        pts = [z for z, _ in self.zeros] + [p for p, _ in self.poles]
        self.scale = 1.0 + (max(abs(p) for p in pts) if pts else 0.0)
        self._crit = pts
        self.zero_coeff = [self._local_coefficient(z, m) for z, m in self.zeros]
        self.pole_coeff = [self._local_coefficient(p, -n) for p, n in self.poles]
        self.inf_coeff = self._infinity_coefficient()

    # constructors
    @classmethod
    def polynomial(cls, coeffs) -> "FlatDifferential":
        return cls(coeffs, (1.0,))

    @classmethod
    def rational(cls, num, den) -> "FlatDifferential":
        return cls(num, den)

    @classmethod
    def from_qdiff(cls, qd: QDifferential) -> "FlatDifferential":
        """Single-valued differential of a ``plain`` (or integer ``s``) profile."""
        if qd.flavor == "exp_type":
            raise FlatGeoError("exponential-type differentials are not traced")
        m = qd.power
        if abs(m.imag) > 1e-12 or abs(m.real - round(m.real)) > 1e-12:
            raise FlatGeoError("non-integer local order: cy_s differentials must be analyzed sheetwise")
        m = int(round(m.real))
        cover = qd.cover
        num = np.ones(1, complex)
        den = np.ones(1, complex)
        for _ in range(m):
            num = np.polymul(num, cover.num)
            den = np.polymul(den, cover.den)
        zeros = [(z, mult * m) for z, mult in _cluster(cover.zeros(), 1e-7)] if m else []
        poles = []
        for p, li in zip(cover.poles, qd.l):
            if not p.finite:
                continue
            factor = np.poly([p.at] * abs(li)) if li else np.ones(1)
            if li > 0:
                den = np.polymul(den, factor)
            elif li < 0:
                num = np.polymul(num, factor)
            order = p.order * m + li
            if order > 0:
                poles.append((p.at, order))
            elif order < 0:
                zeros.append((p.at, -order))
        return cls(num, den, zeros=zeros, poles=poles)

    # evaluation
    def __call__(self, z):
        z = np.asarray(z, complex)
        return np.polyval(self.num, z) / np.polyval(self.den, z)

    def value(self, z: complex) -> complex:
        return _horner(self._n, z) / _horner(self._d, z)

    def dlog(self, z):
        z = np.asarray(z, complex)
        return (np.polyval(np.polyder(self.num), z) / np.polyval(self.num, z)
                - np.polyval(np.polyder(self.den), z) / np.polyval(self.den, z))

    def sqrt_near(self, z: complex, ref: complex) -> complex:
        v = cmath.sqrt(self.value(z))
        return -v if (v * ref.conjugate()).real < 0 else v

    def nearest(self, z: complex, exclude: int | None = None) -> float:
        best = math.inf
        for k, c in enumerate(self._crit):
            if k == exclude:
                continue
            d = abs(z - c)
            if d < best:
                best = d
        return best

    def _local_coefficient(self, at: complex, order: int, npts: int = 32) -> complex:
        others = [abs(at - c) for c in self._crit if abs(at - c) > 1e-12]
        rho = 0.25 * min(others) if others else 0.25
        t = np.exp(2j * np.pi * np.arange(npts) / npts)
        z = at + rho * t
        return complex(np.mean(self(z) / (rho * t) ** order))

    def _infinity_coefficient(self, npts: int = 32) -> complex:
        rho = 0.25 / self.scale
        t = np.exp(2j * np.pi * np.arange(npts) / npts)
        u = rho * t
        return complex(np.mean(self(1 / u) * u ** (self.inf_order - 4)))

    def phi_distance_to_zero(self, z: complex, j: int) -> float:
        z0, m = self.zeros[j]
        return abs(self.zero_coeff[j]) ** 0.5 * 2 / (m + 2) * abs(z - z0) ** ((m + 2) / 2)

    def radius_for_distance(self, j: int, d: float) -> float:
        _, m = self.zeros[j]
        return (d * (m + 2) / (2 * abs(self.zero_coeff[j]) ** 0.5)) ** (2 / (m + 2))

    def ray_angles(self, j: int, psi: float) -> np.ndarray:
        """Directions of the ``m + 2`` rays of phase ``psi`` at zero ``j`` (ascending)."""
        _, m = self.zeros[j]
        base = (2 * psi - cmath.phase(self.zero_coeff[j])) / (m + 2)
        return base + 2 * np.pi * np.arange(m + 2) / (m + 2)

    def pole_direction(self, z: complex, psi: float, pole: int | str) -> int:
        """Index of the asymptotic direction at which ``z`` approaches ``pole``."""
        if pole == INFINITY:
            n, C, beta = self.inf_order, self.inf_coeff, -cmath.phase(z)
        else:
            p, n = self.poles[pole]
            C, beta = self.pole_coeff[pole], cmath.phase(z - p)
        k = round(((2 - n) * beta - 2 * psi + cmath.phase(C)) / (2 * np.pi))
        return int(k % (n - 2)) if n > 2 else 0

    def to_dict(self) -> dict:
        c = lambda x: [float(x.real), float(x.imag)]
        return {"num": [c(x) for x in self.num], "den": [c(x) for x in self.den],
                "zeros": [{"at": c(z), "order": m} for z, m in self.zeros],
                "poles": [{"at": c(p), "order": n} for p, n in self.poles]
                + [{"at": INFINITY, "order": self.inf_order}]}


# ---------------------------------------------------------------- trajectories

@dataclass
class Trajectory:
    points: np.ndarray
    phase: float
    termination: str  # hits_zero | escapes_to_pole | length_budget | closed
    arc_length: float
    origin: int | None = None
    target: int | str | None = None
    direction: int | None = None

    def polyline(self, step: int = 8) -> list[complex]:
        """Every ``step``-th sample plus the end point, without repeats."""
        pts = [complex(z) for z in self.points]
        return pts[:-1:step] + [pts[-1]]

    def to_dict(self) -> dict:
        return {"phase": self.phase, "termination": self.termination,
                "arc_length": self.arc_length, "origin": self.origin,
                "target": self.target, "direction": self.direction,
                "points": [[float(z.real), float(z.imag)] for z in self.points]}


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = ((),
      (1 / 5,),
      (3 / 40, 9 / 40),
      (44 / 45, -56 / 15, 32 / 9),
      (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
      (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
      (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84))
_B5 = _A[6] + (0.0,)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def trace(fd: FlatDifferential, z0: complex, v0: complex, psi: float, *, origin: int | None = None,
          tol: float = 1e-10, max_length: float | None = None, max_steps: int = 20000,
          far: float | None = None, check_closed: bool = False,
          capture: float = CAPTURE) -> Trajectory:
    """Follow the trajectory of phase ``psi`` from ``z0`` in the direction ``e^{i psi}/v0``."""
    e = cmath.exp(1j * psi)
    far = far if far is not None else 50.0 * fd.scale
    pole_r = 1e-3 * fd.scale
    ref = v0

    def rhs(z, ref):
        v = fd.sqrt_near(z, ref)
        a = abs(v)
        if a == 0:
            raise ClearanceError("trajectory reached a zero of phi")
        return e * v.conjugate() / a, a, v

    def step(z, k1, a1, ref, h):
        ks, ls = [k1], [a1]
        for i in range(1, 7):
            zi = z + h * sum(a * k for a, k in zip(_A[i], ks))
            ki, ai, _ = rhs(zi, ref)
            ks.append(ki)
            ls.append(ai)
        z5 = z + h * sum(b * k for b, k in zip(_B5, ks))
        z4 = z + h * sum(b * k for b, k in zip(_B4, ks))
        return z5, z4, ks, ls

    # trajectories leaving a zero start at phi-distance 4 * CAPTURE from it
    z, L, sigma = complex(z0), (4 * capture if origin is not None else 0.0), 0.0
    pts = [z]
    d0 = fd.nearest(z)
    h = 0.1 * d0
    k1, a1, ref = rhs(z, ref)
    start_dir = k1
    side = lambda x: ((x - z0) * start_dir.conjugate()).real
    steps = 0
    while True:
        steps += 1
        if steps > max_steps or (max_length is not None and L > max_length):
            return Trajectory(np.array(pts), psi, "length_budget", L, origin)
        dist = fd.nearest(z)
        h = min(h, 0.3 * dist)
        z5, z4, ks, ls = step(z, k1, a1, ref, h)
        err = abs(z5 - z4)
        allowed = tol * max(dist, 1e-300)
        if err <= allowed:
            zprev = z
            z = z5
            L += h * sum(b * a for b, a in zip(_B5, ls))
            sigma += h
            k1, a1, ref = ks[6], ls[6], fd.sqrt_near(z, ref)
            pts.append(z)
            # termination tests
            for j in range(len(fd.zeros)):
                if j == origin and sigma < 4 * d0:
                    continue
                if fd.phi_distance_to_zero(z, j) < capture:
                    pts.append(fd.zeros[j][0])
                    L += fd.phi_distance_to_zero(z, j)
                    return Trajectory(np.array(pts), psi, "hits_zero", L, origin, j)
            for i, (p, _) in enumerate(fd.poles):
                if abs(z - p) < pole_r:
                    return Trajectory(np.array(pts), psi, "escapes_to_pole", L, origin, i,
                                      fd.pole_direction(z, psi, i))
            if abs(z) > far:
                return Trajectory(np.array(pts), psi, "escapes_to_pole", L, origin, INFINITY,
                                  fd.pole_direction(z, psi, INFINITY))
            if check_closed and sigma > 2 * h and side(zprev) < 0 <= side(z) \
                    and _seg_dist(z0, zprev, z) < 0.5 * abs(z - zprev):
                # land exactly on the transversal through the start point
                ka, aa, _ = rhs(zprev, ref)
                hit = optimize.brentq(lambda s: side(step(zprev, ka, aa, ref, s)[0]), 0.0, h,
                                      xtol=1e-14 * fd.scale)
                if abs(step(zprev, ka, aa, ref, hit)[0] - z0) < 1e-6 * fd.scale:
                    pts[-1] = z0
                    return Trajectory(np.array(pts), psi, "closed", L, origin)
        fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * (allowed / err) ** 0.2))
        h *= fac


def _seg_dist(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(p - (a + t * d))


def _start_on_ray(fd: FlatDifferential, j: int, beta: float, psi: float) -> tuple[complex, complex]:
    """Point at phi-distance ``4 * CAPTURE`` from zero ``j`` on the geodesic of phase ``psi``."""
    z0 = fd.zeros[j][0]
    d = 4 * CAPTURE
    e = cmath.exp(1j * psi)
    z = z0 + fd.radius_for_distance(j, d) * cmath.exp(1j * beta)
    for _ in range(4):
        v = cmath.sqrt(fd.value(z))
        W = sqrt_continuation(fd, [z0, z]).total
        target = d * e * (1 if (W * e.conjugate()).real >= 0 else -1)
        step = (W - target) / v
        z = z - step
        if abs(step) < 1e-15 * fd.scale:
            break
    v = cmath.sqrt(fd.value(z))
    # choose the sign that moves away from the zero
    if (e * v.conjugate() * (z - z0).conjugate()).real < 0:
        v = -v
    return z, v


def _with_origin(fd: FlatDifferential, t: Trajectory) -> Trajectory:
    if t.origin is None:
        return t
    pts = np.concatenate([[fd.zeros[t.origin][0]], t.points])
    return Trajectory(pts, t.phase, t.termination, t.arc_length, t.origin, t.target, t.direction)


def separatrices_at_zero(fd: FlatDifferential, j: int, theta: float, tol: float = 1e-10,
                         **kw) -> list[Trajectory]:
    """The ``m + 2`` rays of phase ``theta`` emitted from zero ``j``."""
    if not 0 <= j < len(fd.zeros):
        raise FlatGeoError(f"no zero with index {j}")
    out = []
    for beta in fd.ray_angles(j, theta):
        z, v = _start_on_ray(fd, j, beta, theta)
        out.append(trace(fd, z, v, theta, origin=j, tol=tol, **kw))
    return out


def trace_leaf(fd: FlatDifferential, z0: complex, theta: float, budget: float = 50.0,
               tol: float = 1e-10, check_closed: bool = True) -> Trajectory:
    """Trajectory through a regular point, both directions joined."""
    v = cmath.sqrt(fd.value(z0))
    fwd = trace(fd, z0, v, theta, tol=tol, max_length=budget, check_closed=check_closed)
    if fwd.termination == "closed":
        return fwd
    bwd = trace(fd, z0, -v, theta, tol=tol, max_length=budget)
    pts = np.concatenate([bwd.points[::-1], fwd.points[1:]])
    term = fwd.termination if fwd.termination == bwd.termination else \
        f"{bwd.termination}|{fwd.termination}"
    return Trajectory(pts, theta, term, fwd.arc_length + bwd.arc_length)


# ---------------------------------------------------------------- sqrt(phi) integrals

@dataclass
class SqrtContinuation:
    points: np.ndarray
    values: np.ndarray  # sqrt(phi) at the vertices (nan at critical endpoints)
    increments: np.ndarray  # w increment along each segment
    total: complex


def _graded(n: int = 16, levels: int = 18, ratio: float = 0.15):
    x, w = np.polynomial.legendre.leggauss(n)
    edges = [0.0] + [ratio ** k for k in range(levels, 0, -1)] + [1.0]
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(lo + (hi - lo) * (x + 1) / 2)
        ws.append(w * (hi - lo) / 2)
    return np.concatenate(xs), np.concatenate(ws)


_GL = np.polynomial.legendre.leggauss(12)
_GRADED = _graded()


def _critical_index(fd: FlatDifferential, z: complex) -> int | None:
    for j, (z0, _) in enumerate(fd.zeros):
        if abs(z - z0) <= 1e-12 * fd.scale:
            return j
    return None


def _split_regular(fd, a, b, out, depth=0):
    d = min(fd.nearest(a), fd.nearest(b), fd.nearest((a + b) / 2))
    if abs(b - a) > 0.3 * d and depth < 40:
        mid = (a + b) / 2
        _split_regular(fd, a, mid, out, depth + 1)
        _split_regular(fd, mid, b, out, depth + 1)
    else:
        out.append((a, b))


def sqrt_continuation(fd: FlatDifferential, path: Sequence[complex], sign: int = 1,
                      clearance: float = 1e-9) -> SqrtContinuation:
    """Continuous ``sqrt(phi)`` along a polyline and its ``w`` increments.

    Endpoints may be zeros of ``phi``.  The branch is the one equal to
    ``sign * principal sqrt`` at the first regular vertex (or, for a path
    whose two vertices are both zeros, at its middle quadrature node).
    """
    pts = np.asarray(path, complex)
    if len(pts) < 2:
        raise FlatGeoError("a path needs two points")
    sing = [None] * len(pts)
    sing[0], sing[-1] = _critical_index(fd, pts[0]), _critical_index(fd, pts[-1])
    for k, z in enumerate(pts):
        if sing[k] is None and fd.nearest(z) < clearance * fd.scale:
            raise ClearanceError(f"vertex {k} is too close to a critical point")
    nodes, weights, seg_of, vertex_pos = [], [], [], []
    gl_x, gl_w = _GL
    gx, gw = _GRADED
    for k in range(len(pts) - 1):
        a, b = pts[k], pts[k + 1]
        vertex_pos.append(len(nodes) if sing[k] is None else -1)
        if sing[k] is None:
            nodes.append(a)
            weights.append(0j)
            seg_of.append(k)
        pieces = []
        lo, hi = a, b
        if sing[k] is not None:
            # graded panel out of the zero at a
            frac = min(1.0, 0.3 * fd.nearest(a, exclude=sing[k]) / abs(b - a))
            c = a + frac * (b - a)
            pieces.append(("from", a, c))
            lo = c
        tail = None
        if sing[k + 1] is not None:
            frac = min(1.0, 0.3 * fd.nearest(b, exclude=sing[k + 1]) / abs(b - lo))
            c = b - frac * (b - lo)
            tail = ("to", c, b)
            hi = c
        if abs(hi - lo) > 0:
            reg: list = []
            _split_regular(fd, lo, hi, reg)
            pieces += [("reg", x, y) for x, y in reg]
        if tail is not None:
            pieces.append(tail)
        for kind, x, y in pieces:
            d = y - x
            if kind == "reg":
                t, w = (gl_x + 1) / 2, gl_w / 2
            elif kind == "from":
                t, w = gx, gw
            else:
                t, w = 1 - gx[::-1], gw[::-1]
            nodes.extend(x + t * d)
            weights.extend(w * d)
            seg_of.extend([k] * len(t))
    vertex_pos.append(len(nodes) if sing[-1] is None else -1)
    if sing[-1] is None:
        nodes.append(pts[-1])
        weights.append(0j)
        seg_of.append(len(pts) - 2)
    z = np.asarray(nodes)
    v = np.sqrt(fd(z))
    # enforce continuity from node to node
    ratio = v[1:] * np.conj(v[:-1])
    flips = np.concatenate([[1.0], np.where(ratio.real < 0, -1.0, 1.0)])
    v = v * np.cumprod(flips)
    regular = [p for p in vertex_pos if p >= 0]
    # with both ends at zeros, fix the branch at the node nearest the middle of the path
    first = regular[0] if regular else len(z) // 2
    v = v * (sign * np.sqrt(fd(z[first])) / v[first]).real.round()
    contrib = np.asarray(weights) * v
    inc = np.bincount(np.asarray(seg_of), weights=contrib.real, minlength=len(pts) - 1) \
        + 1j * np.bincount(np.asarray(seg_of), weights=contrib.imag, minlength=len(pts) - 1)
    vals = np.array([v[p] if p >= 0 else np.nan for p in vertex_pos], complex)
    return SqrtContinuation(pts, vals, inc, complex(inc.sum()))


# ---------------------------------------------------------------- decomposition

@dataclass
class Strip:
    boundary: tuple[int, ...]  # separatrix indices
    zeros: tuple[int, int]
    saddle_connection: Trajectory | None
    period: complex
    period_check: float  # |period through one end - period through the other|

    def to_dict(self) -> dict:
        return {"boundary": list(self.boundary), "zeros": list(self.zeros),
                "period": [self.period.real, self.period.imag], "period_check": self.period_check,
                "saddle_connection": None if self.saddle_connection is None
                else self.saddle_connection.to_dict()}


@dataclass
class HalfPlane:
    boundary: tuple[int, int]
    pole: int | str
    direction: tuple[int, int]

    def to_dict(self) -> dict:
        return {"boundary": list(self.boundary), "pole": self.pole, "direction": list(self.direction)}


@dataclass
class StripDecomposition:
    phase: float
    separatrices: list[Trajectory]
    sep_index: dict  # (zero, ray) -> position in separatrices
    strips: list[Strip] = field(default_factory=list)
    half_planes: list[HalfPlane] = field(default_factory=list)
    saddle_free: bool = True

    @property
    def counts(self) -> tuple[int, int]:
        return len(self.strips), len(self.half_planes)

    def to_dict(self, with_points: bool = False) -> dict:
        seps = []
        for t in self.separatrices:
            d = t.to_dict()
            if not with_points:
                d.pop("points")
            seps.append(d)
        return {"phase": self.phase, "saddle_free": self.saddle_free,
                "n_strips": len(self.strips), "n_half_planes": len(self.half_planes),
                "separatrices": seps, "strips": [s.to_dict() for s in self.strips],
                "half_planes": [h.to_dict() for h in self.half_planes]}


def _end(t: Trajectory):
    return (str(t.target), t.direction)


def _cut_index(fd: FlatDifferential, t: Trajectory) -> int:
    """First sample deep inside the end region of the pole the trajectory reaches."""
    pts = t.points
    if t.target == INFINITY:
        big = 8.0 * fd.scale
        idx = np.nonzero(np.abs(pts) > big)[0]
    else:
        p, _ = fd.poles[t.target]
        others = [abs(p - c) for c in fd._crit if abs(p - c) > 0]
        small = 0.1 * min(others) if others else 0.1
        idx = np.nonzero(np.abs(pts - p) < small)[0]
    return int(idx[0]) if len(idx) else len(pts) - 1


def _arc(center: complex, r: float, a0: float, a1: float, n: int = 12) -> list[complex]:
    return list(center + r * np.exp(1j * np.linspace(a0, a1, n)))


def _sector_period(fd, dec, j, i, j2, i2, via_first: bool) -> complex | None:
    """``\\int sqrt(phi)`` from zero ``j`` to zero ``j2`` through one shared end."""
    m = fd.zeros[j][1]
    m2 = fd.zeros[j2][1]
    sa = dec.separatrices[dec.sep_index[(j, i)]]
    sb = dec.separatrices[dec.sep_index[(j, (i + 1) % (m + 2))]]
    a2 = dec.separatrices[dec.sep_index[(j2, i2)]]
    b2 = dec.separatrices[dec.sep_index[(j2, (i2 + 1) % (m2 + 2))]]
    out = sa if via_first else sb
    back = [t for t in (a2, b2) if _end(t) == _end(out)]
    if not back:
        return None
    back = back[0]
    z0 = fd.zeros[j][0]
    path = [z0, sa.points[0]]
    if not via_first:
        r0 = abs(sa.points[0] - z0)
        ang = fd.ray_angles(j, dec.phase)
        a0 = ang[i]
        a1 = a0 + 2 * np.pi / (m + 2)
        path += _arc(z0, r0, a0, a1)[1:-1] + [sb.points[0]]
    ci, cb = _cut_index(fd, out), _cut_index(fd, back)
    path += list(out.points[1:ci + 1])
    path += list(back.points[:cb + 1][::-1])
    path.append(fd.zeros[j2][0])
    return sqrt_continuation(fd, path).total


def _pair_sectors(fd, dec, group):
    """Perfect matching of sectors sharing the same pair of ends."""
    pairs, left = [], list(group)
    cache = {}
    while left:
        s1 = left.pop(0)
        found = None
        for s2 in left:
            if s2[0] == s1[0]:
                continue
            za = _sector_period(fd, dec, *s1, *s2, True)
            zb = _sector_period(fd, dec, *s1, *s2, False)
            if za is None or zb is None:
                continue
            if abs(za - zb) < 1e-6 * (1 + abs(za)):
                found = s2
                cache[(s1, s2)] = (za, zb)
                break
        if found is None:
            return None, left + [s1]
        left.remove(found)
        pairs.append((s1, found))
    return [(a, b, *cache[(a, b)]) for a, b in pairs], []


def _connection_in_sector(fd, j, i, psi, target, tol):
    m = fd.zeros[j][1]
    beta = (2 * psi - cmath.phase(fd.zero_coeff[j]) + 2 * np.pi * i) / (m + 2)
    z, v = _start_on_ray(fd, j, beta, psi)
    return trace(fd, z, v, psi, origin=j, tol=tol)


def _signed_miss(fd: FlatDifferential, t: Trajectory, target: int) -> float | None:
    """Perpendicular offset of zero ``target`` from the geodesic, in ``w`` units."""
    zt = fd.zeros[target][0]
    pts = t.points[:-1] if t.termination == "hits_zero" else t.points
    d = np.abs(pts - zt)
    reach = 0.3 * fd.nearest(zt, exclude=target)
    close = np.nonzero(d < reach)[0]
    if len(close) == 0:
        return None
    # first local minimum of the distance inside the reach
    k = int(close[0])
    while k + 1 < len(pts) and d[k + 1] < d[k]:
        k += 1
    if k == 0:
        return None
    prev = pts[k - 1]
    vref = cmath.sqrt(fd.value(prev))
    e = cmath.exp(1j * t.phase)
    # orient v so that v dz points along e^{i psi}
    if (vref * (pts[k] - prev) * e.conjugate()).real < 0:
        vref = -vref
    sc = sqrt_continuation(fd, [prev, pts[k], zt])
    v0 = sc.values[0]
    delta = sc.increments[1] * (1 if (v0 * vref.conjugate()).real > 0 else -1)
    return float((delta * e.conjugate()).imag)


def _saddle_connection(fd, j, i, j2, Z, theta, tol):
    psi = theta + ((cmath.phase(Z) - theta) % np.pi)
    t = _connection_in_sector(fd, j, i, psi, j2, tol)
    if t.termination == "hits_zero" and t.target == j2:
        return _with_origin(fd, t)
    f = lambda p: _signed_miss(fd, _connection_in_sector(fd, j, i, p, j2, tol), j2)
    for delta in (1e-7, 1e-5, 1e-3):
        lo, hi = psi - delta, psi + delta
        flo, fhi = f(lo), f(hi)
        if flo is not None and fhi is not None and flo * fhi < 0:
            root = optimize.brentq(lambda p: f(p) or 0.0, lo, hi, xtol=1e-15)
            t = _connection_in_sector(fd, j, i, root, j2, tol)
            if t.termination == "hits_zero" and t.target == j2:
                return _with_origin(fd, t)
    return None


def strip_decomposition(fd: FlatDifferential, theta: float = 0.0, tol: float = 1e-10,
                        connections: bool = True, budget: float | None = None) -> StripDecomposition:
    """Horizontal strip decomposition at phase ``theta``.

    Raises :class:`RingDomainError` for poles of order at most 2 (their
    neighbourhoods carry closed or spiralling trajectories) and
    :class:`RecurrentError` when a separatrix exhausts its budget.
    """
    low = [n for _, n in fd.poles if n <= 2]
    if low:
        raise RingDomainError("poles of order <= 2 give ring or spiral domains")
    if not fd.zeros:
        raise RingDomainError("no zeros: every trajectory is closed or recurrent")
    jobs = [(j, i, beta) for j in range(len(fd.zeros))
            for i, beta in enumerate(fd.ray_angles(j, theta))]

    def run(job):
        j, i, beta = job
        z, v = _start_on_ray(fd, j, beta, theta)
        return trace(fd, z, v, theta, origin=j, tol=tol, max_length=budget)

    seps = _pmap(run, jobs)
    index = {(j, i): k for k, (j, i, _) in enumerate(jobs)}
    dec = StripDecomposition(theta, seps, index)
    for t in seps:
        if t.termination == "length_budget":
            raise RecurrentError("a separatrix exhausted its budget (recurrent trajectory suspected)")
        if t.termination == "closed":
            raise RingDomainError("closed trajectory found")
    if any(t.termination == "hits_zero" for t in seps):
        dec.saddle_free = False
        return dec
    groups: dict = {}
    for j, (_, m) in enumerate(fd.zeros):
        for i in range(m + 2):
            e1 = _end(seps[index[(j, i)]])
            e2 = _end(seps[index[(j, (i + 1) % (m + 2))]])
            groups.setdefault(tuple(sorted((e1, e2))), []).append((j, i))
    expected_half = (fd.inf_order - 2) + sum(n - 2 for _, n in fd.poles)
    for key, group in sorted(groups.items()):
        pairs, single = (None, group) if len(group) == 1 else _pair_sectors(fd, dec, group)
        for (j, i) in single:
            m = fd.zeros[j][1]
            a, b = index[(j, i)], index[(j, (i + 1) % (m + 2))]
            ta, tb = seps[a], seps[b]
            if ta.target != tb.target:
                raise FlatGeoError("unpaired sector does not bound a half-plane")
            dec.half_planes.append(HalfPlane((a, b), ta.target, (ta.direction, tb.direction)))
        for (j, i), (j2, i2), za, zb in pairs or []:
            m, m2 = fd.zeros[j][1], fd.zeros[j2][1]
            Z = za if ((za * cmath.exp(-1j * theta)).imag > 0) else -za
            bnd = (index[(j, i)], index[(j, (i + 1) % (m + 2))],
                   index[(j2, i2)], index[(j2, (i2 + 1) % (m2 + 2))])
            sc = _saddle_connection(fd, j, i, j2, Z, theta, tol) if connections else None
            dec.strips.append(Strip(bnd, (j, j2), sc, Z, abs(za - zb)))
    if len(dec.half_planes) != expected_half:
        raise FlatGeoError(f"found {len(dec.half_planes)} half-planes, expected {expected_half}")
    return dec


def is_saddle_free(fd: FlatDifferential, theta: float, tol: float = 1e-10) -> bool:
    return strip_decomposition(fd, theta, tol, connections=False).saddle_free


# ---------------------------------------------------------------- saddle connections

@dataclass
class SaddleConnection:
    phase: float
    trajectory: Trajectory
    period: complex
    zeros: tuple[int, int]

    def to_dict(self) -> dict:
        return {"phase": self.phase, "zeros": list(self.zeros),
                "period": [self.period.real, self.period.imag],
                "trajectory": self.trajectory.to_dict()}


def connection_period(fd: FlatDifferential, t: Trajectory) -> complex:
    """``\\int sqrt(phi)`` along a zero-to-zero trajectory, oriented along ``e^{i phase}``."""
    z = sqrt_continuation(fd, t.points).total
    e = cmath.exp(1j * t.phase)
    return z if (z * e.conjugate()).real > 0 else -z


def find_saddle_connections(fd: FlatDifferential, window: tuple[float, float] = (0.0, np.pi),
                            length_bound: float = 20.0, grid: int = 48,
                            tol: float = 1e-10) -> list[SaddleConnection]:
    """Shoot from every zero over a phase grid and refine sign changes of the miss distance."""
    lo, hi = window
    phases = np.linspace(lo, hi, grid + 1)
    found: list[SaddleConnection] = []

    def shoot(j, k, psi):
        beta = fd.ray_angles(j, psi)[k]
        z, v = _start_on_ray(fd, j, beta, psi)
        return trace(fd, z, v, psi, origin=j, tol=tol, max_length=length_bound)

    def record(t, psi, j):
        if not (t.termination == "hits_zero" and t.target != j):
            return
        key = tuple(sorted((j, t.target)))
        for c in found:
            if c.zeros == key and abs(((c.phase - psi + np.pi / 2) % np.pi) - np.pi / 2) < 1e-7:
                return
        t = _with_origin(fd, t)
        found.append(SaddleConnection(float(psi), t, connection_period(fd, t), key))

    for j, (_, m) in enumerate(fd.zeros):
        for k in range(m + 2):
            traces = [shoot(j, k, p) for p in phases]
            for target in range(len(fd.zeros)):
                if target == j:
                    continue
                miss = [_signed_miss(fd, t, target) for t in traces]
                for a in range(grid):
                    ma, mb = miss[a], miss[a + 1]
                    if ma is None or mb is None or ma * mb > 0:
                        continue

                    def f(p):
                        val = _signed_miss(fd, shoot(j, k, p), target)
                        return 0.0 if val is None else val
                    root = optimize.brentq(f, phases[a], phases[a + 1], xtol=1e-15)
                    record(shoot(j, k, root), root, j)
    found.sort(key=lambda c: (c.phase, c.zeros))
    return found


# ---------------------------------------------------------------- rendering

def render_svg(fd: FlatDifferential, dec: StripDecomposition, size: int = 600,
               fill: int = 6, extent: float | None = None) -> str:
    """SVG with separatrices (black), saddle connections (red), sample leaves (green)."""
    R = extent if extent is not None else 1.6 * fd.scale
    scale = size / (2 * R)

    def xy(z):
        return f"{(z.real + R) * scale:.3f},{(R - z.imag) * scale:.3f}"

    def poly(pts, color, width):
        pts = [z for z in pts if abs(z.real) < 4 * R and abs(z.imag) < 4 * R]
        if len(pts) < 2:
            return ""
        return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
                f'points="{" ".join(xy(z) for z in pts)}"/>')

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<defs><clipPath id="view"><rect x="0" y="0" width="{size}" height="{size}"/></clipPath></defs>',
             '<g clip-path="url(#view)">', '<g id="fill">']
    if fill:
        for x in np.linspace(-R, R, fill + 2)[1:-1]:
            for y in np.linspace(-R, R, fill + 2)[1:-1]:
                z0 = complex(x, y)
                if fd.nearest(z0) < 0.05 * fd.scale:
                    continue
                leaf = trace_leaf(fd, z0, dec.phase, budget=5 * R, tol=1e-7, check_closed=False)
                parts.append(poly(leaf.points, "green", 0.6))
    parts.append('</g><g id="separatrices">')
    parts += [poly(t.points, "black", 1.2) for t in dec.separatrices]
    parts.append('</g><g id="saddle-connections">')
    parts += [poly(s.saddle_connection.points, "red", 1.8) for s in dec.strips
              if s.saddle_connection is not None]
    parts.append('</g><g id="singularities">')
    for z, _ in fd.zeros:
        x, y = xy(z).split(",")
        parts.append(f'<circle cx="{x}" cy="{y}" r="4" fill="red"/>')
    for p, _ in fd.poles:
        x, y = xy(p).split(",")
        parts.append(f'<circle cx="{x}" cy="{y}" r="4" fill="blue"/>')
    parts.append("</g></g></svg>")
    return "\n".join(p for p in parts if p)
