"""Genus-zero Hurwitz covers and the quadratic differentials built on them.

A cover is a rational function ``f = num / den`` on the Riemann sphere.  Its
poles are declared explicitly (finite points and optionally infinity) and
checked against the polynomials.  Three flavours of differential are
supported:

``cy_s``
    ``xi = f^(s-2) * Omega_l``; multi-valued, tracked through ``log f``.
``exp_type``
    ``phi = exp(f) * Omega_l``.
``plain``
    ``f^(s-2) * Omega_l`` for an integer ``s >= 2``, which is single valued.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

INF = "inf"
FLAVORS = ("cy_s", "exp_type", "plain")


class HurwitzError(ValueError):
    pass


class NotRegularError(HurwitzError):
    pass


class PolarTypeError(HurwitzError):
    pass


class ContinuationError(HurwitzError):
    pass


# ------------------------------------------------------------ polynomial roots

def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    nz = np.flatnonzero(np.abs(c) > 0)
    return c[nz[0]:] if len(nz) else np.zeros(1, complex)


def polynomial_roots(coeffs: Sequence[complex], tol: float = 1e-14,
                     max_iter: int = 500) -> np.ndarray:
    """Roots by Aberth-Ehrlich simultaneous iteration.

    Falls back to companion-matrix eigenvalues (``numpy.roots``) followed by
    Newton polishing when the iteration does not settle.
    """
    c = _trim(coeffs)
    n = len(c) - 1
    if n < 1:
        return np.zeros(0, complex)
    c = c / c[0]
    dc = np.polyder(c)
    radius = 1 + np.max(np.abs(c[1:]))
    k = np.arange(n)
    z = radius * 0.5 * np.exp(2j * np.pi * k / n + 0.4j)
    converged = False
    for _ in range(max_iter):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            step = ratio / (1 - ratio * s)
        if not np.all(np.isfinite(step)):
            break
        z = z - step
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(z))):
            converged = True
            break
    if not converged:
        z = np.roots(c)
    for _ in range(3):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        ok = np.abs(dp) > 1e-300
        z = np.where(ok, z - np.where(ok, p / np.where(ok, dp, 1), 0), z)
    return np.sort_complex(z)


def _cluster(points: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    out: list[list] = []
    for p in points:
        for entry in out:
            if abs(entry[0] - p) <= tol * max(1.0, abs(p)):
                entry[1] += 1
                break
        else:
            out.append([complex(p), 1])
    return [(z, m) for z, m in out]


def is_simple(roots: np.ndarray, rel_sep: float = 1e-8) -> bool:
    r = np.asarray(roots)
    if len(r) < 2:
        return True
    scale = max(1.0, float(np.max(np.abs(r))))
    d = np.abs(r[:, None] - r[None, :])
    np.fill_diagonal(d, np.inf)
    return bool(np.min(d) > rel_sep * scale)


# ------------------------------------------------------------ covers

@dataclass(frozen=True)
class Pole:
    at: complex | str  # complex point or INF
    order: int

    @property
    def finite(self) -> bool:
        return not (isinstance(self.at, str) and self.at == INF)


@dataclass
class HurwitzCover:
    num: np.ndarray
    den: np.ndarray
    poles: tuple[Pole, ...]
    root_tol: float = 1e-6

    def __post_init__(self):
        self.num = _trim(self.num)
        self.den = _trim(self.den)
        if np.all(self.den == 0):
            raise HurwitzError("denominator is zero")
        self.poles = tuple(self.poles)
        self._dnum = np.polyder(self.num) if len(self.num) > 1 else np.zeros(1, complex)
        self._dden = np.polyder(self.den) if len(self.den) > 1 else np.zeros(1, complex)
        self._check_poles()

    # construction helpers
    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "HurwitzCover":
        c = _trim(coeffs)
        return cls(c, np.ones(1, complex), (Pole(INF, len(c) - 1),))

    @classmethod
    def type_a(cls, a: Sequence[complex]) -> "HurwitzCover":
        """``z^(n+1) + a_1 z^(n-1) + ... + a_n`` for ``a = (a_1, ..., a_n)``."""
        return cls.polynomial([1.0, 0.0] + list(a))

    @classmethod
    def from_poles(cls, num: Sequence[complex], finite: Sequence[tuple[complex, int]],
                   inf_order: int = 0) -> "HurwitzCover":
        den = np.ones(1, complex)
        for z, k in finite:
            for _ in range(k):
                den = np.polymul(den, [1.0, -z])
        poles = [Pole(INF, inf_order)] if inf_order else []
        poles += [Pole(complex(z), int(k)) for z, k in finite]
        return cls(np.asarray(num, complex), den, tuple(poles))

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(p.order for p in self.poles)

    def _check_poles(self) -> None:
        if not self.poles:
            raise PolarTypeError("a cover needs at least one pole")
        inf_order = len(self.num) - len(self.den)
        declared_inf = [p for p in self.poles if not p.finite]
        if len(declared_inf) > 1:
            raise PolarTypeError("infinity declared twice")
        if inf_order > 0:
            if not declared_inf or declared_inf[0].order != inf_order:
                raise PolarTypeError(f"f has a pole of order {inf_order} at infinity")
        elif declared_inf:
            raise PolarTypeError("declared pole at infinity but f is finite there")
        finite = [p for p in self.poles if p.finite]
        den_roots = polynomial_roots(self.den)
        found = _cluster(den_roots, self.root_tol)
        if sorted(m for _, m in found) != sorted(p.order for p in finite):
            raise PolarTypeError(f"denominator poles {found} do not match declared {finite}")
        for p in finite:
            if not any(abs(z - p.at) < 1e-5 * max(1, abs(p.at)) and m == p.order for z, m in found):
                raise PolarTypeError(f"no pole of order {p.order} near {p.at}")
            if abs(np.polyval(self.num, p.at)) < 1e-12 * max(1.0, float(np.max(np.abs(self.num)))):
                raise PolarTypeError(f"numerator vanishes at the pole {p.at}")
        if sum(self.orders) != self.degree:
            raise PolarTypeError(f"pole orders sum to {sum(self.orders)}, degree is {self.degree}")

    # evaluation
    def __call__(self, z):
        return np.polyval(self.num, z) / np.polyval(self.den, z)

    def dlog(self, z):
        """``f'/f``."""
        return (np.polyval(self._dnum, z) / np.polyval(self.num, z)
                - np.polyval(self._dden, z) / np.polyval(self.den, z))

    def derivative(self, z):
        return self(z) * self.dlog(z)

    def zeros(self) -> np.ndarray:
        return polynomial_roots(self.num)

    def zero_at_infinity(self) -> int:
        return max(len(self.den) - len(self.num), 0)

    def is_regular(self, rel_sep: float = 1e-8) -> bool:
        return is_simple(self.zeros(), rel_sep) and self.zero_at_infinity() <= 1

    def finite_singularities(self) -> np.ndarray:
        pts = list(self.zeros()) + [p.at for p in self.poles if p.finite]
        return np.asarray(pts, complex)

    def coefficients(self) -> np.ndarray:
        return self.num / self.den[0]

    def to_dict(self) -> dict:
        return {
            "num": [[float(c.real), float(c.imag)] for c in self.num],
            "den": [[float(c.real), float(c.imag)] for c in self.den],
            "poles": [{"at": INF if not p.finite else [p.at.real, p.at.imag], "k": p.order}
                      for p in self.poles],
        }


def leading_coefficient(cover: HurwitzCover, pole_index: int = 0) -> complex:
    """Leading Laurent coefficient of ``f`` at one of its poles."""
    p = cover.poles[pole_index]
    if not p.finite:
        return complex(cover.num[0] / cover.den[0])
    rest = np.polydiv(cover.den, np.poly([p.at] * p.order))[0]
    return complex(np.polyval(cover.num, p.at) / np.polyval(rest, p.at))


def cyclic_action(cover: HurwitzCover, m: int) -> HurwitzCover:
    """``f(z) -> f(omega^-1 z)`` with ``omega = exp(2 pi i m / (n+1))``."""
    if not _is_type_a(cover):
        raise HurwitzError("cyclic action needs a monic centred polynomial")
    n1 = cover.degree
    omega = cmath.exp(2j * math.pi * m / n1)
    powers = omega ** -np.arange(n1, -1, -1)
    return HurwitzCover.polynomial(cover.num * powers)


def _is_type_a(cover: HurwitzCover) -> bool:
    return (len(cover.den) == 1 and cover.degree >= 2
            and abs(cover.num[0] / cover.den[0] - 1) < 1e-12
            and abs(cover.num[1]) < 1e-12)


def type_a_coefficients(cover: HurwitzCover) -> np.ndarray:
    """``(a_1, ..., a_n)`` of a type A polynomial."""
    c = cover.num / cover.den[0]
    return c[2:]


def hurwitz_dimension(g: int, k: Sequence[int]) -> int:
    return 2 * g - 2 + len(k) + sum(k)


# ------------------------------------------------------------ primary differential

@dataclass(frozen=True)
class PrimaryDifferential:
    """Coefficient ``prod (z - z_i)^(-l_i)`` of ``Omega_l`` in the ``z`` chart."""

    points: tuple  # complex or INF
    l: tuple[int, ...]

    def __post_init__(self):
        if len(self.points) != len(self.l):
            raise HurwitzError("one index per pole is needed")
        if sum(self.l) != 4:
            raise HurwitzError(f"indices sum to {sum(self.l)}, genus zero needs 4")

    def _finite(self):
        return [(p, li) for p, li in zip(self.points, self.l) if not _is_inf(p)]

    def __call__(self, z):
        out = np.ones_like(np.asarray(z, complex))
        for p, li in self._finite():
            out = out * (np.asarray(z) - p) ** (-li)
        return out

    def dlog(self, z):
        out = np.zeros_like(np.asarray(z, complex))
        for p, li in self._finite():
            out = out - li / (np.asarray(z) - p)
        return out

    def in_w_chart(self, w):
        """Coefficient at ``w = 1/z``: ``Omega = c(1/w) w^-4 dw^2``."""
        w = np.asarray(w, complex)
        return self(1 / w) * w ** -4


def _is_inf(p) -> bool:
    return isinstance(p, str) and p == INF


def primary_differential(poles: Sequence[tuple]) -> PrimaryDifferential:
    """From ``[(z_i, l_i), ...]``; use ``"inf"`` for the point at infinity."""
    pts = tuple(INF if _is_inf(p) else complex(p) for p, _ in poles)
    return PrimaryDifferential(pts, tuple(int(li) for _, li in poles))


# ------------------------------------------------------------ differentials

@dataclass
class QDifferential:
    cover: HurwitzCover
    l: tuple[int, ...]
    s: complex
    flavor: str = "cy_s"
    base_point: complex | None = None
    base_log_f: complex | None = None
    exponents: dict = field(default_factory=dict)

    def __post_init__(self):
        self.l = tuple(int(x) for x in self.l)
        self.s = complex(self.s)
        if self.flavor not in FLAVORS:
            raise HurwitzError(f"unknown flavour {self.flavor!r}")
        if self.flavor == "plain" and (self.s.imag != 0 or self.s.real != round(self.s.real)
                                       or self.s.real < 2):
            raise HurwitzError(f"plain flavour needs an integer s >= 2, got {self.s}")
        if len(self.l) != len(self.cover.poles):
            raise PolarTypeError("one index per pole is needed")
        self.omega = PrimaryDifferential(tuple(p.at for p in self.cover.poles), self.l)
        if self.base_point is None:
            self.base_point = _default_base(self.cover)
        if self.base_log_f is None:
            self.base_log_f = complex(np.log(self.cover(self.base_point)))

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * self.s)

    @property
    def power(self) -> complex:
        return self.s - 2

    def dlog_coefficient(self, z):
        """Logarithmic derivative of the ``dz^2`` coefficient (single valued)."""
        if self.flavor == "exp_type":
            return self.cover.derivative(z) + self.omega.dlog(z)
        return self.power * self.cover.dlog(z) + self.omega.dlog(z)

    def coefficient(self, z, log_f=None):
        """Coefficient of ``dz^2``; for ``cy_s`` on the branch given by ``log_f``."""
        z = np.asarray(z, complex)
        if self.flavor == "exp_type":
            return np.exp(self.cover(z)) * self.omega(z)
        if self.flavor == "plain":
            return self.cover(z) ** int(round(self.power.real)) * self.omega(z)
        if log_f is None:
            log_f = np.log(self.cover(z))
        return np.exp(self.power * log_f) * self.omega(z)

    def continue_log_f(self, points: np.ndarray, log_f0: complex | None = None,
                       max_step: float = 0.3) -> np.ndarray:
        """Continue ``log f`` along a polyline starting at ``points[0]``."""
        pts = np.asarray(points, complex)
        if log_f0 is None:
            if abs(pts[0] - self.base_point) > 1e-12:
                raise ContinuationError("path must start at the base point or give log f there")
            log_f0 = self.base_log_f
        return continue_log(self.cover, pts, log_f0, max_step)

    def xi_along(self, points: np.ndarray, log_f0: complex | None = None) -> np.ndarray:
        """Values of the coefficient continued along ``points``."""
        if self.flavor != "cy_s":
            return self.coefficient(points)
        lf = self.continue_log_f(points, log_f0)
        return self.coefficient(points, lf)

    def to_dict(self) -> dict:
        out = self.cover.to_dict()
        out.update({"l": list(self.l), "s": [self.s.real, self.s.imag], "flavor": self.flavor})
        return out


def continue_log(func: Callable, pts: np.ndarray, log0: complex, max_step: float = 0.3) -> np.ndarray:
    """Continuous branch of ``log func`` along consecutive samples."""
    vals = func(pts)
    if np.any(vals == 0) or not np.all(np.isfinite(vals)):
        raise ContinuationError("path meets a zero or pole")
    out = np.empty(len(pts), complex)
    out[0] = log0
    cur = log0
    for k in range(1, len(pts)):
        step = cmath.log(vals[k] / vals[k - 1])
        if abs(step.imag) > max_step:
            # refine the segment until increments are small
            sub = np.linspace(pts[k - 1], pts[k], 65)
            sv = func(sub)
            if np.any(sv == 0) or not np.all(np.isfinite(sv)):
                raise ContinuationError("segment meets a zero or pole")
            inc = np.log(sv[1:] / sv[:-1])
            if np.max(np.abs(inc.imag)) > 1.0:
                raise ContinuationError("branch continuation failed near a singularity")
            step = complex(np.sum(inc))
        cur = cur + step
        out[k] = cur
    # keep the real part exact
    out.real = np.log(np.abs(vals))
    return out


def _default_base(cover: HurwitzCover) -> complex:
    sing = cover.finite_singularities()
    r = 1.0 + (float(np.max(np.abs(sing))) if len(sing) else 0.0)
    return complex(r + 0.5, 0.0)


def make_qdiff(cover: HurwitzCover, l: Sequence[int], s: complex = 3.0,
               flavor: str = "cy_s", rel_sep: float = 1e-8) -> QDifferential:
    """Validated differential with its local exponents recorded."""
    s = complex(s)
    l = tuple(int(x) for x in l)
    if flavor == "cy_s":
        if s.real <= 2:
            raise HurwitzError("cy_s differentials need Re(s) > 2")
        if not cover.is_regular(rel_sep):
            raise NotRegularError("not regular: f has a multiple zero")
    if flavor == "plain":
        if abs(s.imag) > 1e-12 or abs(s.real - round(s.real)) > 1e-12 or s.real < 2:
            raise HurwitzError("plain differentials need an integer s >= 2")
    qd = QDifferential(cover, l, s, flavor)
    exps = {}
    for i, (p, li) in enumerate(zip(cover.poles, l)):
        if flavor == "exp_type":
            exps[f"pole{i}"] = ("exp", p.order, li)
            continue
        e = -p.order * qd.power - li
        if flavor == "cy_s" and (p.order * qd.power + li).real <= 2:
            raise PolarTypeError(f"pole {i}: Re(k(s-2)+l) = {(p.order * qd.power + li).real} <= 2")
        exps[f"pole{i}"] = e
    if flavor != "exp_type":
        for j, z in enumerate(cover.zeros()):
            exps[f"zero{j}"] = qd.power
        if cover.zero_at_infinity():
            exps["zero_inf"] = qd.power
    qd.exponents = exps
    return qd


# ------------------------------------------------------------ checks

def argument_principle(func_dlog: Callable, center: complex, radius: float,
                       n: int = 4096) -> complex:
    """``(1/2 pi i) \\oint f'/f dz`` on a circle, trapezoidal rule."""
    t = np.arange(n) * (2 * np.pi / n)
    z = center + radius * np.exp(1j * t)
    dz = 1j * radius * np.exp(1j * t)
    return complex(np.mean(func_dlog(z) * dz) / 1j)


@dataclass
class ZeroCountReport:
    counted: int
    expected: int
    roots_found: int
    simple: bool
    raw: float

    @property
    def ok(self) -> bool:
        return self.counted == self.expected == self.roots_found and self.simple

    def to_dict(self) -> dict:
        return {"counted": self.counted, "expected": self.expected,
                "roots_found": self.roots_found, "simple": self.simple, "ok": self.ok,
                "raw_integral": self.raw}


def zero_count_check(qd: QDifferential, n: int = 4096) -> ZeroCountReport:
    """Count zeros of ``f`` on the sphere by contour integrals."""
    cover = qd.cover
    finite_poles = [p for p in cover.poles if p.finite]
    pts = list(cover.zeros()) + [p.at for p in finite_poles]
    big = 2.0 * (1.0 + max((abs(z) for z in pts), default=0.0))
    i_big = argument_principle(cover.dlog, 0.0, big, n)
    poles_c = 0.0
    for p in finite_poles:
        others = [abs(p.at - z) for z in pts if abs(p.at - z) > 1e-12]
        r = 0.4 * min(others) if others else 0.5
        poles_c += -argument_principle(cover.dlog, p.at, r, n).real
    zeros_c = i_big.real + poles_c
    zeros_inf = max(-i_big.real, 0.0)
    total = zeros_c + zeros_inf
    counted = int(round(total))
    roots = cover.zeros()
    return ZeroCountReport(counted, sum(cover.orders), len(roots) + cover.zero_at_infinity(),
                           is_simple(roots), float(total))


def local_exponent_audit(qd: QDifferential, radius: float = 1e-3, n: int = 512) -> dict:
    """Residue of ``d log`` of the coefficient around each finite singularity.

    The residue is the complex local exponent; it is compared with the
    recorded one.  Returns ``{name: (measured, declared)}``.
    """
    out = {}
    zeros = qd.cover.zeros()
    pts = list(zeros) + [p.at for p in qd.cover.poles if p.finite]
    sep = min((abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]), default=1.0)
    r = min(radius, 0.25 * sep)
    for j, z in enumerate(zeros):
        out[f"zero{j}"] = (argument_principle(qd.dlog_coefficient, z, r, n), qd.exponents[f"zero{j}"])
    for i, p in enumerate(qd.cover.poles):
        if qd.flavor == "exp_type":
            continue
        if p.finite:
            meas = argument_principle(qd.dlog_coefficient, p.at, r, n)
        else:
            big = 2.0 * (1.0 + max((abs(x) for x in pts), default=0.0))
            # at infinity: coefficient in w = 1/z picks up w^-4 from dz^2
            meas = -argument_principle(qd.dlog_coefficient, 0.0, big, n) - 4
        out[f"pole{i}"] = (meas, qd.exponents[f"pole{i}"])
    return out


# ------------------------------------------------------------ recovery

def sampling_circle(points: Sequence[complex], n: int = 256) -> tuple[float, np.ndarray]:
    r = 1.5 * (1.0 + max((abs(z) for z in points), default=0.0))
    t = np.arange(n + 1) * (2 * np.pi / n)
    return r, r * np.exp(1j * t)


@dataclass
class Recovery:
    cover: HurwitzCover
    raw_coefficients: np.ndarray
    phase_index: complex  # m with raw = omega_{s-2}^m * normalised
    monodromy: complex


def recover_cover(xi_along: Callable[[np.ndarray], np.ndarray], l: Sequence[int],
                  poles: Sequence[Pole], s: complex, circle: np.ndarray,
                  base_log: complex | None = None, tol: float = 1e-7) -> Recovery:
    """Rebuild ``f`` from samples of ``xi`` along a closed circle.

    ``xi_along(circle)`` must return the coefficient continued along the
    circle (first sample = base point).  ``base_log`` optionally fixes the
    value of ``(s-2) log f`` at the base point; otherwise the principal
    logarithm of ``xi/Omega`` is used, which changes the answer by a power of
    ``omega_{s-2}``.  The returned cover is normalised so that its leading
    coefficient at the first declared pole is one.
    """
    s = complex(s)
    power = s - 2
    poles = tuple(poles)
    omega = PrimaryDifferential(tuple(p.at for p in poles), tuple(l))
    pts = np.asarray(circle, complex)
    if abs(pts[0] - pts[-1]) > 1e-12:
        raise ContinuationError("sampling path must be closed")
    vals = np.asarray(xi_along(pts), complex)
    g = vals / omega(pts)
    logs = np.empty(len(pts), complex)
    logs[0] = base_log if base_log is not None else cmath.log(g[0])
    inc = np.log(g[1:] / g[:-1])
    if np.max(np.abs(inc.imag)) > 1.0:
        raise ContinuationError("samples too coarse for branch continuation")
    logs[1:] = logs[0] + np.cumsum(inc)
    log_f = logs / power
    # single-valuedness of f around the circle
    turn = (logs[-1] - logs[0]) / (2j * math.pi * power)
    finite = [p for p in poles if p.finite]
    inf_order = sum(p.order for p in poles if not p.finite)
    if abs(turn - round(turn.real)) > 1e-6 or int(round(turn.real)) != inf_order:
        raise PolarTypeError(f"recovered f winds {turn:.6g} times around the sampling circle, "
                             f"declared poles need {inf_order}")
    f_vals = np.exp(log_f[:-1])
    den = np.ones(1, complex)
    for p in finite:
        den = np.polymul(den, np.poly([p.at] * p.order))
    prod = f_vals * np.polyval(den, pts[:-1])
    n = len(prod)
    r = abs(pts[0])
    phase0 = pts[0] / r
    coef = np.fft.fft(prod) / n  # coefficient of (z/pts0)^j
    degree = sum(p.order for p in poles)
    if degree + 1 > n // 2:
        raise HurwitzError("too few samples for the polynomial degree")
    tail = np.max(np.abs(coef[degree + 1:])) if n > degree + 1 else 0.0
    scale = np.max(np.abs(coef[:degree + 1]))
    if tail > tol * scale:
        raise PolarTypeError("recovered f times the declared denominator is not a polynomial "
                             f"of degree {degree} (tail {tail / scale:.2e})")
    num = coef[:degree + 1] / (phase0 * r) ** np.arange(degree + 1)
    num = num[::-1]
    raw = HurwitzCover(num, den, poles)
    lead = leading_coefficient(raw, 0)
    m = cmath.log(lead) * power / (2j * math.pi)
    cover = HurwitzCover(num / lead, den, poles)
    return Recovery(cover, num, m, turn)


def recover_from_qdiff(qd: QDifferential, n: int = 256, base_log: complex | None = None) -> Recovery:
    """Convenience wrapper: sample ``qd`` on a circle around all singularities."""
    _, circle = sampling_circle(qd.cover.finite_singularities(), n)
    lf0 = complex(np.log(qd.cover(circle[0])))
    return recover_cover(lambda p: qd.xi_along(p, lf0), qd.l, qd.cover.poles, qd.s, circle,
                         base_log=base_log)


# ------------------------------------------------------------ json

def _c(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1] if len(x) > 1 else 0.0)
    return complex(x)


def load_qdiff(data: dict) -> QDifferential:
    try:
        num = [_c(x) for x in data["num"]]
        den = [_c(x) for x in data.get("den", [1.0])]
        poles = []
        for p in data["poles"]:
            at = p["at"]
            poles.append(Pole(INF if _is_inf(at) else _c(at), int(p["k"])))
        cover = HurwitzCover(np.asarray(num), np.asarray(den), tuple(poles))
        s = _c(data.get("s", 3.0))
        return make_qdiff(cover, data["l"], s, data.get("flavor", "cy_s"))
    except (KeyError, TypeError, IndexError) as exc:
        raise HurwitzError(f"malformed cover file: {exc!r}") from exc


def dumps_qdiff(qd: QDifferential) -> str:
    return json.dumps(qd.to_dict(), indent=2, sort_keys=True)
