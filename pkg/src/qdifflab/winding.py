"""Angle change and winding numbers of loops for ``f(z) dz^2``.

The angle change of a loop ``z(t)`` is

    AC = 1/2 Im \\oint (f'/f)(z) z' dt + Im \\oint z''/z' dt

and the winding number is ``AC / pi``.  Only ``f'/f`` enters, so multi-valued
coefficients such as ``z^(s-2)`` are handled through their single-valued
logarithmic derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_SAMPLES = 4096


class WindingError(ValueError):
    pass


@dataclass(frozen=True)
class LoopSpec:
    """A closed loop sampled at ``n`` equally spaced parameter values.

    ``kind`` is ``"smooth"`` (periodic samples, derivatives known or taken
    spectrally) or ``"polygon"`` (straight edges between vertices).
    """

    points: np.ndarray
    velocity: np.ndarray | None = None
    acceleration: np.ndarray | None = None
    kind: str = "smooth"
    per_edge: int = 64

    @classmethod
    def circle(cls, center: complex, radius: float, n: int = DEFAULT_SAMPLES,
               ccw: bool = True) -> "LoopSpec":
        sgn = 1.0 if ccw else -1.0
        t = np.arange(n) * (2 * np.pi / n)
        e = np.exp(1j * sgn * t)
        return cls(center + radius * e, 1j * sgn * radius * e, -radius * e)

    @classmethod
    def ellipse(cls, center: complex, a: float, b: float, tilt: float = 0.0,
                n: int = DEFAULT_SAMPLES) -> "LoopSpec":
        t = np.arange(n) * (2 * np.pi / n)
        rot = np.exp(1j * tilt)
        z = center + rot * (a * np.cos(t) + 1j * b * np.sin(t))
        v = rot * (-a * np.sin(t) + 1j * b * np.cos(t))
        acc = rot * (-a * np.cos(t) - 1j * b * np.sin(t))
        return cls(z, v, acc)

    @classmethod
    def from_samples(cls, points, closed_duplicate: bool = False) -> "LoopSpec":
        """Periodic samples of a smooth loop; derivatives taken spectrally."""
        z = np.asarray(points, complex)
        if closed_duplicate:
            if abs(z[0] - z[-1]) > 1e-12 * max(1.0, abs(z[0])):
                raise WindingError("loop is not closed")
            z = z[:-1]
        n = len(z)
        k = np.fft.fftfreq(n, d=1.0 / n)
        if n % 2 == 0:
            k[n // 2] = 0.0
        Z = np.fft.fft(z)
        v = np.fft.ifft(1j * k * Z)
        acc = np.fft.ifft(-(k ** 2) * Z)
        return cls(z, v, acc)

    @classmethod
    def polygon(cls, vertices, per_edge: int = 64) -> "LoopSpec":
        v = np.asarray(vertices, complex)
        if abs(v[0] - v[-1]) < 1e-14:
            v = v[:-1]
        if len(v) < 3:
            raise WindingError("a polygon loop needs three vertices")
        return cls(v, kind="polygon", per_edge=per_edge)

    @property
    def n(self) -> int:
        return len(self.points)

    def closed_points(self) -> np.ndarray:
        return np.append(self.points, self.points[0])


def _numeric_dlog(coefficient: Callable, z: np.ndarray) -> np.ndarray:
    h = 1e-6 * np.maximum(1.0, np.abs(z))
    return (coefficient(z + h) - coefficient(z - h)) / (2 * h) / coefficient(z)


def _dlog_values(z, coefficient, dlog, clearance):
    if dlog is not None:
        vals = dlog(z)
    else:
        if coefficient is None:
            raise WindingError("need a coefficient or its logarithmic derivative")
        fz = coefficient(z)
        if np.min(np.abs(fz)) < clearance:
            raise WindingError("coefficient nearly vanishes on the loop")
        vals = _numeric_dlog(coefficient, z)
    if not np.all(np.isfinite(vals)):
        raise WindingError("loop passes through a singularity")
    return vals


def angle_change(coefficient: Callable | None, loop: LoopSpec, dlog: Callable | None = None,
                 clearance: float = 1e-12) -> float:
    """Angle change of ``loop`` for ``coefficient(z) dz^2``.

    ``dlog`` (the analytic ``f'/f``) is used when given; otherwise ``f'/f``
    comes from central differences of ``coefficient``.
    """
    if loop.kind == "polygon":
        return _polygon_angle_change(coefficient, loop, dlog, clearance)
    z = loop.points
    v = loop.velocity
    if v is None:
        raise WindingError("smooth loops need velocities")
    if np.min(np.abs(v)) == 0:
        raise WindingError("loop has a stationary point")
    g = _dlog_values(z, coefficient, dlog, clearance)
    dt = 2 * np.pi / loop.n
    first = 0.5 * np.sum(g * v).imag * dt
    second = np.sum(loop.acceleration / v).imag * dt
    return float(first + second)


def _polygon_angle_change(coefficient, loop, dlog, clearance) -> float:
    v = loop.points
    per_edge = loop.per_edge
    nodes, weights = np.polynomial.legendre.leggauss(per_edge)
    total = 0.0
    turning = 0.0
    m = len(v)
    for i in range(m):
        a, b = v[i], v[(i + 1) % m]
        c = v[(i + 2) % m]
        zq = a + (b - a) * (nodes + 1) / 2
        g = _dlog_values(zq, coefficient, dlog, clearance)
        total += 0.5 * (np.sum(weights * g) * (b - a) / 2).imag
        turning += np.angle((c - b) / (b - a))
    return float(total + turning)


def winding_number(coefficient: Callable | None, loop: LoopSpec,
                   dlog: Callable | None = None) -> float:
    return angle_change(coefficient, loop, dlog) / math.pi


# ---------------------------------------------------------------- closed forms

def wind_simple_zero(s: complex) -> float:
    return complex(s).real


def wind_s_pole(k: int, l: int, s: complex) -> float:
    return -k * (complex(s).real - 2) - l + 2


def wind_exponential(l: int) -> float:
    return 2.0 - l


def wind_zeros_and_pole(l: int) -> float:
    return 2.0 - l


def zero_step(s: complex) -> float:
    """Change of winding when a loop is enlarged across one more simple zero."""
    return complex(s).real - 2


def estimate_bound_check(k_i: int, l_i: int, s: complex, k: int) -> bool:
    """``k > k_i - (k_i + 3 - l_i) / Re(s)``."""
    s = complex(s)
    if s.real <= 2:
        raise ValueError("needs Re(s) > 2")
    return k > k_i - (k_i + 3 - l_i) / s.real


def estimate_threshold(k_i: int, l_i: int, s: complex) -> float:
    return k_i - (k_i + 3 - l_i) / complex(s).real


# ---------------------------------------------------------------- local models

def model_simple_zero(s: complex) -> Callable:
    """``d log`` of ``z^(s-2)``."""
    return lambda z: (s - 2) / z


def model_s_pole(k: int, l: int, s: complex) -> Callable:
    """``d log`` of ``z^(-k(s-2)-l)``."""
    return lambda z: (-k * (s - 2) - l) / z


def model_exponential(k: int, l: int, g_dlog: Callable | None = None) -> Callable:
    """``d log`` of ``exp(z^-k) z^-l g(z)``."""
    def f(z):
        out = -k * z ** (-k - 1) - l / z
        if g_dlog is not None:
            out = out + g_dlog(z)
        return out
    return f


def model_zeros_and_pole(k: int, l: int, s: complex, a: complex = 0.3) -> Callable:
    """``d log`` of ``((z^k - a)/z^k)^(s-2) z^-l``: k simple zeros and a (k, l) pole at 0."""
    def f(z):
        return (s - 2) * (k * z ** (k - 1) / (z ** k - a) - k / z) - l / z
    return f


def winding_report(entries: list[tuple[str, float, float]], tol: float = 1e-6) -> list[dict]:
    return [{"case": name, "computed": got, "expected": want,
             "residual": abs(got - want), "ok": abs(got - want) < tol}
            for name, got, want in entries]


def closed_form_suite(n_s: int = 5, samples: int = DEFAULT_SAMPLES, tol: float = 1e-6,
                      seed: int = 0) -> list[dict]:
    """Closed-form winding checks over ``k in 1..4``, ``l in -3..6``, ``Re s in (2, 10]``."""
    rng = np.random.default_rng(seed)
    s_values = list(2 + 8 * (np.arange(1, n_s + 1) / n_s))
    s_values = [complex(x, float(rng.uniform(-1, 1))) for x in s_values]
    s_values[-1] = complex(10.0, s_values[-1].imag)
    entries = []
    unit = LoopSpec.circle(0, 1.0, samples)
    small = LoopSpec.circle(0, 0.5, samples)
    g_dlog = lambda z: 1.0 + 1.0 / (z - 3.0)  # g = exp(z)(z - 3), nonvanishing on |z| < 2
    for s in s_values:
        entries.append((f"zero s={s:.3g}", winding_number(None, unit, model_simple_zero(s)),
                        wind_simple_zero(s)))
        for k in range(1, 5):
            for l in range(-3, 7):
                entries.append((f"pole k={k} l={l} s={s:.3g}",
                                winding_number(None, unit, model_s_pole(k, l, s)),
                                wind_s_pole(k, l, s)))
                entries.append((f"mixed k={k} l={l} s={s:.3g}",
                                winding_number(None, unit, model_zeros_and_pole(k, l, s)),
                                wind_zeros_and_pole(l)))
    for k in range(1, 5):
        for l in range(-3, 7):
            entries.append((f"exp k={k} l={l}",
                            winding_number(None, small, model_exponential(k, l, g_dlog)),
                            wind_exponential(l)))
    return winding_report(entries, tol)
