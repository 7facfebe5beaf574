import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qdifflab.flatgeo import (ClearanceError, FlatDifferential, FlatGeoError, RingDomainError,
                              connection_period, find_saddle_connections, is_saddle_free,
                              render_svg, separatrices_at_zero, sqrt_continuation,
                              strip_decomposition, trace_leaf)
from qdifflab.hurwitz import HurwitzCover, make_qdiff
from qdifflab.periods import SheetPath, period
from qdifflab.surface import MarkedSurfaceData, hat_rank

# \int_0^sqrt3 sqrt(x (sqrt3 - x) (sqrt3 + x)) dx with the algebraic endpoint weight
CUBIC_PERIOD = integrate.quad(lambda x: math.sqrt(math.sqrt(3) + x), 0, math.sqrt(3),
                              weight="alg", wvar=(0.5, 0.5), epsabs=1e-15, epsrel=1e-14)[0]


def a_n(rng, n):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return FlatDifferential.polynomial([1, 0, *a])


def annulus(rng, p, q):
    num = np.concatenate([[1], rng.normal(size=p + q) + 1j * rng.normal(size=p + q)])
    cover = HurwitzCover.from_poles(num, [(0.0, q)], inf_order=p)
    return FlatDifferential.from_qdiff(make_qdiff(cover, [2, 2], s=3, flavor="plain"))


def test_sqrt_continuation_examples():
    assert abs(sqrt_continuation(FlatDifferential.polynomial([1]), [0, 1]).total - 1) < 1e-14
    loop = np.exp(1j * np.linspace(0, 2 * np.pi, 60))
    sc = sqrt_continuation(FlatDifferential.polynomial([1, 0]), loop)
    assert abs(sc.values[-1] + sc.values[0]) < 1e-12
    cubic = FlatDifferential.polynomial([1, 0, -3, 0])
    w = sqrt_continuation(cubic, [0, math.sqrt(3)]).total
    assert abs(w.real) < 1e-12 and abs(abs(w) - CUBIC_PERIOD) < 1e-10


def test_sqrt_continuation_clearance():
    with pytest.raises(ClearanceError):
        sqrt_continuation(FlatDifferential.polynomial([1, 0, -1]), [0.5, 1.0, 2.0])


def test_separatrix_counts():
    fd = FlatDifferential.polynomial([1, 0, -3, 0])
    assert len(separatrices_at_zero(fd, 1, 0.4)) == 3
    fd2 = FlatDifferential.polynomial([1, 0, 0, -1])
    assert all(len(separatrices_at_zero(fd2, j, 0.2)) == 3 for j in range(3))
    double = FlatDifferential(np.poly([0.5, 0.5, -1.0]), zeros=[(0.5, 2), (-1.0, 1)])
    assert len(separatrices_at_zero(double, 0, 0.3)) == 4


def test_cubic_rays_terminate():
    fd = FlatDifferential.polynomial([1, 0, -3, 0])
    rays = [t for j in range(3) for t in separatrices_at_zero(fd, j, 0.0)]
    assert len(rays) == 9
    assert all(t.termination in ("hits_zero", "escapes_to_pole") for t in rays)
    assert all(t.target == "inf" for t in rays if t.termination == "escapes_to_pole")


def test_a2_decomposition():
    fd = FlatDifferential.polynomial([1, 0, -3, 0])
    dec = strip_decomposition(fd, 0.3)
    assert dec.saddle_free and dec.counts == (2, 5)
    for s in dec.strips:
        assert abs(abs(s.period) - CUBIC_PERIOD) < 1e-9
        assert s.period_check < 1e-9
        assert s.saddle_connection.termination == "hits_zero"
        assert abs(connection_period(fd, s.saddle_connection) - s.period) < 1e-8
        assert (s.period * cmath.exp(-0.3j)).imag > 0


def test_a1_single_strip():
    dec = strip_decomposition(FlatDifferential.polynomial([1, 0, -1]), 0.4)
    assert dec.saddle_free and dec.counts == (1, 4)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_a_n_strips_equal_rank(n):
    rng = np.random.default_rng(10 + n)
    surf = MarkedSurfaceData(0, (n + 1,), (4,))
    for _ in range(3):
        dec = strip_decomposition(a_n(rng, n), float(rng.uniform(0, np.pi)))
        assert dec.saddle_free
        assert dec.counts == (hat_rank(surf), n + 3)


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_annulus_strips(p, q):
    rng = np.random.default_rng(100 * p + q)
    fd = annulus(rng, p, q)
    dec = strip_decomposition(fd, float(rng.uniform(0, np.pi)))
    assert dec.saddle_free
    assert dec.counts == (p + q, p + q)
    assert dec.counts[0] == hat_rank(MarkedSurfaceData(0, (p, q), (2, 2)))


def test_tolerance_halving_is_stable():
    rng = np.random.default_rng(5)
    for n in (2, 3):
        fd = a_n(rng, n)
        a = strip_decomposition(fd, 0.9, tol=1e-9)
        b = strip_decomposition(fd, 0.9, tol=5e-10)
        assert a.counts == b.counts
        for s, t in zip(a.strips, b.strips):
            assert abs(s.period - t.period) < 1e-7


def test_ring_domain():
    fd = FlatDifferential.rational([1], [1, 0, 0])
    with pytest.raises(RingDomainError):
        strip_decomposition(fd, 0.0)
    assert trace_leaf(fd, 1.0, np.pi / 2).termination == "closed"


def test_wall_crossing():
    fd = FlatDifferential.polynomial([1, 0, -1])
    assert not is_saddle_free(fd, np.pi / 2)
    assert is_saddle_free(fd, np.pi / 2 + 1e-4)
    assert is_saddle_free(fd, np.pi / 2 - 1e-4)
    # the two sides of the wall give different strip periods up to sign
    lo = strip_decomposition(fd, np.pi / 2 - 1e-3).strips[0].period
    hi = strip_decomposition(fd, np.pi / 2 + 1e-3).strips[0].period
    assert abs(abs(lo) - math.pi / 2) < 1e-9 and abs(abs(hi) - math.pi / 2) < 1e-9


def test_z2_minus_one_connection():
    fd = FlatDifferential.polynomial([1, 0, -1])
    cs = find_saddle_connections(fd)
    assert len(cs) == 1
    c = cs[0]
    assert c.zeros == (0, 1)
    assert abs(c.phase - np.pi / 2) < 1e-9
    assert abs(abs(c.period) - np.pi / 2) < 1e-9 and abs(c.period.real) < 1e-9
    assert abs(connection_period(fd, c.trajectory) - c.period) < 1e-8


def test_odd_symmetry_of_connections():
    # phi(-z) = -phi(z): negation maps connections of phase psi to phase psi + pi/2
    fd = FlatDifferential.polynomial(np.array([1, 0, -3, 0]) * cmath.exp(0.3j))
    cs = find_saddle_connections(fd)
    assert cs
    zeros = [z for z, _ in fd.zeros]
    image = {j: int(np.argmin([abs(w + zeros[j]) for w in zeros])) for j in range(len(zeros))}
    for c in cs:
        target = tuple(sorted(image[j] for j in c.zeros))
        psi = (c.phase + np.pi / 2) % np.pi
        assert any(d.zeros == target and abs(((d.phase - psi + 1) % np.pi) - 1) < 1e-7 for d in cs)
        assert abs(abs(c.period) - CUBIC_PERIOD) < 1e-9


def test_periods_module_agrees_on_connection():
    # same polyline, independent quadrature route
    fd = FlatDifferential.polynomial([1, 0, -3, 0])
    dec = strip_decomposition(fd, 0.3)
    qd = make_qdiff(HurwitzCover.polynomial([1, 0, -3, 0]), [4], s=3, flavor="plain")
    for s in dec.strips:
        pts = s.saddle_connection.polyline()
        z_flat = sqrt_continuation(fd, pts).total
        z_per = period(qd, SheetPath(pts))
        assert abs(abs(z_flat) - abs(z_per)) < 1e-8
        assert min(abs(z_flat - z_per), abs(z_flat + z_per)) < 1e-8


@settings(max_examples=15, deadline=None, derandomize=True)
@given(re=st.floats(-2, 2), im=st.floats(-2, 2), theta=st.floats(0.05, 3.05))
def test_horizontality(re, im, theta):
    fd = FlatDifferential.polynomial([1, 0, complex(re, im), 1.0])
    e = cmath.exp(-1j * theta)
    for j in range(len(fd.zeros)):
        for t in separatrices_at_zero(fd, j, theta):
            pts = t.points if t.termination != "hits_zero" else t.points[:-1]
            sc = sqrt_continuation(fd, pts)
            w = np.cumsum(sc.increments)
            assert np.max(np.abs((w * e).imag)) < 1e-8 * max(1.0, t.arc_length)


def test_svg_layers():
    fd = FlatDifferential.polynomial([1, 0, -3, 0])
    svg = render_svg(fd, strip_decomposition(fd, 0.3), fill=3)
    assert svg.startswith("<svg") and svg.endswith("</svg>")
    for color in ('stroke="black"', 'stroke="red"', 'stroke="green"', 'fill="red"'):
        assert color in svg


def test_cy_s_rejected():
    qd = make_qdiff(HurwitzCover.polynomial([1, 0, -3, 0]), [4], s=3.5)
    with pytest.raises(FlatGeoError):
        FlatDifferential.from_qdiff(qd)
