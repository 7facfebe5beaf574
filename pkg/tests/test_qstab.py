import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdifflab.flatgeo import FlatDifferential, strip_decomposition
from qdifflab.hurwitz import HurwitzCover, make_qdiff
from qdifflab.periods import SheetPath, period, q_shift
from qdifflab.qstab import (HomEntry, QStabError, StabilityDatum, from_strips, gate, gldim,
                            induce, min_xhom_bound, rotate, xhom_bounded_check)

A2 = [1, 0, -3 + 0.4j, 0.7 - 0.2j]


def a2_datum(theta=0.3, coeffs=A2):
    fd = FlatDifferential.polynomial(coeffs)
    return fd, strip_decomposition(fd, theta)


def two_simples(eps):
    # simples at phases 1/2 + eps and 1/2 - eps with one degree-one extension
    z1 = cmath.exp(1j * math.pi * (0.5 + eps))
    z2 = 2 * cmath.exp(1j * math.pi * (0.5 - eps))
    hom = (HomEntry("a", "a"), HomEntry("b", "b"), HomEntry("a", "b", 1))
    return StabilityDatum.from_charges(("a", "b"), (z1, z2), hom)


def test_from_strips_a2():
    fd, dec = a2_datum()
    qd = make_qdiff(HurwitzCover.polynomial(A2), [4], s=3, flavor="plain")
    d = from_strips(dec, qd)
    assert d.labels == ("strip0", "strip1")
    z1, z2 = d.charges
    assert abs((z1.conjugate() * z2).imag) > 0.1 * abs(z1) * abs(z2)
    assert np.all(d.phases > 0.3 / math.pi) and np.all(d.phases <= 0.3 / math.pi + 1)
    assert d.phase_residual() < 1e-12
    assert sum(1 for h in d.hom if h.shift == 1) == 1


def test_rotation_shifts_phases():
    t = 0.17
    fd, dec = a2_datum(0.3)
    rot = FlatDifferential.polynomial(np.array(A2) * cmath.exp(2j * math.pi * t))
    d0 = from_strips(dec)
    d1 = from_strips(strip_decomposition(rot, 0.3 + math.pi * t))
    # strips may be listed in another order; compare as sets
    assert sorted(d1.phases) == pytest.approx(sorted(d0.phases + t), abs=1e-9)
    r = rotate(d0, t)
    assert np.allclose(sorted(r.phases), sorted(d1.phases), atol=1e-9)
    assert gldim(d1) == pytest.approx(gldim(d0), abs=1e-9)


def test_rescaling():
    r = 2.5
    _, dec = a2_datum()
    fd = FlatDifferential.polynomial(np.array(A2) * r)
    d0, d1 = from_strips(dec), from_strips(strip_decomposition(fd, 0.3))
    assert np.allclose(sorted(d1.phases), sorted(d0.phases), atol=1e-9)
    assert np.allclose(sorted(abs(d1.charges)), sorted(abs(d0.charges) * math.sqrt(r)), rtol=1e-9)


def test_gldim_examples():
    one = StabilityDatum.from_charges(("x",), (1j,), (HomEntry("x", "x"),))
    assert gldim(one) == 0
    for eps in (0.0, 0.1, 0.25):
        assert gldim(two_simples(eps)) == pytest.approx(1 - 2 * eps, abs=1e-12)
    assert gldim(StabilityDatum.from_charges(("x",), (1j,))) == -math.inf
    d = two_simples(0.1)
    assert gldim(rotate(d, 0.33)) == pytest.approx(gldim(d), abs=1e-12)


def test_gate_arithmetic():
    assert gate(1, 3, "open") and gate(1, 3, "closed")
    assert not gate(1, 2, "open") and gate(1, 2, "closed")
    assert not gate(1, 1.999, "closed")
    with pytest.raises(QStabError):
        gate(1, 3, "sideways")


def test_induce_modes():
    d = two_simples(0.0)  # gldim exactly 1
    with pytest.raises(QStabError):
        induce(d, 2, "open")
    q = induce(d, 2, "closed")
    assert q.checks["gate"] and q.checks["support"]
    assert induce(d, 3 + 0.2j, "open").mode == "open"


def test_induced_phases_are_translates():
    d = two_simples(0.1)
    s = 3.4 + 0.3j
    q = induce(d, s, "open", window=1)
    want = sorted(p + k * s.real for p in d.phases for k in (-1, 0, 1))
    assert q.induced_phases == pytest.approx(want, abs=1e-14)
    assert q.checks["phase_residual"] < 1e-12


def test_support_constant():
    d = two_simples(0.1)
    q = induce(d, 3, "open")
    want = 2 * 1 / min(abs(d.charges))
    assert q.support_constant == pytest.approx(want)
    assert all(q.support_constant * abs(z) > 1 for z in d.charges)
    # a heavier class raises the constant
    q2 = induce(d, 3, "open", classes=[{"a": {0: 2}, "b": {0: -1}}, {"a": {0: 1}}])
    assert q2.checks["support"]


def test_xhom_bounded():
    d = two_simples(0.1)
    q = induce(d, 3, "open")
    assert {h.x_offset for h in q.hom} == {0, 1}
    assert xhom_bounded_check(q, 1) and not xhom_bounded_check(q, 0)
    extra = q.hom + (HomEntry("a", "b", 0, 2),)
    assert not xhom_bounded_check(extra, 1)
    _, dec = a2_datum()
    assert min_xhom_bound(induce(from_strips(dec), 3, "open").hom) == 1


def test_integer_s_gives_sign():
    d = two_simples(0.1)
    for n in (2, 3, 4, 5):
        q = induce(d, n, "closed", window=2)
        for o in q.objects:
            base = d.charges[d.index(o.label)]
            assert o.charge == (-1) ** (n * o.k) * base


def test_open_gap_exceeds_closed_boundary():
    d = two_simples(0.1)
    gl = gldim(d)
    closed = induce(d, gl + 1, "closed")
    opened = induce(d, gl + 1 + 1e-6, "open")
    assert opened.block_gap() > closed.block_gap()


def test_bad_inputs():
    with pytest.raises(QStabError):
        StabilityDatum(("a",), [1j], [0.2])
    with pytest.raises(QStabError):
        StabilityDatum.from_charges(("a",), (1j,), (HomEntry("a", "z"),))
    fd = FlatDifferential.polynomial([1, 0, -1])
    dec = strip_decomposition(fd, 0.4)
    dec.saddle_free = False
    with pytest.raises(QStabError):
        from_strips(dec)


@settings(max_examples=40, deadline=None)
@given(p1=st.floats(0.01, 1.0), p2=st.floats(0.01, 1.0), m1=st.floats(0.1, 5), m2=st.floats(0.1, 5),
       re=st.floats(2.1, 8.0), im=st.floats(-1.0, 1.0), k=st.integers(-2, 1))
def test_equivariance_of_induced_data(p1, p2, m1, m2, re, im, k):
    z = (m1 * cmath.exp(1j * math.pi * p1), m2 * cmath.exp(1j * math.pi * p2))
    hom = (HomEntry("a", "a"), HomEntry("b", "b"), HomEntry("a", "b", 1))
    d = StabilityDatum.from_charges(("a", "b"), z, hom)
    s = complex(re, im)
    if not gate(gldim(d), s, "open"):
        return
    q = induce(d, s, "open", window=2)
    table = {(o.label, o.k): o for o in q.objects}
    qs = cmath.exp(1j * math.pi * s)
    for lab in ("a", "b"):
        lo, hi = table[(lab, k)], table[(lab, k + 1)]
        assert abs(hi.charge - qs * lo.charge) < 1e-12 * (abs(hi.charge) + abs(lo.charge))
        assert hi.phase - lo.phase == pytest.approx(re, abs=1e-12)


def test_equivariance_on_strip_paths():
    _, dec = a2_datum()
    s = 3.6 + 0.4j
    qd = make_qdiff(HurwitzCover.polynomial(A2), [4], s=s)
    for strip in dec.strips:
        path = SheetPath(strip.saddle_connection.polyline())
        z = period(qd, path)
        assert abs(period(qd, q_shift(path)) - qd.q * z) < 1e-8 * abs(qd.q * z)
