import cmath
import math

import numpy as np
import pytest

from qdifflab.hurwitz import (
    INF, HurwitzCover, HurwitzError, NotRegularError, Pole, PolarTypeError, cyclic_action,
    hurwitz_dimension, local_exponent_audit, make_qdiff, polynomial_roots, primary_differential,
    recover_cover, recover_from_qdiff, sampling_circle, type_a_coefficients, zero_count_check,
    leading_coefficient, load_qdiff, dumps_qdiff,
)
from qdifflab.surface import MarkedSurfaceData, hat_rank
import json


def random_regular_cover(rng):
    """Rational cover with random finite poles and maybe a pole at infinity."""
    n_fin = int(rng.integers(0, 3))
    inf_order = int(rng.integers(1, 4)) if (n_fin == 0 or rng.random() < 0.6) else 0
    finite = [(complex(*rng.normal(size=2) * 1.5), int(rng.integers(1, 3))) for _ in range(n_fin)]
    deg = inf_order + sum(k for _, k in finite)
    num_deg = deg if inf_order else int(rng.integers(deg - 1, deg + 1))
    num = rng.normal(size=num_deg + 1) + 1j * rng.normal(size=num_deg + 1)
    if inf_order:
        num[0] = 1.0
    return HurwitzCover.from_poles(num, finite, inf_order)


def test_roots_against_known():
    assert np.allclose(polynomial_roots([1, 0, -3, 0]), [-math.sqrt(3), 0, math.sqrt(3)])
    rng = np.random.default_rng(1)
    for deg in range(1, 10):
        c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        r = polynomial_roots(c)
        assert len(r) == deg
        assert np.max(np.abs(np.polyval(c, r))) < 1e-10


def test_primary_differential_examples():
    om = primary_differential([(INF, 4)])
    assert om(2.0 + 1j) == pytest.approx(1.0)
    om = primary_differential([(0, 2), (INF, 2)])
    assert om(0.5) == pytest.approx(4.0)
    om = primary_differential([(0, 3), (1, 1)])
    z = 0.3 + 0.7j
    assert om(z) == pytest.approx(z ** -3 * (z - 1) ** -1)
    with pytest.raises(HurwitzError):
        primary_differential([(0, 3), (1, 2)])


def test_primary_differential_at_infinity():
    om = primary_differential([(0, 2), (INF, 2)])
    w = 1e-3 * cmath.exp(0.4j)
    # coefficient in w behaves like w^-l_inf
    ratio = om.in_w_chart(w) / om.in_w_chart(w / 2)
    assert ratio == pytest.approx(2 ** -2)


def test_type_a_qdiff():
    for n in (1, 2, 3, 4):
        a = np.arange(1, n + 1) * 0.3 + 0.1j
        cover = HurwitzCover.type_a(list(a))
        qd = make_qdiff(cover, [4], 3.5)
        assert sum(1 for k in qd.exponents if k.startswith("zero")) == n + 1
        assert qd.exponents["pole0"] == pytest.approx(-(n + 1) * 1.5 - 4)


def test_plain_a2_profile():
    qd = make_qdiff(HurwitzCover.polynomial([1, 0, -3, 0]), [4], 3, "plain")
    assert qd.exponents["pole0"] == -7
    assert [qd.exponents[f"zero{j}"] for j in range(3)] == [1, 1, 1]
    z = 0.4 + 0.2j
    assert qd.coefficient(z) == pytest.approx(z ** 3 - 3 * z)


def test_double_zero_rejected():
    with pytest.raises(NotRegularError):
        make_qdiff(HurwitzCover.polynomial([1, 0, 0]), [4], 3.5)


def test_pole_condition_enforced():
    cover = HurwitzCover.from_poles([1, 0, -1], [(0, 1)], inf_order=1)
    with pytest.raises(PolarTypeError):
        make_qdiff(cover, [5, -1], 2.5)  # Re(1*(0.5) - 1) <= 2 at the second pole


def test_declared_poles_checked():
    with pytest.raises(PolarTypeError):
        HurwitzCover(np.array([1, 0, -1], complex), np.array([1, 0], complex), (Pole(INF, 2),))


def test_zero_count_examples():
    qd = make_qdiff(HurwitzCover.type_a([0.3, -1.1, 0.5]), [4], 4.2)
    assert zero_count_check(qd).counted == 4
    cover = HurwitzCover.from_poles([1, 0, -1], [(0, 1)], inf_order=1)
    rep = zero_count_check(make_qdiff(cover, [2, 2], 3.3))
    assert rep.ok and rep.counted == 2


def test_zero_at_infinity_counted():
    # f = z / ((z-1)(z+1)): zero at 0 and at infinity, poles at +-1
    cover = HurwitzCover.from_poles([1, 0], [(1, 1), (-1, 1)])
    rep = zero_count_check(make_qdiff(cover, [2, 2], 5.0))
    assert rep.counted == 2 and rep.ok


def test_random_covers_zero_count():
    rng = np.random.default_rng(7)
    done = 0
    while done < 120:
        cover = random_regular_cover(rng)
        if not cover.is_regular():
            continue
        b = len(cover.poles)
        l = [4 - 2 * (b - 1)] + [2] * (b - 1)
        try:
            qd = make_qdiff(cover, l, 7.0)
        except PolarTypeError:
            continue
        rep = zero_count_check(qd)
        assert rep.ok, rep
        done += 1


def test_local_exponent_audit():
    cover = HurwitzCover.from_poles([1, 0.2, -1], [(0.1j, 1)], inf_order=1)
    qd = make_qdiff(cover, [3, 1], 3.7 + 0.3j)
    for name, (meas, decl) in local_exponent_audit(qd).items():
        assert abs(meas - decl) < 1e-8, name


def test_recover_a2():
    qd = make_qdiff(HurwitzCover.polynomial([1, 0, -3, 0]), [4], 3.5)
    rec = recover_from_qdiff(qd)
    assert np.max(np.abs(rec.cover.coefficients() - [1, 0, -3, 0])) < 1e-8


def test_recover_ambiguity_is_root_power():
    s = 3.5 + 0.25j
    qd = make_qdiff(HurwitzCover.type_a([0.5, -1.0]), [4], s)
    _, circle = sampling_circle(qd.cover.finite_singularities())
    lf0 = complex(np.log(qd.cover(circle[0])))
    for m in (-2, 1, 3):
        base = (s - 2) * lf0 + 2j * math.pi * m
        rec = recover_cover(lambda p: qd.xi_along(p, lf0), qd.l, qd.cover.poles, s, circle,
                            base_log=base)
        omega = cmath.exp(2j * math.pi / (s - 2))
        assert np.max(np.abs(rec.raw_coefficients - omega ** m * qd.cover.coefficients())) < 1e-8
        assert np.max(np.abs(rec.cover.coefficients() - qd.cover.coefficients())) < 1e-8


def test_recover_linear():
    qd = make_qdiff(HurwitzCover.polynomial([1, 0]), [4], 4.4)
    rec = recover_from_qdiff(qd)
    assert np.allclose(rec.cover.coefficients(), [1, 0], atol=1e-10)


def test_recover_wrong_l_rejected():
    cover = HurwitzCover.from_poles([1, 0.3, -1], [(0, 1)], inf_order=1)
    qd = make_qdiff(cover, [2, 2], 3.37)
    _, circle = sampling_circle(cover.finite_singularities())
    lf0 = complex(np.log(cover(circle[0])))
    with pytest.raises(PolarTypeError):
        recover_cover(lambda p: qd.xi_along(p, lf0), [1, 3], cover.poles, qd.s, circle)


def test_hurwitz_dimension():
    for n in range(1, 6):
        assert hurwitz_dimension(0, [n + 1]) == n
    assert hurwitz_dimension(0, [2, 3]) == 5
    for g, k, l in [(0, (5,), (4,)), (0, (2, 3), (2, 2)), (1, (3,), (0,))]:
        assert hurwitz_dimension(g, k) == hat_rank(MarkedSurfaceData(g, k, l))


def test_cyclic_action():
    f = HurwitzCover.type_a([-3.0, 0.0])
    assert np.allclose(cyclic_action(f, 3).coefficients(), f.coefficients())
    w = cmath.exp(2j * math.pi / 3)
    g = cyclic_action(f, 1)
    assert type_a_coefficients(g)[0] == pytest.approx(w ** 2 * -3)
    z = 0.3 + 0.8j
    assert g(z) == pytest.approx(f(z / w))


def test_cyclic_orbit_divides():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4, 5):
        for special in (False, True):
            a = np.zeros(n, complex)
            if special:
                a[-1] = 1.0  # z^(n+1) + 1 is fixed by every rotation
            else:
                a = rng.normal(size=n) + 1j * rng.normal(size=n)
            f = HurwitzCover.type_a(list(a))
            orbit = []
            for m in range(n + 1):
                c = cyclic_action(f, m).coefficients()
                if not any(np.allclose(c, o) for o in orbit):
                    orbit.append(c)
            assert (n + 1) % len(orbit) == 0


def test_cyclic_action_rejects_non_type_a():
    with pytest.raises(HurwitzError):
        cyclic_action(HurwitzCover.polynomial([2, 0, 1]), 1)


def test_json_roundtrip():
    qd = make_qdiff(HurwitzCover.from_poles([1, 0, -1], [(0, 1)], inf_order=1), [2, 2], 3.3 + 0.1j)
    back = load_qdiff(json.loads(dumps_qdiff(qd)))
    assert back.l == qd.l and back.s == qd.s
    assert np.allclose(back.cover.num, qd.cover.num)


def test_plain_flavour_needs_integer_s():
    cover = HurwitzCover.polynomial([1, 0, -3, 0])
    assert make_qdiff(cover, [4], 4, flavor="plain").flavor == "plain"
    for s in (3.5, 3 + 0.1j, 1):
        with pytest.raises(HurwitzError):
            make_qdiff(cover, [4], s, flavor="plain")
