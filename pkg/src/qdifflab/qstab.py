"""Stability data read off strip decompositions and their q-inductions.

A :class:`StabilityDatum` is a finite table: one object per strip with its
central charge, its phase in a declared unit window, and the non-vanishing
Hom degrees between objects.  :func:`induce` promotes it along the
``Z[q, q^-1]`` action to the data of an open or closed q-stability condition.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .periods import LaurentLattice, SheetPath, period, q_value, specialize_charge


class QStabError(ValueError):
    pass


@dataclass(frozen=True)
class HomEntry:
    """``Hom(E_source, E_target[shift][x_offset X]) != 0``."""

    source: str
    target: str
    shift: int = 0
    x_offset: int = 0

    def to_dict(self) -> dict:
        return {"source": self.source, "target": self.target, "shift": self.shift,
                "x_offset": self.x_offset}


def phase_of(z: complex, branch: float = 0.0) -> float:
    """Representative of ``arg(z)/pi`` in ``(branch, branch + 2]``."""
    r = (cmath.phase(z) / math.pi - branch) % 2
    return branch + (r if r > 0 else 2.0)


@dataclass
class StabilityDatum:
    labels: tuple
    charges: np.ndarray
    phases: np.ndarray
    hom: tuple = ()
    branch: float = 0.0

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.charges = np.asarray(self.charges, complex)
        self.phases = np.asarray(self.phases, float)
        self.hom = tuple(self.hom)
        if not (len(self.labels) == len(self.charges) == len(self.phases)):
            raise QStabError("labels, charges and phases differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise QStabError("duplicate labels")
        for h in self.hom:
            if h.source not in self.labels or h.target not in self.labels:
                raise QStabError(f"unknown label in {h}")
        if np.any(np.abs(self.charges) == 0):
            raise QStabError("central charges must be non-zero")
        if self.phase_residual() > 1e-9:
            raise QStabError("phases are inconsistent with the charges")

    @classmethod
    def from_charges(cls, labels, charges, hom=(), branch: float = 0.0) -> "StabilityDatum":
        """Phases in ``(branch, branch + 1]``; charges outside it are negated (a shift by [1])."""
        charges = [complex(z) for z in charges]
        phases = []
        for i, z in enumerate(charges):
            phi = phase_of(z, branch)
            if phi > branch + 1:
                charges[i], phi = -z, phi - 1
            phases.append(phi)
        return cls(tuple(labels), np.array(charges), np.array(phases), tuple(hom), branch)

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityDatum":
        hom = tuple(HomEntry(**h) for h in d.get("hom", ()))
        charges = [complex(*c) for c in d["charges"]]
        if "phases" in d:
            return cls(tuple(d["labels"]), np.array(charges), np.array(d["phases"], float), hom,
                       float(d.get("branch", 0.0)))
        return cls.from_charges(d["labels"], charges, hom, float(d.get("branch", 0.0)))

    def to_dict(self) -> dict:
        return {"labels": list(self.labels),
                "charges": [[float(z.real), float(z.imag)] for z in self.charges],
                "phases": [float(p) for p in self.phases], "branch": self.branch,
                "hom": [h.to_dict() for h in self.hom]}

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def charge_map(self) -> dict:
        return {lab: complex(z) for lab, z in zip(self.labels, self.charges)}

    def phase_residual(self) -> float:
        """Largest distance between ``phi`` and ``arg(Z)/pi`` modulo 2."""
        if not len(self.labels):
            return 0.0
        d = self.phases - np.angle(self.charges) / np.pi
        return float(np.max(np.abs(d - 2 * np.round(d / 2))))


def _connection_direction(points: np.ndarray, at_start: bool) -> float:
    if at_start:
        base, ahead = points[0], points[min(4, len(points) - 1)]
    else:
        base, ahead = points[-1], points[max(len(points) - 5, 0)]
    return cmath.phase(ahead - base)


def adjacency_hom(dec) -> tuple:
    """Hom table from strips meeting at a zero.

    Every object has its identity.  Around each zero the saddle connections
    ending there are ordered counterclockwise, and each one gets a degree-one
    map to the next.  With exactly two connections only the pair with the
    smaller counterclockwise turn is kept.
    """
    labels = [f"strip{i}" for i in range(len(dec.strips))]
    out = [HomEntry(lab, lab, 0, 0) for lab in labels]
    around: dict = {}
    for i, s in enumerate(dec.strips):
        t = s.saddle_connection
        if t is None:
            raise QStabError("strips need their saddle connections")
        pts = np.asarray(t.points)
        for zero, start in ((s.zeros[0], t.origin == s.zeros[0]), (s.zeros[1], t.origin != s.zeros[0])):
            around.setdefault(zero, []).append((_connection_direction(pts, start), i))
    for zero in sorted(around):
        spokes = sorted(around[zero])
        if len(spokes) < 2:
            continue
        if len(spokes) == 2:
            (a0, i), (a1, j) = spokes
            turn = (a1 - a0) % (2 * math.pi)
            pairs = [(i, j)] if turn <= math.pi else [(j, i)]
        else:
            pairs = [(spokes[n][1], spokes[(n + 1) % len(spokes)][1]) for n in range(len(spokes))]
        out.extend(HomEntry(labels[i], labels[j], 1, 0) for i, j in pairs if i != j)
    return tuple(dict.fromkeys(out))


def from_strips(dec, qd=None) -> StabilityDatum:
    """One object per strip, charged by its period.

    With ``qd`` the charges are recomputed by the periods module along each
    saddle connection and must agree with the strip periods up to sign.
    """
    if not dec.saddle_free:
        raise QStabError("the decomposition is not saddle-free")
    labels = [f"strip{i}" for i in range(len(dec.strips))]
    charges = [s.period for s in dec.strips]
    if qd is not None:
        for i, s in enumerate(dec.strips):
            z = period(qd, SheetPath(s.saddle_connection.polyline()))
            if min(abs(z - charges[i]), abs(z + charges[i])) > 1e-6 * abs(charges[i]):
                raise QStabError(f"strip {i}: periods disagree ({z} vs {charges[i]})")
    return StabilityDatum.from_charges(labels, charges, adjacency_hom(dec), dec.phase / math.pi)


def gldim(d: StabilityDatum, s: complex | None = None) -> float:
    """``sup(phi_target + shift - phi_source)`` over recorded non-zero Homs.

    Without ``s`` only entries with no X-offset count; with ``s`` an offset
    ``k`` adds ``k Re(s)``.  An empty table gives ``-inf``.
    """
    best = -math.inf
    for h in d.hom:
        if h.x_offset and s is None:
            continue
        val = d.phases[d.index(h.target)] + h.shift - d.phases[d.index(h.source)]
        if h.x_offset:
            val += h.x_offset * complex(s).real
        best = max(best, float(val))
    return best


def gate(gl: float, s: complex, mode: str) -> bool:
    re = complex(s).real
    if mode == "open":
        return gl + 1 < re
    if mode == "closed":
        return gl + 1 <= re
    raise QStabError(f"unknown mode {mode!r}")


def dual_entries(hom) -> tuple:
    """Entries forced by the X-twisted duality ``Hom(A, B[d]) = Hom(B, A[X - d])^*``."""
    out = list(hom)
    for h in hom:
        if h.x_offset == 0:
            out.append(HomEntry(h.target, h.source, -h.shift, 1))
    return tuple(dict.fromkeys(out))


@dataclass
class InducedObject:
    label: str
    k: int
    phase: float
    charge: complex

    def to_dict(self) -> dict:
        return {"label": self.label, "k": self.k, "phase": self.phase,
                "charge": [self.charge.real, self.charge.imag]}


@dataclass
class QStabilityDatum:
    base: StabilityDatum
    s: complex
    mode: str
    window: tuple
    objects: list
    hom: tuple
    support_constant: float
    lattice: LaurentLattice
    checks: dict = field(default_factory=dict)

    @property
    def induced_phases(self) -> list[float]:
        return sorted(o.phase for o in self.objects)

    def block(self, k: int) -> list[InducedObject]:
        return [o for o in self.objects if o.k == k]

    def block_gap(self) -> float:
        """Smallest phase distance from one X-block to the next."""
        phases = self.base.phases
        return complex(self.s).real - float(np.max(phases) - np.min(phases))

    def to_dict(self) -> dict:
        return {"s": [self.s.real, self.s.imag], "mode": self.mode, "window": list(self.window),
                "base": self.base.to_dict(), "objects": [o.to_dict() for o in self.objects],
                "hom": [h.to_dict() for h in self.hom], "support_constant": self.support_constant,
                "induced_phases": self.induced_phases, "checks": self.checks}


def support_constant(d: StabilityDatum, lattice: LaurentLattice, classes) -> float:
    """``C = 2 max ||alpha|| / min |Z(alpha)|`` over the recorded classes."""
    charges = d.charge_map()
    norms = [lattice.norm(a) for a in classes]
    sizes = [abs(specialize_charge(a, 0, charges)) for a in classes]
    if not classes or min(sizes) == 0:
        raise QStabError("support constant needs classes with non-zero charge")
    return 2 * max(norms) / min(sizes)


def support_check(d: StabilityDatum, lattice: LaurentLattice, classes, c: float) -> bool:
    charges = d.charge_map()
    return all(c * abs(specialize_charge(a, 0, charges)) > lattice.norm(a) for a in classes)


def induce(d: StabilityDatum, s: complex, mode: str = "open", window: int = 1,
           classes=None) -> QStabilityDatum:
    """Translate the heart data by ``k Re(s)`` for ``|k| <= window``.

    ``classes`` are the recorded semistable classes of the lattice (degree
    zero Laurent vectors); by default the basis objects.
    """
    s = complex(s)
    gl = gldim(d)
    if not gate(gl, s, mode):
        rel = "<" if mode == "open" else "<="
        raise QStabError(f"{mode} inducing needs gldim + 1 {rel} Re(s): {gl} + 1 vs {s.real}")
    lattice = LaurentLattice(d.labels)
    charges = d.charge_map()
    objects = []
    for k in range(-window, window + 1):
        for lab, phi in zip(d.labels, d.phases):
            z = specialize_charge(lattice.basis(lab, k), s, charges)
            objects.append(InducedObject(lab, k, float(phi + k * s.real), z))
    if classes is None:
        classes = [lattice.basis(lab) for lab in d.labels]
    c = support_constant(d, lattice, classes)
    hom = dual_entries(d.hom)
    residual = max((abs(((o.phase - cmath.phase(o.charge) / math.pi) + 1) % 2 - 1)
                    for o in objects), default=0.0)
    checks = {"gldim": gl, "gate": True, "support": support_check(d, lattice, classes, c),
              "phase_residual": residual, "xhom_bound": min_xhom_bound(hom),
              "q": [q_value(s).real, q_value(s).imag]}
    return QStabilityDatum(d, s, mode, (-window, window), objects, hom, c, lattice, checks)


def min_xhom_bound(hom) -> int:
    return max((abs(h.x_offset) for h in hom), default=0)


def xhom_bounded_check(qd: QStabilityDatum | tuple, n0: int) -> bool:
    """No recorded non-zero Hom has X-offset beyond ``n0``."""
    hom = qd.hom if isinstance(qd, QStabilityDatum) else qd
    return min_xhom_bound(hom) <= n0


def rotate(d: StabilityDatum, t: float) -> StabilityDatum:
    """The C-action by real ``t``: charges times ``exp(i pi t)``, phases plus ``t``."""
    return StabilityDatum(d.labels, d.charges * cmath.exp(1j * math.pi * t), d.phases + t,
                          d.hom, d.branch + t)
