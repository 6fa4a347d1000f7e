"""Single-atom and two-atom internal states.

Plane-wave factors ``exp(i k.r)`` multiply every amplitude of a collision
state equally and never change a total cross section, so only the internal
(electronic) part is represented here.  :class:`Kinematics` covers the
centre-of-mass bookkeeping separately.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import angmom
from .angmom import TwiceInt, check_jm, m_values
from .errors import AxisError, DomainError, NormError, PhysicsError

NORM_TOL = 1e-9
QUARTER_TURN = math.pi / 2


class Axis(str, enum.Enum):
    Z = "Z"
    X = "X"


@dataclass(frozen=True, order=True)
class AngLabel:
    j2: TwiceInt
    m2: TwiceInt
    axis: Axis = Axis.Z

    def __post_init__(self):
        check_jm(self.j2, self.m2)
        object.__setattr__(self, "axis", Axis(self.axis))

    def __str__(self) -> str:
        sub = "_x" if self.axis is Axis.X else ""
        return f"|{_half(self.j2)},{_half(self.m2)}>{sub}"


def _half(n2: int) -> str:
    return str(n2 // 2) if n2 % 2 == 0 else f"{n2}/2"


def _norm2(amplitudes: Iterable[complex]) -> float:
    return sum(a.real * a.real + a.imag * a.imag for a in amplitudes)


@dataclass(frozen=True)
class Superposition:
    """Single-atom state of definite ``j`` on one quantization axis.

    Terms are kept sorted by descending ``m``.  Sub-unit norms are allowed
    so that projections remain ordinary values.
    """

    terms: tuple[tuple[AngLabel, complex], ...]

    def __post_init__(self):
        terms = tuple(sorted(((lab, complex(a)) for lab, a in self.terms), key=lambda t: -t[0].m2))
        if not terms:
            raise PhysicsError("empty superposition")
        labels = [lab for lab, _ in terms]
        if len(set(labels)) != len(labels):
            raise PhysicsError("duplicate labels in superposition")
        if len({lab.j2 for lab in labels}) != 1 or len({lab.axis for lab in labels}) != 1:
            raise PhysicsError("superposition mixes j values or quantization axes")
        n = _norm2(a for _, a in terms)
        if not 0.0 < n <= 1.0 + NORM_TOL:
            raise NormError(f"squared norm {n!r} outside (0, 1]")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_amplitudes(
        cls, j2: TwiceInt, amplitudes: Mapping[TwiceInt, complex], axis: Axis | str = Axis.Z
    ) -> "Superposition":
        return cls(tuple((AngLabel(j2, m2, Axis(axis)), a) for m2, a in amplitudes.items()))

    @classmethod
    def ket(cls, j2: TwiceInt, m2: TwiceInt, axis: Axis | str = Axis.Z) -> "Superposition":
        return cls.from_amplitudes(j2, {m2: 1.0}, axis)

    @property
    def j2(self) -> TwiceInt:
        return self.terms[0][0].j2

    @property
    def axis(self) -> Axis:
        return self.terms[0][0].axis

    def amplitudes(self) -> dict[TwiceInt, complex]:
        return {lab.m2: a for lab, a in self.terms}

    def amplitude(self, m2: TwiceInt) -> complex:
        return self.amplitudes().get(m2, 0j)

    def norm2(self) -> float:
        return _norm2(a for _, a in self.terms)

    def inner(self, other: "Superposition") -> complex:
        """``<self|other>``; both states must share axis and ``j``."""
        if self.axis is not other.axis or self.j2 != other.j2:
            raise AxisError("inner product between different bases")
        mine = self.amplitudes()
        return sum((mine.get(m2, 0j).conjugate() * a for m2, a in other.amplitudes().items()), 0j)

    def __str__(self) -> str:
        return " + ".join(f"({a:.6g}){lab}" for lab, a in self.terms)


@dataclass(frozen=True)
class ProductState:
    """Uncorrelated two-atom state ``|psi_A>|psi_B>``."""

    atom_a: Superposition
    atom_b: Superposition

    def __post_init__(self):
        for name, s in (("A", self.atom_a), ("B", self.atom_b)):
            if abs(s.norm2() - 1.0) > NORM_TOL:
                raise NormError(f"atom {name} is not normalized (norm^2={s.norm2()!r})")

    def product_terms(self) -> list[tuple[tuple[TwiceInt, TwiceInt], complex]]:
        """Expansion over ``|M_A>|M_B>`` as ``((2M_A, 2M_B), c)`` pairs."""
        return [
            ((la.m2, lb.m2), a * b) for la, a in self.atom_a.terms for lb, b in self.atom_b.terms
        ]

    def norm2(self) -> float:
        return self.atom_a.norm2() * self.atom_b.norm2()


@dataclass(frozen=True)
class CoupledState:
    """Two-atom state in the total-angular-momentum (molecular) basis.

    Terms map ``(2S, 2M)`` to amplitudes, sorted by descending ``S`` then ``M``.
    """

    terms: tuple[tuple[tuple[TwiceInt, TwiceInt], complex], ...]

    def __post_init__(self):
        terms = tuple(
            sorted(((tuple(k), complex(a)) for k, a in self.terms), key=lambda t: (-t[0][0], -t[0][1]))
        )
        keys = [k for k, _ in terms]
        if len(set(keys)) != len(keys):
            raise PhysicsError("duplicate labels in coupled state")
        for s2, ms2 in keys:
            check_jm(s2, ms2)
        n = _norm2(a for _, a in terms)
        if not 0.0 < n <= 1.0 + NORM_TOL:
            raise NormError(f"squared norm {n!r} outside (0, 1]")
        object.__setattr__(self, "terms", terms)

    def amplitudes(self) -> dict[tuple[TwiceInt, TwiceInt], complex]:
        return dict(self.terms)

    def norm2(self) -> float:
        return _norm2(a for _, a in self.terms)

    def project(self, s2: TwiceInt, ms2: TwiceInt) -> complex:
        return self.amplitudes().get((s2, ms2), 0j)


@dataclass(frozen=True)
class ControlParams:
    """Hopf coordinates of ``sin(eta)|2,0>_x + exp(i xi) cos(eta)|2,2>_x``."""

    eta: float
    xi: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= math.pi:
            raise DomainError(f"eta={self.eta!r} outside [0, pi]")
        if not 0.0 <= self.xi < 2 * math.pi:
            raise DomainError(f"xi={self.xi!r} outside [0, 2 pi)")

    @classmethod
    def wrapped(cls, eta: float, xi: float) -> "ControlParams":
        """Fold arbitrary angles into range.

        ``eta -> eta + pi`` only flips the global sign of the state, so eta
        is taken modulo pi.
        """
        eta = math.fmod(eta, math.pi)
        if eta < 0.0:
            eta += math.pi
        xi = math.fmod(xi, 2 * math.pi)
        if xi < 0.0:
            xi += 2 * math.pi
        if xi >= 2 * math.pi:
            xi = 0.0
        return cls(eta, xi)


# --- component kernels -------------------------------------------------------
# These operate on (m2, re, im) triples whose re/im may be floats or numpy
# arrays, so grid scans reuse the exact operation sequence of single-point
# calls and agree with them bit for bit.


def _hopf_components(sin_eta, cos_eta, cos_xi, sin_xi):
    return [(4, cos_xi * cos_eta, sin_xi * cos_eta), (0, sin_eta, 0.0)]


def _rotate_components(j2: TwiceInt, comps, inverse: bool):
    rows = angmom._d_rows(j2, QUARTER_TURN)
    out = []
    for mp2 in m_values(j2):
        re = 0.0
        im = 0.0
        i = (j2 - mp2) // 2
        for m2, a_re, a_im in comps:
            k = (j2 - m2) // 2
            d = rows[k][i] if inverse else rows[i][k]
            re = re + d * a_re
            im = im + d * a_im
        out.append((mp2, re, im))
    return out


def _components(state: Superposition):
    return [(lab.m2, a.real, a.imag) for lab, a in state.terms]


# -----------------------------------------------------------------------------


def hopf_state(params: ControlParams) -> Superposition:
    """Ne*(3P2) superposition ``a0|2,0>_x + a2|2,2>_x`` with
    ``a0 = sin(eta)`` and ``a2 = exp(i xi) cos(eta)``."""
    comps = _hopf_components(
        math.sin(params.eta), math.cos(params.eta), math.cos(params.xi), math.sin(params.xi)
    )
    return Superposition(tuple((AngLabel(4, m2, Axis.X), complex(re, im)) for m2, re, im in comps))


def rotate_axis(state: Superposition, from_axis: Axis | str, to_axis: Axis | str) -> Superposition:
    """Re-express ``state`` in the basis quantized along ``to_axis``.

    ``|j m>_x = sum_m' d^j_{m'm}(pi/2) |j m'>`` (quarter turn about Y).
    The result carries every ``m`` of the target basis.
    """
    src, dst = Axis(from_axis), Axis(to_axis)
    if state.axis is not src:
        raise AxisError(f"state is quantized along {state.axis.value}, not {src.value}")
    if src is dst:
        return state
    comps = _rotate_components(state.j2, _components(state), inverse=(src is Axis.Z))
    return Superposition(tuple((AngLabel(state.j2, m2, dst), complex(re, im)) for m2, re, im in comps))


def to_z(state: Superposition) -> Superposition:
    return rotate_axis(state, state.axis, Axis.Z)


def couple(product: ProductState) -> CoupledState:
    """Expand a product state over ``|S, M>`` with Clebsch-Gordan coefficients.

    Atom A is the first angular momentum in the coupling order.
    """
    a, b = product.atom_a, product.atom_b
    if a.axis is not b.axis:
        raise AxisError("atoms quantized along different axes")
    ja, jb = a.j2, b.j2
    out: dict[tuple[int, int], complex] = {}
    for la, ca in a.terms:
        for lb, cb in b.terms:
            big_m = la.m2 + lb.m2
            for s2 in range(ja + jb, abs(ja - jb) - 1, -2):
                if abs(big_m) > s2:
                    continue
                cg = angmom.clebsch_gordan(ja, la.m2, jb, lb.m2, s2, big_m)
                out[(s2, big_m)] = out.get((s2, big_m), 0j) + cg * (ca * cb)
    return CoupledState(tuple(out.items()))


def he_li_product_state(beta: float) -> ProductState:
    """``1/2 (|1,1> + |1,0>)_He (|1/2,1/2> + e^{i beta}|1/2,-1/2>)_Li``."""
    r = 1 / math.sqrt(2)
    he = Superposition.from_amplitudes(2, {2: r, 0: r})
    li = Superposition.from_amplitudes(1, {1: r, -1: r * cmath.exp(1j * beta)})
    return ProductState(he, li)


def he_li_molecular_state(beta: float) -> CoupledState:
    """Equal doublet superposition ``(|1/2,1/2>_m + e^{i beta}|1/2,-1/2>_m)/sqrt 2``."""
    r = 1 / math.sqrt(2)
    return CoupledState((((1, 1), r), ((1, -1), r * cmath.exp(1j * beta))))


@dataclass(frozen=True, eq=False)
class Kinematics:
    """Two-body kinematics; masses in amu, vectors in atomic units.

    ``k`` is the momentum conjugate to ``r = r_B - r_A``, namely
    ``(m_A k_B - m_B k_A) / (m_A + m_B)``.
    """

    mass_a: float
    mass_b: float
    r_a: np.ndarray
    r_b: np.ndarray
    k_a: np.ndarray
    k_b: np.ndarray
    R: np.ndarray | None = field(default=None, compare=False)
    r: np.ndarray | None = field(default=None, compare=False)
    K: np.ndarray | None = field(default=None, compare=False)
    k: np.ndarray | None = field(default=None, compare=False)


def to_center_of_mass(kin: Kinematics, boost: bool = False) -> Kinematics:
    """Fill in centre-of-mass and relative coordinates.

    With ``boost=True`` both lab momenta are shifted so that ``K = 0``;
    the relative momentum is unchanged by the boost.
    """
    ma, mb = float(kin.mass_a), float(kin.mass_b)
    if ma <= 0 or mb <= 0:
        raise PhysicsError(f"masses must be positive, got {ma}, {mb}")
    total = ma + mb
    r_a, r_b = np.asarray(kin.r_a, float), np.asarray(kin.r_b, float)
    k_a, k_b = np.asarray(kin.k_a, float), np.asarray(kin.k_b, float)
    if boost:
        K0 = k_a + k_b
        k_a = k_a - ma / total * K0
        k_b = k_b - mb / total * K0
    return replace(
        kin,
        r_a=r_a,
        r_b=r_b,
        k_a=k_a,
        k_b=k_b,
        R=(ma * r_a + mb * r_b) / total,
        r=r_b - r_a,
        K=k_a + k_b,
        k=(ma * k_b - mb * k_a) / total,
    )


def random_superposition(rng: np.random.Generator, j2: TwiceInt, axis: Axis = Axis.Z) -> Superposition:
    """Haar-ish random normalized state, handy for property checks."""
    v = rng.normal(size=j2 + 1) + 1j * rng.normal(size=j2 + 1)
    v /= np.linalg.norm(v)
    return Superposition.from_amplitudes(j2, dict(zip(m_values(j2), v.tolist())), axis)


def superposition_from_vector(j2: TwiceInt, vector: Sequence[complex], axis: Axis = Axis.Z) -> Superposition:
    if len(vector) != j2 + 1:
        raise DomainError(f"need {j2 + 1} amplitudes for 2j={j2}, got {len(vector)}")
    return Superposition.from_amplitudes(j2, dict(zip(m_values(j2), vector)), axis)
