"""Bilinear composition of ionization cross sections.

For a prepared state ``sum_S c_S |S>`` the total cross section is

    sigma = sum_{S,S'} c_S^* c_S' sigma_{S,S'}

where only pairs with equal total beam-axis projection are accumulated.
Channel tables are diagonal in their own basis (rotating-atom ``Omega``
channels or molecular ``|S, M_S>`` channels); product-basis matrix elements
are rebuilt from them when a state is composed in the product basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import angmom
from .angmom import TwiceInt
from .errors import AxisError, ChannelError, NormError, PhysicsError
from .states import Axis, CoupledState, ProductState, Superposition, _components, couple, to_z
from .symmetry import ChannelPairKey, interference_allowed

PROCESSES = ("PI", "AI")


@dataclass(frozen=True, order=True)
class OmegaKey:
    """Rotating-atom channel labelled by ``2 Omega``."""

    omega2: TwiceInt

    def __str__(self) -> str:
        o = self.omega2
        return f"Omega={o // 2}" if o % 2 == 0 else f"Omega={o}/2"


@dataclass(frozen=True, order=True)
class SpinKey:
    """Molecular channel ``|S, M_S>_m`` (doubled labels)."""

    s2: TwiceInt
    ms2: TwiceInt

    def __str__(self) -> str:
        def h(n):
            return str(n // 2) if n % 2 == 0 else f"{n}/2"

        return f"|{h(self.s2)},{h(self.ms2)}>_m"


ChannelKey = Union[OmegaKey, SpinKey]


@dataclass(frozen=True)
class ChannelSigma:
    """Per-channel cross sections in atomic units (bohr^2)."""

    pi: float
    ai: float

    def __post_init__(self):
        if not (self.pi >= 0 and self.ai >= 0):
            raise PhysicsError(f"negative cross section {self}")

    def get(self, process: str) -> float:
        return self.pi if process == "PI" else self.ai


@dataclass(frozen=True)
class CrossTerm:
    """Off-diagonal ``sigma_{S,S'}`` (complex; ``sigma_{S',S}`` is its conjugate)."""

    pi: complex
    ai: complex

    def get(self, process: str) -> complex:
        return self.pi if process == "PI" else self.ai


@dataclass(frozen=True)
class ChannelTable:
    system: str
    channels: Mapping[ChannelKey, ChannelSigma]
    energy_value: float | None = None
    energy_unit: str = "au"
    cross_terms: Mapping[ChannelPairKey, CrossTerm] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "channels", MappingProxyType(dict(self.channels)))
        object.__setattr__(self, "cross_terms", MappingProxyType(dict(self.cross_terms)))
        kinds = {type(k) for k in self.channels}
        if len(kinds) != 1:
            raise PhysicsError("channel table must use exactly one kind of channel key")
        if self.energy_unit not in ("mK", "au"):
            raise PhysicsError(f"unknown energy unit {self.energy_unit!r}")

    @property
    def kind(self) -> str:
        return "omega" if isinstance(next(iter(self.channels)), OmegaKey) else "spin"

    def sigma(self, key: ChannelKey) -> ChannelSigma:
        try:
            return self.channels[key]
        except KeyError:
            raise ChannelError(f"channel {key} not in table for {self.system!r}") from None

    def with_channels(self, updates: Mapping[ChannelKey, ChannelSigma]) -> "ChannelTable":
        chans = dict(self.channels)
        for k, v in updates.items():
            self.sigma(k)
            chans[k] = v
        return ChannelTable(self.system, chans, self.energy_value, self.energy_unit, dict(self.cross_terms))

    def bounds(self, process: str) -> tuple[float, float]:
        vals = [c.get(process) for c in self.channels.values()]
        return min(vals), max(vals)


@dataclass(frozen=True)
class CompositionResult:
    sigma_pi: float
    sigma_ai: float
    weights: dict[ChannelKey, float]
    surviving_cross_terms: list[ChannelPairKey]

    def sigma(self, process: str) -> float:
        return self.sigma_pi if process == "PI" else self.sigma_ai

    @property
    def ratio(self) -> float:
        if self.sigma_pi == 0.0:
            return math.inf if self.sigma_ai > 0 else math.nan
        return self.sigma_ai / self.sigma_pi


# --- shared kernels (float or ndarray components) ----------------------------


def _omega_weights(comps) -> dict[TwiceInt, object]:
    weights: dict[TwiceInt, object] = {}
    for m2, re, im in comps:
        om = abs(m2)
        weights[om] = weights.get(om, 0.0) + (re * re + im * im)
    return weights


def _omega_sigma(weights, table: ChannelTable, process: str):
    total = 0.0
    for key, ch in table.channels.items():
        w = weights.get(key.omega2)
        if w is not None:
            total = total + w * ch.get(process)
    return total


def _check_omega_channels(weights, table: ChannelTable) -> None:
    for om in weights:
        table.sigma(OmegaKey(om))


# -----------------------------------------------------------------------------


def map_to_omega(state: Superposition) -> dict[TwiceInt, float]:
    """Rotating-atom weights ``w(Omega) = sum_{|M| = Omega} |c_M|^2``.

    Keys are ``2 Omega``.  ``+M`` and ``-M`` add incoherently: they differ in
    total projection and cannot interfere.
    """
    if state.axis is not Axis.Z:
        raise AxisError("Omega mapping needs a Z-quantized state")
    return _omega_weights(_components(state))


def _cross_element(table: ChannelTable, key: ChannelPairKey) -> CrossTerm | None:
    ct = table.cross_terms.get(key)
    if ct is not None:
        return ct
    ct = table.cross_terms.get(key.reversed())
    if ct is not None:
        return CrossTerm(ct.pi.conjugate(), ct.ai.conjugate())
    return None


def _accumulate(
    basis: Sequence[tuple[tuple[int, int], complex]],
    element: Callable[[ChannelPairKey], CrossTerm | None],
    enforce: bool,
    diagonal: bool,
):
    """Sum ``c_S^* c_S' sigma_SS'`` over ordered pairs (S <= S' doubled)."""
    pi = 0.0
    ai = 0.0
    surviving = []
    for i, (si, ci) in enumerate(basis):
        start = i if diagonal else i + 1
        for sj, cj in basis[start:]:
            key = ChannelPairKey(si, sj)
            allowed = interference_allowed(key)
            if enforce and not allowed:
                continue
            el = element(key)
            if sj != si:
                if ci == 0 or cj == 0 or (not allowed and el is None):
                    continue
                surviving.append(key)
            if el is None:
                continue
            z = ci.conjugate() * cj
            if sj == si:
                pi += z.real * el.pi.real
                ai += z.real * el.ai.real
            else:
                pi += 2.0 * (z * el.pi).real
                ai += 2.0 * (z * el.ai).real
    return pi, ai, surviving


def _check_norm(n2: float) -> None:
    if n2 > 1.0 + 1e-9:
        raise NormError(f"state norm^2 {n2!r} exceeds 1")


def _compose_superposition(table, state: Superposition, enforce: bool) -> CompositionResult:
    z = to_z(state)
    _check_norm(z.norm2())
    weights = map_to_omega(z)
    _check_omega_channels(weights, table)
    pi = _omega_sigma(weights, table, "PI")
    ai = _omega_sigma(weights, table, "AI")
    surviving: list[ChannelPairKey] = []
    if table.cross_terms or not enforce:
        basis = [((0, lab.m2), a) for lab, a in z.terms]
        dpi, dai, surviving = _accumulate(basis, lambda k: _cross_element(table, k), enforce, False)
        if surviving:
            pi, ai = pi + dpi, ai + dai
    return CompositionResult(pi, ai, {OmegaKey(o): w for o, w in weights.items()}, surviving)


def _compose_product_omega(table, state: ProductState, enforce: bool) -> CompositionResult:
    a, b = state.atom_a, state.atom_b
    if a.j2 != 0 and b.j2 != 0:
        raise PhysicsError("Omega channels need one structureless (J=0) partner")
    prod = ProductState(to_z(a), to_z(b))
    basis = prod.product_terms()
    weights = _omega_weights([(ma + mb, c.real, c.imag) for (ma, mb), c in basis])
    _check_omega_channels(weights, table)
    pi = _omega_sigma(weights, table, "PI")
    ai = _omega_sigma(weights, table, "AI")
    dpi, dai, surviving = _accumulate(basis, lambda k: _cross_element(table, k), enforce, False)
    return CompositionResult(
        pi + dpi, ai + dai, {OmegaKey(o): w for o, w in weights.items()}, surviving
    )


def _compose_coupled(table, state: CoupledState) -> CompositionResult:
    _check_norm(state.norm2())
    weights = {}
    pi = 0.0
    ai = 0.0
    for (s2, ms2), c in state.terms:
        key = SpinKey(s2, ms2)
        ch = table.sigma(key)
        w = c.real * c.real + c.imag * c.imag
        weights[key] = w
        pi += w * ch.pi
        ai += w * ch.ai
    return CompositionResult(pi, ai, weights, [])


def _compose_product_spin(table, state: ProductState, enforce: bool) -> CompositionResult:
    a, b = to_z(state.atom_a), to_z(state.atom_b)
    prod = ProductState(a, b)
    coupled = couple(prod)
    weights = {}
    for (s2, ms2), c in coupled.terms:
        key = SpinKey(s2, ms2)
        table.sigma(key)
        weights[key] = c.real * c.real + c.imag * c.imag
    ja, jb = a.j2, b.j2
    channels = [(k, ch) for k, ch in table.channels.items() if abs(ja - jb) <= k.s2 <= ja + jb]

    def element(key: ChannelPairKey) -> CrossTerm | None:
        (ma, mb), (ma_p, mb_p) = key.s, key.s_prime
        pi = 0.0
        ai = 0.0
        found = False
        if ma + mb == ma_p + mb_p:
            for k, ch in channels:
                if k.ms2 != ma + mb:
                    continue
                g = angmom.clebsch_gordan(ja, ma, jb, mb, k.s2, k.ms2) * angmom.clebsch_gordan(
                    ja, ma_p, jb, mb_p, k.s2, k.ms2
                )
                pi += g * ch.pi
                ai += g * ch.ai
                found = True
        extra = _cross_element(table, key)
        if extra is not None:
            return CrossTerm(pi + extra.pi, ai + extra.ai)
        return CrossTerm(complex(pi), complex(ai)) if found else None

    pi, ai, surviving = _accumulate(prod.product_terms(), element, enforce, True)
    return CompositionResult(pi, ai, weights, surviving)


def compose(
    table: ChannelTable,
    state: Superposition | ProductState | CoupledState,
    *,
    enforce_selection_rule: bool = True,
) -> CompositionResult:
    """Total PI and AI cross sections for ``state``.

    X-quantized single-atom factors are rotated to Z first.  A bare
    :class:`Superposition` stands for one atom colliding with a structureless
    partner and needs an ``Omega`` table.  Switching off
    ``enforce_selection_rule`` accumulates forbidden cross terms too; that is
    only meaningful as a negative control.
    """
    kind = table.kind
    if isinstance(state, Superposition):
        if kind != "omega":
            raise ChannelError("a single-atom state needs an Omega-keyed table")
        return _compose_superposition(table, state, enforce_selection_rule)
    if isinstance(state, ProductState):
        if kind == "omega":
            return _compose_product_omega(table, state, enforce_selection_rule)
        return _compose_product_spin(table, state, enforce_selection_rule)
    if isinstance(state, CoupledState):
        if kind != "spin":
            raise ChannelError("a coupled state needs an (S, M_S)-keyed table")
        return _compose_coupled(table, state)
    raise TypeError(f"cannot compose {type(state).__name__}")


@dataclass(frozen=True)
class Composer:
    """A table bound to composition options; callable on states."""

    table: ChannelTable
    enforce_selection_rule: bool = True

    def __call__(self, state) -> CompositionResult:
        return compose(self.table, state, enforce_selection_rule=self.enforce_selection_rule)


@dataclass(frozen=True)
class WidthProfile:
    """Autoionization width ``Gamma_Omega(r)`` and exit-channel branching."""

    r: np.ndarray
    gamma: np.ndarray
    branching: Mapping[str, float]

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        g = np.asarray(self.gamma, dtype=float)
        if r.shape != g.shape or r.ndim != 1:
            raise PhysicsError("r and gamma must be 1-d arrays of equal length")
        if np.any(g < 0):
            raise PhysicsError("negative autoionization width")
        if any(w < 0 for w in self.branching.values()):
            raise NormError("negative branching ratio")
        total = math.fsum(self.branching.values())
        if abs(total - 1.0) > 1e-12:
            raise NormError(f"branching ratios sum to {total!r}, not 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "gamma", g)


def split_width(
    profile: WidthProfile, exit_channels: Sequence[str] | None = None
) -> dict[str, np.ndarray]:
    """Per-exit-channel widths ``Gamma_{Omega->X}(r) = Gamma_Omega(r) W_{Omega->X}``.

    Channels listed in ``exit_channels`` but absent from the branching map
    get identically zero widths.
    """
    names = list(profile.branching) if exit_channels is None else list(exit_channels)
    return {x: profile.gamma * profile.branching.get(x, 0.0) for x in names}
