"""Selection rule from rotational invariance about the beam (Z) axis.

A rotation by ``gamma`` about Z multiplies ``|M_A>|M_B>`` by
``exp(i (M_A + M_B) gamma)``.  Total cross sections cannot depend on
``gamma``, so a cross term between product states survives only when both
carry the same total projection.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, TypeVar

from .angmom import TwiceInt
from .errors import AxisError
from .states import Axis, CoupledState, ProductState, Superposition

INVARIANCE_RTOL = 1e-10


@dataclass(frozen=True, order=True)
class ChannelPairKey:
    """Pair of product kets ``(2M_A, 2M_B)`` and ``(2M_A', 2M_B')``."""

    s: tuple[TwiceInt, TwiceInt]
    s_prime: tuple[TwiceInt, TwiceInt]

    def reversed(self) -> "ChannelPairKey":
        return ChannelPairKey(self.s_prime, self.s)

    @property
    def total_m2(self) -> tuple[TwiceInt, TwiceInt]:
        return sum(self.s), sum(self.s_prime)


def interference_allowed(key: ChannelPairKey) -> bool:
    """True iff ``M_A + M_B == M_A' + M_B'``."""
    left, right = key.total_m2
    return left == right


def _phase(m2: TwiceInt, gamma: float) -> complex:
    return cmath.exp(0.5j * m2 * gamma)


def _check_z(s: Superposition) -> None:
    if s.axis is not Axis.Z:
        raise AxisError("beam-axis rotation needs a Z-quantized state; rotate it first")


State = TypeVar("State", Superposition, ProductState, CoupledState)


def rotate_about_beam(state: State, gamma: float) -> State:
    """Apply ``R_z(gamma)``: each term picks up ``exp(i M gamma)``.

    A bare :class:`Superposition` is treated as one atom colliding with a
    structureless (``J = 0``) partner.
    """
    if isinstance(state, Superposition):
        _check_z(state)
        return Superposition(tuple((lab, a * _phase(lab.m2, gamma)) for lab, a in state.terms))
    if isinstance(state, ProductState):
        return ProductState(rotate_about_beam(state.atom_a, gamma), rotate_about_beam(state.atom_b, gamma))
    if isinstance(state, CoupledState):
        return CoupledState(tuple((k, a * _phase(k[1], gamma)) for k, a in state.terms))
    raise TypeError(f"cannot rotate {type(state).__name__}")


@dataclass(frozen=True)
class InvarianceReport:
    samples: int
    max_deviation: float
    """Largest relative change of sigma_PI or sigma_AI against gamma = 0."""
    deviations: tuple[float, ...]
    tolerance: float = INVARIANCE_RTOL

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _rel(value: float, ref: float) -> float:
    return abs(value - ref) / (abs(ref) if ref != 0.0 else 1.0)


def verify_rotation_invariance(
    composer: Callable, state, gamma_samples: int = 32, tolerance: float = INVARIANCE_RTOL
) -> InvarianceReport:
    """Compose ``state`` rotated by evenly spaced ``gamma`` in ``[0, 2 pi)``.

    ``composer`` maps a state to an object with ``sigma_pi``/``sigma_ai``
    attributes (e.g. :class:`penning_control.compose.Composer`).
    """
    if gamma_samples < 1:
        raise ValueError("need at least one gamma sample")
    ref = composer(rotate_about_beam(state, 0.0))
    devs = []
    for i in range(gamma_samples):
        gamma = 2 * math.pi * i / gamma_samples
        res = composer(rotate_about_beam(state, gamma))
        devs.append(max(_rel(res.sigma_pi, ref.sigma_pi), _rel(res.sigma_ai, ref.sigma_ai)))
    return InvarianceReport(gamma_samples, max(devs), tuple(devs), tolerance)
