"""Control landscapes over the Hopf parameters (eta, xi).

The prepared state is ``sin(eta)|2,0>_x + exp(i xi) cos(eta)|2,2>_x`` for a
J=2 atom colliding with a structureless partner (Ne*(3P2) + Ar).  Grid
scans evaluate the same kernels as :func:`penning_control.compose.compose`,
with numpy arrays in place of scalars, so every grid value is bitwise equal
to the corresponding single-point composition.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .compose import (
    ChannelTable,
    _check_omega_channels,
    _omega_sigma,
    _omega_weights,
    compose,
)
from .errors import ChannelError, PhysicsError
from .states import ControlParams, _hopf_components, _rotate_components, hopf_state

TWO_PI = 2 * math.pi
NOISE_ULPS = 4


class Objective(str, enum.Enum):
    PI = "PI"
    AI = "AI"
    RATIO = "RATIO_AI_PI"

    @classmethod
    def parse(cls, value: "str | Objective") -> "Objective":
        if isinstance(value, cls):
            return value
        v = str(value).upper()
        if v in ("RATIO", "RATIO_AI_PI"):
            return cls.RATIO
        return cls(v)


@dataclass(frozen=True)
class GridSpec:
    eta_points: int = 181
    xi_points: int = 361
    objective: Objective = Objective.AI

    def __post_init__(self):
        if self.eta_points < 2 or self.xi_points < 2:
            raise ValueError("grid needs at least 2 points per axis")
        object.__setattr__(self, "objective", Objective.parse(self.objective))

    def etas(self) -> np.ndarray:
        # endpoint pi is exact with linspace
        return np.linspace(0.0, math.pi, self.eta_points)

    def xis(self) -> np.ndarray:
        return np.linspace(0.0, TWO_PI, self.xi_points, endpoint=False)


@dataclass(frozen=True)
class LandscapeResult:
    objective: Objective
    etas: np.ndarray
    xis: np.ndarray
    values: np.ndarray
    """Shape ``(len(etas), len(xis))``; row-major eta-then-xi."""
    argmax: ControlParams
    argmin: ControlParams
    max: float
    min: float

    @property
    def control_factor(self) -> float:
        return self.max / self.min if self.min > 0 else math.inf


def _objective_from_sigmas(pi, ai, objective: Objective):
    if objective is Objective.PI:
        return pi
    if objective is Objective.AI:
        return ai
    if np.any(np.asarray(pi) <= 0.0):
        raise PhysicsError("ratio objective needs sigma_PI > 0 everywhere")
    return ai / pi


def evaluate(table: ChannelTable, params: ControlParams, objective: Objective | str) -> float:
    """Objective at one point via a fresh :func:`compose` call."""
    res = compose(table, hopf_state(params))
    return float(_objective_from_sigmas(res.sigma_pi, res.sigma_ai, Objective.parse(objective)))


def _block(table, objective, se, ce, cx, sx):
    comps = _hopf_components(se[:, None], ce[:, None], cx[None, :], sx[None, :])
    weights = _omega_weights(_rotate_components(4, comps, inverse=False))
    _check_omega_channels(weights, table)
    pi = _omega_sigma(weights, table, "PI")
    ai = _omega_sigma(weights, table, "AI")
    shape = (se.shape[0], cx.shape[0])
    out = _objective_from_sigmas(np.broadcast_to(pi, shape), np.broadcast_to(ai, shape), objective)
    return np.array(out, dtype=float)


def scan(table: ChannelTable, spec: GridSpec = GridSpec(), threads: int = 1) -> LandscapeResult:
    """Evaluate the objective on the full (eta, xi) grid.

    eta endpoints are inclusive, xi excludes 2 pi.  Rows may be split over
    ``threads`` workers; each value is computed independently, so the result
    does not depend on the split.
    """
    if table.kind != "omega":
        raise ChannelError("landscape scans need an Omega-keyed table")
    etas, xis = spec.etas(), spec.xis()
    # math.sin/cos rather than numpy ufuncs: identical to the scalar path
    se = np.array([math.sin(e) for e in etas.tolist()])
    ce = np.array([math.cos(e) for e in etas.tolist()])
    cx = np.array([math.cos(x) for x in xis.tolist()])
    sx = np.array([math.sin(x) for x in xis.tolist()])

    threads = max(1, min(int(threads), len(etas)))
    if threads == 1:
        values = _block(table, spec.objective, se, ce, cx, sx)
    else:
        chunks = np.array_split(np.arange(len(etas)), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda idx: _block(table, spec.objective, se[idx], ce[idx], cx, sx), chunks)
            )
        values = np.concatenate(parts, axis=0)

    imax = np.unravel_index(int(np.argmax(values)), values.shape)
    imin = np.unravel_index(int(np.argmin(values)), values.shape)
    return LandscapeResult(
        objective=spec.objective,
        etas=etas,
        xis=xis,
        values=values,
        argmax=ControlParams(float(etas[imax[0]]), float(xis[imax[1]])),
        argmin=ControlParams(float(etas[imin[0]]), float(xis[imin[1]])),
        max=float(values[imax]),
        min=float(values[imin]),
    )


def ratio_surface(table: ChannelTable, spec: GridSpec = GridSpec(), threads: int = 1) -> LandscapeResult:
    """sigma_AI / sigma_PI, computed pointwise from the two cross sections."""
    spec = GridSpec(spec.eta_points, spec.xi_points, Objective.RATIO)
    return scan(table, spec, threads)


@dataclass(frozen=True)
class Refinement:
    params: ControlParams
    value: float
    start_value: float
    evaluations: int


def _finite_diff(f, x, h):
    fx = f(x)
    g = np.zeros(2)
    H = np.zeros((2, 2))
    e = np.eye(2) * h
    for i in range(2):
        fp, fm = f(x + e[i]), f(x - e[i])
        g[i] = (fp - fm) / (2 * h)
        H[i, i] = (fp - 2 * fx + fm) / (h * h)
    H[0, 1] = H[1, 0] = (
        f(x + e[0] + e[1]) - f(x + e[0] - e[1]) - f(x - e[0] + e[1]) + f(x - e[0] - e[1])
    ) / (4 * h * h)
    return g, H


def refine_extremum(
    table: ChannelTable,
    start: ControlParams,
    mode: str = "max",
    objective: Objective | str = Objective.AI,
    initial_step: float = 0.05,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> Refinement:
    """Compass search from ``start`` with step halving until ``step < tol``.

    A final Newton correction from central differences removes the residual
    offset left by value comparisons at the round-off floor; it is kept
    only if it does not lose against the starting value.
    """
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', not {mode!r}")
    objective = Objective.parse(objective)
    sign = 1.0 if mode == "max" else -1.0
    count = 0

    def f(x) -> float:
        nonlocal count
        count += 1
        return sign * evaluate(table, ControlParams.wrapped(x[0], x[1]), objective)

    x = np.array([start.eta, start.xi])
    f_start = f(x)
    fx = f_start
    step = initial_step
    moved = False
    directions = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    for _ in range(max_iter):
        if step < tol:
            break
        best, f_best = None, fx
        # gains within a few ulps are round-off, not progress
        floor = fx + NOISE_ULPS * math.ulp(fx)
        for d in directions:
            y = x + step * d
            fy = f(y)
            if fy > f_best and fy > floor:
                best, f_best = y, fy
        if best is None:
            step *= 0.5
        else:
            x, fx, moved = best, f_best, True

    for _ in range(3 if moved else 0):
        g, H = _finite_diff(f, x, 1e-5)
        if not np.all(np.isfinite(H)) or abs(np.linalg.det(H)) < 1e-300:
            break
        delta = -np.linalg.solve(H, g)
        if np.linalg.norm(delta) > 1e-4:
            break
        y = x + delta
        fy = f(y)
        if fy < f_start:
            break
        g_new, _ = _finite_diff(f, y, 1e-5)
        if np.linalg.norm(g_new) >= np.linalg.norm(g):
            break
        x, fx, moved = y, fy, True

    if not moved:
        return Refinement(start, sign * f_start, sign * f_start, count)
    params = ControlParams.wrapped(x[0], x[1])
    value = evaluate(table, params, objective)
    count += 1
    if sign * value < f_start:
        return Refinement(start, sign * f_start, sign * f_start, count)
    return Refinement(params, value, sign * f_start, count)


@dataclass(frozen=True)
class PhaseOnlyFactor:
    """Control attainable by tuning xi alone, as a function of eta."""

    eta_star: float
    factor: float
    etas: np.ndarray
    factors: np.ndarray


def phase_factor_at(table: ChannelTable, eta: float, objective: Objective | str = Objective.AI) -> float:
    """max_xi / min_xi of the objective at fixed eta.

    For a diagonal table the cross sections are ``B(eta) + A(eta) cos(xi)``
    (and the ratio is monotone in cos(xi)), so the extremes sit at
    ``xi = 0`` and ``xi = pi``.
    """
    objective = Objective.parse(objective)
    a = evaluate(table, ControlParams(eta, 0.0), objective)
    b = evaluate(table, ControlParams(eta, math.pi), objective)
    lo, hi = min(a, b), max(a, b)
    if lo <= 0.0:
        return math.inf if hi > 0 else 1.0
    return hi / lo


def phase_only_factor(
    table: ChannelTable, objective: Objective | str = Objective.AI, eta_points: int = 1801
) -> PhaseOnlyFactor:
    """Largest phase-only control factor over eta, with the full factor(eta) curve."""
    objective = Objective.parse(objective)
    etas = np.linspace(0.0, math.pi, eta_points)
    factors = np.array([phase_factor_at(table, float(e), objective) for e in etas])
    i = int(np.argmax(factors))
    eta_star, best = float(etas[i]), float(factors[i])
    if math.isfinite(best) and 0 < i < eta_points - 1:
        # golden-section polish inside the bracketing grid cell pair
        lo, hi = float(etas[i - 1]), float(etas[i + 1])
        invphi = (math.sqrt(5) - 1) / 2
        c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
        fc, fd = phase_factor_at(table, c, objective), phase_factor_at(table, d, objective)
        while hi - lo > 1e-10:
            if fc > fd:
                hi, d, fd = d, c, fc
                c = hi - invphi * (hi - lo)
                fc = phase_factor_at(table, c, objective)
            else:
                lo, c, fc = c, d, fd
                d = lo + invphi * (hi - lo)
                fd = phase_factor_at(table, d, objective)
        mid = 0.5 * (lo + hi)
        fm = phase_factor_at(table, mid, objective)
        if fm >= best:
            eta_star, best = mid, fm
    return PhaseOnlyFactor(eta_star, best, etas, factors)


@dataclass(frozen=True)
class RangeComparison:
    reported: tuple[float, float]
    attainable: tuple[float, float]
    rtol: float

    @property
    def consistent(self) -> bool:
        (rlo, rhi), (alo, ahi) = self.reported, self.attainable
        return abs(rlo - alo) <= self.rtol * abs(alo) and abs(rhi - ahi) <= self.rtol * abs(ahi)

    def message(self) -> str:
        (rlo, rhi), (alo, ahi) = self.reported, self.attainable
        verdict = "consistent with" if self.consistent else "NOT reproducible from"
        return (
            f"reported range [{rlo:.6g}, {rhi:.6g}] is {verdict} the attainable range "
            f"[{alo:.6g}, {ahi:.6g}] implied by the channel table (rtol {self.rtol:g})"
        )


def compare_range(
    reported: tuple[float, float], attainable: tuple[float, float], rtol: float = 0.1
) -> RangeComparison:
    """Check a quoted objective range against the one the table allows."""
    return RangeComparison(
        (float(reported[0]), float(reported[1])), (float(attainable[0]), float(attainable[1])), rtol
    )
