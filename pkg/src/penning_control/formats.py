"""JSON formats for channel tables, states and scenarios.

Channel table::

    {"system": str,
     "energy": {"value": number | null, "unit": "mK" | "au"},
     "channels": [{"key": {"omega": int} | {"S2": int, "MS2": int},
                   "sigma_pi_au": number, "sigma_ai_au": number}, ...],
     "cross_terms": [...]}            # optional, see below

``omega`` is the plain projection; ``S2``/``MS2`` are doubled.  The optional
``cross_terms`` list holds off-diagonal elements between product kets,
``{"S": [2M_A, 2M_B], "S_prime": [...], "sigma_pi_au": [re, im],
"sigma_ai_au": [re, im]}``.

States carry a ``kind``: ``superposition``, ``product``, ``coupled``,
``hopf``, ``product_phase`` or ``molecular_phase``.  Explicit kinds are
emitted by :func:`state_to_dict` and read back losslessly.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

from .compose import ChannelKey, ChannelSigma, ChannelTable, CrossTerm, OmegaKey, SpinKey
from .errors import NormError
from .states import (
    Axis,
    ControlParams,
    CoupledState,
    ProductState,
    Superposition,
    he_li_molecular_state,
    he_li_product_state,
    hopf_state,
)
from .symmetry import ChannelPairKey

BUNDLED_TABLES = ("ne_ar_50mK", "he_li")
SCENARIO_NORM_TOL = 1e-9


class FormatError(ValueError):
    """Unreadable or malformed input file."""


def _require(obj: dict, name: str, where: str):
    try:
        return obj[name]
    except (KeyError, TypeError):
        raise FormatError(f"{where}: missing field {name!r}") from None


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{where}: expected integer, got {value!r}")
    return value


def _num(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: expected number, got {value!r}")
    return float(value)


def _cplx(value, where: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_num(value[0], where), _num(value[1], where))
    return complex(_num(value, where))


# --- channel tables ----------------------------------------------------------


def _key_from_dict(d: dict, where: str) -> ChannelKey:
    if not isinstance(d, dict):
        raise FormatError(f"{where}: channel key must be an object")
    if set(d) == {"omega"}:
        return OmegaKey(2 * _int(d["omega"], where))
    if set(d) == {"S2", "MS2"}:
        return SpinKey(_int(d["S2"], where), _int(d["MS2"], where))
    raise FormatError(f"{where}: channel key must be {{'omega'}} or {{'S2','MS2'}}, got {sorted(d)}")


def key_to_dict(key: ChannelKey) -> dict[str, int]:
    if isinstance(key, OmegaKey):
        if key.omega2 % 2:
            raise FormatError("half-integer Omega cannot be written as 'omega'")
        return {"omega": key.omega2 // 2}
    return {"S2": key.s2, "MS2": key.ms2}


def table_from_dict(doc: dict) -> ChannelTable:
    if not isinstance(doc, dict):
        raise FormatError("channel table must be a JSON object")
    system = str(_require(doc, "system", "table"))
    energy = _require(doc, "energy", "table")
    value = _require(energy, "value", "table.energy")
    unit = _require(energy, "unit", "table.energy")
    if unit not in ("mK", "au"):
        raise FormatError(f"table.energy: unit must be 'mK' or 'au', got {unit!r}")
    channels: dict[ChannelKey, ChannelSigma] = {}
    rows = _require(doc, "channels", "table")
    if not isinstance(rows, list) or not rows:
        raise FormatError("table.channels must be a non-empty list")
    for i, row in enumerate(rows):
        where = f"table.channels[{i}]"
        key = _key_from_dict(_require(row, "key", where), where)
        if key in channels:
            raise FormatError(f"{where}: duplicate channel key {key}")
        channels[key] = ChannelSigma(
            _num(_require(row, "sigma_pi_au", where), where),
            _num(_require(row, "sigma_ai_au", where), where),
        )
    cross: dict[ChannelPairKey, CrossTerm] = {}
    for i, row in enumerate(doc.get("cross_terms", [])):
        where = f"table.cross_terms[{i}]"
        s = tuple(_int(v, where) for v in _require(row, "S", where))
        sp = tuple(_int(v, where) for v in _require(row, "S_prime", where))
        if len(s) != 2 or len(sp) != 2:
            raise FormatError(f"{where}: S and S_prime must be [2M_A, 2M_B] pairs")
        cross[ChannelPairKey(s, sp)] = CrossTerm(
            _cplx(_require(row, "sigma_pi_au", where), where),
            _cplx(_require(row, "sigma_ai_au", where), where),
        )
    energy_value = None if value is None else _num(value, "table.energy")
    return ChannelTable(system, channels, energy_value, unit, cross)


def table_to_dict(table: ChannelTable) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "system": table.system,
        "energy": {"value": table.energy_value, "unit": table.energy_unit},
        "channels": [
            {"key": key_to_dict(k), "sigma_pi_au": c.pi, "sigma_ai_au": c.ai}
            for k, c in table.channels.items()
        ],
    }
    if table.cross_terms:
        doc["cross_terms"] = [
            {
                "S": list(k.s),
                "S_prime": list(k.s_prime),
                "sigma_pi_au": [ct.pi.real, ct.pi.imag],
                "sigma_ai_au": [ct.ai.real, ct.ai.imag],
            }
            for k, ct in table.cross_terms.items()
        ]
    return doc


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def load_table(ref: str | Path, base: Path | None = None) -> ChannelTable:
    """Load a table from a path, or by bundled name (``ne_ar_50mK``, ``he_li``)."""
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    if path.exists():
        return table_from_dict(_read_json(path))
    name = str(ref).removesuffix(".json")
    if name in BUNDLED_TABLES:
        text = resources.files("penning_control").joinpath("data", f"{name}.json").read_text()
        return table_from_dict(json.loads(text))
    raise FormatError(f"channel table {str(ref)!r} not found")


# --- states -----------------------------------------------------------------


def _superposition_from_dict(d: dict, where: str) -> Superposition:
    axis = _require(d, "axis", where)
    if axis not in ("X", "Z"):
        raise FormatError(f"{where}: axis must be 'X' or 'Z'")
    j2 = _int(_require(d, "j2", where), where)
    amps = {}
    for i, t in enumerate(_require(d, "amplitudes", where)):
        w = f"{where}.amplitudes[{i}]"
        m2 = _int(_require(t, "m2", w), w)
        if m2 in amps:
            raise FormatError(f"{w}: duplicate m2={m2}")
        amps[m2] = complex(_num(_require(t, "re", w), w), _num(t.get("im", 0.0), w))
    return Superposition.from_amplitudes(j2, amps, Axis(axis))


def _superposition_to_dict(s: Superposition) -> dict:
    return {
        "kind": "superposition",
        "axis": s.axis.value,
        "j2": s.j2,
        "amplitudes": [{"m2": lab.m2, "re": a.real, "im": a.imag} for lab, a in s.terms],
    }


def state_from_dict(d: dict, normalized: bool = True):
    """Build a state; ``normalized`` enforces unit norm within 1e-9."""
    if not isinstance(d, dict):
        raise FormatError("state must be a JSON object")
    kind = _require(d, "kind", "state")
    if kind == "superposition":
        state = _superposition_from_dict(d, "state")
    elif kind == "product":
        state = ProductState(
            _superposition_from_dict(_require(d, "A", "state"), "state.A"),
            _superposition_from_dict(_require(d, "B", "state"), "state.B"),
        )
    elif kind == "coupled":
        terms = []
        for i, t in enumerate(_require(d, "amplitudes", "state")):
            w = f"state.amplitudes[{i}]"
            key = (_int(_require(t, "S2", w), w), _int(_require(t, "M2", w), w))
            terms.append((key, complex(_num(_require(t, "re", w), w), _num(t.get("im", 0.0), w))))
        state = CoupledState(tuple(terms))
    elif kind == "hopf":
        state = hopf_state(
            ControlParams(_num(_require(d, "eta_rad", "state"), "state"), _num(_require(d, "xi_rad", "state"), "state"))
        )
    elif kind == "product_phase":
        state = he_li_product_state(_num(_require(d, "beta_rad", "state"), "state"))
    elif kind == "molecular_phase":
        state = he_li_molecular_state(_num(_require(d, "beta_rad", "state"), "state"))
    else:
        raise FormatError(f"unknown state kind {kind!r}")
    if normalized and abs(state.norm2() - 1.0) > SCENARIO_NORM_TOL:
        raise NormError(f"state norm^2 {state.norm2()!r} differs from 1 by more than {SCENARIO_NORM_TOL}")
    return state


def state_to_dict(state) -> dict:
    if isinstance(state, Superposition):
        return _superposition_to_dict(state)
    if isinstance(state, ProductState):
        a = _superposition_to_dict(state.atom_a)
        b = _superposition_to_dict(state.atom_b)
        del a["kind"], b["kind"]
        return {"kind": "product", "A": a, "B": b}
    if isinstance(state, CoupledState):
        return {
            "kind": "coupled",
            "amplitudes": [{"S2": s2, "M2": m2, "re": a.real, "im": a.imag} for (s2, m2), a in state.terms],
        }
    raise TypeError(f"cannot serialize {type(state).__name__}")


def load_state(path: str | Path):
    return state_from_dict(_read_json(Path(path)))


# --- scenarios ----------------------------------------------------------------


def load_scenario(path: str | Path) -> dict:
    """Read a scenario file: ``{"table": ref, "state": {...}, "process": ...,
    "sigma_plus": x, "sigma_minus": y}``.  Relative table paths resolve
    against the scenario file's directory."""
    path = Path(path)
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise FormatError("scenario must be a JSON object")
    state_doc = _require(doc, "state", "scenario")
    if not isinstance(state_doc, dict) or "kind" not in state_doc:
        raise FormatError("scenario.state must be exactly one state specification with a 'kind'")
    process = doc.get("process", "both")
    if process not in ("PI", "AI", "both"):
        raise FormatError(f"scenario.process must be PI, AI or both, got {process!r}")
    return {
        "system": doc.get("system"),
        "table": load_table(_require(doc, "table", "scenario"), base=path.parent),
        "state": state_from_dict(state_doc),
        "process": process,
        "sigma_plus": None if doc.get("sigma_plus") is None else _num(doc["sigma_plus"], "scenario"),
        "sigma_minus": None if doc.get("sigma_minus") is None else _num(doc["sigma_minus"], "scenario"),
    }


def finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None
