"""Command-line front end.

Exit codes: 0 ok, 1 symmetry check failed, 2 input/parse error,
3 physics error, 4 output I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .angmom import d_matrix, m_values, wigner_d
from .compose import ChannelSigma, ChannelTable, Composer, CompositionResult, SpinKey, compose
from .errors import PhysicsError
from .formats import (
    FormatError,
    finite_or_none,
    key_to_dict,
    load_scenario,
    load_state,
    load_table,
    state_from_dict,
    state_to_dict,
)
from .landscape import (
    GridSpec,
    Objective,
    compare_range,
    phase_only_factor,
    refine_extremum,
    scan,
)
from .states import ProductState, Superposition, couple, to_z
from .symmetry import verify_rotation_invariance

EXIT_OK, EXIT_CHECK_FAILED, EXIT_PARSE, EXIT_PHYSICS, EXIT_IO = 0, 1, 2, 3, 4

# Quoted control ranges for bundled systems, checked against what the table allows.
REPORTED_RANGES = {
    ("Ne*(3P2)-Ar(1S0)", Objective.AI): (400.0, 1700.0),
    ("Ne*(3P2)-Ar(1S0)", Objective.RATIO): (2.5, 3.5),
}


class OutputError(OSError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))


# --- scenario resolution -------------------------------------------------------


def _resolve(args, need_state: bool = True):
    """Return (table, state, process) from --config or the individual flags."""
    process = getattr(args, "process", None)
    if args.config:
        sc = load_scenario(args.config)
        table, state = sc["table"], sc["state"]
        process = process or sc["process"]
        sp, sm = sc["sigma_plus"], sc["sigma_minus"]
    else:
        if not args.table:
            raise FormatError("either --config or --table is required")
        table = load_table(args.table)
        state = _state_from_flags(args) if need_state else None
        sp = sm = None
    sp = args.sigma_plus if getattr(args, "sigma_plus", None) is not None else sp
    sm = args.sigma_minus if getattr(args, "sigma_minus", None) is not None else sm
    table = _override_doublet(table, sp, sm)
    return table, state, process or "both"


def _state_from_flags(args):
    given = [
        args.state is not None,
        args.eta_rad is not None or args.xi_rad is not None,
        args.beta_rad is not None,
        args.molecular_beta_rad is not None,
    ]
    if sum(given) != 1:
        raise FormatError(
            "give exactly one state: --state, --eta-rad/--xi-rad, --beta-rad or --molecular-beta-rad"
        )
    if args.state is not None:
        return load_state(args.state)
    if given[1]:
        if args.eta_rad is None or args.xi_rad is None:
            raise FormatError("--eta-rad and --xi-rad go together")
        return state_from_dict({"kind": "hopf", "eta_rad": args.eta_rad, "xi_rad": args.xi_rad})
    if args.beta_rad is not None:
        return state_from_dict({"kind": "product_phase", "beta_rad": args.beta_rad})
    return state_from_dict({"kind": "molecular_phase", "beta_rad": args.molecular_beta_rad})


def _override_doublet(table: ChannelTable, sp, sm) -> ChannelTable:
    if sp is None and sm is None:
        return table
    if table.kind != "spin":
        raise PhysicsError("--sigma-plus/--sigma-minus apply to (S, M_S)-keyed tables only")
    updates = {}
    for value, key in ((sp, SpinKey(1, 1)), (sm, SpinKey(1, -1))):
        if value is not None:
            updates[key] = ChannelSigma(value, table.sigma(key).ai)
    return table.with_channels(updates)


def _result_payload(table: ChannelTable, state, res: CompositionResult) -> dict:
    return {
        "system": table.system,
        "sigma_pi_au": res.sigma_pi,
        "sigma_ai_au": res.sigma_ai,
        "ratio_ai_pi": finite_or_none(res.ratio),
        "weights": [
            {"channel": str(k), "key": key_to_dict(k), "weight": w} for k, w in res.weights.items()
        ],
        "surviving_cross_terms": [
            {"S": list(k.s), "S_prime": list(k.s_prime)} for k in res.surviving_cross_terms
        ],
        "state": state_to_dict(state),
    }


# --- commands ------------------------------------------------------------------


def cmd_compose(args) -> int:
    table, state, process = _resolve(args)
    res = compose(table, state)
    energy = "" if table.energy_value is None else f" ({table.energy_value:g} {table.energy_unit})"
    lines = [f"system: {table.system}{energy}"]
    if process in ("PI", "both"):
        lines.append(f"sigma_PI = {_fmt(res.sigma_pi)} a.u.")
    if process in ("AI", "both"):
        lines.append(f"sigma_AI = {_fmt(res.sigma_ai)} a.u.")
    if process == "both":
        lines.append(f"ratio AI/PI = {_fmt(res.ratio)}")
    lines.append("channel weights:")
    lines += [f"  {str(k):<14} {_fmt(w)}" for k, w in res.weights.items()]
    if res.surviving_cross_terms:
        lines.append("surviving cross terms (2M_A, 2M_B) pairs:")
        lines += [f"  {k.s} <-> {k.s_prime}" for k in res.surviving_cross_terms]
    else:
        lines.append("surviving cross terms: none")
    payload = _result_payload(table, state, res)
    payload["process"] = process
    _emit(args, payload, lines)
    return EXIT_OK


def _write_csv(path: str, result) -> None:
    rows = ["eta_rad,xi_rad,value\n"]
    xis = [f"{x:.9g}" for x in result.xis.tolist()]
    for eta, row in zip(result.etas.tolist(), result.values.tolist()):
        e = f"{eta:.9g}"
        rows.extend(f"{e},{x},{v:.9g}\n" for x, v in zip(xis, row))
    _write(path, "".join(rows).encode("ascii"))


def heatmap_bytes(values: np.ndarray) -> bytes:
    """Binary 8-bit PGM, linear min-max scaling; rows = eta, columns = xi."""
    lo, hi = float(values.min()), float(values.max())
    if hi > lo:
        pix = np.rint((values - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pix = np.zeros(values.shape, dtype=np.uint8)
    h, w = values.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pix.tobytes()


def _write(path: str, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _reference(args, table: ChannelTable, objective: Objective):
    if args.reference_range is not None:
        return tuple(args.reference_range)
    return REPORTED_RANGES.get((table.system, objective))


def _params_dict(p) -> dict:
    return {"eta_rad": p.eta, "xi_rad": p.xi}


def _range_lines(table, objective, attainable, reference, payload) -> list[str]:
    lines = []
    if objective is not Objective.RATIO:
        lo, hi = table.bounds(objective.value)
        lines.append(f"channel bounds: [{_fmt(lo)}, {_fmt(hi)}] (every value is a convex mix)")
        payload["channel_bounds"] = [lo, hi]
    if reference is not None:
        cmp = compare_range(reference, attainable)
        lines.append(f"note: {cmp.message()}")
        payload["reference_check"] = {
            "reported": list(cmp.reported),
            "attainable": list(cmp.attainable),
            "consistent": cmp.consistent,
            "message": cmp.message(),
        }
    return lines


def cmd_scan(args) -> int:
    table, _, _ = _resolve(args, need_state=False)
    objective = Objective.parse(args.objective)
    spec = GridSpec(args.eta_points, args.xi_points, objective)
    result = scan(table, spec, threads=args.threads)
    _write_csv(args.csv, result)
    if args.pgm:
        _write(args.pgm, heatmap_bytes(result.values))
    payload = {
        "system": table.system,
        "objective": objective.value,
        "grid": [spec.eta_points, spec.xi_points],
        "rows": int(result.values.size),
        "max": result.max,
        "argmax": _params_dict(result.argmax),
        "min": result.min,
        "argmin": _params_dict(result.argmin),
        "control_factor": finite_or_none(result.control_factor),
    }
    lines = [
        f"system: {table.system}",
        f"objective: {objective.value} on {spec.eta_points}x{spec.xi_points} grid ({result.values.size} rows)",
        f"max = {_fmt(result.max)} at eta={_fmt(result.argmax.eta)} xi={_fmt(result.argmax.xi)}",
        f"min = {_fmt(result.min)} at eta={_fmt(result.argmin.eta)} xi={_fmt(result.argmin.xi)}",
        f"control factor = {_fmt(result.control_factor)}",
    ]
    lines += _range_lines(table, objective, (result.min, result.max), _reference(args, table, objective), payload)
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_optimize(args) -> int:
    table, _, _ = _resolve(args, need_state=False)
    objective = Objective.parse(args.objective)
    grid = scan(table, GridSpec(args.eta_points, args.xi_points, objective), threads=args.threads)
    payload = {"system": table.system, "objective": objective.value}
    lines = [f"system: {table.system}", f"objective: {objective.value}"]
    found = {}
    for mode in ("max", "min") if args.mode == "both" else (args.mode,):
        start = grid.argmax if mode == "max" else grid.argmin
        ref = refine_extremum(table, start, mode, objective)
        found[mode] = ref.value
        payload[mode] = {"value": ref.value, "params": _params_dict(ref.params), "grid_value": ref.start_value}
        lines.append(
            f"{mode} = {_fmt(ref.value)} at eta={_fmt(ref.params.eta)} xi={_fmt(ref.params.xi)}"
            f" (grid {_fmt(ref.start_value)})"
        )
    if len(found) == 2:
        factor = found["max"] / found["min"] if found["min"] > 0 else math.inf
        payload["control_factor"] = finite_or_none(factor)
        lines.append(f"control factor = {_fmt(factor)}")
        lines += _range_lines(
            table, objective, (found["min"], found["max"]), _reference(args, table, objective), payload
        )
    po = phase_only_factor(table, objective)
    payload["phase_only"] = {"eta_star_rad": po.eta_star, "factor": finite_or_none(po.factor)}
    lines.append(f"phase-only factor = {_fmt(po.factor)} at eta={_fmt(po.eta_star)} (xi tuned alone)")
    _emit(args, payload, lines)
    return EXIT_OK


def _rotate_first(state):
    if isinstance(state, Superposition):
        return to_z(state)
    if isinstance(state, ProductState):
        return ProductState(to_z(state.atom_a), to_z(state.atom_b))
    return state


def cmd_check_symmetry(args) -> int:
    table, state, _ = _resolve(args)
    if args.rotate_first:
        state = _rotate_first(state)
    composer = Composer(table, enforce_selection_rule=not args.no_filter)
    report = verify_rotation_invariance(composer, state, args.samples)
    payload = {
        "system": table.system,
        "samples": report.samples,
        "max_deviation": report.max_deviation,
        "tolerance": report.tolerance,
        "filter": not args.no_filter,
        "passed": report.passed,
    }
    verdict = "PASS" if report.passed else "FAIL"
    lines = [
        f"system: {table.system}",
        f"selection-rule filter: {'on' if not args.no_filter else 'OFF (test mode)'}",
        f"{verdict}: max relative deviation {report.max_deviation:.3e} over {report.samples} beam-axis rotations"
        f" (tolerance {report.tolerance:g})",
    ]
    _emit(args, payload, lines)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_wigner(args) -> int:
    if (args.mp2 is None) != (args.m2 is None):
        raise FormatError("--mp2 and --m2 go together")
    if args.mp2 is not None:
        v = wigner_d(args.j2, args.mp2, args.m2, args.theta_rad)
        _emit(args, {"j2": args.j2, "mp2": args.mp2, "m2": args.m2, "theta_rad": args.theta_rad, "value": v}, [_fmt(v)])
        return EXIT_OK
    dm = d_matrix(args.j2, args.theta_rad)
    ms = m_values(args.j2)
    lines = ["2m' \\ 2m " + " ".join(f"{m:>13d}" for m in ms)]
    for mp, row in zip(ms, dm.entries.tolist()):
        lines.append(f"{mp:>9d} " + " ".join(f"{x + 0.0:>13.10f}" for x in row))
    _emit(args, {"j2": args.j2, "theta_rad": args.theta_rad, "m2": ms, "entries": dm.entries.tolist()}, lines)
    return EXIT_OK


def cmd_couple(args) -> int:
    if args.config:
        state = load_scenario(args.config)["state"]
    else:
        state = _state_from_flags(args)
    if not isinstance(state, ProductState):
        raise PhysicsError("couple needs a two-atom product state")
    coupled = couple(state)
    lines = ["2S  2M   amplitude                         |amplitude|^2"]
    for (s2, m2), a in coupled.terms:
        lines.append(f"{s2:>2d} {m2:>3d}   {a.real:+.12f}{a.imag:+.12f}j   {a.real**2 + a.imag**2:.12f}")
    payload = {
        "state": state_to_dict(coupled),
        "weights": [
            {"S2": s2, "M2": m2, "weight": a.real**2 + a.imag**2} for (s2, m2), a in coupled.terms
        ],
    }
    _emit(args, payload, lines)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def _add_table_opts(p, with_state: bool = True) -> None:
    p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--table", help="channel-table JSON path or bundled name (ne_ar_50mK, he_li)")
    if with_state:
        _add_state_opts(p)
    p.add_argument("--sigma-plus", type=float, help="override PI cross section of |1/2,+1/2>_m")
    p.add_argument("--sigma-minus", type=float, help="override PI cross section of |1/2,-1/2>_m")


def _add_state_opts(p) -> None:
    p.add_argument("--state", help="state JSON file")
    p.add_argument("--eta-rad", type=float, help="Hopf eta in radians, [0, pi]")
    p.add_argument("--xi-rad", type=float, help="Hopf xi in radians, [0, 2 pi)")
    p.add_argument("--beta-rad", type=float, help="He*-Li atomic product state with Li phase beta")
    p.add_argument("--molecular-beta-rad", type=float, help="He*-Li doublet superposition with phase beta")


def _add_grid_opts(p) -> None:
    p.add_argument("--objective", default="ai", choices=["pi", "ai", "ratio", "PI", "AI", "RATIO"])
    p.add_argument("--eta-points", type=int, default=181)
    p.add_argument("--xi-points", type=int, default=361)
    p.add_argument(
        "--reference-range", type=float, nargs=2, metavar=("LO", "HI"), help="quoted range to check against"
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads for scans")

    parser = argparse.ArgumentParser(
        prog="penning-control",
        description="Interference-controlled Penning/associative ionization cross sections",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compose", parents=[common], help="compose PI/AI cross sections for a state")
    _add_table_opts(p)
    p.add_argument("--process", choices=["PI", "AI", "both"])
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("scan", parents=[common], help="grid scan of the (eta, xi) control landscape")
    _add_table_opts(p, with_state=False)
    _add_grid_opts(p)
    p.add_argument("--csv", required=True, help="output CSV path")
    p.add_argument("--pgm", help="optional binary PGM heatmap path")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("optimize", parents=[common], help="grid scan plus local refinement of extrema")
    _add_table_opts(p, with_state=False)
    _add_grid_opts(p)
    p.add_argument("--mode", choices=["max", "min", "both"], default="both")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("check-symmetry", parents=[common], help="beam-axis rotation invariance check")
    _add_table_opts(p)
    p.add_argument("--samples", type=int, default=32, help="number of rotation angles in [0, 2 pi)")
    p.add_argument("--rotate-first", action="store_true", help="rotate X-quantized input to Z first")
    p.add_argument("--no-filter", action="store_true", help="disable the selection rule (test mode)")
    p.set_defaults(func=cmd_check_symmetry)

    p = sub.add_parser("wigner", parents=[common], help="reduced Wigner d-matrix (doubled labels)")
    p.add_argument("--j2", type=int, required=True)
    p.add_argument("--theta-rad", type=float, required=True)
    p.add_argument("--mp2", type=int)
    p.add_argument("--m2", type=int)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("couple", parents=[common], help="expand a product state in the |S, M> basis")
    p.add_argument("--config", help="scenario JSON file")
    _add_state_opts(p)
    p.set_defaults(func=cmd_couple)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.json = getattr(args, "json", False)
    args.threads = getattr(args, "threads", 1)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PhysicsError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
