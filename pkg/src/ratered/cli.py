"""Command-line front end: run sweeps, certify fields, compare with the oracle.

Artifacts are written with fixed, cross-language-friendly conventions:
dense per-node field CSVs (one row per grid point, 17 significant digits,
"inf"/"-inf" spellings), a long-format trace CSV, JSON metadata/reports
(non-finite floats as the same strings), and self-contained SVG line plots
with no plotting dependency.  CSV is the interface of record; identical
configs produce byte-identical CSVs regardless of the thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from .certify import assess_optimality, check_membership
from .envelope import BOTTOM
from .errors import ConfigError
from .lattice import RateReductionField, RunResult, run, sum_rate_field
from .oracle import ConditionalSearchSpec, compare_with_envelope
from .probability import GridIndex, GridSpec, entropy_grid
from .target_functions import BUILTIN_NAMES, FunctionTable, builtin_table, load_table

EMIT_CHOICES = ("fields-csv", "fields-json", "trace-csv", "trace-svg", "report-json")
DEFAULT_EMIT = ("fields-csv", "trace-csv", "report-json")

CONVERGENCE_CAVEAT = (
    "the eps stop certifies stability between consecutive sweeps only; "
    "no bound on the remaining distance to the many-message limit is implied, "
    "and a finer grid step can keep the values growing"
)

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class RunConfig:
    function: str
    m: int
    delta: float
    t_max: int = 40
    eps: float = 1e-6
    initial_node: int | None = None
    tracked_points: list = dataclass_field(default_factory=list)
    output_dir: str = "."
    emit: tuple = DEFAULT_EMIT
    threads: int = 1
    slice_spec: str | None = None


def _fmt(x: float) -> str:
    """Decimal serialization at 17 significant digits; round-trips float64
    bit-exactly and spells the infinities 'inf' / '-inf'."""
    return "%.17g" % x


def _jsonable(obj):
    """Recursively make a structure JSON-safe: numpy scalars to Python,
    non-finite floats to 'inf'/'-inf'/'nan' strings."""
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _jsonable(obj.item())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        if math.isnan(obj):
            return "nan"
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2) + "\n")


def _resolve_function(name_or_path: str, m: int) -> FunctionTable:
    if name_or_path in BUILTIN_NAMES:
        return builtin_table(name_or_path, m)
    if Path(name_or_path).exists():
        f = load_table(name_or_path)
        if f.m != m:
            raise ConfigError(
                f"truth table {name_or_path} has arity {f.m}, expected m={m}"
            )
        return f
    raise ConfigError(
        f"unknown function {name_or_path!r}: not a builtin "
        f"{BUILTIN_NAMES} and not an existing file"
    )


def _parse_point(text: str, m: int) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != m:
        raise ConfigError(f"point {text!r} has {len(parts)} coordinates, expected {m}")
    try:
        values = tuple(float(s) for s in parts)
    except ValueError as exc:
        raise ConfigError(f"point {text!r}: {exc}") from None
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise ConfigError(f"point {text!r} has coordinates outside [0, 1]")
    return values


def _parse_slice(text: str, m: int) -> tuple[int, float]:
    match = re.fullmatch(r"p(\d+)=([-+0-9.eE]+)", text)
    if not match:
        raise ConfigError(f"slice {text!r} must look like p3=0")
    axis = int(match.group(1))
    if not 1 <= axis <= m:
        raise ConfigError(f"slice axis {axis} outside 1..{m}")
    value = float(match.group(2))
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"slice value {value} outside [0, 1]")
    return axis, value


# ---------------------------------------------------------------------------
# field CSV format


def field_csv_header(m: int, label: str) -> str:
    cols = [f"i_{j}" for j in range(1, m + 1)]
    cols += [f"p_{j}" for j in range(1, m + 1)]
    cols += [f"rho_{label}", f"Rsum_{label}"]
    return ",".join(cols)


def write_field_csv(path: Path, field_in: RateReductionField, label: str) -> None:
    """Dense dump, one row per grid point in row-major index order."""
    grid = field_in.grid
    axis = [_fmt(v) for v in grid.axis_values()]
    rho = field_in.data.reshape(-1)
    rsum = sum_rate_field(field_in).reshape(-1)
    lines = [field_csv_header(grid.m, label)]
    for flat, idx in enumerate(np.ndindex(grid.shape)):
        cells = [str(i) for i in idx]
        cells += [axis[i] for i in idx]
        cells.append(_fmt(rho[flat]))
        cells.append(_fmt(rsum[flat]))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


def read_field_csv(path) -> RateReductionField:
    """Re-ingest a field CSV bit-exactly (tau is unknown from a file: -1)."""
    text = Path(path).read_text().splitlines()
    if not text:
        raise ConfigError(f"{path}: empty field CSV")
    header = text[0].split(",")
    n_cols = len(header)
    if n_cols < 6 or n_cols % 2 != 0:
        raise ConfigError(f"{path}: malformed field CSV header {text[0]!r}")
    m = (n_cols - 2) // 2
    expect_i = [f"i_{j}" for j in range(1, m + 1)]
    expect_p = [f"p_{j}" for j in range(1, m + 1)]
    if header[:m] != expect_i or header[m : 2 * m] != expect_p or \
            not header[2 * m].startswith("rho_") or not header[2 * m + 1].startswith("Rsum_"):
        raise ConfigError(f"{path}: unexpected field CSV columns {header}")
    label = header[2 * m][len("rho_"):]
    k = int(label) if label.isdigit() else 0

    rows = []
    for ln, line in enumerate(text[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise ConfigError(f"{path}:{ln}: expected {n_cols} cells, got {len(parts)}")
        idx = tuple(int(s) for s in parts[:m])
        rows.append((idx, float(parts[2 * m])))
    if not rows:
        raise ConfigError(f"{path}: field CSV has no data rows")
    n_steps = max(max(idx) for idx, _ in rows)
    grid = GridSpec(m=m, n_steps=n_steps)
    if len(rows) != grid.n_points:
        raise ConfigError(
            f"{path}: {len(rows)} rows does not cover the "
            f"{grid.n_points}-point grid inferred from the indices"
        )
    data = np.full(grid.shape, np.nan)
    for idx, value in rows:
        data[idx] = value
    if np.any(np.isnan(data)):
        raise ConfigError(f"{path}: duplicate rows leave grid points unfilled")
    return RateReductionField(grid=grid, data=data, tau=-1, k=k)


def write_trace_csv(path: Path, result: RunResult, delta_label: str | None = None) -> None:
    """Long format: t,k,point_id,rho with one extra k='max' row per point,
    optionally prefixed by a delta column for overlaid sweeps."""
    tr = result.trace
    m = result.bank.m
    head = "t,k,point_id,rho"
    if delta_label is not None:
        head = "delta," + head
    lines = [head]
    n_taus = len(tr.max_series[0]) if tr.tracked_points else 0
    for t in range(n_taus):
        for pid in range(len(tr.tracked_points)):
            for k in range(1, m + 1):
                row = f"{t},{k},{pid},{_fmt(tr.per_k[pid][k - 1][t])}"
                lines.append(f"{delta_label},{row}" if delta_label is not None else row)
            row = f"{t},max,{pid},{_fmt(tr.max_series[pid][t])}"
            lines.append(f"{delta_label},{row}" if delta_label is not None else row)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# SVG plotting (hand-rolled: axes, polylines, legend)


def _svg_plot(path: Path, curves, title: str, x_label: str, y_label: str) -> None:
    """curves: list of (label, xs, ys); BOTTOM entries break the polyline."""
    width, height = 640, 420
    ml, mr, mt, mb = 60, 20, 40, 45
    pw, ph = width - ml - mr, height - mt - mb

    finite_x = [x for _, xs, ys in curves for x, y in zip(xs, ys) if math.isfinite(y)]
    finite_y = [y for _, xs, ys in curves for y in ys if math.isfinite(y)]
    x_lo, x_hi = (min(finite_x), max(finite_x)) if finite_x else (0.0, 1.0)
    y_lo, y_hi = (min(finite_y), max(finite_y)) if finite_y else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x: float) -> float:
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y: float) -> float:
        return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{y_label}</text>',
    ]
    for i in range(5):
        fx = x_lo + (x_hi - x_lo) * i / 4
        fy = y_lo + (y_hi - y_lo) * i / 4
        parts.append(
            f'<line x1="{sx(fx):.1f}" y1="{mt + ph}" x2="{sx(fx):.1f}" '
            f'y2="{mt + ph + 4}" stroke="black"/>'
            f'<text x="{sx(fx):.1f}" y="{mt + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{fx:.3g}</text>'
        )
        parts.append(
            f'<line x1="{ml - 4}" y1="{sy(fy):.1f}" x2="{ml}" y2="{sy(fy):.1f}" '
            f'stroke="black"/>'
            f'<text x="{ml - 7}" y="{sy(fy) + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{fy:.3g}</text>'
        )
    for c_i, (label, xs, ys) in enumerate(curves):
        color = _PALETTE[c_i % len(_PALETTE)]
        seg: list[str] = []
        for x, y in zip(xs, ys):
            if math.isfinite(y):
                seg.append(f"{sx(x):.2f},{sy(y):.2f}")
            elif seg:
                parts.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )
                seg = []
        if seg:
            parts.append(
                f'<polyline points="{" ".join(seg)}" fill="none" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
        ly = mt + 14 + 16 * c_i
        parts.append(
            f'<line x1="{ml + 8}" y1="{ly - 4}" x2="{ml + 28}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
            f'<text x="{ml + 33}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def _snap_tracked(grid: GridSpec, requested: list) -> tuple[list, list]:
    indices: list[GridIndex] = []
    records: list[dict] = []
    for req in requested:
        idx = grid.snap(req)
        indices.append(idx)
        records.append(
            {
                "requested": list(req),
                "snapped_index": list(idx),
                "snapped_pmf": [float(v) for v in grid.pmf_at(idx)],
            }
        )
    return indices, records


def cmd_run(cfg: RunConfig) -> int:
    grid = GridSpec.from_delta(cfg.m, cfg.delta)
    f = _resolve_function(cfg.function, cfg.m)
    if cfg.initial_node is not None and not 1 <= cfg.initial_node <= cfg.m:
        raise ConfigError(f"initial node {cfg.initial_node} outside 1..{cfg.m}")
    tracked_idx, tracked_rec = _snap_tracked(grid, cfg.tracked_points)

    started = time.perf_counter()
    result = run(
        grid,
        f,
        t_max=cfg.t_max,
        eps=cfg.eps,
        tracked=tuple(tracked_idx),
        threads=cfg.threads,
    )
    elapsed = time.perf_counter() - started

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit = set(cfg.emit) | {"report-json"}
    artifacts: list[str] = []

    report_field = (
        result.bank.field_for(cfg.initial_node)
        if cfg.initial_node is not None
        else result.bank.max_field()
    )
    report_label = str(cfg.initial_node) if cfg.initial_node is not None else "max"

    if "fields-csv" in emit:
        for k in range(1, cfg.m + 1):
            p = out / f"field_k{k}.csv"
            write_field_csv(p, result.bank.field_for(k), str(k))
            artifacts.append(p.name)
        p = out / "field_max.csv"
        write_field_csv(p, result.bank.max_field(), "max")
        artifacts.append(p.name)
    if "fields-json" in emit:
        payload = {
            "m": cfg.m,
            "delta": grid.delta,
            "t_stop": result.t_stop,
            "fields": {
                str(k): result.bank.field_for(k).data
                for k in range(1, cfg.m + 1)
            },
            "max": result.bank.max_data(),
        }
        _write_json(out / "fields.json", payload)
        artifacts.append("fields.json")
    if "trace-csv" in emit and tracked_idx:
        write_trace_csv(out / "trace.csv", result)
        artifacts.append("trace.csv")
    if "trace-svg" in emit and tracked_idx:
        curves = [
            (
                "p" + str(tuple(round(v, 6) for v in grid.pmf_at(idx))),
                list(range(len(result.trace.max_series[pid]))),
                result.trace.max_series[pid],
            )
            for pid, idx in enumerate(tracked_idx)
        ]
        _svg_plot(
            out / "trace.svg",
            curves,
            title=f"rate reduction vs sweeps ({cfg.function}, delta={grid.delta:g})",
            x_label="t (messages)",
            y_label="rate reduction [bits]",
        )
        artifacts.append("trace.svg")

    if cfg.slice_spec is not None:
        axis, value = _parse_slice(cfg.slice_spec, cfg.m)
        fixed = int(round(value * grid.n_steps))
        sl = [slice(None)] * cfg.m
        sl[axis - 1] = fixed
        sliced = report_field.data[tuple(sl)]
        h = entropy_grid(grid)[tuple(sl)]
        name = f"slice_p{axis}_{value:g}".replace(".", "p") + ".csv"
        keep = [j for j in range(cfg.m) if j != axis - 1]
        axis_vals = [_fmt(v) for v in grid.axis_values()]
        lines = [
            ",".join(
                [f"i_{j + 1}" for j in keep]
                + [f"p_{j + 1}" for j in keep]
                + [f"rho_{report_label}", f"Rsum_{report_label}"]
            )
        ]
        for flat, idx in enumerate(np.ndindex(sliced.shape)):
            rho = sliced[idx]
            rs = h[idx] - rho if rho != BOTTOM else float("inf")
            cells = [str(i) for i in idx]
            cells += [axis_vals[i] for i in idx]
            cells += [_fmt(rho), _fmt(rs)]
            lines.append(",".join(cells))
        (out / name).write_text("\n".join(lines) + "\n")
        artifacts.append(name)

    metadata = {
        "function": cfg.function,
        "m": cfg.m,
        "delta": grid.delta,
        "n_steps": grid.n_steps,
        "eps": cfg.eps,
        "t_max": cfg.t_max,
        "t_stop": result.t_stop,
        "stop_reason": result.stop_reason,
        "convergence_caveat": CONVERGENCE_CAVEAT,
        "sup_deltas": list(result.trace.sup_deltas),
        "cross_k_gap": result.cross_k_gap,
        "tracked": tracked_rec,
        "initial_node": cfg.initial_node,
        "threads": cfg.threads,
        "elapsed_seconds": elapsed,
        "artifacts": artifacts,
    }
    _write_json(out / "metadata.json", metadata)

    print(
        f"run: {cfg.function} m={cfg.m} delta={grid.delta:g} -> "
        f"t_stop={result.t_stop} ({result.stop_reason}), "
        f"cross-node gap {result.cross_k_gap:.3g}, {elapsed:.2f}s"
    )
    for rec in tracked_rec:
        print(
            f"  tracked {rec['requested']} -> index {rec['snapped_index']} "
            f"= pmf {rec['snapped_pmf']}"
        )
    print(f"  wrote {', '.join(artifacts + ['metadata.json'])} in {out}")
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    parsed = read_field_csv(args.field)
    grid = parsed.grid
    if args.m is not None and args.m != grid.m:
        raise ConfigError(f"--m {args.m} does not match field CSV arity {grid.m}")
    if args.delta is not None:
        want = GridSpec.from_delta(grid.m, args.delta)
        if want.n_steps != grid.n_steps:
            raise ConfigError(
                f"--delta {args.delta} implies {want.n_steps} steps, "
                f"field CSV has {grid.n_steps}"
            )
    f = _resolve_function(args.function, grid.m)

    achieved = run(
        grid, f, t_max=args.t_max, eps=args.eps, threads=args.threads
    ).bank.max_field()
    membership = check_membership(parsed, f, args.tol)
    optimality = assess_optimality(parsed, achieved, f, args.tol)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "field": str(args.field),
        "function": args.function,
        "tol": args.tol,
        "membership": membership.to_dict(),
        "optimality": optimality.to_dict(),
    }
    _write_json(out / "certify_report.json", payload)

    print(f"certify: membership {membership.verdict}, optimality: {optimality.status}")
    if not membership.majorization_ok:
        print(
            f"  entropy-floor violation {membership.worst_majorization_gap:.6g} "
            f"at index {membership.majorization_location}"
        )
    if not all(membership.concavity_ok_per_axis):
        print(
            f"  concavity violation {membership.worst_concavity_violation:.6g} "
            f"along axis {membership.concavity_axis} "
            f"at index {membership.concavity_location}"
        )
    print(f"  wrote certify_report.json in {out}")
    return 0


def cmd_sweep_delta(args: argparse.Namespace) -> int:
    try:
        deltas = [float(s) for s in args.deltas.split(",") if s]
    except ValueError as exc:
        raise ConfigError(f"bad --deltas {args.deltas!r}: {exc}") from None
    if not deltas:
        raise ConfigError("--deltas is empty")
    requested = [_parse_point(t, args.m) for t in (args.track or [])]
    if not requested:
        raise ConfigError("sweep-delta needs at least one --track point")
    f = _resolve_function(args.function, args.m)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    all_lines: list[str] = []
    curves = []
    per_delta = []
    results: dict[float, RunResult] = {}
    for delta in deltas:
        grid = GridSpec.from_delta(args.m, delta)
        tracked_idx, tracked_rec = _snap_tracked(grid, requested)
        result = run(
            grid,
            f,
            t_max=args.t_max,
            eps=args.eps,
            tracked=tuple(tracked_idx),
            threads=args.threads,
        )
        results[delta] = result
        m = args.m
        for t in range(len(result.trace.max_series[0])):
            for pid in range(len(tracked_idx)):
                for k in range(1, m + 1):
                    all_lines.append(
                        f"{_fmt(delta)},{t},{k},{pid},"
                        f"{_fmt(result.trace.per_k[pid][k - 1][t])}"
                    )
                all_lines.append(
                    f"{_fmt(delta)},{t},max,{pid},"
                    f"{_fmt(result.trace.max_series[pid][t])}"
                )
        series = result.trace.max_series[0]
        curves.append((f"delta={delta:g}", list(range(len(series))), series))

        monotone = True
        worst_drop = 0.0
        for prev, nxt in zip(series, series[1:]):
            if prev == BOTTOM:
                continue
            if nxt == BOTTOM or nxt < prev - 1e-12:
                monotone = False
                worst_drop = max(worst_drop, float("inf") if nxt == BOTTOM else prev - nxt)
        per_delta.append(
            {
                "delta": delta,
                "t_stop": result.t_stop,
                "stop_reason": result.stop_reason,
                "tracked": tracked_rec,
                "monotone_nondecreasing": monotone,
                "worst_drop": worst_drop,
            }
        )

    (out / "sweep_trace.csv").write_text(
        "\n".join(["delta,t,k,point_id,rho"] + all_lines) + "\n"
    )
    _svg_plot(
        out / "sweep_trace.svg",
        curves,
        title=f"rate reduction vs sweeps across grid steps ({args.function})",
        x_label="t (messages)",
        y_label="rate reduction [bits]",
    )

    # finer vs coarser at equal t: reported, not hard-asserted
    cross = []
    order = sorted(deltas, reverse=True)
    for coarse, fine in zip(order, order[1:]):
        sc = results[coarse].trace.max_series[0]
        sf = results[fine].trace.max_series[0]
        worst = 0.0
        for vc, vf in zip(sc, sf):
            if vc == BOTTOM:
                continue
            worst = max(worst, float("inf") if vf == BOTTOM else vc - vf)
        cross.append(
            {
                "coarse_delta": coarse,
                "fine_delta": fine,
                "max_coarse_minus_fine": worst,
                "fine_never_below_coarse_at_1e-9": worst <= 1e-9,
            }
        )

    payload = {
        "function": args.function,
        "m": args.m,
        "deltas": deltas,
        "eps": args.eps,
        "t_max": args.t_max,
        "convergence_caveat": CONVERGENCE_CAVEAT,
        "per_delta": per_delta,
        "cross_delta": cross,
    }
    _write_json(out / "sweep_report.json", payload)

    failed = [d["delta"] for d in per_delta if not d["monotone_nondecreasing"]]
    for d in per_delta:
        print(
            f"sweep-delta: delta={d['delta']:g} t_stop={d['t_stop']} "
            f"({d['stop_reason']}) monotone={d['monotone_nondecreasing']}"
        )
    print(f"  wrote sweep_trace.csv, sweep_trace.svg, sweep_report.json in {out}")
    if failed:
        print(f"error: non-monotone trace for deltas {failed}", file=sys.stderr)
        return 2
    return 0


def cmd_oracle_check(args: argparse.Namespace) -> int:
    grid = GridSpec.from_delta(args.m, args.delta)
    f = _resolve_function(args.function, args.m)
    spec = ConditionalSearchSpec(
        k=args.k, search_step=args.search_step, u1_cardinality=args.u1_cardinality
    )
    points: list[GridIndex] = []
    for text in args.point or []:
        points.append(grid.snap(_parse_point(text, args.m)))
    if args.n_random:
        rng = np.random.default_rng(args.seed)
        draws = rng.integers(0, grid.n_steps + 1, size=(args.n_random, args.m))
        points.extend(tuple(int(i) for i in row) for row in draws)
    if not points:
        raise ConfigError("oracle-check needs --point and/or --n-random")

    report = compare_with_envelope(grid, f, args.k, tuple(points), spec)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "oracle_report.json", report.to_dict())

    for row in report.rows:
        print(
            f"oracle-check: point {row.point} envelope={_fmt(row.envelope_value)} "
            f"oracle={_fmt(row.oracle_value)} gap={_fmt(row.gap)} "
            f"agree={row.feasibility_agrees}"
        )
    print(
        f"  worst gap {_fmt(report.worst_gap)}, slack {report.slack:.6g}, "
        f"within contract: {report.within_contract}"
    )
    print(f"  wrote oracle_report.json in {out}")
    return 0 if report.within_contract else 2


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratered",
        description=(
            "Iterative computation of interactive function-computation "
            "sum-rates over product-pmf grids"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_delta: bool = True) -> None:
        p.add_argument("--function", required=True,
                       help=f"builtin {BUILTIN_NAMES} or a truth-table file")
        p.add_argument("--m", type=int, required=True, help="number of sources")
        if with_delta:
            p.add_argument("--delta", type=float, required=True,
                           help="grid step (reciprocal of an integer)")
        p.add_argument("--t-max", type=int, default=40, help="sweep budget")
        p.add_argument("--eps", type=float, default=1e-6,
                       help="sup-norm stop threshold between sweeps")
        p.add_argument("--threads", type=int, default=1,
                       help="envelope worker threads (RATERED_THREADS overrides)")
        p.add_argument("--output-dir", "-o", default=".", help="artifact directory")

    p_run = sub.add_parser("run", help="iterate fields and export them")
    common(p_run)
    p_run.add_argument("--track", action="append", default=[],
                       metavar="P1,P2,...", help="pmf to trace (repeatable)")
    p_run.add_argument("--initial-node", type=int, default=None,
                       help="report/slice this node's field instead of the max")
    p_run.add_argument("--emit", default=",".join(DEFAULT_EMIT),
                       help=f"comma list from {EMIT_CHOICES}")
    p_run.add_argument("--slice", dest="slice_spec", default=None,
                       metavar="pJ=V", help="also export one fixed-axis slice")

    p_cert = sub.add_parser("certify", help="family-check a field CSV")
    p_cert.add_argument("--field", required=True, help="field CSV to certify")
    p_cert.add_argument("--function", required=True)
    p_cert.add_argument("--m", type=int, default=None,
                        help="expected arity (validated against the CSV)")
    p_cert.add_argument("--delta", type=float, default=None,
                        help="expected grid step (validated against the CSV)")
    p_cert.add_argument("--tol", type=float, default=1e-4)
    p_cert.add_argument("--t-max", type=int, default=40)
    p_cert.add_argument("--eps", type=float, default=1e-6)
    p_cert.add_argument("--threads", type=int, default=1)
    p_cert.add_argument("--output-dir", "-o", default=".")

    p_sweep = sub.add_parser("sweep-delta", help="overlay traces across grid steps")
    p_sweep.add_argument("--function", required=True)
    p_sweep.add_argument("--m", type=int, required=True)
    p_sweep.add_argument("--deltas", required=True, help="comma list, e.g. 0.1,0.05,0.02")
    p_sweep.add_argument("--track", action="append", default=[], metavar="P1,P2,...")
    p_sweep.add_argument("--t-max", type=int, default=40)
    p_sweep.add_argument("--eps", type=float, default=1e-6)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--output-dir", "-o", default=".")

    p_oracle = sub.add_parser("oracle-check", help="brute-force one-message cross-check")
    common(p_oracle)
    p_oracle.add_argument("--k", type=int, required=True, help="transmitting node")
    p_oracle.add_argument("--search-step", type=float, default=0.02,
                          help="conditional-search grid step")
    p_oracle.add_argument("--u1-cardinality", type=int, default=3)
    p_oracle.add_argument("--point", action="append", default=[],
                          metavar="P1,P2,...", help="pmf to check (repeatable)")
    p_oracle.add_argument("--n-random", type=int, default=0,
                          help="additionally sample this many grid points")
    p_oracle.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    env_threads = os.environ.get("RATERED_THREADS")
    if env_threads is not None and hasattr(args, "threads"):
        try:
            args.threads = int(env_threads)
        except ValueError:
            print(f"error: RATERED_THREADS={env_threads!r} is not an integer",
                  file=sys.stderr)
            return 2

    try:
        if args.command == "run":
            emit = tuple(s for s in args.emit.split(",") if s)
            bad = [s for s in emit if s not in EMIT_CHOICES]
            if bad:
                raise ConfigError(f"unknown emit kinds {bad}; choose from {EMIT_CHOICES}")
            cfg = RunConfig(
                function=args.function,
                m=args.m,
                delta=args.delta,
                t_max=args.t_max,
                eps=args.eps,
                initial_node=args.initial_node,
                tracked_points=[_parse_point(t, args.m) for t in args.track],
                output_dir=args.output_dir,
                emit=emit,
                threads=args.threads,
                slice_spec=args.slice_spec,
            )
            return cmd_run(cfg)
        if args.command == "certify":
            return cmd_certify(args)
        if args.command == "sweep-delta":
            return cmd_sweep_delta(args)
        if args.command == "oracle-check":
            return cmd_oracle_check(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
