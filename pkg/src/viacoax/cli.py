"""Command-line front end: ``viacoax analyze|design|tdr|compare``.

Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 infeasible design.
TDR is single-ended only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import touchstone
from .cascade import FrequencyResponse, Sweep, cascade_s_params, effective_bandwidth
from .constants import C0
from .designer import DesignInfeasible, design_via, spec_from_dict
from .geometry import GeometryError, Length, geometry_from_dict, load_geometry, meters, validate
from .tdr import TdrError, TdrTrace, Window, check_time_span, compare_traces, s11_to_tdr

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_INFEASIBLE = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        self.code = code
        super().__init__(message)


def g9(x: float) -> str:
    return f"{x:.9g}"


def _round9(obj):
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(g9(obj))
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_round9(obj), indent=2) + "\n", encoding="utf-8")


def parse_sweep(text: str) -> Sweep:
    try:
        start, stop, points = text.split(":")
        return Sweep(float(start) * 1e9, float(stop) * 1e9, int(points))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep {text!r}: {exc}") from None


def parse_window(text: str) -> Window:
    try:
        return Window.parse(text)
    except TdrError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="geometry JSON (radii in mils)")
    common.add_argument("--sweep", type=parse_sweep, default=Sweep(), metavar="START:STOP:POINTS",
                        help="frequency sweep in GHz (default 0.01:110:11000)")
    common.add_argument("--zref", type=float, default=50.0, help="reference impedance, ohm")
    common.add_argument("--threshold", type=float, default=-10.0, help="S11 bandwidth threshold, dB")
    common.add_argument("--rise-ps", type=float, default=15.0, help="TDR 10-90%% rise time, ps")
    common.add_argument("--window", type=parse_window, default=Window(), metavar="kaiser:BETA|none")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--format", type=str.lower, choices=["ma", "db", "ri"], default="ri", help="Touchstone format")
    common.add_argument("--no-meta", action="store_true", help="omit settings headers from data files")

    p = argparse.ArgumentParser(prog="viacoax", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="S-parameters and mode advisory of a stackup")
    d = sub.add_parser("design", parents=[common], help="solve geometry for a target impedance")
    d.add_argument("spec", type=Path, help="design spec JSON")
    t = sub.add_parser("tdr", parents=[common], help="single-ended TDR of a model or Touchstone file")
    t.add_argument("input", type=Path, nargs="?", help="geometry JSON or .s1p/.s2p file")
    c = sub.add_parser("compare", parents=[common], help="model vs reference Touchstone")
    c.add_argument("reference", type=Path, help="reference .s1p/.s2p")
    return p


# -- helpers -----------------------------------------------------------------


def _geometry(path: Path | None):
    if path is None:
        raise CliError("--config is required")
    try:
        g = load_geometry(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    diags = validate(g)
    for d in diags:
        print(f"{path}: {d}", file=sys.stderr)
    if any(d.is_error for d in diags):
        raise CliError(f"{path}: geometry validation failed")
    return g


def _out_dir(args) -> Path:
    out = args.out or Path(".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc.strerror or exc}", EXIT_IO) from None
    return out


def _meta(args, command: str) -> list[str]:
    if args.no_meta:
        return []
    s = args.sweep
    return [
        f"viacoax {command}",
        f"sweep_ghz={g9(s.f_start / 1e9)}:{g9(s.f_stop / 1e9)}:{s.n_points}",
        f"zref_ohm={g9(args.zref)}",
        f"threshold_db={g9(args.threshold)}",
        f"rise_ps={g9(args.rise_ps)} window={args.window} single_ended",
    ]


def _write_tdr_csv(path: Path, trace: TdrTrace, meta: list[str]) -> None:
    lines = [f"# {m}" for m in meta] + ["time_s,rho,z_ohm"]
    lines += [f"{g9(t)},{g9(r)},{g9(z)}" for t, r, z in zip(trace.t, trace.rho, trace.z)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_touchstone(path: Path) -> touchstone.TouchstoneDocument:
    try:
        return touchstone.read(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _tdr(resp: FrequencyResponse, args) -> TdrTrace:
    return s11_to_tdr(resp, args.rise_ps * 1e-12, args.window)


def _one_way_delay(g) -> float:
    return g.total_thickness * math.sqrt(g.material.epsilon_r) / C0


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _layer_table(layers) -> str:
    rows = [["layer", "outer_radius_mil", "z0_ohm", "te11_fc_approx_ghz", "te11_fc_exact_ghz", "tm01_fc_exact_ghz"]]
    for l in layers:
        rows.append([
            l["name"],
            g9(l["outer_radius_mil"]),
            g9(l["z0_ohm"]),
            g9(l["te11_approx"]["fc"] / 1e9),
            g9(l["te11_exact"]["fc"] / 1e9),
            g9(l["tm01_exact"]["fc"] / 1e9),
        ])
    return _table(rows)


# -- commands ----------------------------------------------------------------


def cmd_analyze(args) -> int:
    g = _geometry(args.config)
    out = _out_dir(args)
    result = cascade_s_params(g, args.sweep, args.zref)
    bw = effective_bandwidth(result.response, args.threshold)
    a = meters(g.barrel_radius)
    from .modesolver import TE11, Method, mode_cutoff

    layers = []
    for seg in result.advisory.segments:
        d = seg.summary()
        d["te11_exact"] = d.pop("te11")
        d["te11_approx"] = mode_cutoff(TE11, a, seg.outer_radius, g.material.epsilon_r, Method.APPROXIMATE).to_dict()
        d["tm01_exact"] = d.pop("tm01")
        layers.append(d)
    advisory = {
        "barrel_radius_mil": Length(a).mils,
        "epsilon_r": g.material.epsilon_r,
        "z_ref_ohm": args.zref,
        "threshold_db": args.threshold,
        "effective_bandwidth_hz": bw,
        "min_te11_fc_hz": result.advisory.min_te11_fc,
        "layers": layers,
    }
    try:
        touchstone.save(out / "sparams.s2p", result.response, args.format, comments=tuple(_meta(args, "analyze")))
        _dump_json(out / "advisory.json", advisory)
    except OSError as exc:
        raise CliError(f"write failed: {exc.strerror or exc}", EXIT_IO) from None

    print(f"barrel_radius_mil        {g9(Length(a).mils)}")
    print(f"epsilon_r                {g9(g.material.epsilon_r)}")
    print(f"z_ref_ohm                {g9(args.zref)}")
    print(_layer_table(layers))
    print(f"min_te11_fc_exact_ghz    {g9(result.advisory.min_te11_fc / 1e9)}")
    print(f"effective_bandwidth_ghz  {g9(bw / 1e9)}")
    return EXIT_OK


def cmd_design(args) -> int:
    try:
        data = json.loads(args.spec.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {args.spec}: {exc.strerror or exc}", EXIT_IO) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.spec}: invalid JSON ({exc})") from None
    spec, embedded = spec_from_dict(data)
    if embedded is not None:
        template = geometry_from_dict(embedded)
    else:
        template = _geometry(args.config)
    report = design_via(spec, template)
    body = report.to_dict()
    if args.out is not None:
        try:
            _dump_json(_out_dir(args) / "design.json", body)
        except OSError as exc:
            raise CliError(f"write failed: {exc.strerror or exc}", EXIT_IO) from None
    gd = body["geometry"]
    print(f"target_z0_ohm            {g9(spec.target_z0)}")
    print(f"barrel_radius_mil        {g9(gd['barrel_radius_mil'])}")
    print(f"stitch_ring_radius_mil   {g9(gd['stitch_ring_radius_mil'])}")
    print(_layer_table(body["layers"]))
    print(f"effective_bandwidth_ghz  {g9(report.effective_bandwidth / 1e9)}")
    print(f"f_max_ghz                {g9(spec.f_max / 1e9)}")
    print(f"mode_margin              {g9(report.mode_margin)}")
    for d in report.diagnostics:
        print(f"{d}", file=sys.stderr)
    print(f"verdict                  {report.verdict}")
    return EXIT_OK


def _is_touchstone(path: Path) -> bool:
    return path.suffix.lower() in (".s1p", ".s2p")


def cmd_tdr(args) -> int:
    src = args.input
    if src is not None and _is_touchstone(src):
        resp = _read_touchstone(src).to_response()
        label = str(src)
    else:
        g = _geometry(src or args.config)
        resp = cascade_s_params(g, args.sweep, args.zref).response
        check_time_span(resp, _one_way_delay(g))
        label = "model"
    trace = _tdr(resp, args)
    out = _out_dir(args)
    try:
        _write_tdr_csv(out / "tdr.csv", trace, _meta(args, "tdr"))
    except OSError as exc:
        raise CliError(f"write failed: {exc.strerror or exc}", EXIT_IO) from None
    z = trace.z[np.isfinite(trace.z)]
    print(f"source                   {label}")
    print(f"z_min_ohm                {g9(z.min())}")
    print(f"z_max_ohm                {g9(z.max())}")
    print(f"z_final_ohm              {g9(trace.z[-1])}")
    print(f"rise_ps                  {g9(trace.rise_time * 1e12)}")
    print(f"window                   {trace.window}")
    return EXIT_OK


def cmd_compare(args) -> int:
    g = _geometry(args.config)
    ref = _read_touchstone(args.reference).to_response()
    model = cascade_s_params(g, z_ref=ref.z_ref, f=ref.f).response
    if ref.ports == 1:
        model = model.one_port()
    out = _out_dir(args)

    ds11 = np.abs(model.s11 - ref.s11)
    with np.errstate(divide="ignore"):
        m_db = 20 * np.log10(np.abs(model.s11))
        r_db = 20 * np.log10(np.abs(ref.s11))
    metrics = {"max_abs_ds11": float(ds11.max())}
    if ref.ports == 2:
        metrics["max_abs_ds21"] = float(np.abs(model.s21 - ref.s21).max())

    tm, tr = _tdr(model, args), _tdr(ref, args)
    cmp = compare_traces(tm, tr)
    metrics.update(cmp.to_dict())

    meta = _meta(args, "compare")
    head = [f"# {m}" for m in meta]
    s_lines = head + ["freq_hz,model_s11_db,ref_s11_db"]
    s_lines += [f"{g9(f)},{g9(a)},{g9(b)}" for f, a, b in zip(ref.f, m_db, r_db)]
    t_lines = head + ["time_s,model_z_ohm,ref_z_ohm"]
    rz = np.interp(tm.t, tr.t, tr.z)
    t_lines += [f"{g9(t)},{g9(a)},{g9(b)}" for t, a, b in zip(tm.t, tm.z, rz)]
    try:
        (out / "sparams_overlay.csv").write_text("\n".join(s_lines) + "\n", encoding="utf-8")
        (out / "tdr_overlay.csv").write_text("\n".join(t_lines) + "\n", encoding="utf-8")
        _dump_json(out / "compare.json", metrics)
    except OSError as exc:
        raise CliError(f"write failed: {exc.strerror or exc}", EXIT_IO) from None
    for k, v in metrics.items():
        if isinstance(v, list):
            v = " ".join(g9(x) for x in v)
        else:
            v = g9(v)
        print(f"{k:<25}{v}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "design": cmd_design, "tdr": cmd_tdr, "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DesignInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (GeometryError, TdrError, touchstone.TouchstoneError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
