"""Design procedures built on the coax approximation.

The flow is sequential and closed-form: solve the free radius for the target
impedance, clamp to manufacturing limits, then check higher-order-mode
headroom and the TEM cascade's -10 dB bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .cascade import (
    DEFAULT_F_START,
    DEFAULT_F_STOP,
    DEFAULT_POINTS,
    FrequencyResponse,
    Sweep,
    cascade_s_params,
    effective_bandwidth,
)
from .coaxmodel import coax_impedance, solve_inner_for_z0, solve_outer_for_z0
from .geometry import (
    Diagnostic,
    GeometryError,
    Layer,
    Length,
    LengthLike,
    Material,
    ViaGeometry,
    meters,
    require_valid,
    validate,
)
from .modesolver import TE11, TM01, Method, ModeCutoff, mode_cutoff

DEFAULT_F_MAX = 67e9
POLARITY_BAND = 0.5  # ohm

FREE_ALIASES = {
    "a": "barrel_radius",
    "barrel_radius": "barrel_radius",
    "b": "outer_radius",
    "outer_radius": "outer_radius",
    "stitch_ring_radius": "outer_radius",
}


class DesignInfeasible(ValueError):
    """The target cannot be met within the stated constraints."""

    def __init__(self, message: str, constraints: Sequence[str] = ()):
        self.constraints = tuple(constraints)
        super().__init__(message)


@dataclass(frozen=True)
class DesignSpec:
    target_z0: float
    f_max: float
    free: frozenset[str]
    epsilon_r: float | None = None  # None: take it from the template
    min_barrel_radius: float | None = None
    min_antipad_radius: float | None = None
    max_outer_radius: float | None = None
    z_ref: float | None = None  # None: terminate in target_z0
    threshold_db: float = -10.0
    z0_rtol: float = 0.05  # allowed miss after clamping
    sweep: Sweep | None = None

    def __post_init__(self):
        if not self.target_z0 > 0:
            raise ValueError("target_z0 must be > 0")
        if not self.f_max > 0:
            raise ValueError("f_max must be > 0")
        free = set()
        for name in self.free:
            if name not in FREE_ALIASES:
                raise ValueError(f"unknown free parameter {name!r}")
            free.add(FREE_ALIASES[name])
        if not free:
            raise ValueError("at least one free parameter is required")
        object.__setattr__(self, "free", frozenset(free))
        for name in ("min_barrel_radius", "min_antipad_radius", "max_outer_radius"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, meters(v))

    @property
    def termination(self) -> float:
        return self.target_z0 if self.z_ref is None else self.z_ref

    def design_sweep(self) -> Sweep:
        if self.sweep is not None:
            return self.sweep
        return Sweep(DEFAULT_F_START, max(DEFAULT_F_STOP, self.f_max), DEFAULT_POINTS)


@dataclass(frozen=True)
class LayerReport:
    name: str
    outer_radius: float
    z0: float
    te11_approx: ModeCutoff
    te11: ModeCutoff
    tm01: ModeCutoff

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "outer_radius_mil": Length(self.outer_radius).mils,
            "z0_ohm": self.z0,
            "te11_approx": self.te11_approx.to_dict(),
            "te11_exact": self.te11.to_dict(),
            "tm01_exact": self.tm01.to_dict(),
        }


@dataclass(frozen=True)
class DesignReport:
    geometry: ViaGeometry
    layers: tuple[LayerReport, ...]
    z_ref: float
    f_max: float
    threshold_db: float
    effective_bandwidth: float
    diagnostics: tuple[Diagnostic, ...] = ()
    response: FrequencyResponse | None = field(default=None, repr=False, compare=False)

    @property
    def min_te11_fc(self) -> float:
        return min(l.te11.fc for l in self.layers)

    @property
    def mode_margin(self) -> float:
        return self.min_te11_fc / self.f_max

    @property
    def passed(self) -> bool:
        return (
            self.min_te11_fc > self.f_max
            and self.effective_bandwidth >= self.f_max
            and not any(d.is_error for d in self.diagnostics)
        )

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def layer(self, name: str) -> LayerReport:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)

    def to_dict(self) -> dict:
        from .geometry import geometry_to_dict

        return {
            "geometry": geometry_to_dict(self.geometry),
            "layers": [l.to_dict() for l in self.layers],
            "z_ref_ohm": self.z_ref,
            "f_max_hz": self.f_max,
            "threshold_db": self.threshold_db,
            "effective_bandwidth_hz": self.effective_bandwidth,
            "min_te11_fc_hz": self.min_te11_fc,
            "mode_margin": self.mode_margin,
            "verdict": self.verdict,
            "diagnostics": [
                {"level": d.level, "code": d.code, "message": d.message} for d in self.diagnostics
            ],
        }


def evaluate(
    geometry: ViaGeometry,
    f_max: float = DEFAULT_F_MAX,
    z_ref: float = 50.0,
    sweep: Sweep | None = None,
    threshold_db: float = -10.0,
    diagnostics: Iterable[Diagnostic] = (),
) -> DesignReport:
    """Impedances, cutoffs and cascade bandwidth of an existing geometry."""
    warnings = require_valid(geometry)
    sweep = sweep or Sweep(DEFAULT_F_START, max(DEFAULT_F_STOP, f_max), DEFAULT_POINTS)
    result = cascade_s_params(geometry, sweep, z_ref)
    a = meters(geometry.barrel_radius)
    er = geometry.material.epsilon_r
    layers = []
    for layer, seg in zip(geometry.layers, result.advisory.segments):
        b = seg.outer_radius
        layers.append(
            LayerReport(
                name=layer.name,
                outer_radius=b,
                z0=seg.z0,
                te11_approx=mode_cutoff(TE11, a, b, er, Method.APPROXIMATE),
                te11=seg.te11,
                tm01=seg.tm01,
            )
        )
    return DesignReport(
        geometry=geometry,
        layers=tuple(layers),
        z_ref=z_ref,
        f_max=f_max,
        threshold_db=threshold_db,
        effective_bandwidth=effective_bandwidth(result.response, threshold_db),
        diagnostics=tuple(diagnostics) + tuple(warnings),
        response=result.response,
    )


def design_via(spec: DesignSpec, template: ViaGeometry) -> DesignReport:
    """Solve the free radius (or radii) of ``template`` for ``spec.target_z0``.

    With the outer radius free, the stitch ring and every anti-pad move to
    the solved radius. With only the barrel free, anti-pads are kept. When
    both are free the barrel is held and the ring solved first, and the
    barrel is re-solved only if the ring hits ``max_outer_radius``.
    """
    er = spec.epsilon_r if spec.epsilon_r is not None else template.material.epsilon_r
    material = replace(template.material, epsilon_r=er)
    a = meters(template.barrel_radius)
    b = meters(template.stitch_ring_radius)
    z = spec.target_z0
    notes: list[Diagnostic] = []
    binding: list[str] = []

    def clamp(value, limit, name, lower):
        hit = limit is not None and (value < limit if lower else value > limit)
        if not hit:
            return value
        word = "below" if lower else "above"
        notes.append(
            Diagnostic(
                "warning",
                "clamped",
                f"solved radius {Length(value).mils:.6g} mil is {word} {name} "
                f"{Length(limit).mils:.6g} mil; clamped",
            )
        )
        binding.append(name)
        return limit

    if "barrel_radius" in spec.free and spec.min_barrel_radius is not None:
        a = max(a, spec.min_barrel_radius)

    if "outer_radius" in spec.free:
        b = meters(solve_outer_for_z0(a, z, er))
        cap = spec.max_outer_radius
        if "barrel_radius" in spec.free and cap is not None and b > cap:
            b = cap
            a = clamp(meters(solve_inner_for_z0(b, z, er)), spec.min_barrel_radius, "min_barrel_radius", True)
            if a == spec.min_barrel_radius:
                binding.append("max_outer_radius")
        else:
            b = clamp(b, cap, "max_outer_radius", False)
        b = clamp(b, spec.min_antipad_radius, "min_antipad_radius", True)
        layers = [Layer(l.name, l.thickness, Length(b)) for l in template.layers]
    else:
        a = clamp(meters(solve_inner_for_z0(b, z, er)), spec.min_barrel_radius, "min_barrel_radius", True)
        layers = list(template.layers)

    if not 0 < a < b:
        raise DesignInfeasible(
            f"no valid geometry: barrel radius {Length(a).mils:.6g} mil is not inside "
            f"outer radius {Length(b).mils:.6g} mil",
            binding,
        )
    achieved = coax_impedance(a, b, er)
    if abs(achieved - z) > spec.z0_rtol * z:
        names = ", ".join(dict.fromkeys(binding)) or "geometry"
        raise DesignInfeasible(
            f"target {z:.6g} ohm unreachable: best achievable is {achieved:.6g} ohm; "
            f"binding constraint: {names}",
            binding,
        )

    geometry = ViaGeometry(Length(a), Length(b), template.stitch_count, tuple(layers), material)
    errors = [d for d in validate(geometry) if d.is_error]
    if errors:
        raise DesignInfeasible(
            "solved geometry is invalid: " + "; ".join(d.message for d in errors),
            [d.code for d in errors],
        )
    return evaluate(
        geometry,
        f_max=spec.f_max,
        z_ref=spec.termination,
        sweep=spec.design_sweep(),
        threshold_db=spec.threshold_db,
        diagnostics=notes,
    )


@dataclass(frozen=True)
class LayerChange:
    name: str
    z0_before: float
    z0_after: float
    te11_before: float  # exact fc, Hz
    te11_after: float
    te11_approx_before: float
    te11_approx_after: float
    tm01_before: float
    tm01_after: float

    @property
    def te11_ratio(self) -> float:
        return self.te11_approx_after / self.te11_approx_before

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"te11_approx_ratio": self.te11_ratio}


@dataclass(frozen=True)
class ModulationReport:
    before: DesignReport
    after: DesignReport
    changes: tuple[LayerChange, ...]
    diagnostics: tuple[Diagnostic, ...]

    def to_dict(self) -> dict:
        return {
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "changes": [c.to_dict() for c in self.changes],
            "diagnostics": [{"level": d.level, "code": d.code, "message": d.message} for d in self.diagnostics],
        }


def modulate_inner_antipad(
    geometry: ViaGeometry,
    inner_antipad_radius: LengthLike,
    inner_layer_names: Sequence[str],
    z_ref: float = 50.0,
    f_max: float = DEFAULT_F_MAX,
    sweep: Sweep | None = None,
    threshold_db: float = -10.0,
) -> tuple[ViaGeometry, ModulationReport]:
    """Set the anti-pad radius of the named layers and report what it buys and costs.

    Shrinking inner anti-pads raises those segments' cutoffs but moves their
    TEM impedance away from the rest of the stack; both shifts are reported.
    """
    r = meters(inner_antipad_radius)
    if not r > meters(geometry.barrel_radius):
        raise GeometryError("inner anti-pad radius must exceed the barrel radius")
    known = {l.name for l in geometry.layers}
    missing = [n for n in inner_layer_names if n not in known]
    if missing:
        raise GeometryError(f"unknown layer(s): {', '.join(missing)}")

    targets = set(inner_layer_names)
    new = geometry.with_layers(
        Layer(l.name, l.thickness, Length(r)) if l.name in targets else l for l in geometry.layers
    )
    before = evaluate(geometry, f_max, z_ref, sweep, threshold_db)
    after = evaluate(new, f_max, z_ref, sweep, threshold_db)

    changes, notes = [], []
    for lb, la in zip(before.layers, after.layers):
        if lb.name not in targets:
            continue
        changes.append(
            LayerChange(
                lb.name,
                lb.z0,
                la.z0,
                lb.te11.fc,
                la.te11.fc,
                lb.te11_approx.fc,
                la.te11_approx.fc,
                lb.tm01.fc,
                la.tm01.fc,
            )
        )
        if abs(la.z0 - z_ref) > abs(lb.z0 - z_ref) + 1e-12:
            notes.append(
                Diagnostic(
                    "warning",
                    "added_mismatch",
                    f"layer {lb.name!r}: Z0 {lb.z0:.4g} -> {la.z0:.4g} ohm moves away from "
                    f"{z_ref:.4g} ohm (more reflection)",
                )
            )
    return new, ModulationReport(before, after, tuple(changes), tuple(notes))


@dataclass(frozen=True)
class BarrelSweepRow:
    diameter: float  # m
    z0: float
    te11_fc: float  # exact, lowest over layers
    polarity: str  # "peak" | "dip" | "flat"
    effective_bandwidth: float

    def to_dict(self) -> dict:
        return {
            "diameter_mil": Length(self.diameter).mils,
            "z0_ohm": self.z0,
            "te11_fc_hz": self.te11_fc,
            "tdr_polarity": self.polarity,
            "effective_bandwidth_hz": self.effective_bandwidth,
        }


def tdr_polarity(z0: float, z_ref: float, band: float = POLARITY_BAND) -> str:
    """Inductive peak above z_ref, capacitive dip below it."""
    if z0 > z_ref + band:
        return "peak"
    if z0 < z_ref - band:
        return "dip"
    return "flat"


def barrel_sweep(
    geometry: ViaGeometry,
    diameters: Sequence[LengthLike],
    z_ref: float = 50.0,
    sweep: Sweep | None = None,
    threshold_db: float = -10.0,
) -> list[BarrelSweepRow]:
    """Re-evaluate the stack for each barrel diameter, in input order."""
    rows = []
    min_antipad = min(geometry.outer_radius(l) for l in geometry.layers)
    for d in diameters:
        d = meters(d)
        if not 0 < d / 2 < min_antipad:
            raise GeometryError(
                f"barrel diameter {Length(d).mils:.6g} mil does not fit inside the "
                f"smallest anti-pad ({Length(min_antipad).mils:.6g} mil radius)"
            )
        g = replace(geometry, barrel_radius=Length(d / 2))
        report = evaluate(g, z_ref=z_ref, sweep=sweep, threshold_db=threshold_db)
        z0 = coax_impedance(d / 2, g.stitch_ring_radius, g.material.epsilon_r)
        rows.append(
            BarrelSweepRow(d, z0, report.min_te11_fc, tdr_polarity(z0, z_ref), report.effective_bandwidth)
        )
    return rows


def spec_from_dict(d: dict) -> tuple[DesignSpec, dict | None]:
    """Design spec JSON -> (spec, embedded geometry config or None).

    Radii are in mils and f_max in GHz.
    """
    from .geometry import mil_to_m

    allowed = {
        "target_z0",
        "f_max_ghz",
        "free",
        "epsilon_r",
        "min_barrel_radius_mil",
        "min_antipad_radius_mil",
        "max_outer_radius_mil",
        "z_ref",
        "z0_rtol",
        "threshold_db",
        "geometry",
    }
    if not isinstance(d, dict):
        raise ValueError("design spec must be a JSON object")
    for key in d:
        if key not in allowed:
            raise ValueError(f"unknown key {key!r} in design spec")
    for key in ("target_z0", "f_max_ghz", "free"):
        if key not in d:
            raise ValueError(f"missing key {key!r} in design spec")
    free = d["free"]
    if isinstance(free, str) or not isinstance(free, list):
        raise ValueError("free: expected a list of parameter names")

    def num(key):
        v = d.get(key)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValueError(f"{key}: expected a finite number, got {v!r}")
        return float(v)

    def mil(key):
        v = num(key)
        return None if v is None else mil_to_m(v).meters

    kw = {}
    for key in ("z0_rtol", "threshold_db"):
        if num(key) is not None:
            kw[key] = num(key)
    spec = DesignSpec(
        target_z0=num("target_z0"),
        f_max=num("f_max_ghz") * 1e9,
        free=frozenset(free),
        epsilon_r=num("epsilon_r"),
        min_barrel_radius=mil("min_barrel_radius_mil"),
        min_antipad_radius=mil("min_antipad_radius_mil"),
        max_outer_radius=mil("max_outer_radius_mil"),
        z_ref=num("z_ref"),
        **kw,
    )
    return spec, d.get("geometry")
