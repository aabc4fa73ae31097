"""Physical data model of a stitched via stack.

All lengths are stored in meters. Mils show up only where the user types
them in (config files, CLI tables).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Union

from .constants import MIL, MM

STITCH_COUNT_ADVISORY = 6
ANTIPAD_MARGIN = 1.2


class GeometryError(ValueError):
    """Raised when a geometry is rejected (bad config or failed validation)."""


@dataclass(frozen=True, order=True)
class Length:
    """A length in meters."""

    meters: float

    def __post_init__(self):
        if isinstance(self.meters, Length):
            object.__setattr__(self, "meters", self.meters.meters)
        object.__setattr__(self, "meters", float(self.meters))
        if not math.isfinite(self.meters):
            raise ValueError(f"length must be finite, got {self.meters!r}")

    @classmethod
    def from_mils(cls, mils: float) -> Length:
        return mil_to_m(mils)

    @classmethod
    def from_mm(cls, mm: float) -> Length:
        return cls(float(mm) * MM)

    @property
    def mils(self) -> float:
        return self.meters / MIL

    @property
    def mm(self) -> float:
        return self.meters / MM

    def __float__(self) -> float:
        return self.meters

    def __mul__(self, k: float) -> Length:
        return Length(self.meters * k)

    __rmul__ = __mul__


LengthLike = Union[Length, float]


def meters(x: LengthLike) -> float:
    """Plain float meters from a Length or a float already in meters."""
    return x.meters if isinstance(x, Length) else float(x)


def mil_to_m(x: float) -> Length:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"mil value must be finite, got {x!r}")
    return Length(x * MIL)


@dataclass(frozen=True)
class Material:
    epsilon_r: float
    loss_tangent: float = 0.0


@dataclass(frozen=True)
class Layer:
    name: str
    thickness: Length
    antipad_radius: Length


@dataclass(frozen=True)
class ViaGeometry:
    """Signal via (radius ``barrel_radius``) inside a ring of stitching vias.

    ``stitch_ring_radius`` is measured from the signal-via center to the
    *edge* of the stitching vias; it plays the outer-conductor radius of
    the equivalent coax.
    """

    barrel_radius: Length
    stitch_ring_radius: Length
    stitch_count: int
    layers: tuple[Layer, ...]
    material: Material = field(default_factory=lambda: Material(1.0))

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def outer_radius(self, layer: Layer) -> float:
        """Effective coax outer radius of a layer: its anti-pad, capped at the ring."""
        return min(meters(layer.antipad_radius), meters(self.stitch_ring_radius))

    def with_layers(self, layers: Iterable[Layer]) -> ViaGeometry:
        return replace(self, layers=tuple(layers))

    @property
    def total_thickness(self) -> float:
        return sum(meters(l.thickness) for l in self.layers)


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning" | "info"
    code: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.level == "error"

    def __str__(self) -> str:
        return f"{self.level}: {self.message}"


def validate(geometry: ViaGeometry) -> list[Diagnostic]:
    """Check invariants and design advisories; never raises."""
    diags: list[Diagnostic] = []

    def err(code, msg):
        diags.append(Diagnostic("error", code, msg))

    def warn(code, msg):
        diags.append(Diagnostic("warning", code, msg))

    a = meters(geometry.barrel_radius)
    b = meters(geometry.stitch_ring_radius)
    mat = geometry.material

    if not a > 0:
        err("barrel_radius", "barrel_radius > 0 violated")
    if not a < b:
        err("barrel_radius", "barrel_radius < stitch_ring_radius violated")
    if not (isinstance(mat.epsilon_r, (int, float)) and mat.epsilon_r >= 1):
        err("epsilon_r", f"epsilon_r >= 1 violated (got {mat.epsilon_r!r})")
    if not (isinstance(mat.loss_tangent, (int, float)) and mat.loss_tangent >= 0):
        err("loss_tangent", f"loss_tangent >= 0 violated (got {mat.loss_tangent!r})")

    n = geometry.stitch_count
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        err("stitch_count", f"stitch_count >= 1 violated (got {n!r})")
    elif n < STITCH_COUNT_ADVISORY:
        warn(
            "stitch_count",
            f"only {n} stitching vias; the coaxial approximation wants at least "
            f"{STITCH_COUNT_ADVISORY} equally spaced ones",
        )

    if not geometry.layers:
        err("layers", "layers must not be empty")
    names = [l.name for l in geometry.layers]
    for dup in sorted({x for x in names if names.count(x) > 1}):
        err("layers", f"duplicate layer name {dup!r}")

    for layer in geometry.layers:
        t = meters(layer.thickness)
        r = meters(layer.antipad_radius)
        tag = f"layer {layer.name!r}"
        if not t > 0:
            err("thickness", f"{tag}: thickness > 0 violated")
        if not r > 0:
            err("antipad_radius", f"{tag}: antipad_radius > 0 violated")
            continue
        if not a < r:
            err("antipad_radius", f"{tag}: barrel_radius < antipad_radius violated")
        elif r < ANTIPAD_MARGIN * a:
            warn(
                "antipad_margin",
                f"{tag}: antipad_radius is less than {ANTIPAD_MARGIN} x barrel_radius",
            )
        if r > b:
            err("antipad_radius", f"{tag}: antipad_radius <= stitch_ring_radius violated")
    return diags


def require_valid(geometry: ViaGeometry) -> list[Diagnostic]:
    """Raise GeometryError on any error diagnostic; return the warnings."""
    diags = validate(geometry)
    errors = [d for d in diags if d.is_error]
    if errors:
        raise GeometryError("; ".join(d.message for d in errors))
    return diags


# -- JSON config -------------------------------------------------------------

_TOP_KEYS = {
    "barrel_radius_mil",
    "stitch_ring_radius_mil",
    "stitch_count",
    "epsilon_r",
    "loss_tangent",
    "layers",
}
_REQUIRED_TOP = _TOP_KEYS - {"loss_tangent"}
_LAYER_KEYS = {"name", "thickness_mil", "antipad_radius_mil"}


def _number(d: dict, key: str, where: str) -> float:
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise GeometryError(f"{where}{key}: expected a finite number, got {v!r}")
    return float(v)


def geometry_from_dict(d: Any) -> ViaGeometry:
    """Build a geometry from the JSON config schema (radii in mils).

    Unknown and missing keys raise GeometryError naming the key. Value
    constraints are left to :func:`validate`.
    """
    if not isinstance(d, dict):
        raise GeometryError("geometry config must be a JSON object")
    for key in d:
        if key not in _TOP_KEYS:
            raise GeometryError(f"unknown key {key!r} in geometry config")
    for key in sorted(_REQUIRED_TOP):
        if key not in d:
            raise GeometryError(f"missing key {key!r} in geometry config")

    count = d["stitch_count"]
    if isinstance(count, bool) or not isinstance(count, int):
        raise GeometryError(f"stitch_count: expected an integer, got {count!r}")
    raw_layers = d["layers"]
    if not isinstance(raw_layers, list):
        raise GeometryError("layers: expected a list")
    if not raw_layers:
        raise GeometryError("layers: must contain at least one layer")

    layers = []
    for i, item in enumerate(raw_layers):
        where = f"layers[{i}]."
        if not isinstance(item, dict):
            raise GeometryError(f"layers[{i}]: expected an object")
        for key in item:
            if key not in _LAYER_KEYS:
                raise GeometryError(f"unknown key {key!r} in layers[{i}]")
        for key in sorted(_LAYER_KEYS):
            if key not in item:
                raise GeometryError(f"missing key {key!r} in layers[{i}]")
        if not isinstance(item["name"], str):
            raise GeometryError(f"{where}name: expected a string")
        layers.append(
            Layer(
                name=item["name"],
                thickness=mil_to_m(_number(item, "thickness_mil", where)),
                antipad_radius=mil_to_m(_number(item, "antipad_radius_mil", where)),
            )
        )

    return ViaGeometry(
        barrel_radius=mil_to_m(_number(d, "barrel_radius_mil", "")),
        stitch_ring_radius=mil_to_m(_number(d, "stitch_ring_radius_mil", "")),
        stitch_count=count,
        layers=tuple(layers),
        material=Material(
            epsilon_r=_number(d, "epsilon_r", ""),
            loss_tangent=_number(d, "loss_tangent", "") if "loss_tangent" in d else 0.0,
        ),
    )


def geometry_to_dict(g: ViaGeometry) -> dict:
    return {
        "barrel_radius_mil": Length(meters(g.barrel_radius)).mils,
        "stitch_ring_radius_mil": Length(meters(g.stitch_ring_radius)).mils,
        "stitch_count": g.stitch_count,
        "epsilon_r": g.material.epsilon_r,
        "loss_tangent": g.material.loss_tangent,
        "layers": [
            {
                "name": l.name,
                "thickness_mil": Length(meters(l.thickness)).mils,
                "antipad_radius_mil": Length(meters(l.antipad_radius)).mils,
            }
            for l in g.layers
        ],
    }


def load_geometry(path: str | Path) -> ViaGeometry:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GeometryError(f"{path}: invalid JSON ({exc})") from None
    return geometry_from_dict(data)


def uniform_geometry(
    barrel_radius: LengthLike,
    outer_radius: LengthLike,
    epsilon_r: float,
    thicknesses: Iterable[LengthLike],
    stitch_count: int = 8,
    loss_tangent: float = 0.0,
    names: Iterable[str] | None = None,
) -> ViaGeometry:
    """Convenience builder: every anti-pad equals the stitch-ring radius."""
    thicknesses = [meters(t) for t in thicknesses]
    names = list(names) if names is not None else [f"L{i + 1}" for i in range(len(thicknesses))]
    b = Length(meters(outer_radius))
    return ViaGeometry(
        barrel_radius=Length(meters(barrel_radius)),
        stitch_ring_radius=b,
        stitch_count=stitch_count,
        layers=tuple(Layer(n, Length(t), b) for n, t in zip(names, thicknesses)),
        material=Material(epsilon_r, loss_tangent),
    )
