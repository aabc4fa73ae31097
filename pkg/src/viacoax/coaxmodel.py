"""TEM impedance of the coaxial approximation and its closed-form inverses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import ETA0
from .geometry import Length, LengthLike, Material, meters


def _check_er(epsilon_r: float):
    if not epsilon_r >= 1:
        raise ValueError(f"epsilon_r must be >= 1, got {epsilon_r!r}")


def coax_impedance(a: LengthLike, b: LengthLike, epsilon_r: float) -> float:
    """Characteristic impedance (ohm) of a coax with inner radius a, outer radius b."""
    a, b = meters(a), meters(b)
    if not 0 < a < b:
        raise ValueError(f"need 0 < a < b, got a={a!r}, b={b!r}")
    _check_er(epsilon_r)
    return ETA0 / (2.0 * math.pi * math.sqrt(epsilon_r)) * math.log(b / a)


def _exponent(z0: float, epsilon_r: float) -> float:
    if not z0 >= 0:
        raise ValueError(f"z0 must be >= 0, got {z0!r}")
    _check_er(epsilon_r)
    return 2.0 * math.pi * z0 * math.sqrt(epsilon_r) / ETA0


def solve_outer_for_z0(a: LengthLike, z0: float, epsilon_r: float) -> Length:
    """Outer radius giving impedance ``z0`` around a fixed inner radius."""
    a = meters(a)
    if not a > 0:
        raise ValueError(f"a must be > 0, got {a!r}")
    return Length(a * math.exp(_exponent(z0, epsilon_r)))


def solve_inner_for_z0(b: LengthLike, z0: float, epsilon_r: float) -> Length:
    """Inner (barrel) radius giving impedance ``z0`` inside a fixed outer radius."""
    b = meters(b)
    if not b > 0:
        raise ValueError(f"b must be > 0, got {b!r}")
    return Length(b * math.exp(-_exponent(z0, epsilon_r)))


@dataclass(frozen=True)
class CoaxSection:
    """A uniform coaxial segment. ``length`` may be zero for impedance-only use."""

    inner_radius: Length
    outer_radius: Length
    material: Material
    length: Length = Length(0.0)
    z0: float = field(init=False)

    def __post_init__(self):
        for name in ("inner_radius", "outer_radius", "length"):
            v = getattr(self, name)
            if not isinstance(v, Length):
                object.__setattr__(self, name, Length(float(v)))
        if meters(self.length) < 0:
            raise ValueError("section length must be >= 0")
        object.__setattr__(
            self,
            "z0",
            coax_impedance(self.inner_radius, self.outer_radius, self.material.epsilon_r),
        )

    @classmethod
    def with_impedance(
        cls, z0: float, inner_radius: LengthLike, material: Material, length: LengthLike = 0.0
    ) -> CoaxSection:
        """Section of a given impedance, built by solving for the outer radius."""
        b = solve_outer_for_z0(inner_radius, z0, material.epsilon_r)
        return cls(Length(meters(inner_radius)), b, material, Length(meters(length)))
