"""Via stack as a cascade of TEM coax segments, one per layer.

Each layer becomes a line section whose outer radius is that layer's
anti-pad. Higher-order modes are not folded into the S-parameters; their
cutoffs and below-cutoff attenuation are reported alongside in a
:class:`ModeAdvisory`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coaxmodel import CoaxSection
from .constants import C0, NEPER_TO_DB
from .geometry import Length, ViaGeometry, meters, require_valid
from .modesolver import TE11, TM01, Method, ModeCutoff, evanescent_alpha, mode_cutoff

DEFAULT_F_START = 10e6
DEFAULT_F_STOP = 110e9
DEFAULT_POINTS = 11000
UNIFORM_RTOL = 1e-9


@dataclass(frozen=True)
class Sweep:
    f_start: float = DEFAULT_F_START
    f_stop: float = DEFAULT_F_STOP
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not (0 <= self.f_start < self.f_stop and math.isfinite(self.f_stop)):
            raise ValueError(f"need 0 <= f_start < f_stop, got {self.f_start}, {self.f_stop}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points!r}")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, int(self.n_points))


def is_uniform(f: np.ndarray, rtol: float = UNIFORM_RTOL) -> bool:
    if len(f) < 2:
        return True
    df = np.diff(f)
    step = (f[-1] - f[0]) / (len(f) - 1)
    return step > 0 and bool(np.all(np.abs(df - step) <= rtol * max(abs(f[-1]), step)))


@dataclass(frozen=True)
class FrequencyResponse:
    """S-parameters on a uniform, ascending frequency grid.

    ``s`` has shape (n_freq, ports, ports).
    """

    f: np.ndarray
    s: np.ndarray
    z_ref: float = 50.0

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        s = np.asarray(self.s, dtype=complex)
        if f.ndim != 1 or len(f) == 0:
            raise ValueError("frequency grid must be a non-empty 1-D array")
        if s.ndim == 1:
            s = s.reshape(-1, 1, 1)
        if s.shape[0] != len(f) or s.shape[1] != s.shape[2] or s.shape[1] not in (1, 2):
            raise ValueError(f"S array shape {s.shape} does not match {len(f)} points of 1 or 2 ports")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly ascending")
        if not is_uniform(f):
            raise ValueError("frequency grid must be uniform")
        if not self.z_ref > 0:
            raise ValueError("z_ref must be > 0")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "s", s)

    @property
    def ports(self) -> int:
        return self.s.shape[1]

    @property
    def s11(self) -> np.ndarray:
        return self.s[:, 0, 0]

    @property
    def s21(self) -> np.ndarray:
        if self.ports < 2:
            raise ValueError("1-port response has no S21")
        return self.s[:, 1, 0]

    def one_port(self) -> FrequencyResponse:
        return FrequencyResponse(self.f, self.s[:, :1, :1], self.z_ref)


@dataclass(frozen=True)
class TransferMatrix:
    """ABCD parameters; entries are scalars or arrays over frequency."""

    A: complex | np.ndarray
    B: complex | np.ndarray
    C: complex | np.ndarray
    D: complex | np.ndarray

    def __matmul__(self, o: TransferMatrix) -> TransferMatrix:
        return TransferMatrix(
            self.A * o.A + self.B * o.C,
            self.A * o.B + self.B * o.D,
            self.C * o.A + self.D * o.C,
            self.C * o.B + self.D * o.D,
        )

    @property
    def det(self):
        return self.A * self.D - self.B * self.C

    @classmethod
    def identity(cls, n: int | None = None) -> TransferMatrix:
        one = 1.0 + 0j if n is None else np.ones(n, dtype=complex)
        zero = 0j if n is None else np.zeros(n, dtype=complex)
        return cls(one, zero, zero, one)

    def to_s(self, z_ref: float) -> np.ndarray:
        """S-matrix (..., 2, 2) for equal real reference impedances on both ports."""
        A, B, C, D = (np.asarray(x, dtype=complex) for x in (self.A, self.B, self.C, self.D))
        zr = z_ref
        den = A * zr + B + C * zr * zr + D * zr
        s = np.empty(A.shape + (2, 2), dtype=complex)
        s[..., 0, 0] = (A * zr + B - C * zr * zr - D * zr) / den
        s[..., 0, 1] = 2.0 * zr * (A * D - B * C) / den
        s[..., 1, 0] = 2.0 * zr / den
        s[..., 1, 1] = (-A * zr + B - C * zr * zr + D * zr) / den
        return s


def propagation_constant(section: CoaxSection, f):
    """gamma = alpha_d + j*beta of the TEM wave, with alpha_d = beta*tan(delta)/2."""
    f = np.asarray(f, dtype=float)
    beta = 2.0 * np.pi * f * math.sqrt(section.material.epsilon_r) / C0
    return beta * section.material.loss_tangent / 2.0 + 1j * beta


def segment_matrix(section: CoaxSection, f) -> TransferMatrix:
    """ABCD matrix of a uniform TEM section at frequency (or frequencies) ``f``."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(~(f_arr >= 0)):
        raise ValueError("frequency must be >= 0")
    gl = propagation_constant(section, f_arr) * meters(section.length)
    ch, sh = np.cosh(gl), np.sinh(gl)
    z0 = section.z0
    m = TransferMatrix(ch, z0 * sh, sh / z0, ch)
    if f_arr.ndim == 0:
        m = TransferMatrix(*(complex(x) for x in (m.A, m.B, m.C, m.D)))
    return m


def cascade_sections(sections: Sequence[CoaxSection], f, z_ref: float) -> np.ndarray:
    """2-port S-parameters (n_freq, 2, 2) of sections chained in order."""
    f = np.atleast_1d(np.asarray(f, dtype=float))
    total = TransferMatrix.identity(len(f))
    for sec in sections:
        total = total @ segment_matrix(sec, f)
    return total.to_s(z_ref)


def layer_sections(geometry: ViaGeometry) -> list[CoaxSection]:
    a = meters(geometry.barrel_radius)
    return [
        CoaxSection(Length(a), Length(geometry.outer_radius(layer)), geometry.material, layer.thickness)
        for layer in geometry.layers
    ]


@dataclass(frozen=True)
class SegmentAdvisory:
    """Higher-order-mode bookkeeping for one layer segment."""

    name: str
    outer_radius: float
    length: float
    z0: float
    te11: ModeCutoff
    tm01: ModeCutoff
    te11_approx: ModeCutoff
    alpha_te11: np.ndarray  # Np/m over the sweep
    alpha_tm01: np.ndarray

    @property
    def atten_db_te11(self) -> np.ndarray:
        return self.alpha_te11 * self.length * NEPER_TO_DB

    @property
    def atten_db_tm01(self) -> np.ndarray:
        return self.alpha_tm01 * self.length * NEPER_TO_DB

    def summary(self) -> dict:
        return {
            "name": self.name,
            "outer_radius_mil": Length(self.outer_radius).mils,
            "length_mil": Length(self.length).mils,
            "z0_ohm": self.z0,
            "te11": self.te11.to_dict(),
            "te11_approx": self.te11_approx.to_dict(),
            "tm01": self.tm01.to_dict(),
        }


@dataclass(frozen=True)
class ModeAdvisory:
    f: np.ndarray
    segments: tuple[SegmentAdvisory, ...]

    @property
    def min_te11_fc(self) -> float:
        return min(s.te11.fc for s in self.segments)

    def to_dict(self, include_curves: bool = False) -> dict:
        out = {"segments": [s.summary() for s in self.segments], "min_te11_fc": self.min_te11_fc}
        if include_curves:
            out["f"] = self.f.tolist()
            for d, s in zip(out["segments"], self.segments):
                d["atten_db_te11"] = s.atten_db_te11.tolist()
                d["atten_db_tm01"] = s.atten_db_tm01.tolist()
        return out


def mode_advisory(geometry: ViaGeometry, f) -> ModeAdvisory:
    f = np.asarray(f, dtype=float)
    a = meters(geometry.barrel_radius)
    er = geometry.material.epsilon_r
    segs = []
    for layer, sec in zip(geometry.layers, layer_sections(geometry)):
        b = meters(sec.outer_radius)
        te = mode_cutoff(TE11, a, b, er)
        tm = mode_cutoff(TM01, a, b, er)
        segs.append(
            SegmentAdvisory(
                name=layer.name,
                outer_radius=b,
                length=meters(sec.length),
                z0=sec.z0,
                te11=te,
                tm01=tm,
                te11_approx=mode_cutoff(TE11, a, b, er, Method.APPROXIMATE),
                alpha_te11=np.atleast_1d(evanescent_alpha(te.kc, f, er)),
                alpha_tm01=np.atleast_1d(evanescent_alpha(tm.kc, f, er)),
            )
        )
    return ModeAdvisory(f, tuple(segs))


@dataclass(frozen=True)
class CascadeResult:
    response: FrequencyResponse
    advisory: ModeAdvisory
    sections: tuple[CoaxSection, ...] = field(repr=False, default=())


def cascade_s_params(
    geometry: ViaGeometry,
    sweep: Sweep | None = None,
    z_ref: float = 50.0,
    feed: CoaxSection | None = None,
    f=None,
) -> CascadeResult:
    """S-parameters of the via stack, top layer first, terminated in ``z_ref``.

    ``feed`` is an optional leading section (coaxial launch). Pass ``f`` to
    evaluate on an explicit uniform grid instead of ``sweep``.
    """
    require_valid(geometry)
    if not z_ref > 0:
        raise ValueError("z_ref must be > 0")
    freqs = (sweep or Sweep()).frequencies if f is None else np.asarray(f, dtype=float)
    sections = layer_sections(geometry)
    chain = ([feed] if feed is not None else []) + sections
    s = cascade_sections(chain, freqs, z_ref)
    return CascadeResult(
        FrequencyResponse(freqs, s, z_ref), mode_advisory(geometry, freqs), tuple(chain)
    )


def s11_db(response: FrequencyResponse) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(response.s11))


def effective_bandwidth(response: FrequencyResponse, threshold_db: float = -10.0) -> float:
    """First frequency where |S11| rises to ``threshold_db``; f_stop if it never does."""
    f = response.f
    if len(f) == 0:
        raise ValueError("empty response")
    db = s11_db(response)
    above = np.nonzero(db >= threshold_db)[0]
    if len(above) == 0:
        return float(f[-1])
    i = int(above[0])
    if i == 0:
        return float(f[0])
    d0, d1 = db[i - 1], db[i]
    if not np.isfinite(d0):
        return float(f[i])
    return float(f[i - 1] + (threshold_db - d0) / (d1 - d0) * (f[i] - f[i - 1]))
