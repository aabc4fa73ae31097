"""Higher-order coaxial mode cutoffs.

Two routes to the cutoff wavenumber of the annulus a < r < b:

* ``kc_approx``: the closed form 2/(a+b) for TE11.
* ``kc_exact``: roots of the Bessel cross-product characteristic equations,
  found by a sign-change scan followed by bisection.
"""

from __future__ import annotations

import enum
import math
import re
from decimal import Decimal
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .constants import C0
from .geometry import LengthLike, meters

SCAN_HARMONICS = 20  # scan up to 20*pi/(b-a)
SCAN_OVERSAMPLE = 100
BISECT_RTOL = 1e-12
SCAN_CHUNK = 4096


class ModeSolverError(ArithmeticError):
    """No cutoff root could be bracketed in the scan range."""


class BesselKind(str, enum.Enum):
    J0 = "J0"
    J1 = "J1"
    Y0 = "Y0"
    Y1 = "Y1"
    J1prime = "J1prime"
    Y1prime = "Y1prime"


def _j1p(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.j0(x) - special.j1(x) / x
    return np.where(x == 0, 0.5, out)


_TWO_OVER_PI = Decimal("0.63661977236758134307553505349005744813783858296183")
_EULER = 0.5772156649015329
SMALL_X = 0.1


def _y1p_small(x: float) -> float:
    """Y1'(x) for 0 < x < SMALL_X.

    Y1' = 2/(pi x^2) + remainder. The singular term dominates and is formed
    in decimal so the result is rounded once; the remainder comes from the
    ascending series of Y1 and is O(log x).
    """
    h = x / 2.0
    series = 0.0
    term = h  # (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
    harm_k, harm_k1 = 0.0, 1.0
    k = 0
    while True:
        series += term * (harm_k + harm_k1 - 2.0 * _EULER)
        k += 1
        term *= -h * h / (k * (k + 1))
        harm_k += 1.0 / k
        harm_k1 += 1.0 / (k + 1)
        if abs(term) < 1e-18 * h:
            break
    remainder = (
        float(special.y0(x))
        - 2.0 / math.pi * math.log(h) * float(special.j1(x)) / x
        + series / (math.pi * x)
    )
    dx = Decimal(x)
    return float(_TWO_OVER_PI / (dx * dx) + Decimal(remainder))


def _y1p(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.y0(x) - special.y1(x) / x
    small = (x > 0) & (x < SMALL_X)
    if np.any(small):
        out = np.array(out, dtype=float)
        out[small] = [_y1p_small(float(v)) for v in np.atleast_1d(x)[np.atleast_1d(small)]]
    return out


_BESSEL = {
    BesselKind.J0: special.j0,
    BesselKind.J1: special.j1,
    BesselKind.Y0: special.y0,
    BesselKind.Y1: special.y1,
    BesselKind.J1prime: _j1p,
    BesselKind.Y1prime: _y1p,
}


def bessel(kind: BesselKind | str, x):
    """Evaluate a first/second-kind Bessel function (order 0, 1) or a derivative.

    ``x`` may be a scalar or an array. Y kinds require x > 0.
    """
    kind = BesselKind(kind)
    arr = np.asarray(x, dtype=float)
    if kind.value.startswith("Y"):
        if np.any(~(arr > 0)):
            raise ValueError(f"{kind.value} requires x > 0")
    elif np.any(~(arr >= 0)):
        raise ValueError(f"{kind.value} requires x >= 0")
    out = _BESSEL[kind](arr)
    return float(out) if np.ndim(out) == 0 else out


# -- modes -------------------------------------------------------------------


@dataclass(frozen=True)
class Mode:
    """TE11 or TM0n (n >= 1)."""

    family: str
    n: int

    def __post_init__(self):
        if self.family == "TE" and self.n != 1:
            raise ValueError("only TE11 is supported")
        if self.family not in ("TE", "TM") or self.n < 1:
            raise ValueError(f"unsupported mode {self.family}{self.n}")

    @classmethod
    def parse(cls, label: str | Mode) -> Mode:
        if isinstance(label, Mode):
            return label
        m = re.fullmatch(r"\s*(TE)11\s*|\s*TM0(\d+)\s*", label.upper())
        if not m:
            raise ValueError(f"unsupported mode label {label!r}")
        return TE11 if m.group(1) else cls("TM", int(m.group(2)))

    @property
    def label(self) -> str:
        return "TE11" if self.family == "TE" else f"TM0{self.n}"

    def __str__(self) -> str:
        return self.label


TE11 = Mode("TE", 1)
TM01 = Mode("TM", 1)


class Method(str, enum.Enum):
    APPROXIMATE = "approximate"
    EXACT = "exact_bessel_root"


@dataclass(frozen=True)
class ModeCutoff:
    mode: Mode
    kc: float  # rad/m
    fc: float  # Hz
    method: Method

    def to_dict(self) -> dict:
        return {"mode": self.mode.label, "kc": self.kc, "fc": self.fc, "method": self.method.value}


# -- closed forms ------------------------------------------------------------


def _check_annulus(a: float, b: float):
    if not (0 < a < b and math.isfinite(b)):
        raise ValueError(f"need 0 < a < b, got a={a!r}, b={b!r}")


def kc_approx(a: LengthLike, b: LengthLike) -> float:
    """TE11 cutoff wavenumber estimate 2/(a+b), rad/m."""
    a, b = meters(a), meters(b)
    _check_annulus(a, b)
    return 2.0 / (a + b)


def cutoff_frequency(kc: float, epsilon_r: float) -> float:
    """Cutoff frequency (Hz) of a mode with cutoff wavenumber ``kc`` in a dielectric."""
    if not kc > 0:
        raise ValueError(f"kc must be > 0, got {kc!r}")
    if not epsilon_r >= 1:
        raise ValueError(f"epsilon_r must be >= 1, got {epsilon_r!r}")
    return C0 * kc / (2.0 * math.pi * math.sqrt(epsilon_r))


def evanescent_alpha(kc: float, f, epsilon_r: float):
    """Attenuation constant (Np/m) of a mode below cutoff; zero at and above it.

    Accepts scalar or array ``f``.
    """
    if not kc > 0:
        raise ValueError(f"kc must be > 0, got {kc!r}")
    if not epsilon_r >= 1:
        raise ValueError(f"epsilon_r must be >= 1, got {epsilon_r!r}")
    f_arr = np.asarray(f, dtype=float)
    if np.any(~(f_arr >= 0)):
        raise ValueError("frequency must be >= 0")
    k = 2.0 * np.pi * f_arr * math.sqrt(epsilon_r) / C0
    alpha = np.sqrt(np.maximum(kc * kc - k * k, 0.0))
    return float(alpha) if alpha.ndim == 0 else alpha


# -- characteristic equations ------------------------------------------------


def tm_characteristic(k, a: float, b: float):
    """J0(ka)Y0(kb) - J0(kb)Y0(ka); zeros are the TM0n cutoffs."""
    k = np.asarray(k, dtype=float)
    return special.j0(k * a) * special.y0(k * b) - special.j0(k * b) * special.y0(k * a)


def te_characteristic(k, a: float, b: float):
    """J1'(ka)Y1'(kb) - J1'(kb)Y1'(ka); zeros are the TE1n cutoffs."""
    k = np.asarray(k, dtype=float)
    return _j1p(k * a) * _y1p(k * b) - _j1p(k * b) * _y1p(k * a)


def residual_scale(mode: Mode | str, k: float, a: LengthLike, b: LengthLike) -> float:
    """Sum of the magnitudes of the two cross-product terms at ``k``."""
    mode = Mode.parse(mode)
    a, b = meters(a), meters(b)
    if mode.family == "TM":
        p = special.j0(k * a) * special.y0(k * b)
        q = special.j0(k * b) * special.y0(k * a)
    else:
        p = _j1p(k * a) * _y1p(k * b)
        q = _j1p(k * b) * _y1p(k * a)
    return float(abs(p) + abs(q))


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    @property
    def root(self) -> float:
        return 0.5 * (self.lo + self.hi)


def scan_step(a: float, b: float) -> float:
    """Scan step: 1/100 of the smaller of the TM root spacing and the TE11 estimate."""
    return min(math.pi / (b - a), 2.0 / (a + b)) / SCAN_OVERSAMPLE


def bisect(func, lo: float, hi: float, rtol: float = BISECT_RTOL) -> RootBracket:
    """Shrink a sign-change bracket until hi - lo <= rtol * hi."""
    f_lo, f_hi = float(func(lo)), float(func(hi))
    if f_lo == 0:
        return RootBracket(lo, lo, 0.0, 0.0)
    if f_hi == 0:
        return RootBracket(hi, hi, 0.0, 0.0)
    if (f_lo > 0) == (f_hi > 0):
        raise ModeSolverError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > rtol * abs(hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = float(func(mid))
        if f_mid == 0:
            return RootBracket(mid, mid, 0.0, 0.0)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return RootBracket(lo, hi, f_lo, f_hi)


def find_roots(mode: Mode | str, a: LengthLike, b: LengthLike, count: int) -> list[RootBracket]:
    """First ``count`` roots of the mode family's characteristic equation.

    Returns the final bisection brackets, ascending. Raises ModeSolverError
    if fewer than ``count`` sign changes lie in the scan range.
    """
    mode = Mode.parse(mode)
    a, b = meters(a), meters(b)
    _check_annulus(a, b)
    func = tm_characteristic if mode.family == "TM" else te_characteristic
    f = lambda k: func(k, a, b)  # noqa: E731
    step = scan_step(a, b)
    n_total = int(math.ceil(SCAN_HARMONICS * math.pi / (b - a) / step))
    k_max = n_total * step
    roots: list[RootBracket] = []
    # scan in chunks so a thin annulus does not build millions of points
    # when only the first root is wanted
    start = 0
    prev_k, prev_v = step * 1e-3, float(f(step * 1e-3))
    while start < n_total and len(roots) < count:
        stop = min(start + SCAN_CHUNK, n_total)
        grid = np.arange(start + 1, stop + 1) * step
        with np.errstate(all="ignore"):
            vals = f(grid)
        ks = np.concatenate(([prev_k], grid))
        vs = np.concatenate(([prev_v], vals))
        ok = np.isfinite(vs)
        sign = np.sign(vs)
        idx = np.nonzero(ok[:-1] & ok[1:] & (sign[:-1] != 0) & (sign[:-1] * sign[1:] <= 0))[0]
        for i in idx:
            if len(roots) == count:
                break
            roots.append(bisect(f, float(ks[i]), float(ks[i + 1])))
        prev_k, prev_v = float(ks[-1]), float(vs[-1])
        start = stop
    if len(roots) < count:
        raise ModeSolverError(
            f"found {len(roots)} of {count} {mode.family} roots for a={a:.6g} m, "
            f"b={b:.6g} m below kc={k_max:.6g} rad/m"
        )
    return roots


@lru_cache(maxsize=1024)
def _kc_exact_cached(family: str, n: int, a: float, b: float) -> float:
    mode = Mode(family, n)
    # TE1n: the first root is TE11
    return find_roots(mode, a, b, n)[n - 1].root


def kc_exact(mode: Mode | str, a: LengthLike, b: LengthLike) -> float:
    """Cutoff wavenumber (rad/m) from the Bessel characteristic equation.

    TM0n returns the n-th positive root of the TM cross product, TE11 the
    first root of the derivative cross product. Never falls back to the
    closed form.
    """
    mode = Mode.parse(mode)
    a, b = meters(a), meters(b)
    _check_annulus(a, b)
    return _kc_exact_cached(mode.family, mode.n, a, b)


def mode_cutoff(
    mode: Mode | str, a: LengthLike, b: LengthLike, epsilon_r: float, method: Method | str = Method.EXACT
) -> ModeCutoff:
    mode = Mode.parse(mode)
    method = Method(method)
    if method is Method.APPROXIMATE:
        if mode != TE11:
            raise ValueError("the closed-form estimate applies to TE11 only")
        kc = kc_approx(a, b)
    else:
        kc = kc_exact(mode, a, b)
    return ModeCutoff(mode, kc, cutoff_frequency(kc, epsilon_r), method)
