"""Step-response TDR from a reflection spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .cascade import FrequencyResponse

DEFAULT_RISE_TIME = 15e-12
DEFAULT_KAISER_BETA = 6.0
ZERO_PAD = 8
# 10-90 % rise time of a Gaussian step is 2*erfinv(0.8)*sqrt(2)*sigma
_RISE_PER_SIGMA = 2.0 * 1.2815515655446004


class TdrError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Spectral window: ``kind`` is "kaiser" or "none"."""

    kind: str = "kaiser"
    beta: float = DEFAULT_KAISER_BETA

    @classmethod
    def parse(cls, text: str) -> Window:
        """Parse ``kaiser:BETA``, ``kaiser`` or ``none``."""
        t = text.strip().lower()
        if t == "none":
            return cls("none", 0.0)
        if t == "kaiser":
            return cls()
        if t.startswith("kaiser:"):
            try:
                beta = float(t.split(":", 1)[1])
            except ValueError:
                raise TdrError(f"bad kaiser beta in {text!r}") from None
            if not (math.isfinite(beta) and beta >= 0):
                raise TdrError(f"bad kaiser beta in {text!r}")
            return cls("kaiser", beta)
        raise TdrError(f"unknown window {text!r}")

    def __str__(self) -> str:
        return "none" if self.kind == "none" else f"kaiser:{self.beta:g}"

    def taper(self, n: int) -> np.ndarray:
        """One-sided taper, 1 at DC and falling toward the top bin."""
        if self.kind == "none":
            return np.ones(n)
        return np.kaiser(2 * n - 1, self.beta)[n - 1 :]


@dataclass(frozen=True)
class TdrTrace:
    t: np.ndarray  # s
    rho: np.ndarray
    z: np.ndarray  # ohm; +inf where |rho| >= 1
    z_ref: float
    rise_time: float
    window: Window

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def metadata(self) -> dict:
        return {
            "rise_time_ps": self.rise_time * 1e12,
            "window": str(self.window),
            "z_ref_ohm": self.z_ref,
            "single_ended": True,
        }


def rho_to_z(rho, z_ref: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = z_ref * (1.0 + rho) / (1.0 - rho)
    return np.where(np.abs(rho) < 1.0, z, np.inf)


def dc_anchored_s11(response: FrequencyResponse) -> tuple[np.ndarray, float]:
    """S11 on the grid k*df, k = 0..N, with DC filled in if the sweep lacks it.

    A sweep whose start is not a multiple of its step is resampled by linear
    interpolation. The missing DC sample is Re(S11) at the lowest frequency.
    """
    f, s11 = response.f, response.s11
    if len(f) < 2:
        raise TdrError("need at least two frequency points")
    df = (f[-1] - f[0]) / (len(f) - 1)
    if f[0] == 0:
        return s11.copy(), df
    k0 = f[0] / df
    dc = complex(s11[0].real, 0.0)
    if abs(k0 - round(k0)) < 1e-6 and round(k0) >= 1:
        k0 = int(round(k0))
        grid = np.arange(k0 + len(f)) * df
        head = np.interp(grid[:k0], [0.0, f[0]], [0.0, 1.0])
        lead = dc + head * (s11[0] - dc)
        return np.concatenate([lead, s11]), df
    n = int(math.floor(f[-1] / df + 1e-9)) + 1
    grid = np.arange(n) * df
    ff = np.concatenate([[0.0], f])
    ss = np.concatenate([[dc], s11])
    return np.interp(grid, ff, ss.real) + 1j * np.interp(grid, ff, ss.imag), df


def s11_to_tdr(
    response: FrequencyResponse,
    rise_time: float = DEFAULT_RISE_TIME,
    window: Window | str = Window(),
    pre_time: float | None = None,
) -> TdrTrace:
    """Step reflection and impedance profile from S11.

    The spectrum is windowed, shaped by a Gaussian of the requested 10-90 %
    rise time, inverse transformed with 8x zero padding and integrated.
    ``pre_time`` (default four rise times) of negative time is kept so the
    symmetric step edge at t = 0 is not wrapped.
    """
    if not rise_time > 0:
        raise TdrError(f"rise_time must be > 0, got {rise_time!r}")
    window = Window.parse(window) if isinstance(window, str) else window
    spec, df = dc_anchored_s11(response)
    n = len(spec)
    sigma = rise_time / _RISE_PER_SIGMA
    fk = np.arange(n) * df
    shaped = spec * window.taper(n) * np.exp(-0.5 * (2.0 * np.pi * fk * sigma) ** 2)

    n_fft = ZERO_PAD * 2 * (n - 1)
    impulse = np.fft.irfft(shaped, n_fft)
    dt = 1.0 / (n_fft * df)
    pre = 4.0 * rise_time if pre_time is None else pre_time
    n_pre = min(int(math.ceil(pre / dt)), n_fft // 4)
    impulse = np.roll(impulse, n_pre)
    rho = np.cumsum(impulse)
    t = (np.arange(n_fft) - n_pre) * dt
    return TdrTrace(t, rho, rho_to_z(rho, response.z_ref), response.z_ref, rise_time, window)


def time_shifted(response: FrequencyResponse, delay: float) -> FrequencyResponse:
    """Same response with an extra pure delay of ``delay`` seconds on S11."""
    phase = np.exp(-2j * np.pi * response.f * delay)
    s = response.s.copy()
    s[:, 0, 0] *= phase
    return FrequencyResponse(response.f, s, response.z_ref)


@dataclass(frozen=True)
class TraceComparison:
    max_dz: float  # ohm, over the aligned overlap
    offset: float  # s, positive when ``b`` lags ``a``
    overlap: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "max_dz_ohm": self.max_dz,
            "offset_ps": self.offset * 1e12,
            "overlap_ps": [self.overlap[0] * 1e12, self.overlap[1] * 1e12],
        }


def compare_traces(a: TdrTrace, b: TdrTrace) -> TraceComparison:
    """Align ``b`` to ``a`` by cross-correlating d(rho)/dt and report the deviation.

    ``b`` is resampled onto ``a``'s time step over the common span first.
    """
    if not math.isclose(a.rise_time, b.rise_time, rel_tol=1e-9):
        raise TdrError("traces must share a rise time")
    lo, hi = max(a.t[0], b.t[0]), min(a.t[-1], b.t[-1])
    if not hi > lo:
        raise TdrError("trace time spans do not overlap")
    dt = a.dt
    t = a.t[(a.t >= lo) & (a.t <= hi)]
    if len(t) < 2:
        raise TdrError("trace time spans do not overlap")
    ra = np.interp(t, a.t, a.rho)
    rb = np.interp(t, b.t, b.rho)
    da, db = np.diff(ra), np.diff(rb)
    xc = signal.correlate(db, da, mode="full", method="fft")
    lag = int(np.argmax(xc)) - (len(da) - 1)
    if np.allclose(da, 0) or np.allclose(db, 0):
        lag = 0

    if lag >= 0:
        za, zb = rho_to_z(ra[: len(ra) - lag], a.z_ref), rho_to_z(rb[lag:], b.z_ref)
        tt = t[: len(t) - lag]
    else:
        za, zb = rho_to_z(ra[-lag:], a.z_ref), rho_to_z(rb[: len(rb) + lag], b.z_ref)
        tt = t[-lag:]
    ok = np.isfinite(za) & np.isfinite(zb)
    max_dz = float(np.max(np.abs(za[ok] - zb[ok]))) if ok.any() else float("nan")
    return TraceComparison(max_dz, lag * dt, (float(tt[0]), float(tt[-1])))


def check_time_span(response: FrequencyResponse, delay: float, factor: float = 4.0) -> None:
    """Raise if the unaliased time span 1/df is shorter than ``factor`` x ``delay``."""
    f = response.f
    df = (f[-1] - f[0]) / (len(f) - 1)
    if 1.0 / df < factor * delay:
        raise TdrError(
            f"time span {1e12 / df:.4g} ps is shorter than {factor:g} x the "
            f"{delay * 1e12:.4g} ps electrical delay; use a finer frequency step"
        )
