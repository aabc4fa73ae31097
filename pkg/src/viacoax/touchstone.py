"""Touchstone v1 reader/writer for 1- and 2-port S-parameter files."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cascade import FrequencyResponse

UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
FORMATS = ("MA", "DB", "RI")
DEFAULT_DIGITS = 12


class TouchstoneError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class OptionLine:
    unit: str = "GHZ"
    parameter: str = "S"
    format: str = "MA"
    z_ref: float = 50.0

    def __str__(self) -> str:
        unit = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}[self.unit]
        return f"# {unit} {self.parameter} {self.format} R {self.z_ref:.{DEFAULT_DIGITS}g}"


@dataclass(frozen=True)
class TouchstoneDocument:
    options: OptionLine
    ports: int
    f: np.ndarray  # Hz
    s: np.ndarray  # (n, ports, ports) complex
    comments: tuple[str, ...] = field(default=())

    def to_response(self) -> FrequencyResponse:
        return FrequencyResponse(self.f, self.s, self.options.z_ref)


def _parse_options(tokens: list[str], lineno: int) -> OptionLine:
    unit, param, fmt, z = "GHZ", "S", "MA", 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in UNITS:
            unit = tok
        elif tok in FORMATS:
            fmt = tok
        elif tok == "S":
            param = tok
        elif tok in ("Y", "Z", "H", "G"):
            raise TouchstoneError(f"only S parameters are supported, got {tokens[i]!r}", lineno)
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneError("option 'R' needs a value", lineno)
            try:
                z = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneError(f"bad reference impedance {tokens[i + 1]!r}", lineno) from None
            if not (math.isfinite(z) and z > 0):
                raise TouchstoneError(f"bad reference impedance {tokens[i + 1]!r}", lineno)
            i += 1
        else:
            raise TouchstoneError(f"unknown option token {tokens[i]!r}", lineno)
        i += 1
    return OptionLine(unit, param, fmt, z)


def _to_complex(x: np.ndarray, y: np.ndarray, fmt: str) -> np.ndarray:
    if fmt == "RI":
        return x + 1j * y
    mag = x if fmt == "MA" else 10.0 ** (x / 20.0)
    return mag * np.exp(1j * np.deg2rad(y))


def _from_complex(s: np.ndarray, fmt: str) -> tuple[np.ndarray, np.ndarray]:
    if fmt == "RI":
        return s.real, s.imag
    ang = np.rad2deg(np.angle(s))
    if fmt == "MA":
        return np.abs(s), ang
    # floor keeps exact zeros finite in the file (-600 dB)
    return 20.0 * np.log10(np.maximum(np.abs(s), 1e-30)), ang


def ports_from_name(path: str | Path) -> int:
    m = re.search(r"\.s(\d+)p$", str(path), re.IGNORECASE)
    if not m:
        raise TouchstoneError(f"cannot infer port count from file name {str(path)!r}")
    n = int(m.group(1))
    if n not in (1, 2):
        raise TouchstoneError(f"unsupported port count {n} (only .s1p and .s2p)")
    return n


def parse(text: str | bytes, ports: int | None = None) -> TouchstoneDocument:
    """Parse Touchstone v1 text.

    ``ports`` normally comes from the file extension; when omitted it is
    inferred from the arity of the first data row. Any malformed input
    raises TouchstoneError.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError:
            raise TouchstoneError("file is not valid UTF-8 text") from None
    if ports is not None and ports not in (1, 2):
        raise TouchstoneError(f"unsupported port count {ports}")

    options: OptionLine | None = None
    comments: list[str] = []
    rows: list[tuple[int, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("!")
        if _:
            comments.append(comment.strip())
        body = body.strip()
        if not body:
            continue
        if body.startswith("["):
            raise TouchstoneError("Touchstone v2 keywords are not supported (v1 only)", lineno)
        if body.startswith("#"):
            if options is None:
                options = _parse_options(body[1:].split(), lineno)
            continue
        values = []
        for tok in body.split():
            try:
                v = float(tok)
            except ValueError:
                raise TouchstoneError(f"not a number: {tok[:40]!r}", lineno) from None
            if not math.isfinite(v):
                raise TouchstoneError(f"non-finite value {tok[:40]!r}", lineno)
            values.append(v)
        rows.append((lineno, values))

    if not rows:
        raise TouchstoneError("no data rows")
    options = options or OptionLine()
    if ports is None:
        arity = len(rows[0][1])
        ports = {3: 1, 9: 2}.get(arity)
        if ports is None:
            raise TouchstoneError(f"cannot infer port count from row arity {arity}", rows[0][0])
    expected = 1 + 2 * ports * ports
    for lineno, values in rows:
        if len(values) != expected:
            raise TouchstoneError(
                f"expected {expected} values for a {ports}-port row, got {len(values)}", lineno
            )

    data = np.array([v for _, v in rows], dtype=float)
    with np.errstate(all="ignore"):
        f = data[:, 0] * UNITS[options.unit]
        pairs = _to_complex(data[:, 1::2], data[:, 2::2], options.format)
    if not np.all(np.isfinite(f)):
        raise TouchstoneError("frequency overflows", rows[int(np.argmin(np.isfinite(f)))][0])
    if not np.all(np.isfinite(pairs)):
        raise TouchstoneError("parameter value overflows")
    bad = np.nonzero(np.diff(f) <= 0)[0]
    if len(bad):
        raise TouchstoneError("frequencies must be strictly ascending", rows[bad[0] + 1][0])
    if f[0] < 0:
        raise TouchstoneError("negative frequency", rows[0][0])
    if ports == 1:
        s = pairs.reshape(-1, 1, 1)
    else:
        # v1 two-port order: S11 S21 S12 S22
        s = np.empty((len(f), 2, 2), dtype=complex)
        s[:, 0, 0], s[:, 1, 0], s[:, 0, 1], s[:, 1, 1] = pairs.T
    return TouchstoneDocument(options, ports, f, s, tuple(comments))


def read(path: str | Path) -> TouchstoneDocument:
    ports = ports_from_name(path)
    with open(path, "rb") as fh:
        return parse(fh.read(), ports)


def write(
    response: FrequencyResponse,
    format: str = "RI",
    unit: str = "GHz",
    comments: tuple[str, ...] = (),
    digits: int = DEFAULT_DIGITS,
) -> str:
    """Serialize a response as Touchstone v1 text, one frequency per line."""
    fmt = format.upper()
    if fmt not in FORMATS:
        raise TouchstoneError(f"unknown format {format!r}")
    u = unit.upper()
    if u not in UNITS:
        raise TouchstoneError(f"unknown frequency unit {unit!r}")
    if response.ports not in (1, 2):
        raise TouchstoneError(f"unsupported port count {response.ports}")

    s = response.s
    if response.ports == 1:
        cols = [s[:, 0, 0]]
    else:
        cols = [s[:, 0, 0], s[:, 1, 0], s[:, 0, 1], s[:, 1, 1]]
    lines = [f"! {c}" for c in comments]
    lines.append(str(OptionLine(u, "S", fmt, response.z_ref)))
    parts = [_from_complex(c, fmt) for c in cols]
    num = lambda v: f"{v:.{digits}g}"  # noqa: E731
    scale = UNITS[u]
    for i, fi in enumerate(response.f):
        fields = [num(fi / scale)]
        for x, y in parts:
            fields += [num(x[i]), num(y[i])]
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def save(path: str | Path, response: FrequencyResponse, format: str = "RI", **kw) -> None:
    if ports_from_name(path) != response.ports:
        raise TouchstoneError(f"{path}: extension does not match a {response.ports}-port response")
    Path(path).write_text(write(response, format, **kw), encoding="utf-8")
