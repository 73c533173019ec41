"""PFLD periodic field files.

A text header, one ``key=value`` per line after the magic ``PFLD1``,
terminated by a blank line, followed by little-endian float64 samples::

    PFLD1
    dim=3
    shape=32,32,32
    components=3
    times=16
    dt=0.0625
    dtype=f64le
    layout=t-major,component,row-major

Sample ``k`` of the time axis is at ``t = k * dt``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import FormatMismatch, ParseError

__all__ = ["PeriodicField", "write_pfld", "read_pfld", "MAGIC"]

MAGIC = "PFLD1"
_DTYPE = "f64le"
_LAYOUT = "t-major,component,row-major"
_KEYS = ("dim", "shape", "components", "times", "dt", "dtype", "layout")


@dataclass(frozen=True)
class PeriodicField:
    """Samples on the uniform grid of ``[0,1]^dim``; ``data`` has shape
    ``(times, components, N, ..., N)``."""

    data: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        d = np.ascontiguousarray(self.data, dtype=np.float64)
        if d.ndim not in (4, 5):
            raise FormatMismatch("data must have shape (T, m, N, N) or (T, m, N, N, N)")
        if len(set(d.shape[2:])) != 1:
            raise FormatMismatch("grid must have the same size along every axis")
        n = d.shape[2]
        if n < 2 or n & (n - 1):
            raise FormatMismatch("grid size must be a power of two")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def dim(self) -> int:
        return self.data.ndim - 2

    @property
    def n(self) -> int:
        return self.data.shape[2]

    @property
    def components(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> int:
        return self.data.shape[0]

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.times) * self.dt

    def same_grid(self, other: "PeriodicField") -> bool:
        return (self.dim == other.dim and self.n == other.n and self.times == other.times
                and self.dt == other.dt)


def _header(f: PeriodicField) -> str:
    lines = [MAGIC, f"dim={f.dim}", "shape=" + ",".join(str(s) for s in f.data.shape[2:]),
             f"components={f.components}", f"times={f.times}", f"dt={f.dt!r}",
             f"dtype={_DTYPE}", f"layout={_LAYOUT}", "", ""]
    return "\n".join(lines)


def write_pfld(path, field: PeriodicField) -> None:
    with open(path, "wb") as fh:
        fh.write(_header(field).encode("ascii"))
        fh.write(field.data.astype("<f8", copy=False).tobytes(order="C"))


def read_pfld(path) -> PeriodicField:
    """Parse a PFLD file; raises :class:`ParseError` on any malformed input."""
    with open(path, "rb") as fh:
        raw = fh.read()
    end = raw.find(b"\n\n")
    if end < 0:
        raise ParseError(f"{os.fspath(path)}: missing blank line after header")
    try:
        lines = raw[:end].decode("ascii").split("\n")
    except UnicodeDecodeError as err:
        raise ParseError(f"{os.fspath(path)}: header is not ASCII") from err
    if lines[0] != MAGIC:
        raise ParseError(f"{os.fspath(path)}: bad magic {lines[0]!r}")
    meta = {}
    for line in lines[1:]:
        key, sep, value = line.partition("=")
        if not sep or key not in _KEYS or key in meta:
            raise ParseError(f"{os.fspath(path)}: bad header line {line!r}")
        meta[key] = value
    missing = [k for k in _KEYS if k not in meta]
    if missing:
        raise ParseError(f"{os.fspath(path)}: missing header keys {missing}")
    if meta["dtype"] != _DTYPE or meta["layout"] != _LAYOUT:
        raise ParseError(f"{os.fspath(path)}: unsupported dtype or layout")
    try:
        dim = int(meta["dim"])
        shape = tuple(int(s) for s in meta["shape"].split(","))
        m = int(meta["components"])
        T = int(meta["times"])
        dt = float(meta["dt"])
    except ValueError as err:
        raise ParseError(f"{os.fspath(path)}: {err}") from err
    if dim not in (2, 3) or len(shape) != dim or m < 1 or T < 1:
        raise ParseError(f"{os.fspath(path)}: inconsistent header")
    body = raw[end + 2:]
    count = T * m * int(np.prod(shape))
    if len(body) != 8 * count:
        raise ParseError(f"{os.fspath(path)}: expected {8 * count} data bytes, found {len(body)}")
    data = np.frombuffer(body, dtype="<f8").reshape((T, m) + shape)
    try:
        return PeriodicField(data.astype(np.float64), dt)
    except FormatMismatch as err:
        raise ParseError(f"{os.fspath(path)}: {err}") from err
