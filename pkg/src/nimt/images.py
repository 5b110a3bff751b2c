"""Grayscale image ingestion: PGM (P2/P5) and CSV grids."""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .function_space import GridFunction


class IngestError(ValueError):
    pass


class _HeaderReader:
    """Tokenizer for the whitespace/comment separated PGM header."""

    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def _skip(self):
        d = self.data
        while self.pos < len(d):
            ch = d[self.pos : self.pos + 1]
            if ch.isspace():
                self.pos += 1
            elif ch == b"#":
                while self.pos < len(d) and d[self.pos : self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            else:
                break

    def token(self, what: str) -> tuple:
        self._skip()
        start = self.pos
        d = self.data
        while self.pos < len(d) and not d[self.pos : self.pos + 1].isspace() and d[self.pos : self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise IngestError(f"{self.path}: missing {what} at byte {start}")
        return d[start : self.pos], start

    def integer(self, what: str) -> int:
        tok, at = self.token(what)
        try:
            return int(tok)
        except ValueError:
            raise IngestError(f"{self.path}: malformed {what} {tok!r} at byte {at}") from None


def _read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    rd = _HeaderReader(data, path)
    magic, _ = rd.token("magic number")
    if magic not in (b"P2", b"P5"):
        raise IngestError(f"{path}: unsupported magic {magic.decode('latin-1')!r} at byte 0")
    width = rd.integer("width")
    height = rd.integer("height")
    if width <= 0 or height <= 0:
        raise IngestError(f"{path}: nonpositive size {width}x{height} in header")
    maxval_at = rd.pos
    maxval = rd.integer("maxval")
    if maxval <= 0 or maxval > 65535:
        raise IngestError(f"{path}: maxval {maxval} out of range (1..65535) near byte {maxval_at}")
    n = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        start = rd.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        if len(data) - start < need:
            raise IngestError(
                f"{path}: raster truncated, need {need} bytes from byte {start}, have {len(data) - start}"
            )
        raw = np.frombuffer(data, dtype=dtype, count=n, offset=start).astype(float)
    else:
        vals = []
        for _ in range(n):
            vals.append(rd.integer("pixel value"))
        raw = np.array(vals, dtype=float)
    if raw.max(initial=0) > maxval:
        raise IngestError(f"{path}: pixel value exceeds maxval {maxval}")
    if raw.min(initial=0) < 0:
        raise IngestError(f"{path}: negative pixel value")
    return raw.reshape(height, width) / maxval


def _read_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise IngestError(f"{path}: line {lineno}: {exc}") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise IngestError(f"{path}: line {lineno}: ragged row of {len(vals)} values, expected {width}")
            if any(not (0.0 <= v <= 1.0) for v in vals):
                raise IngestError(f"{path}: line {lineno}: values must lie in [0, 1]")
            rows.append(vals)
    if not rows:
        raise IngestError(f"{path}: empty grid")
    return np.array(rows)


def load_grayscale_image(path) -> GridFunction:
    """Load a PGM (P2 or P5) or CSV grid as gray levels in [0, 1]."""
    path = os.fspath(path)
    if path.lower().endswith(".csv"):
        values = _read_csv(path)
    else:
        values = _read_pgm(path)
    return GridFunction(values)


def write_pgm(path, values, maxval: int = 255, binary: bool = False) -> None:
    """Write gray levels in [0, 1] as a PGM file."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("image values must be 2-d")
    q = np.rint(np.clip(values, 0.0, 1.0) * maxval).astype(int)
    h, w = q.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n".encode("ascii")
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        Path(path).write_bytes(header + q.astype(dtype).tobytes())
    else:
        lines = "\n".join(" ".join(str(v) for v in row) for row in q)
        Path(path).write_bytes(header + lines.encode("ascii") + b"\n")
