"""Field file formats: CSV (x1,...,xn,re,im) and the PAXF v1 binary.

PAXF v1 layout (all little-endian):

    bytes 0-3   magic b"PAXF"
    uint32      format version (1)
    uint32      n, number of axes
    uint32      rule code (0 gauss-legendre, 1 trapezoid)
    uint32      flags (bit 0: complex values)
    per axis:   uint64 N_i, float64 alpha_i, float64 R_i
    payload:    N_1*...*N_n values, float64 or complex128, row-major

Writes are atomic (temp file + rename).
"""

import os
import struct
import tempfile

import numpy as np

from .errors import FieldFormatError
from .grids import Field, TensorGrid

__all__ = ["write_csv", "read_csv", "write_paxf", "read_paxf", "read_field", "write_field"]

_MAGIC = b"PAXF"
_RULE_CODES = {"gauss-legendre": 0, "trapezoid": 1}
_RULE_NAMES = {v: k for k, v in _RULE_CODES.items()}


def _atomic_write(path, write_fn, mode="wb"):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".paxtmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(field, path):
    grid = field.grid
    coords = np.stack([g.ravel() for g in np.broadcast_arrays(*grid.meshgrid())], axis=1)
    vals = np.asarray(field.values, dtype=complex)

    def emit(fh):
        header = ",".join(f"x{i + 1}" for i in range(grid.n)) + ",re,im\n"
        fh.write(header)
        for row, v in zip(coords, vals):
            cols = [repr(float(c)) for c in row]
            fh.write(",".join(cols + [repr(v.real), repr(v.imag)]) + "\n")

    _atomic_write(path, emit, mode="w")


def read_csv(path, grid):
    """Read a CSV field onto a known grid, verifying the coordinates."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except Exception as exc:
        raise FieldFormatError(f"cannot parse CSV field {path!r}: {exc}") from exc
    if data.shape[1] != grid.n + 2:
        raise FieldFormatError(
            f"CSV has {data.shape[1]} columns, expected {grid.n + 2} for n={grid.n}"
        )
    if data.shape[0] != grid.size:
        raise FieldFormatError(
            f"CSV has {data.shape[0]} rows, expected {grid.size} grid points"
        )
    coords = np.stack([g.ravel() for g in np.broadcast_arrays(*grid.meshgrid())], axis=1)
    if not np.allclose(data[:, : grid.n], coords, rtol=1e-9, atol=1e-12):
        raise FieldFormatError("CSV coordinates do not match the grid nodes")
    vals = data[:, grid.n] + 1j * data[:, grid.n + 1]
    if np.all(vals.imag == 0.0):
        vals = vals.real.copy()
    return Field(grid, vals)


def write_paxf(field, path):
    grid = field.grid
    is_complex = np.iscomplexobj(field.values)
    header = struct.pack(
        "<4sIIII",
        _MAGIC,
        1,
        grid.n,
        _RULE_CODES[grid.axes[0].rule],
        1 if is_complex else 0,
    )
    axis_blob = b"".join(
        struct.pack("<Qdd", ax.count, ax.order, ax.radius) for ax in grid.axes
    )
    payload = np.ascontiguousarray(
        field.values, dtype=np.complex128 if is_complex else np.float64
    )
    if not payload.dtype.isnative or payload.dtype.byteorder == ">":
        payload = payload.astype(payload.dtype.newbyteorder("<"))

    def emit(fh):
        fh.write(header)
        fh.write(axis_blob)
        fh.write(payload.tobytes())

    _atomic_write(path, emit)


def read_paxf(path):
    """Read a PAXF field; the grid is rebuilt from the header."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head_size = struct.calcsize("<4sIIII")
    if len(blob) < head_size:
        raise FieldFormatError(f"{path!r}: truncated PAXF header")
    magic, version, n, rule_code, flags = struct.unpack("<4sIIII", blob[:head_size])
    if magic != _MAGIC:
        raise FieldFormatError(f"{path!r}: bad magic {magic!r}")
    if version != 1:
        raise FieldFormatError(f"{path!r}: unsupported PAXF version {version}")
    if rule_code not in _RULE_NAMES:
        raise FieldFormatError(f"{path!r}: unknown rule code {rule_code}")
    if n < 1 or n > 16:
        raise FieldFormatError(f"{path!r}: implausible axis count {n}")
    axis_size = struct.calcsize("<Qdd")
    offset = head_size
    counts, orders, radii = [], [], []
    for _ in range(n):
        if len(blob) < offset + axis_size:
            raise FieldFormatError(f"{path!r}: truncated axis table")
        cnt, order, radius = struct.unpack("<Qdd", blob[offset : offset + axis_size])
        counts.append(int(cnt))
        orders.append(order)
        radii.append(radius)
        offset += axis_size
    try:
        grid = TensorGrid.build(orders, radii, counts, _RULE_NAMES[rule_code])
    except Exception as exc:
        raise FieldFormatError(f"{path!r}: invalid grid header: {exc}") from exc
    dtype = np.complex128 if flags & 1 else np.float64
    expected = grid.size * np.dtype(dtype).itemsize
    if len(blob) - offset != expected:
        raise FieldFormatError(
            f"{path!r}: payload is {len(blob) - offset} bytes, expected {expected}"
        )
    vals = np.frombuffer(blob, dtype=np.dtype(dtype).newbyteorder("<"), offset=offset)
    return Field(grid, vals.astype(dtype))


def write_field(field, path):
    if str(path).endswith(".csv"):
        write_csv(field, path)
    else:
        write_paxf(field, path)


def read_field(path, grid=None):
    """Dispatch on extension; CSV needs the grid, PAXF carries its own."""
    if str(path).endswith(".csv"):
        if grid is None:
            raise FieldFormatError("reading a CSV field requires the grid")
        return read_csv(path, grid)
    field = read_paxf(path)
    if grid is not None and not field.grid.matches(grid):
        raise FieldFormatError(f"{path!r}: stored grid does not match the config grid")
    return field
