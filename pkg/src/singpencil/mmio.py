"""Minimal Matrix Market reader/writer for dense pencil exchange.

Supports the v1 ``matrix`` object in ``array`` and ``coordinate`` formats
with ``real``, ``integer`` or ``complex`` fields and ``general`` symmetry.
Values are written with 17 significant digits, so doubles round-trip
exactly.  Parse errors carry the offending line number.
"""

from __future__ import annotations

import numpy as np

__all__ = ["MatrixMarketError", "read_matrix", "write_matrix", "loads_matrix", "dumps_matrix"]


class MatrixMarketError(ValueError):
    """Malformed Matrix Market content; ``line`` is 1-based."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_matrix(m: np.ndarray, fmt: str = "array", comments: list[str] | None = None) -> str:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("only 2-d matrices are supported")
    complex_field = np.iscomplexobj(m)
    field_name = "complex" if complex_field else "real"
    rows, cols = m.shape
    out = [f"%%MatrixMarket matrix {fmt} {field_name} general"]
    for c in comments or []:
        out.append(f"%{c}")
    if fmt == "array":
        out.append(f"{rows} {cols}")
        # array format is column major
        for j in range(cols):
            for i in range(rows):
                v = m[i, j]
                if complex_field:
                    out.append(f"{_fmt(v.real)} {_fmt(v.imag)}")
                else:
                    out.append(_fmt(v))
    elif fmt == "coordinate":
        idx = np.argwhere(m != 0)
        out.append(f"{rows} {cols} {len(idx)}")
        for i, j in idx:
            v = m[i, j]
            if complex_field:
                out.append(f"{i + 1} {j + 1} {_fmt(v.real)} {_fmt(v.imag)}")
            else:
                out.append(f"{i + 1} {j + 1} {_fmt(v)}")
    else:
        raise ValueError(f"unknown format {fmt!r}; expected 'array' or 'coordinate'")
    return "\n".join(out) + "\n"


def write_matrix(path, m: np.ndarray, fmt: str = "array", comments: list[str] | None = None) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_matrix(m, fmt, comments))


def _parse_floats(parts: list[str], lineno: int, what: str) -> list[float]:
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise MatrixMarketError(f"cannot parse {what} from {' '.join(parts)!r}", lineno) from None


def loads_matrix(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        raise MatrixMarketError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1)
    _, obj, fmt, field_name, symmetry = header
    if obj.lower() != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1)
    if fmt not in ("array", "coordinate"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1)
    if field_name not in ("real", "integer", "complex"):
        raise MatrixMarketError(f"unsupported field {field_name!r}", 1)
    if symmetry != "general":
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)
    complex_field = field_name == "complex"
    vals_per_entry = 2 if complex_field else 1

    body = [
        (i + 1, ln.strip()) for i, ln in enumerate(lines) if i > 0 and ln.strip() and not ln.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixMarketError("missing size line", len(lines))
    size_lineno, size_line = body[0]
    sizes = size_line.split()
    entries = body[1:]

    if fmt == "array":
        if len(sizes) != 2:
            raise MatrixMarketError("array size line must be '<rows> <cols>'", size_lineno)
        try:
            rows, cols = int(sizes[0]), int(sizes[1])
        except ValueError:
            raise MatrixMarketError(f"bad size line {size_line!r}", size_lineno) from None
        if len(entries) != rows * cols:
            raise MatrixMarketError(
                f"expected {rows * cols} entries, found {len(entries)}",
                entries[-1][0] if entries else size_lineno,
            )
        m = np.zeros((rows, cols), dtype=np.complex128 if complex_field else np.float64)
        pos = 0
        for j in range(cols):
            for i in range(rows):
                lineno, ln = entries[pos]
                parts = ln.split()
                if len(parts) != vals_per_entry:
                    raise MatrixMarketError(
                        f"expected {vals_per_entry} value(s) per entry, found {len(parts)}", lineno
                    )
                vals = _parse_floats(parts, lineno, "entry")
                m[i, j] = complex(vals[0], vals[1]) if complex_field else vals[0]
                pos += 1
        return m

    if len(sizes) != 3:
        raise MatrixMarketError("coordinate size line must be '<rows> <cols> <nnz>'", size_lineno)
    try:
        rows, cols, nnz = (int(s) for s in sizes)
    except ValueError:
        raise MatrixMarketError(f"bad size line {size_line!r}", size_lineno) from None
    if len(entries) != nnz:
        raise MatrixMarketError(
            f"expected {nnz} entries, found {len(entries)}", entries[-1][0] if entries else size_lineno
        )
    m = np.zeros((rows, cols), dtype=np.complex128 if complex_field else np.float64)
    for lineno, ln in entries:
        parts = ln.split()
        if len(parts) != 2 + vals_per_entry:
            raise MatrixMarketError(
                f"expected 'row col' plus {vals_per_entry} value(s), found {len(parts)} fields", lineno
            )
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MatrixMarketError(f"bad indices {parts[0]!r} {parts[1]!r}", lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MatrixMarketError(f"index ({i}, {j}) outside {rows} x {cols}", lineno)
        vals = _parse_floats(parts[2:], lineno, "value")
        m[i - 1, j - 1] = complex(vals[0], vals[1]) if complex_field else vals[0]
    return m


def read_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        return loads_matrix(fh.read())
