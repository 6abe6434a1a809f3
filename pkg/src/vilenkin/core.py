"""Bounded Vilenkin groups at finite resolution.

A point of G_m is truncated to its first N digits, so G_m is modelled by the
M_N cells I_N(x).  Cells are stored little-endian: cell ``i`` has digits
``x_j = (i // M_j) % m_j`` (digit 0 varies fastest).
"""
from __future__ import annotations

import csv
import os
import sys
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

DEFAULT_MAX_CELLS = 2**16
MAX_CELLS_ENV = "VILENKIN_MAX_CELLS"
DEFAULT_MAX_RADIX = 64

Number = Union[int, float, complex]


def max_cells() -> int:
    """Cell budget for a base; overridable through ``VILENKIN_MAX_CELLS``."""
    raw = os.environ.get(MAX_CELLS_ENV)
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{MAX_CELLS_ENV} must be an integer, got {raw!r}") from exc
    if cap < 2:
        raise ValueError(f"{MAX_CELLS_ENV} must be at least 2")
    return cap


@dataclass(frozen=True)
class VilenkinBase:
    """Radix sequence ``m`` together with the generated numbers ``M_0..M_N``.

    ``m`` may be longer than ``N``; the extra radices only feed
    :meth:`generated`, which is what the condition checkers use for indices
    that do not need an allocated grid.
    """

    m: tuple[int, ...]
    N: int
    M: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        M = [1]
        for k in range(self.N):
            M.append(M[-1] * self.m[k])
        object.__setattr__(self, "M", tuple(M))

    @property
    def size(self) -> int:
        return self.M[self.N]

    @property
    def radices(self) -> tuple[int, ...]:
        return self.m[: self.N]

    def generated(self, j: int) -> int:
        """M_j, also for ``N < j <= len(m)``."""
        if j < 0 or j > len(self.m):
            raise ValueError(f"M_{j} needs {j} radices, base has {len(self.m)}")
        out = 1
        for r in self.m[:j]:
            out *= r
        return out

    @cached_property
    def digit_table(self) -> np.ndarray:
        """``(M_N, N)`` int array; row ``i`` holds the digits of cell ``i``."""
        idx = np.arange(self.size)
        cols = [(idx // self.M[j]) % self.m[j] for j in range(self.N)]
        if not cols:
            return np.zeros((self.size, 0), dtype=np.int64)
        return np.stack(cols, axis=1).astype(np.int64)

    def roots(self, k: int) -> np.ndarray:
        """The m_k-th roots of unity exp(2*pi*i*j/m_k), j = 0..m_k-1."""
        return _roots_of_unity(self.m[k])

    @property
    def grid_shape(self) -> tuple[int, ...]:
        # C-order reshape puts digit 0 on the last axis
        return tuple(reversed(self.radices))

    def axis_of(self, k: int) -> int:
        """Axis of digit ``k`` in an array reshaped to ``grid_shape``."""
        return self.N - 1 - k

    def describe(self) -> dict:
        return {"m": list(self.radices), "N": self.N, "M_N": self.size}


_ROOTS_CACHE: dict[int, np.ndarray] = {}


def _roots_of_unity(m: int) -> np.ndarray:
    tab = _ROOTS_CACHE.get(m)
    if tab is None:
        j = np.arange(m)
        tab = np.exp(2j * np.pi * j / m)
        # pin the exactly representable roots
        tab[0] = 1.0
        if m % 2 == 0:
            tab[m // 2] = -1.0
        if m % 4 == 0:
            tab[m // 4] = 1j
            tab[3 * m // 4] = -1j
        tab.setflags(write=False)
        _ROOTS_CACHE[m] = tab
    return tab


def build_base(
    m: Sequence[int],
    N: int,
    *,
    cap: int | None = None,
    max_radix: int = DEFAULT_MAX_RADIX,
) -> VilenkinBase:
    """Validate a radix list and build the base at resolution ``N``.

    >>> build_base((2, 3, 4), 3).M
    (1, 2, 6, 24)
    """
    radices = tuple(int(r) for r in m)
    if N < 1:
        raise ValueError("resolution N must be at least 1")
    if len(radices) < N:
        raise ValueError(f"need at least N={N} radices, got {len(radices)}")
    for k, r in enumerate(radices):
        if r < 2:
            raise ValueError(f"radix m_{k}={r} is less than 2")
        if r > max_radix:
            raise ValueError(f"radix m_{k}={r} exceeds the declared bound {max_radix}")
    cap = max_cells() if cap is None else cap
    size = 1
    for r in radices[:N]:
        size *= r
        if size > cap:
            raise OverflowError(f"M_N exceeds the cell cap {cap}")
    return VilenkinBase(radices, N)


def walsh_base(N: int, **kw) -> VilenkinBase:
    return build_base((2,) * N, N, **kw)


def periodic_base(pattern: Sequence[int], N: int, **kw) -> VilenkinBase:
    """Base whose radices repeat ``pattern``, e.g. (2, 3) -> 2, 3, 2, 3, ..."""
    pattern = tuple(pattern)
    if not pattern:
        raise ValueError("empty radix pattern")
    length = max(N, kw.pop("length", N))
    m = tuple(pattern[k % len(pattern)] for k in range(length))
    return build_base(m, N, **kw)


def to_digits(i: int, base: VilenkinBase) -> tuple[int, ...]:
    if not 0 <= i < base.size:
        raise ValueError(f"index {i} outside [0, {base.size})")
    return tuple((i // base.M[j]) % base.m[j] for j in range(base.N))


def from_digits(digits: Sequence[int], base: VilenkinBase) -> int:
    if len(digits) != base.N:
        raise ValueError(f"expected {base.N} digits, got {len(digits)}")
    out = 0
    for j, d in enumerate(digits):
        if not 0 <= d < base.m[j]:
            raise ValueError(f"digit x_{j}={d} outside Z_{base.m[j]}")
        out += d * base.M[j]
    return out


def unit_point(n: int, base: VilenkinBase) -> int:
    """Linear index of e_n (digit n equal to 1, all others 0)."""
    if not 0 <= n < base.N:
        raise ValueError(f"coordinate {n} outside [0, {base.N})")
    return base.M[n]


@dataclass(frozen=True, eq=False)
class CellFunction:
    """A function on G_m that is constant on every rank-N cell."""

    base: VilenkinBase
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.base.size,):
            raise ValueError(f"expected {self.base.size} cell values, got shape {vals.shape}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, base: VilenkinBase, c: Number) -> "CellFunction":
        return cls(base, np.full(base.size, c, dtype=np.complex128))

    @classmethod
    def zeros(cls, base: VilenkinBase) -> "CellFunction":
        return cls.constant(base, 0.0)

    def _check(self, other: "CellFunction") -> None:
        if other.base != self.base:
            raise ValueError("cell functions live on different bases")

    def _coerce(self, other):
        if isinstance(other, CellFunction):
            self._check(other)
            return other.values
        if isinstance(other, np.ndarray):
            return NotImplemented
        return other

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CellFunction(self.base, self.values + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CellFunction(self.base, self.values - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CellFunction(self.base, o - self.values)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CellFunction(self.base, self.values * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CellFunction(self.base, self.values / o)

    def __neg__(self) -> "CellFunction":
        return CellFunction(self.base, -self.values)

    def __abs__(self) -> "CellFunction":
        return CellFunction(self.base, np.abs(self.values))

    def conj(self) -> "CellFunction":
        return CellFunction(self.base, np.conj(self.values))

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    def sup_distance(self, other: "CellFunction") -> float:
        self._check(other)
        return float(np.max(np.abs(self.values - other.values)))

    def to_csv(self, path: str | Path | None = None, stream=None) -> None:
        write_rows(
            ("cell", "re", "im"),
            ((i, v.real, v.imag) for i, v in enumerate(self.values)),
            path=path,
            stream=stream,
        )

    @classmethod
    def from_csv(cls, base: VilenkinBase, path: str | Path) -> "CellFunction":
        idx, vals = read_indexed_complex(path, "cell")
        if sorted(idx) != list(range(base.size)):
            raise ValueError(f"{path}: expected cells 0..{base.size - 1}")
        out = np.zeros(base.size, dtype=np.complex128)
        out[idx] = vals
        return cls(base, out)


def haar_integral(f: CellFunction) -> complex:
    """Integral against the normalized Haar measure (exact for cell functions)."""
    return complex(np.mean(f.values))


def _anchor_digits(anchor: int | Sequence[int], base: VilenkinBase) -> tuple[int, ...]:
    if isinstance(anchor, (int, np.integer)):
        return to_digits(int(anchor), base)
    digits = tuple(int(d) for d in anchor)
    from_digits(digits, base)
    return digits


def interval_mask(base: VilenkinBase, n: int, anchor: int | Sequence[int] = 0) -> np.ndarray:
    """Boolean mask of the cells in I_n(anchor)."""
    if not 0 <= n <= base.N:
        raise ValueError(f"rank {n} outside [0, {base.N}]")
    digits = _anchor_digits(anchor, base)
    table = base.digit_table
    mask = np.ones(base.size, dtype=bool)
    for j in range(n):
        mask &= table[:, j] == digits[j]
    return mask


def interval_indicator(base: VilenkinBase, n: int, anchor: int | Sequence[int] = 0) -> CellFunction:
    return CellFunction(base, interval_mask(base, n, anchor).astype(np.complex128))


def annulus_mask(base: VilenkinBase, n: int) -> np.ndarray:
    """Cells of I_n(0) \\ I_{n+1}(0); requires n < N."""
    if not 0 <= n < base.N:
        raise ValueError(f"annulus rank {n} outside [0, {base.N})")
    return interval_mask(base, n) & ~interval_mask(base, n + 1)


# ---- CSV helpers shared by the CLI ----

def fmt(x: float) -> str:
    return f"{x:.17e}"


def write_rows(header: Sequence[str], rows: Iterable[Sequence], *, path=None, stream=None) -> None:
    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])

    if path is not None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            _emit(fh)
    else:
        _emit(stream if stream is not None else sys.stdout)


def read_indexed_complex(path: str | Path, index_col: str) -> tuple[list[int], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {index_col, "re", "im"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        idx, vals = [], []
        for row in reader:
            idx.append(int(row[index_col]))
            vals.append(complex(float(row["re"]), float(row["im"])))
    return idx, np.asarray(vals, dtype=np.complex128)
