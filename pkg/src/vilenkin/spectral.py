"""Vilenkin-Fourier analysis, synthesis and partial sums.

The transform factors over the digit axes: with
psi_n(x) = exp(2*pi*i * sum_k n_k x_k / m_k), both the cell index and the
frequency index are little-endian mixed-radix numbers, so reshaping to the
digit grid turns the transform into one m_k-point DFT per axis.  Total cost
is O(M_N * sum_k m_k).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .core import CellFunction, VilenkinBase, _roots_of_unity, read_indexed_complex, write_rows


@lru_cache(maxsize=None)
def _dft_matrix(m: int, sign: int) -> np.ndarray:
    roots = _roots_of_unity(m)
    j = np.arange(m)
    W = roots[(np.outer(j, j) % m)]
    if sign < 0:
        W = np.conj(W)
    W.setflags(write=False)
    return W


def axis_sweep(arr: np.ndarray, base: VilenkinBase, sign: int) -> np.ndarray:
    """Apply the per-digit DFT along every axis of ``arr[..., M_N]``.

    ``sign=-1`` gives sum_x a(x) * conj(psi_n(x)); ``sign=+1`` gives
    sum_n a(n) * psi_n(x).  Leading axes are treated as a batch.
    """
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.shape[-1] != base.size:
        raise ValueError(f"last axis must have length {base.size}")
    lead = arr.shape[:-1]
    a = arr.reshape(lead + base.grid_shape)
    nlead = len(lead)
    for k in range(base.N):
        axis = nlead + base.axis_of(k)
        W = _dft_matrix(base.m[k], sign)
        a = np.moveaxis(np.tensordot(W, a, axes=([1], [axis])), 0, axis)
    return a.reshape(arr.shape)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Coefficients hat f(0..M_N-1) of a cell function."""

    base: VilenkinBase
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.base.size,):
            raise ValueError(f"expected {self.base.size} coefficients, got shape {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def to_csv(self, path=None, stream=None) -> None:
        write_rows(
            ("n", "re", "im"),
            ((n, c.real, c.imag) for n, c in enumerate(self.coeffs)),
            path=path,
            stream=stream,
        )

    @classmethod
    def from_csv(cls, base: VilenkinBase, path) -> "Spectrum":
        idx, vals = read_indexed_complex(path, "n")
        if sorted(idx) != list(range(base.size)):
            raise ValueError(f"{path}: expected frequencies 0..{base.size - 1}")
        out = np.zeros(base.size, dtype=np.complex128)
        out[idx] = vals
        return cls(base, out)


def analyze(f: CellFunction) -> Spectrum:
    base = f.base
    return Spectrum(base, axis_sweep(f.values, base, -1) / base.size)


def synthesize(s: Spectrum) -> CellFunction:
    return CellFunction(s.base, axis_sweep(s.coeffs, s.base, +1))


def synthesize_batch(base: VilenkinBase, coeffs: np.ndarray) -> np.ndarray:
    """Synthesize each row of a ``(B, M_N)`` coefficient array."""
    return axis_sweep(coeffs, base, +1)


def apply_multiplier(s: Spectrum, multiplier: np.ndarray) -> CellFunction:
    """sum_j multiplier[j] * hat f(j) * psi_j."""
    return CellFunction(s.base, axis_sweep(s.coeffs * multiplier, s.base, +1))


def partial_sum(s: Spectrum, n: int) -> CellFunction:
    """S_n f = sum_{k<n} hat f(k) psi_k; equals f once n >= M_N."""
    if n < 0:
        raise ValueError("partial sum index must be non-negative")
    mult = np.zeros(s.base.size)
    mult[: min(n, s.base.size)] = 1.0
    return apply_multiplier(s, mult)


def partial_sum_stream(s: Spectrum, cap: int) -> Iterator[CellFunction]:
    """Yield S_1 f, ..., S_cap f, adding one character per step."""
    from .characters import vilenkin

    base = s.base
    acc = np.zeros(base.size, dtype=np.complex128)
    for k in range(cap):
        if k < base.size and s.coeffs[k] != 0:
            acc += s.coeffs[k] * vilenkin(base, k).values
        yield CellFunction(base, acc)


def martingale_coefficient(f: CellFunction, i: int, level: int) -> complex:
    """int S_{M_level} f * conj(psi_i) dmu, the level-``level`` approximant.

    At finite resolution the defining limit over levels is reached at
    ``level = N``.
    """
    base = f.base
    if not 0 <= level <= base.N:
        raise ValueError(f"level {level} outside [0, {base.N}]")
    fk = partial_sum(analyze(f), base.M[level])
    return complex(analyze(fk).coeffs[i])
