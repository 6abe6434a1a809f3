"""Rademacher functions, Vilenkin characters and the Dirichlet/Fejer kernels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CellFunction, VilenkinBase, interval_mask, to_digits


@dataclass(frozen=True)
class KernelTag:
    kind: str  # "dirichlet" or "fejer"
    index: int

    def __post_init__(self) -> None:
        if self.kind not in ("dirichlet", "fejer"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.index < (1 if self.kind == "fejer" else 0):
            raise ValueError(f"{self.kind} kernel index {self.index} out of range")


def rademacher(base: VilenkinBase, k: int) -> CellFunction:
    """r_k(x) = exp(2*pi*i*x_k/m_k)."""
    if not 0 <= k < base.N:
        raise ValueError(f"coordinate {k} outside [0, {base.N})")
    return CellFunction(base, base.roots(k)[base.digit_table[:, k]])


def _frequency_digits(base: VilenkinBase, n: int) -> tuple[int, ...]:
    if not 0 <= n < base.size:
        raise ValueError(f"frequency {n} outside [0, {base.size})")
    return to_digits(n, base)


def vilenkin(base: VilenkinBase, n: int) -> CellFunction:
    """psi_n = prod_k r_k^{n_k}, read off per-digit root tables."""
    digits = _frequency_digits(base, n)
    table = base.digit_table
    vals = np.ones(base.size, dtype=np.complex128)
    for k, nk in enumerate(digits):
        if nk:
            vals *= base.roots(k)[(nk * table[:, k]) % base.m[k]]
    return CellFunction(base, vals)


def _check_dirichlet_index(base: VilenkinBase, n: int) -> None:
    if not 0 <= n <= base.size:
        raise ValueError(f"Dirichlet index {n} outside [0, {base.size}]")


def _leading(base: VilenkinBase, n: int) -> int:
    """|n|: the position t with M_t <= n < M_{t+1}."""
    t = 0
    while t + 1 <= base.N and base.M[t + 1] <= n:
        t += 1
    return t


def paley_kernel(base: VilenkinBase, t: int) -> np.ndarray:
    """Values of D_{M_t} = M_t * 1_{I_t(0)}."""
    return base.M[t] * interval_mask(base, t).astype(np.complex128)


def dirichlet_naive(base: VilenkinBase, n: int) -> CellFunction:
    """sum_{k<n} psi_k, one character at a time."""
    _check_dirichlet_index(base, n)
    vals = np.zeros(base.size, dtype=np.complex128)
    for k in range(n):
        vals += vilenkin(base, k).values
    return CellFunction(base, vals)


def dirichlet(base: VilenkinBase, n: int) -> CellFunction:
    """D_n in O(M_N * N).

    Peels the leading digit c = n_t of n: the characters with index
    j*M_t + l (l < M_t) equal r_t^j psi_l, hence

        D_n = D_{M_t} * sum_{j<c} r_t^j + r_t^c * D_{n - c*M_t}.

    For c = 1 this is the recursion D_n = D_{M_t} + r_t D_{n-M_t}.
    """
    _check_dirichlet_index(base, n)
    vals = np.zeros(base.size, dtype=np.complex128)
    phase = np.ones(base.size, dtype=np.complex128)
    table = base.digit_table
    while n > 0:
        t = _leading(base, n)
        if t == base.N:
            vals += phase * paley_kernel(base, t)
            break
        c = n // base.M[t]
        r = base.roots(t)
        x = table[:, t]
        geom = np.zeros(base.size, dtype=np.complex128)
        for j in range(c):
            geom += r[(j * x) % base.m[t]]
        vals += phase * paley_kernel(base, t) * geom
        phase = phase * r[(c * x) % base.m[t]]
        n -= c * base.M[t]
    return CellFunction(base, vals)


def dirichlet_recursive(base: VilenkinBase, n: int) -> CellFunction:
    """D_n via D_n = D_{M_|n|} + r_{|n|} D_{n - M_|n|}.

    Only applied while the leading digit of n is 1; otherwise the kernel
    falls back to summing characters directly.
    """
    _check_dirichlet_index(base, n)
    if n == 0:
        return CellFunction.zeros(base)
    t = _leading(base, n)
    if t == base.N:
        return CellFunction(base, paley_kernel(base, t))
    if n // base.M[t] != 1:
        return dirichlet_naive(base, n)
    rest = n - base.M[t]
    head = paley_kernel(base, t)
    if rest == 0:
        return CellFunction(base, head)
    tail = dirichlet_recursive(base, rest).values
    return CellFunction(base, head + rademacher(base, t).values * tail)


def fejer_kernel(base: VilenkinBase, n: int) -> CellFunction:
    """K_n = (1/n) sum_{k=1}^n D_k = sum_{j<n} (1 - j/n) psi_j."""
    from .spectral import Spectrum, synthesize

    if not 1 <= n <= base.size:
        raise ValueError(f"Fejer index {n} outside [1, {base.size}]")
    coeffs = np.zeros(base.size)
    j = np.arange(n)
    coeffs[:n] = (n - j) / n
    return synthesize(Spectrum(base, coeffs))


def kernel(base: VilenkinBase, tag: KernelTag) -> CellFunction:
    if tag.kind == "dirichlet":
        return dirichlet(base, tag.index)
    return fejer_kernel(base, tag.index)
