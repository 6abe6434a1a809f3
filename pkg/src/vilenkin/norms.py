"""Lebesgue and weak-Lebesgue quasi-norms, the martingale maximal function,
H_p norms, p-atoms and weighted maximal operators of T means."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import CellFunction, interval_mask
from .spectral import Spectrum, synthesize_batch
from .summation import CoefficientSequence, multiplier_from_weights, t_weights

LOG_BASE = 2.0
ATOM_TOL = 1e-12


def _check_p(p: float) -> None:
    if not p > 0:
        raise ValueError(f"exponent p must be positive, got {p}")


def lp_quasinorm(f: CellFunction, p: float) -> float:
    """(int |f|^p dmu)^{1/p}."""
    _check_p(p)
    return float(np.mean(f.modulus ** p) ** (1.0 / p))


def weak_lp_quasinorm(f: CellFunction, p: float) -> float:
    """sup_lambda lambda * mu(|f| > lambda)^{1/p}.

    The tail of a simple function is a right-continuous step function, so the
    supremum is the largest v^p * mu(|f| >= v) over attained levels v.
    """
    _check_p(p)
    a = np.sort(f.modulus)
    size = a.size
    # mu(|f| >= a[i]) >= (size - i)/size, with equality at a level's first index
    tail = (size - np.arange(size)) / size
    return float(np.max(a ** p * tail) ** (1.0 / p))


def conditional_expectation(f: CellFunction, n: int) -> CellFunction:
    """S_{M_n} f: the average of f over each I_n(x)."""
    base = f.base
    if not 0 <= n <= base.N:
        raise ValueError(f"rank {n} outside [0, {base.N}]")
    # row = high digits, column = digits 0..n-1; I_n(x) is a column
    blocks = f.values.reshape(base.size // base.M[n], base.M[n])
    avg = blocks.mean(axis=0, keepdims=True)
    return CellFunction(base, np.broadcast_to(avg, blocks.shape).reshape(-1))


def maximal_function(f: CellFunction) -> CellFunction:
    """f* = max_{0<=n<=N} |S_{M_n} f|; the martingale is constant from rank N on."""
    out = np.zeros(f.base.size)
    for n in range(f.base.N + 1):
        np.maximum(out, conditional_expectation(f, n).modulus, out=out)
    return CellFunction(f.base, out)


def hp_norm(f: CellFunction, p: float) -> float:
    return lp_quasinorm(maximal_function(f), p)


@dataclass(frozen=True)
class AtomCertificate:
    rank: int
    anchor: int
    p: float
    mean_zero: bool
    sup_bound: bool
    support: bool
    integral: complex
    sup_norm: float
    sup_limit: float

    @property
    def passed(self) -> bool:
        return self.mean_zero and self.sup_bound and self.support

    def __bool__(self) -> bool:
        return self.passed


def validate_atom(a: CellFunction, p: float, rank: int, anchor: int = 0, tol: float = ATOM_TOL) -> AtomCertificate:
    """Check the three p-atom conditions on the interval I_rank(anchor)."""
    _check_p(p)
    base = a.base
    mask = interval_mask(base, rank, anchor)
    measure = base.M[rank] ** -1.0
    integral = complex(np.sum(a.values[mask]) / base.size)
    sup = float(np.max(a.modulus)) if a.values.size else 0.0
    limit = measure ** (-1.0 / p)
    return AtomCertificate(
        rank=rank,
        anchor=int(anchor),
        p=p,
        mean_zero=abs(integral) <= tol,
        sup_bound=sup <= limit * (1 + tol),
        support=bool(np.all(np.abs(a.values[~mask]) <= tol)),
        integral=integral,
        sup_norm=sup,
        sup_limit=limit,
    )


def atomic_upper_bound(mus: Sequence[float], p: float) -> float:
    """(sum |mu_k|^p)^{1/p} for a caller-supplied atomic decomposition."""
    if not 0 < p <= 1:
        raise ValueError("atomic decompositions need 0 < p <= 1")
    mus = np.abs(np.asarray(list(mus), dtype=float))
    if mus.size == 0:
        raise ValueError("empty decomposition")
    return float(np.sum(mus ** p) ** (1.0 / p))


@dataclass(frozen=True)
class WeightFunction:
    """A nondecreasing weight n -> phi(n) >= 1."""

    rule: Callable[[np.ndarray], np.ndarray]
    description: str

    def __call__(self, n):
        arr = np.asarray(n, dtype=float)
        vals = np.asarray(self.rule(arr), dtype=float)
        if np.any(vals < 1 - 1e-12):
            raise ValueError(f"weight {self.description} drops below 1")
        return float(vals) if vals.ndim == 0 else vals

    def is_nondecreasing(self, ns: Iterable[int]) -> bool:
        vals = self(np.asarray(sorted(ns)))
        return bool(np.all(np.diff(vals) >= 0))


def _log(x: np.ndarray, log_base: float) -> np.ndarray:
    return np.log(x) / math.log(log_base)


def weight_one() -> WeightFunction:
    return WeightFunction(lambda n: np.ones_like(n), "one")


def weight_power(beta: float) -> WeightFunction:
    """(n+1)^beta, beta >= 0."""
    if beta < 0:
        raise ValueError("power weights need beta >= 0")
    return WeightFunction(lambda n: (n + 1.0) ** beta, f"power:{beta:g}")


def weight_log_power(e: float, log_base: float = LOG_BASE) -> WeightFunction:
    """log(n+1)^e in the given base; >= 1 for n >= 1 when log_base <= 2."""
    if e < 0:
        raise ValueError("log-power weights need e >= 0")
    return WeightFunction(lambda n: _log(n + 1.0, log_base) ** e, f"log{log_base:g}pow:{e:g}")


def weight_paper(p: float, log_base: float = LOG_BASE) -> WeightFunction:
    """(n+1)^{1/p-2} * log(n+1)^{2*floor(1/2+p)}, 0 < p <= 1/2."""
    if not 0 < p <= 0.5:
        raise ValueError(f"the sharp weight is defined for 0 < p <= 1/2, got {p}")
    power = 1.0 / p - 2.0
    log_exp = 2 * math.floor(0.5 + p)
    return WeightFunction(
        lambda n: (n + 1.0) ** power * _log(n + 1.0, log_base) ** log_exp,
        f"paper:p={p:g},log{log_base:g}",
    )


def t_mean_batch(s: Spectrum, q: CoefficientSequence, indices: Sequence[int]) -> np.ndarray:
    """Rows T_n f for n in ``indices`` (one batched synthesis)."""
    size = s.base.size
    mult = np.stack([multiplier_from_weights(t_weights(q, n), size) for n in indices])
    return synthesize_batch(s.base, mult * s.coeffs[None, :])


def weighted_maximal(
    s: Spectrum,
    q: CoefficientSequence,
    phi: WeightFunction,
    indices: Iterable[int] | None = None,
    chunk: int = 64,
) -> CellFunction:
    """max_{n in indices} |T_n f| / phi(n), pointwise.

    ``indices=None`` means 1..M_N, which covers every index at which the
    resolution-N data can still change behaviour.
    """
    idx = list(range(1, s.base.size + 1)) if indices is None else sorted(set(int(n) for n in indices))
    if not idx:
        raise ValueError("empty index set")
    if idx[0] < 1:
        raise ValueError("T means are indexed from n = 1")
    out = np.zeros(s.base.size)
    for start in range(0, len(idx), chunk):
        part = idx[start : start + chunk]
        rows = np.abs(t_mean_batch(s, q, part)) / phi(np.asarray(part))[:, None]
        np.maximum(out, rows.max(axis=0), out=out)
    return CellFunction(s.base, out)
