"""Coefficient sequences, T and Norlund means, and the named special cases.

Every mean here is a finite combination sum_k w_k S_k f of partial sums.
Since S_k f = sum_{j<k} hat f(j) psi_j, it acts on the spectrum as the
multiplier lambda_j = sum_{k>j} w_k, so one mean costs one synthesis.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import CellFunction, VilenkinBase
from .spectral import Spectrum, apply_multiplier

MONOTONICITY = ("nondecreasing", "nonincreasing", "none")


class CoefficientSequence:
    """Non-negative weights q_k defined by a rule, with memoised prefix sums.

    ``Q(n) = q_0 + ... + q_{n-1}``.  The declared monotonicity and
    non-negativity are validated lazily, up to the largest index evaluated.
    ``bound`` is an optional declared sup of the sequence (used by B means).
    """

    def __init__(
        self,
        rule: Callable[[int], float],
        monotonicity: str = "none",
        description: str = "custom",
        bound: float | None = None,
        length: int | None = None,
    ):
        if monotonicity not in MONOTONICITY:
            raise ValueError(f"monotonicity must be one of {MONOTONICITY}")
        self.rule = rule
        self.monotonicity = monotonicity
        self.description = description
        self.bound = bound
        self.length = length
        self._q = np.zeros(0)
        self._Q = np.zeros(1)
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"CoefficientSequence({self.description!r}, {self.monotonicity})"

    def _extend(self, n: int) -> None:
        # write-once memo: readers only ever see fully validated prefixes
        with self._lock:
            have = self._q.size
            if n <= have:
                return
            if self.length is not None and n > self.length:
                raise ValueError(f"{self.description}: q_{n - 1} requested but only {self.length} values given")
            size = max(n, 2 * have, 64)
            if self.length is not None:
                size = min(size, self.length)
            new = np.array([float(self.rule(k)) for k in range(have, size)])
            if np.any(~np.isfinite(new)) or np.any(new < 0):
                bad = have + int(np.flatnonzero(~(np.isfinite(new) & (new >= 0)))[0])
                raise ValueError(f"{self.description}: q_{bad} is negative or not finite")
            q = np.concatenate([self._q, new])
            if self.bound is not None and np.any(q > self.bound):
                bad = int(np.flatnonzero(q > self.bound)[0])
                raise ValueError(f"{self.description}: q_{bad} exceeds the declared bound {self.bound}")
            d = np.diff(q[max(have - 1, 0):])
            if self.monotonicity == "nondecreasing" and np.any(d < 0):
                raise ValueError(f"{self.description}: declared nondecreasing but is not")
            if self.monotonicity == "nonincreasing" and np.any(d > 0):
                raise ValueError(f"{self.description}: declared nonincreasing but is not")
            Q = np.concatenate([[0.0], np.cumsum(q)])
            self._Q = Q
            self._q = q

    def q(self, k: int) -> float:
        if k < 0:
            raise IndexError(k)
        self._extend(k + 1)
        return float(self._q[k])

    def Q(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        self._extend(n)
        return float(self._Q[n])

    def values(self, n: int) -> np.ndarray:
        """q_0, ..., q_{n-1} as a fresh array."""
        self._extend(n)
        return self._q[:n].copy()

    def prefix(self, n: int) -> np.ndarray:
        """Q_0, ..., Q_n as a fresh array."""
        self._extend(n)
        return self._Q[: n + 1].copy()

    # ---- common sequences ----

    @classmethod
    def constant(cls, c: float = 1.0) -> "CoefficientSequence":
        if c <= 0:
            raise ValueError("constant weight must be positive")
        return cls(lambda k: c, "nondecreasing", f"const:{c:g}", bound=c)

    @classmethod
    def riesz(cls) -> "CoefficientSequence":
        """q_0 = 0, q_k = 1/k; Q_n = l_n."""
        return cls(lambda k: 0.0 if k == 0 else 1.0 / k, "none", "riesz")

    @classmethod
    def powers(cls, beta: float) -> "CoefficientSequence":
        """q_k = (k+1)^beta."""
        mono = "nondecreasing" if beta >= 0 else "nonincreasing"
        bound = 1.0 if beta <= 0 else None
        return cls(lambda k: (k + 1.0) ** beta, mono, f"powers:{beta:g}", bound=bound)

    @classmethod
    def inverse_cesaro(cls, alpha: float, a0_zero: bool = False) -> "CoefficientSequence":
        """q_k = A_k^{alpha-1}."""
        _check_alpha(alpha)
        mono = "none" if a0_zero else "nonincreasing"
        beta = alpha - 1.0

        def rule(k: int) -> float:
            if k == 0:
                return 0.0 if a0_zero else 1.0
            # Gamma form keeps large k O(1)
            return math.exp(math.lgamma(k + beta + 1) - math.lgamma(beta + 1) - math.lgamma(k + 1))

        return cls(rule, mono, f"cesaro-weights:{alpha:g}")

    @classmethod
    def v_alpha(cls, alpha: float) -> "CoefficientSequence":
        """q_0 = 0, q_k = k^{alpha-1}."""
        _check_alpha(alpha)
        return cls(lambda k: 0.0 if k == 0 else float(k) ** (alpha - 1.0), "none", f"v:{alpha:g}")

    @classmethod
    def from_values(cls, values: Sequence[float], monotonicity: str = "none", description: str = "custom"):
        vals = [float(v) for v in values]
        return cls(vals.__getitem__, monotonicity, description, length=len(vals))

    @classmethod
    def from_file(cls, path: str | Path, monotonicity: str = "none") -> "CoefficientSequence":
        """One q_k per line; blank lines and ``#`` comments are skipped."""
        vals = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                vals.append(float(line))
        return cls.from_values(vals, monotonicity, f"file:{path}")


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def cesaro_numbers(alpha: float, n: int, *, a0_zero: bool = False) -> float:
    """A_n^alpha = (alpha+1)(alpha+2)...(alpha+n)/n!.

    A_0^alpha is the empty product 1 unless ``a0_zero`` selects the
    convention A_0^alpha = 0.  ``alpha`` is unrestricted here because the
    means also need A_k^{alpha-1}.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0.0 if a0_zero else 1.0
    out = 1.0
    for j in range(1, n + 1):
        out *= (alpha + j) / j
    return out


def _cesaro_table(alpha: float, n: int, a0_zero: bool) -> np.ndarray:
    """A_0^alpha .. A_n^alpha via A_j = A_{j-1} (alpha+j)/j."""
    j = np.arange(1, n + 1)
    out = np.concatenate([[1.0], np.cumprod((alpha + j) / j)])
    if a0_zero:
        out[0] = 0.0
    return out


# ---- generic machinery ----

def multiplier_from_weights(weights: np.ndarray, size: int) -> np.ndarray:
    """lambda_j = sum_{k>j} weights[k], j < size (weights[k] multiplies S_k)."""
    w = np.asarray(weights, dtype=float)
    tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])  # tail[i] = sum_{k>=i} w_k
    lam = np.zeros(size)
    upto = min(size, w.size)
    lam[:upto] = tail[1 : upto + 1]
    return lam


def weighted_partial_sums(s: Spectrum, weights: np.ndarray) -> CellFunction:
    """sum_k weights[k] * S_k f."""
    return apply_multiplier(s, multiplier_from_weights(weights, s.base.size))


def _positive(value: float, what: str) -> float:
    if not value > 0:
        raise ValueError(f"{what} = {value} is not positive; the mean is undefined")
    return value


def t_weights(q: CoefficientSequence, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("T means need n >= 1")
    return q.values(n) / _positive(q.Q(n), f"Q_{n}")


def norlund_weights(q: CoefficientSequence, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("Norlund means need n >= 1")
    w = np.zeros(n + 1)
    w[1:] = q.values(n)[::-1]  # S_k gets q_{n-k}
    return w / _positive(q.Q(n), f"Q_{n}")


def t_mean(s: Spectrum, q: CoefficientSequence, n: int) -> CellFunction:
    """T_n f = (1/Q_n) sum_{k=0}^{n-1} q_k S_k f."""
    return weighted_partial_sums(s, t_weights(q, n))


def norlund_mean(s: Spectrum, q: CoefficientSequence, n: int) -> CellFunction:
    """t_n f = (1/Q_n) sum_{k=1}^{n} q_{n-k} S_k f."""
    return weighted_partial_sums(s, norlund_weights(q, n))


def fejer_mean(s: Spectrum, n: int) -> CellFunction:
    if n < 1:
        raise ValueError("Fejer means need n >= 1")
    w = np.full(n + 1, 1.0 / n)
    w[0] = 0.0
    return weighted_partial_sums(s, w)


def cesaro_weights(alpha: float, n: int, *, paper_literal: bool = False) -> np.ndarray:
    """Weights of S_0..S_n in the (C, alpha) mean.

    Default: S_k gets A_{n-k}^{alpha-1} / A_{n-1}^alpha, the Norlund mean of
    q_k = A_k^{alpha-1} (its Q_n is A_{n-1}^alpha, so constants are
    reproduced).  ``paper_literal`` divides by A_n^alpha and sets
    A_0^{alpha-1} = 0 instead.
    """
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("Cesaro means need n >= 1")
    A = _cesaro_table(alpha - 1.0, n, paper_literal)
    w = np.zeros(n + 1)
    w[1:] = A[n - np.arange(1, n + 1)]
    denom = cesaro_numbers(alpha, n) if paper_literal else cesaro_numbers(alpha, n - 1)
    return w / denom


def cesaro_mean(s: Spectrum, alpha: float, n: int, *, paper_literal: bool = False) -> CellFunction:
    return weighted_partial_sums(s, cesaro_weights(alpha, n, paper_literal=paper_literal))


def inverse_cesaro_weights(alpha: float, n: int, *, paper_literal: bool = False) -> np.ndarray:
    """S_k gets A_k^{alpha-1} for k < n, over Q_n = A_{n-1}^alpha (or A_n^alpha)."""
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("inverse Cesaro means need n >= 1")
    A = _cesaro_table(alpha - 1.0, n - 1, paper_literal)
    denom = cesaro_numbers(alpha, n) if paper_literal else cesaro_numbers(alpha, n - 1)
    return A / denom


def inverse_cesaro_mean(s: Spectrum, alpha: float, n: int, *, paper_literal: bool = False) -> CellFunction:
    return weighted_partial_sums(s, inverse_cesaro_weights(alpha, n, paper_literal=paper_literal))


def v_alpha_mean(s: Spectrum, alpha: float, n: int) -> CellFunction:
    """V_n^alpha: the T mean with q_0 = 0, q_k = k^{alpha-1}."""
    if n < 2:
        raise ValueError("V means need n >= 2")
    return t_mean(s, CoefficientSequence.v_alpha(alpha), n)


def log_sum(n: int) -> float:
    """l_n = sum_{k=1}^{n-1} 1/k."""
    return math.fsum(1.0 / k for k in range(1, n))


def riesz_weights(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("logarithmic means need n >= 2")
    k = np.arange(n, dtype=float)
    w = np.zeros(n)
    w[1:] = 1.0 / k[1:]
    return w / log_sum(n)


def riesz_mean(s: Spectrum, n: int) -> CellFunction:
    """R_n f = (1/l_n) sum_{k=1}^{n-1} S_k f / k."""
    return weighted_partial_sums(s, riesz_weights(n))


def norlund_log_weights(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("logarithmic means need n >= 2")
    w = np.zeros(n)
    k = np.arange(1, n)
    w[1:] = 1.0 / (n - k)
    return w / log_sum(n)


def norlund_log_mean(s: Spectrum, n: int) -> CellFunction:
    """L_n f = (1/l_n) sum_{k=1}^{n-1} S_k f / (n-k)."""
    return weighted_partial_sums(s, norlund_log_weights(n))


def b_weights(q: CoefficientSequence, n: int) -> np.ndarray:
    if q.monotonicity == "none" or q.bound is None:
        raise ValueError("B means need a declared monotone and bounded sequence")
    if n < 2:
        raise ValueError("B means need n >= 2")
    w = q.values(n)
    w[0] = 0.0
    return w / _positive(q.Q(n), f"Q_{n}")


def b_mean(s: Spectrum, q: CoefficientSequence, n: int) -> CellFunction:
    """B_n f = (1/Q_n) sum_{k=1}^{n-1} q_k S_k f.

    Coincides with ``t_mean`` for the same q because S_0 f = 0.
    """
    return weighted_partial_sums(s, b_weights(q, n))


# ---- named-mean registry (used by the CLI and the oracle tests) ----

@dataclass(frozen=True)
class MeanTag:
    kind: str
    alpha: float | None = None
    q: CoefficientSequence | None = field(default=None, compare=False)
    paper_literal: bool = False

    KINDS = ("t", "norlund", "fejer", "cesaro", "u", "v", "riesz", "nlog", "b")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown mean {self.kind!r}; choose from {self.KINDS}")
        if self.kind in ("cesaro", "u", "v"):
            if self.alpha is None:
                raise ValueError(f"mean {self.kind!r} needs alpha")
            _check_alpha(self.alpha)
        if self.kind in ("t", "norlund", "b") and self.q is None:
            raise ValueError(f"mean {self.kind!r} needs a coefficient sequence")

    @property
    def min_index(self) -> int:
        return 2 if self.kind in ("v", "riesz", "nlog", "b") else 1


def mean_weights(tag: MeanTag, n: int) -> np.ndarray:
    """Weights on S_0, S_1, ... realising the mean ``tag`` at index n."""
    k = tag.kind
    if k == "t":
        return t_weights(tag.q, n)
    if k == "norlund":
        return norlund_weights(tag.q, n)
    if k == "fejer":
        if n < 1:
            raise ValueError("Fejer means need n >= 1")
        w = np.full(n + 1, 1.0 / n)
        w[0] = 0.0
        return w
    if k == "cesaro":
        return cesaro_weights(tag.alpha, n, paper_literal=tag.paper_literal)
    if k == "u":
        return inverse_cesaro_weights(tag.alpha, n, paper_literal=tag.paper_literal)
    if k == "v":
        if n < 2:
            raise ValueError("V means need n >= 2")
        return t_weights(CoefficientSequence.v_alpha(tag.alpha), n)
    if k == "riesz":
        return riesz_weights(n)
    if k == "nlog":
        return norlund_log_weights(n)
    return b_weights(tag.q, n)


def evaluate_mean(s: Spectrum, tag: MeanTag, n: int) -> CellFunction:
    return weighted_partial_sums(s, mean_weights(tag, n))


# ---- condition checkers ----

@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a finite-range condition check; truthy iff it passed."""

    condition: str
    passed: bool
    checked: int
    witness: int | None = None
    lhs: float | None = None
    rhs: float | None = None

    def __bool__(self) -> bool:
        return self.passed

    def summary(self) -> str:
        if self.passed:
            return f"{self.condition}: PASS ({self.checked} indices checked)"
        return (
            f"{self.condition}: FAIL at index {self.witness} "
            f"(lhs={self.lhs:.6g}, rhs={self.rhs:.6g})"
        )


def _scan(name: str, items, holds) -> ConditionReport:
    count = 0
    for idx, lhs, rhs in items:
        count += 1
        if not holds(lhs, rhs):
            return ConditionReport(name, False, count, idx, lhs, rhs)
    return ConditionReport(name, True, count)


def check_regularity(q: CoefficientSequence, horizon: int, c: float = 0.5) -> ConditionReport:
    """Witness Q_n -> infinity: every dyadic block adds Q_{2n} - Q_n >= c.

    Uniform mass c on all blocks [n, 2n) forces Q_n >= c*log2(n), so the
    check is a finite certificate of divergence, not a proof.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    Q = q.prefix(horizon)
    items = []
    n = 1
    while 2 * n <= horizon:
        items.append((n, Q[2 * n] - Q[n], c))
        n *= 2
    return _scan("regular", items, lambda lhs, rhs: lhs >= rhs)


def check_cond0(q: CoefficientSequence, horizon: int, c: float) -> ConditionReport:
    """1/Q_n <= c/n for 1 <= n <= horizon."""
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    Q = q.prefix(horizon)
    items = ((n, math.inf if Q[n] == 0 else 1.0 / Q[n], c / n) for n in range(1, horizon + 1))
    return _scan("cond0", items, lambda lhs, rhs: lhs <= rhs)


def check_fn011(q: CoefficientSequence, horizon: int, c: float) -> ConditionReport:
    """q_{n-1}/Q_n <= c/n for 1 <= n <= horizon."""
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    Q = q.prefix(horizon)
    qs = q.values(horizon)
    items = (
        (n, math.inf if Q[n] == 0 else qs[n - 1] / Q[n], c / n) for n in range(1, horizon + 1)
    )
    return _scan("fn011", items, lambda lhs, rhs: lhs <= rhs)


def _block_items(q: CoefficientSequence, base: VilenkinBase, ks: Sequence[int], numerator):
    for k in ks:
        M = base.generated(2 * k)
        Q = q.Q(M + 2)
        lhs = math.inf if Q == 0 else numerator(M) / Q
        yield k, lhs, None, M


def check_kachzcond1(q: CoefficientSequence, base: VilenkinBase, ks: Sequence[int], c: float) -> ConditionReport:
    """q_0 / Q_{M_{2k}+2} >= c / M_{2k} for every k in ``ks``."""
    items = ((k, lhs, c / M) for k, lhs, _, M in _block_items(q, base, ks, lambda M: q.q(0)))
    return _scan("kachzcond1", items, lambda lhs, rhs: lhs >= rhs)


def check_kachzcond2(q: CoefficientSequence, base: VilenkinBase, ks: Sequence[int], c: float) -> ConditionReport:
    """q_{M_{2k}+1} / Q_{M_{2k}+2} >= c / M_{2k} for every k in ``ks``."""
    items = ((k, lhs, c / M) for k, lhs, _, M in _block_items(q, base, ks, lambda M: q.q(M + 1)))
    return _scan("kachzcond2", items, lambda lhs, rhs: lhs >= rhs)
