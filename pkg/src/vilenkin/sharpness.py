"""Counterexample martingales for weighted maximal operators of T means.

f_{n_k} = D_{M_{2n_k+1}} - D_{M_{2n_k}} has a block of unit coefficients on
[M_{2n_k}, M_{2n_k+1}).  This module checks the closed-form identities the
divergence argument rests on and measures, for finitely many n_k, the ratios
that the argument shows to be unbounded when the weight is too small.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .characters import dirichlet, vilenkin
from .core import CellFunction, VilenkinBase, annulus_mask, fmt
from .norms import (
    LOG_BASE,
    WeightFunction,
    hp_norm,
    weak_lp_quasinorm,
    weighted_maximal,
)
from .spectral import Spectrum, analyze, partial_sum_stream
from .summation import CoefficientSequence, t_mean

EXACT_TOL = 1e-12
HP_REL_TOL = 1e-10


class InvariantBreach(RuntimeError):
    """A computed quantity disagrees with its closed form."""


def _check_k(base: VilenkinBase, k: int) -> None:
    if k < 1:
        raise ValueError("n_k must be a positive integer")
    if 2 * k + 1 > base.N:
        raise ValueError(f"n_k={k} needs resolution N >= {2 * k + 1}, base has N={base.N}")


def counterexample(base: VilenkinBase, k: int) -> CellFunction:
    """f_k = D_{M_{2k+1}} - D_{M_{2k}}."""
    _check_k(base, k)
    return dirichlet(base, base.M[2 * k + 1]) - dirichlet(base, base.M[2 * k])


def counterexample_spectrum(base: VilenkinBase, k: int) -> Spectrum:
    """Unit coefficients on [M_{2k}, M_{2k+1}), built directly."""
    _check_k(base, k)
    c = np.zeros(base.size)
    c[base.M[2 * k] : base.M[2 * k + 1]] = 1.0
    return Spectrum(base, c)


def hp_closed_form(base: VilenkinBase, k: int, p: float) -> float:
    """||f_k||_{H_p} = M_{2k}^{1-1/p}."""
    if not p > 0:
        raise ValueError("p must be positive")
    return float(base.M[2 * k]) ** (1.0 - 1.0 / p)


@dataclass(frozen=True)
class BranchCheck:
    passed: bool
    max_error: float
    offending: int | None = None
    branch: str | None = None

    def __bool__(self) -> bool:
        return self.passed


def verify_7sn(base: VilenkinBase, k: int, tol: float = EXACT_TOL) -> BranchCheck:
    """Compare S_i f_k with its three-branch closed form for 0 <= i <= M_N.

    i <= M_{2k}: 0;  M_{2k} < i < M_{2k+1}: D_i - D_{M_{2k}};  otherwise f_k.
    """
    f = counterexample(base, k)
    s = analyze(f)
    lo, hi = base.M[2 * k], base.M[2 * k + 1]
    d_lo = dirichlet(base, lo).values
    zero = np.zeros(base.size, dtype=np.complex128)
    D = np.zeros(base.size, dtype=np.complex128)  # running D_i
    worst = 0.0
    stream = partial_sum_stream(s, base.size)
    for i in range(base.size + 1):
        if i == 0:
            S = zero
        else:
            S = next(stream).values
            D = D + vilenkin(base, i - 1).values
        if i <= lo:
            expected, branch = zero, "zero"
        elif i < hi:
            expected, branch = D - d_lo, "D_i - D_M"
        else:
            expected, branch = f.values, "f"
        err = float(np.max(np.abs(S - expected)))
        worst = max(worst, err)
        if err >= tol:
            return BranchCheck(False, err, i, branch)
    return BranchCheck(True, worst)


@dataclass(frozen=True)
class CounterexampleSpec:
    base: VilenkinBase
    ks: tuple[int, ...]
    q: CoefficientSequence
    phi: WeightFunction
    p: float
    log_base: float = LOG_BASE

    def __post_init__(self) -> None:
        ks = tuple(int(k) for k in self.ks)
        if not ks:
            raise ValueError("empty list of n_k")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("n_k must be strictly increasing")
        for k in ks:
            _check_k(self.base, k)
        if not self.p > 0:
            raise ValueError("p must be positive")
        object.__setattr__(self, "ks", ks)

    def describe(self) -> dict:
        return {
            **self.base.describe(),
            "ks": list(self.ks),
            "q": self.q.description,
            "q_monotonicity": self.q.monotonicity,
            "phi": self.phi.description,
            "p": self.p,
            "log_base": self.log_base,
        }


@dataclass
class RatioRow:
    k: int
    n_k: int
    M_2nk: int
    hp_computed: float
    hp_closed: float
    numerator_sparse: float
    numerator_full: float
    ratio: float
    lower_bound: float
    witnessed_c: float
    ratio_full: float
    pointwise_c: float
    identity_error: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _quasi(total: float, p: float) -> float:
    return total ** (1.0 / p)


def annulus_identity(q: CoefficientSequence, M: int, Ms: int) -> float:
    """(1/Q_{M+Ms}) * sum_{j<Ms} q_{j+M} * j: |T_{M+Ms} f| on I_{2s} minus I_{2s+1}."""
    qs = q.values(M + Ms)[M:]
    return float(np.dot(qs, np.arange(Ms)) / q.Q(M + Ms))


def part_a_row(spec: CounterexampleSpec, position: int, n_k: int) -> RatioRow:
    """Part a) quantities for one n_k (requires p = 1/2)."""
    if abs(spec.p - 0.5) > 1e-15:
        raise ValueError("part a) is the case p = 1/2")
    base, q, phi, p = spec.base, spec.q, spec.phi, spec.p
    f = counterexample(base, n_k)
    s = analyze(f)
    M = base.M[2 * n_k]
    phi_top = phi(base.M[2 * n_k + 1])
    hp = hp_norm(f, p)
    hp_cl = hp_closed_form(base, n_k, p)

    sparse_total = 0.0
    chain_total = 0.0
    pointwise_c = math.inf
    identity_error = 0.0
    per_annulus = []
    for s_idx in range(1, n_k + 1):
        Ms = base.M[2 * s_idx]
        n = M + Ms
        mask = annulus_mask(base, 2 * s_idx)
        mod = t_mean(s, q, n).modulus[mask]
        identity_error = max(identity_error, float(np.max(np.abs(mod - annulus_identity(q, M, Ms)))))
        vals = mod / phi(n)
        measure = mask.sum() / base.size
        sparse_total += float(np.sum(vals ** p)) / base.size
        pointwise_c = min(pointwise_c, float(vals.min()) * M * phi_top / Ms**2)
        per_annulus.append((Ms, measure))
    for Ms, measure in per_annulus:
        chain_total += (pointwise_c * Ms**2 / (M * phi_top)) ** p * measure

    full = weighted_maximal(s, q, phi)
    full_total = float(np.mean(full.modulus ** p))

    num_sparse = _quasi(sparse_total, p)
    num_full = _quasi(full_total, p)
    ratio = num_sparse / hp
    return RatioRow(
        k=position,
        n_k=n_k,
        M_2nk=M,
        hp_computed=hp,
        hp_closed=hp_cl,
        numerator_sparse=num_sparse,
        numerator_full=num_full,
        ratio=ratio,
        lower_bound=_quasi(chain_total, p) / hp,
        witnessed_c=ratio * phi_top / n_k**2,
        ratio_full=num_full / hp,
        pointwise_c=pointwise_c,
        identity_error=identity_error,
    )


def part_b_row(spec: CounterexampleSpec, position: int, n_k: int) -> RatioRow:
    """Part b) quantities for one n_k (requires 0 < p < 1/2)."""
    if not 0 < spec.p < 0.5:
        raise ValueError("part b) needs 0 < p < 1/2")
    base, q, phi, p = spec.base, spec.q, spec.phi, spec.p
    f = counterexample(base, n_k)
    s = analyze(f)
    M = base.M[2 * n_k]
    n = M + 2
    hp = hp_norm(f, p)
    hp_cl = hp_closed_form(base, n_k, p)

    mod = t_mean(s, q, n).modulus
    expected = q.q(M + 1) / q.Q(n)
    identity_error = max(float(mod.max() - mod.min()), float(np.max(np.abs(mod - expected))))
    weighted = mod / phi(n)
    level = float(weighted.min())
    # mu{|T f|/phi >= level}: every cell, up to rounding
    measure = float(np.mean(weighted >= level * (1 - EXACT_TOL)))
    num_single = level * measure ** (1.0 / p)

    full = weighted_maximal(s, q, phi)
    num_full = weak_lp_quasinorm(full, p)
    ratio = num_single / hp
    pointwise_c = level * M * phi(n)
    return RatioRow(
        k=position,
        n_k=n_k,
        M_2nk=M,
        hp_computed=hp,
        hp_closed=hp_cl,
        numerator_sparse=num_single,
        numerator_full=num_full,
        ratio=ratio,
        lower_bound=pointwise_c * M ** (1.0 / p - 2.0) / phi(n),
        witnessed_c=ratio * phi(n) / float(n) ** (1.0 / p - 2.0),
        ratio_full=num_full / hp,
        pointwise_c=pointwise_c,
        identity_error=identity_error,
    )


def part_b_closed_ratio(spec: CounterexampleSpec, n_k: int) -> float:
    """(q_{M+1}/Q_{M+2}) * M^{1/p-1} / phi(M+2) with M = M_{2n_k}."""
    M = spec.base.M[2 * n_k]
    q = spec.q
    return q.q(M + 1) / q.Q(M + 2) * M ** (1.0 / spec.p - 1.0) / spec.phi(M + 2)


def witnessed_constant(q: CoefficientSequence, base: VilenkinBase, ks: Sequence[int], which: int) -> float:
    """Largest c for which the block condition holds at every k in ``ks``."""
    out = math.inf
    for k in ks:
        M = base.generated(2 * k)
        top = q.q(0) if which == 1 else q.q(M + 1)
        out = min(out, top * M / q.Q(M + 2))
    return out


@dataclass
class RatioReport:
    part: str
    config: dict
    rows: list[RatioRow] = field(default_factory=list)

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]

    def breaches(self) -> list[str]:
        out = []
        for r in self.rows:
            rel = abs(r.hp_computed - r.hp_closed) / r.hp_closed
            if rel >= HP_REL_TOL:
                out.append(f"n_k={r.n_k}: H_p norm {r.hp_computed!r} vs closed form {r.hp_closed!r}")
            if r.identity_error >= EXACT_TOL:
                out.append(f"n_k={r.n_k}: pointwise identity off by {r.identity_error:.3e}")
            if r.ratio < r.lower_bound * (1 - EXACT_TOL):
                out.append(f"n_k={r.n_k}: ratio {r.ratio!r} below lower bound {r.lower_bound!r}")
            if not r.witnessed_c > 0:
                out.append(f"n_k={r.n_k}: witnessed constant {r.witnessed_c!r} is not positive")
        return out

    def check(self) -> None:
        problems = self.breaches()
        if problems:
            raise InvariantBreach("; ".join(problems))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RatioRow.columns())
            for r in self.rows:
                w.writerow([fmt(v) if isinstance(v, float) else v for v in asdict(r).values()])

    def to_json(self, path: str | Path) -> None:
        payload = {"part": self.part, "config": self.config, "columns": RatioRow.columns()}
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_sweep(spec: CounterexampleSpec, part: str, workers: int = 1) -> RatioReport:
    """One row per n_k; rows are independent and may run in threads."""
    if part not in ("a", "b"):
        raise ValueError("part must be 'a' or 'b'")
    row_fn = part_a_row if part == "a" else part_b_row
    config = {
        "part": part,
        **spec.describe(),
        "kachzcond1_c": witnessed_constant(spec.q, spec.base, spec.ks, 1),
        "kachzcond2_c": witnessed_constant(spec.q, spec.base, spec.ks, 2),
    }
    jobs = list(enumerate(spec.ks, start=1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: row_fn(spec, *job), jobs))
    else:
        rows = [row_fn(spec, *job) for job in jobs]
    return RatioReport(part, config, rows)
