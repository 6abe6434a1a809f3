import cmath

import numpy as np
import pytest

from vilenkin.core import build_base, walsh_base


def brute_character(base, n):
    """psi_n from the defining exponential, digit by digit (no lookup tables)."""
    out = np.empty(base.size, dtype=complex)
    for i in range(base.size):
        phase = 0.0
        x, nn = i, n
        for k in range(base.N):
            phase += (nn % base.m[k]) * (x % base.m[k]) / base.m[k]
            x //= base.m[k]
            nn //= base.m[k]
        out[i] = cmath.exp(2j * cmath.pi * phase)
    return out


def character_matrix(base):
    return np.array([brute_character(base, n) for n in range(base.size)])


def naive_coefficients(values, base):
    return character_matrix(base).conj() @ values / base.size


def naive_partial_sum(coeffs, base, n):
    out = np.zeros(base.size, dtype=complex)
    for k in range(min(n, base.size)):
        out += coeffs[k] * brute_character(base, k)
    return out


def random_values(rng, base):
    return rng.normal(size=base.size) + 1j * rng.normal(size=base.size)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def walsh3():
    return walsh_base(3)


@pytest.fixture
def mixed():
    return build_base((2, 3, 4), 3)


SMALL_BASES = [
    ((2, 2, 2), 3),
    ((2, 3, 4), 3),
    ((3, 2), 2),
    ((2, 2, 2, 2), 4),
    ((5, 3), 2),
]


@pytest.fixture(params=SMALL_BASES, ids=lambda b: "m=" + "".join(map(str, b[0])))
def small_base(request):
    m, N = request.param
    return build_base(m, N)


def cesaro_number(alpha, n):
    """A_n^alpha as the falling product, A_0 = 1."""
    out = 1.0
    for j in range(1, n + 1):
        out *= (alpha + j) / j
    return out


def naive_named_mean(kind, coeffs, base, n, alpha=0.5, q=None):
    """Means assembled from brute-force partial sums and textbook formulas."""
    S = [naive_partial_sum(coeffs, base, k) for k in range(n + 1)]
    out = np.zeros(base.size, dtype=complex)
    if kind == "fejer":
        for k in range(1, n + 1):
            out += S[k]
        return out / n
    if kind == "cesaro":
        for k in range(1, n + 1):
            out += cesaro_number(alpha - 1, n - k) * S[k]
        return out / cesaro_number(alpha, n - 1)
    if kind == "u":
        for k in range(n):
            out += cesaro_number(alpha - 1, k) * S[k]
        return out / cesaro_number(alpha, n - 1)
    if kind == "v":
        total = sum(k ** (alpha - 1) for k in range(1, n))
        for k in range(1, n):
            out += k ** (alpha - 1) * S[k]
        return out / total
    if kind in ("riesz", "nlog"):
        ell = sum(1.0 / k for k in range(1, n))
        for k in range(1, n):
            out += S[k] / (k if kind == "riesz" else n - k)
        return out / ell
    if kind in ("t", "b"):
        start = 0 if kind == "t" else 1
        total = sum(q(k) for k in range(n))
        for k in range(start, n):
            out += q(k) * S[k]
        return out / total
    if kind == "norlund":
        total = sum(q(k) for k in range(n))
        for k in range(1, n + 1):
            out += q(n - k) * S[k]
        return out / total
    raise ValueError(kind)
