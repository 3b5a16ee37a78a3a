"""Exact fixed-point arithmetic with P fractional bits on Python integers.

A real is an ``int`` scaled by ``2**P``; a complex is an ``(re, im)`` pair; a
2x2 matrix is a row-major tuple of four complex pairs. The verifier's checks
run entirely in this integer arithmetic, so they are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

WIRE_BYTES = 16
MAX_P = 120


def round_shift(v: int, bits: int) -> int:
    """v / 2**bits rounded to nearest (ties toward +inf)."""
    if bits <= 0:
        return v << -bits
    return (v + (1 << (bits - 1))) >> bits


def round_div(x: int, y: int) -> int:
    """x / y rounded to nearest for y > 0."""
    return (2 * x + y) // (2 * y)


def to_fixed(x: float, P: int) -> int:
    if not math.isfinite(x):
        raise ValueError("cannot quantize a non-finite value")
    return round(math.ldexp(x, P))


def from_fixed(v: int, P: int) -> float:
    return v / (1 << P)


def cfixed(z: complex, P: int) -> tuple[int, int]:
    z = complex(z)
    return to_fixed(z.real, P), to_fixed(z.imag, P)


def cfloat(v: tuple[int, int], P: int) -> complex:
    return complex(from_fixed(v[0], P), from_fixed(v[1], P))


def mat_to_fixed(a: np.ndarray, P: int) -> tuple:
    a = np.asarray(a, dtype=complex).reshape(2, 2)
    return tuple(cfixed(a[i, j], P) for i in range(2) for j in range(2))


def mat_from_fixed(m: tuple, P: int) -> np.ndarray:
    return np.array([cfloat(m[k], P) for k in range(4)], dtype=complex).reshape(2, 2)


def cadd(a, b):
    return a[0] + b[0], a[1] + b[1]


def csub(a, b):
    return a[0] - b[0], a[1] - b[1]


def cmul_raw(a, b):
    """Product without rescaling: scale adds up."""
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def conj(a):
    return a[0], -a[1]


def trace(m) -> tuple[int, int]:
    return cadd(m[0], m[3])


def sandwich(m, alpha, beta, P: int) -> tuple[int, int]:
    """Tr(m |psi><psi|) = <psi| m |psi> for psi = (alpha, beta), rounded to P bits."""
    psi = (alpha, beta)
    acc = (0, 0)
    for j in range(2):
        for k in range(2):
            term = cmul_raw(cmul_raw(conj(psi[j]), m[2 * j + k]), psi[k])
            acc = cadd(acc, term)
    return round_shift(acc[0], 2 * P), round_shift(acc[1], 2 * P)


def within(a, b, tol: int) -> bool:
    d = csub(a, b)
    return abs(d[0]) <= tol and abs(d[1]) <= tol


def tolerance(P: int) -> int:
    """tau = 2^(-P/2) in fixed-point units, i.e. floor(2^(P/2))."""
    return math.isqrt(1 << P)


@dataclass(frozen=True)
class ChallengeState:
    """Single-qubit state (alpha, beta) in P-bit fixed point."""

    alpha: tuple
    beta: tuple
    P: int

    def vector(self) -> np.ndarray:
        return np.array([cfloat(self.alpha, self.P), cfloat(self.beta, self.P)])

    def ints(self) -> tuple[int, int, int, int]:
        return (*self.alpha, *self.beta)

    def norm_error(self) -> float:
        """| |alpha|^2 + |beta|^2 - 1 | computed exactly."""
        sq = sum(v * v for v in self.ints())
        return abs(sq - (1 << (2 * self.P))) / float(1 << (2 * self.P))


def sample_challenge(rng: np.random.Generator, P: int) -> ChallengeState:
    """Haar-random qubit state, normalized exactly in integer arithmetic then rounded to P bits."""
    if not 1 <= P <= MAX_P:
        raise ValueError(f"precision must lie in [1, {MAX_P}]")
    g = rng.standard_normal(4)
    guard = P + 16
    ints = [round(math.ldexp(float(x), guard)) for x in g]
    norm_sq = sum(v * v for v in ints)
    if norm_sq == 0:  # pragma: no cover - probability zero
        ints, norm_sq = [1 << guard, 0, 0, 0], 1 << (2 * guard)
    extra = P + 8
    root = math.isqrt(norm_sq << (2 * extra))
    q = [round_div(v << (P + extra), root) for v in ints]
    return ChallengeState((q[0], q[1]), (q[2], q[3]), P)
