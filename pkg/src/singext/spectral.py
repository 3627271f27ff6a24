"""Diagonal model of L, the scale of Hilbert spaces and truncated pairings.

L is stored through its first N eigenvalues.  A vector of the scale is the
array of its coefficients in the eigenbasis together with a *tail envelope*:
a finite list of monomials ``(K, a, b)`` asserting

    |u_k| <= sum K * w_k**a * k**b        for every k > N,

where ``w_k = lambda_k - z1 > 0``.  Envelopes are closed under the
operations used by the models (sums, scalar multiples, powers of L - z1,
resolvents), so every series formed from such vectors carries a computable
integral-comparison bound on the omitted terms.  ``tail=None`` means that
nothing is known beyond the truncation; vectors whose coefficients vanish
beyond N use the empty envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, SpectralPointError, TruncationError

Monomial = Tuple[float, float, float]
Envelope = Optional[Tuple[Monomial, ...]]

EXACT: Tuple[Monomial, ...] = ()

# relative distance below which z counts as a point of the spectrum
SPECTRAL_TOL = 1e-10


@dataclass(frozen=True)
class PowerLaw:
    """lambda_k = a * k**p + b."""

    a: float
    p: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError("power law needs a > 0")
        if not self.p >= 1:
            raise ConfigurationError("power law needs p >= 1")

    def eigenvalue(self, k):
        return self.a * np.asarray(k, dtype=float) ** self.p + self.b


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    eigenvalues: np.ndarray
    z1: float
    law: Optional[PowerLaw] = None
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size < 2:
            raise ConfigurationError("need at least two eigenvalues (N >= 2)")
        if not np.all(np.isfinite(lam)):
            raise ConfigurationError("eigenvalues must be finite")
        if np.any(np.diff(lam) < 0):
            raise ConfigurationError("eigenvalues must be nondecreasing")
        z1 = float(self.z1)
        if not z1 < lam[0]:
            raise ConfigurationError(
                f"reference point z1={z1} must lie below the spectrum (lambda_1={lam[0]})"
            )
        lam.setflags(write=False)
        w = lam - z1
        w.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "weights", w)

    @classmethod
    def power(cls, a: float = 1.0, p: float = 2.0, b: float = 0.0, N: int = 2000, z1: float = -1.0):
        law = PowerLaw(float(a), float(p), float(b))
        if int(N) != N or N < 2:
            raise ConfigurationError("truncation N must be an integer >= 2")
        k = np.arange(1, int(N) + 1)
        return cls(law.eigenvalue(k), z1, law)

    @classmethod
    def explicit(cls, eigenvalues: Sequence[float], z1: float):
        return cls(np.asarray(eigenvalues, dtype=float), z1, None)

    @property
    def N(self) -> int:
        return self.eigenvalues.size

    def with_truncation(self, N: int) -> "SpectralOperator":
        if self.law is None:
            raise ConfigurationError("only power-law operators can be re-truncated")
        return SpectralOperator.power(self.law.a, self.law.p, self.law.b, N, self.z1)

    def compatible(self, other: "SpectralOperator") -> bool:
        if self is other:
            return True
        return (
            self.z1 == other.z1
            and self.N == other.N
            and np.array_equal(self.eigenvalues, other.eigenvalues)
        )

    # -- bounds used by the tail envelopes ---------------------------------

    def weight_constants(self) -> Tuple[float, float]:
        """(c_lo, c_hi) with c_lo k**p <= w_k <= c_hi k**p for all k >= 1."""
        law = self.law
        beta = law.b - self.z1
        return law.a + min(beta, 0.0), law.a + max(beta, 0.0)

    def next_weight(self) -> float:
        return float(self.law.eigenvalue(self.N + 1) - self.z1)

    def vector(self, coeffs, index: int = 0, tail: Envelope = EXACT) -> "ScaleVector":
        coeffs = np.array(coeffs, dtype=complex)
        if coeffs.shape != (self.N,):
            raise ConfigurationError(f"expected {self.N} coefficients, got shape {coeffs.shape}")
        return ScaleVector(self, coeffs, index, tail)

    def basis(self, k: int, index: int = 0) -> "ScaleVector":
        """Unit coefficient at position k (1-based)."""
        e = np.zeros(self.N, dtype=complex)
        e[k - 1] = 1.0
        return ScaleVector(self, e, index, EXACT)

    def zeros(self, index: int = 0) -> "ScaleVector":
        return ScaleVector(self, np.zeros(self.N, dtype=complex), index, EXACT)


def _merge(env: Envelope) -> Envelope:
    if env is None:
        return None
    acc = {}
    for K, a, b in env:
        if K == 0:
            continue
        acc[(a, b)] = acc.get((a, b), 0.0) + K
    return tuple((K, a, b) for (a, b), K in sorted(acc.items()))


def _env_sum(e1: Envelope, e2: Envelope) -> Envelope:
    if e1 is None or e2 is None:
        return None
    return _merge(e1 + e2)


def _env_scale(env: Envelope, s: complex) -> Envelope:
    if env is None:
        return None
    s = abs(s)
    return _merge(tuple((K * s, a, b) for K, a, b in env))


def env_product(e1: Envelope, e2: Envelope) -> Envelope:
    if e1 == () or e2 == ():
        return EXACT
    if e1 is None or e2 is None:
        return None
    return _merge(tuple((K1 * K2, a1 + a2, b1 + b2) for K1, a1, b1 in e1 for K2, a2, b2 in e2))


@dataclass(frozen=True, eq=False)
class ScaleVector:
    op: SpectralOperator
    coeffs: np.ndarray
    index: int = 0
    tail: Envelope = EXACT

    def _check(self, other: "ScaleVector"):
        if not self.op.compatible(other.op):
            raise ConfigurationError("vectors belong to different operators or truncations")

    def __add__(self, other: "ScaleVector") -> "ScaleVector":
        self._check(other)
        return ScaleVector(
            self.op, self.coeffs + other.coeffs, min(self.index, other.index),
            _env_sum(self.tail, other.tail),
        )

    def __neg__(self) -> "ScaleVector":
        return ScaleVector(self.op, -self.coeffs, self.index, self.tail)

    def __sub__(self, other: "ScaleVector") -> "ScaleVector":
        return self + (-other)

    def __mul__(self, s) -> "ScaleVector":
        s = complex(s)
        return ScaleVector(self.op, s * self.coeffs, self.index, _env_scale(self.tail, s))

    __rmul__ = __mul__

    def norm(self, n: int) -> float:
        return math.sqrt(max(inner(n, self, self).real, 0.0))

    def with_index(self, index: int) -> "ScaleVector":
        return ScaleVector(self.op, self.coeffs, index, self.tail)


@dataclass(frozen=True)
class TailReport:
    partial_sum: complex
    tail_bound: float
    converged: bool

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.tail_bound)


def envelope_bound(op: SpectralOperator, env: Envelope) -> float:
    """Integral-comparison bound on sum_{k>N} of an envelope.

    Each monomial K w**a k**b is dominated by K C k**e with e = p a + b, and
    sum_{k>N} k**e <= N**(e+1) / (-e-1) for e < -1.  Returns inf when the
    operator has no analytic law or some exponent is not summable.
    """
    if env == ():
        return 0.0
    if env is None or op.law is None:
        return math.inf
    c_lo, c_hi = op.weight_constants()
    p = op.law.p
    N = op.N
    total = 0.0
    for K, a, b in env:
        e = p * a + b
        if e >= -1:
            return math.inf
        C = c_hi**a if a >= 0 else c_lo**a
        total += K * C * N ** (e + 1) / (-e - 1)
    return total


def inner(n: int, u: ScaleVector, v: ScaleVector) -> complex:
    """Scalar product of the n-th space; conjugate linear in ``u``."""
    u._check(v)
    return complex(np.sum(np.conj(u.coeffs) * v.coeffs * u.op.weights**n))


def apply_b(n: int, u: ScaleVector) -> ScaleVector:
    """Multiply by (L - z1)**n; the scale index drops by 2n."""
    if n == 0:
        return u
    tail = env_product(u.tail, ((1.0, float(n), 0.0),))
    return ScaleVector(u.op, u.coeffs * u.op.weights**n, u.index - 2 * n, tail)


def check_resolvent_point(op: SpectralOperator, z: complex, tol: float = SPECTRAL_TOL):
    dist = np.min(np.abs(op.eigenvalues - z))
    if dist <= tol * max(1.0, abs(z)):
        raise SpectralPointError(f"z={z} lies on the spectrum of L (distance {dist:.3g})")


def resolvent_tail(op: SpectralOperator, z: complex) -> Envelope:
    """Envelope of k -> 1/|lambda_k - z| for k > N, or None."""
    if op.law is None:
        return None
    w_next = op.next_weight()
    shift = abs(z - op.z1)
    if w_next <= shift:
        return None
    rho = w_next / (w_next - shift)
    return ((rho, -1.0, 0.0),)


def resolvent_L(z: complex, u: ScaleVector, tol: float = SPECTRAL_TOL) -> ScaleVector:
    """(L - z)^{-1} u; raises the scale index by 2."""
    op = u.op
    check_resolvent_point(op, z, tol)
    tail = env_product(u.tail, resolvent_tail(op, z))
    return ScaleVector(op, u.coeffs / (op.eigenvalues - z), u.index + 2, tail)


def apply_L(u: ScaleVector) -> ScaleVector:
    """L u = (L - z1) u + z1 u."""
    return apply_b(1, u) + u.op.z1 * u.with_index(u.index - 2)


def pair(phi: ScaleVector, u: ScaleVector, tol: Optional[float] = None) -> Tuple[complex, TailReport]:
    """Duality pairing sum_k conj(phi_k) u_k with a bound on the omitted terms.

    With ``tol`` given, a tail bound above it raises TruncationError.
    """
    phi._check(u)
    if phi.index + u.index < 0:
        raise ConfigurationError(
            f"pairing of indices {phi.index} and {u.index} is not defined on the scale"
        )
    value = complex(np.sum(np.conj(phi.coeffs) * u.coeffs))
    bound = envelope_bound(phi.op, env_product(phi.tail, u.tail))
    limit = tol if tol is not None else math.inf
    report = TailReport(value, bound, bound <= (tol if tol is not None else 1e-6))
    if bound > limit:
        raise TruncationError(f"pairing tail bound {bound:.3g} exceeds tolerance {tol:.3g}")
    return value, report


@dataclass(frozen=True)
class SeriesDiagnostic:
    status: str  # "converged" | "diverging" | "undetermined"
    partial_sum: float
    tail_bound: float
    window_ratio: float


def classify_series(
    op: SpectralOperator,
    terms: np.ndarray,
    env: Envelope,
    tol: float = 1e-6,
    growth: float = 0.5,
) -> SeriesDiagnostic:
    """Heuristic convergence class of a nonnegative series.

    Converged when the analytic tail bound is below ``tol``.  Otherwise the
    sums over the last two doubling windows (N/4, N/2] and (N/2, N] are
    compared; a ratio of at least ``growth`` is reported as divergence.
    """
    terms = np.asarray(terms, dtype=float)
    N = terms.size
    partial = float(np.sum(terms))
    bound = envelope_bound(op, env)
    w_prev = float(np.sum(terms[N // 4 : N // 2]))
    w_last = float(np.sum(terms[N // 2 :]))
    ratio = w_last / w_prev if w_prev > 0 else (math.inf if w_last > 0 else 0.0)
    if bound <= tol:
        status = "converged"
    elif ratio >= growth:
        status = "diverging"
    else:
        status = "undetermined"
    return SeriesDiagnostic(status, partial, bound, ratio)
