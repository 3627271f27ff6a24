"""Singular elements and the model spaces H_A = H_m + K_A.

Elements of K_A are never formed as divergent series.  They are carried by
their coordinates d(k) in C^{md} with respect to the basis h_{sigma j},
and only meet the regular part through closed formulas.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError
from .gram import GramSpec, block_m, eta
from .spectral import (
    ScaleVector,
    SeriesDiagnostic,
    SpectralOperator,
    apply_b,
    classify_series,
    env_product,
    inner,
    pair,
    resolvent_L,
)

__all__ = [
    "GramSpec",
    "ModelVector",
    "PerpBasis",
    "SingularFamily",
    "coords_from_pairings",
    "coords_of_combination",
    "eta",
    "h_perp_basis",
    "krein_q",
    "metric",
    "perp_part",
    "phi_map",
]

RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SingularFamily:
    """d linearly independent functionals phi_sigma of class H_{-m-2} minus H_{-m-1}."""

    op: SpectralOperator
    m: int
    phi: Tuple[ScaleVector, ...]
    law: str = "explicit"

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError("order m must be >= 1")
        if not self.phi:
            raise ConfigurationError("need at least one functional (d >= 1)")
        for p in self.phi:
            if not p.op.compatible(self.op):
                raise ConfigurationError("functional built on a different operator")
        P = np.array([p.coeffs for p in self.phi])
        w = self.op.weights ** (-self.m - 2)
        gram = (P.conj() * w) @ P.T
        sv = np.linalg.svd(gram, compute_uv=False)
        if not sv[-1] > RANK_TOL * sv[0]:
            raise ConfigurationError("functionals are linearly dependent at this truncation")

    @property
    def d(self) -> int:
        return len(self.phi)

    @classmethod
    def power_law(
        cls,
        op: SpectralOperator,
        m: int,
        d: int = 1,
        scales: Optional[Sequence[float]] = None,
        gamma: Optional[float] = None,
        delta: float = 0.5,
    ) -> "SingularFamily":
        """phi_{sigma,k} = s_sigma w_k**gamma k**(-delta), phase-modulated for d >= 2.

        The defaults gamma = (m+1)/2, delta = 1/2 give sum |phi|^2 w^{-m-2}
        finite and sum |phi|^2 w^{-m-1} harmonic; with lambda_k = k^2 and
        z1 = -1 this is the reference fixture.  For d >= 2 the sigma-th
        functional carries the unimodular phase exp(2 pi i sigma k/(d+1)).
        """
        if d < 1:
            raise ConfigurationError("rank d must be >= 1")
        gamma = (m + 1) / 2 if gamma is None else float(gamma)
        scales = [1.0] * d if scales is None else [float(s) for s in scales]
        if len(scales) != d:
            raise ConfigurationError("need one scale per functional")
        k = np.arange(1, op.N + 1)
        base = op.weights**gamma * k ** (-float(delta))
        phis = []
        for sigma in range(1, d + 1):
            phase = np.exp(2j * np.pi * sigma * k / (d + 1)) if d >= 2 else 1.0
            tail = ((abs(scales[sigma - 1]), gamma, -float(delta)),) if op.law is not None else None
            phis.append(ScaleVector(op, scales[sigma - 1] * base * phase, -m - 2, tail))
        return cls(op, m, tuple(phis), "power")

    @classmethod
    def explicit(cls, op: SpectralOperator, m: int, coeffs) -> "SingularFamily":
        """Functionals given by their first N coefficients; nothing is known beyond."""
        C = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        return cls(op, m, tuple(ScaleVector(op, row, -m - 2, None) for row in C), "explicit")

    # -- singular elements -----------------------------------------------

    def h(self, sigma: int, j: int) -> ScaleVector:
        """h_{sigma j} = (L - z1)^{-j} phi_sigma, sigma 0-based, 1 <= j <= m+1."""
        if not 1 <= j <= self.m + 1:
            raise ConfigurationError(f"j must lie in 1..{self.m + 1}")
        return apply_b(-j, self.phi[sigma])

    def h_comb(self, c, j: int) -> ScaleVector:
        """sum_sigma c_sigma h_{sigma j}."""
        c = np.asarray(c, dtype=complex)
        out = self.h(0, j) * c[0]
        for s in range(1, self.d):
            out = out + self.h(s, j) * c[s]
        return out

    def h_m(self, c) -> ScaleVector:
        return self.h_comb(c, self.m)

    def h_m1(self, c) -> ScaleVector:
        return self.h_comb(c, self.m + 1)

    def pair_phi(self, u: ScaleVector, tol: Optional[float] = None) -> Tuple[np.ndarray, float]:
        """<phi, u> in C^d and the largest tail bound among its entries."""
        vals, bounds = [], []
        for p in self.phi:
            v, rep = pair(p, u, tol)
            vals.append(v)
            bounds.append(rep.tail_bound)
        return np.array(vals), max(bounds)

    # -- Gram matrices of the generating vectors -------------------------

    def gram_tilde(self, tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """<h_alpha, h_alpha'>_{-m} and the entrywise tail bounds."""
        m, d = self.m, self.d
        hs = [self.h(s, j) for s in range(d) for j in range(1, m + 1)]
        G = np.zeros((m * d, m * d), dtype=complex)
        T = np.zeros((m * d, m * d))
        for a, ha in enumerate(hs):
            for b in range(a, m * d):
                v, rep = pair(ha, apply_b(-m, hs[b]), tol)
                G[a, b], T[a, b] = v, rep.tail_bound
                G[b, a], T[b, a] = np.conj(v), rep.tail_bound
        return G, T

    def gram_tilde_min(self, tol: Optional[float] = None) -> np.ndarray:
        G, _ = self.gram_tilde(tol)
        return G[self.m - 1 :: self.m, self.m - 1 :: self.m]

    def gram_spec(self) -> GramSpec:
        return GramSpec(self.gram_tilde()[0], self.m, self.d)

    def membership(self, tol: float = 1e-6, growth: float = 0.5) -> List[Tuple[SeriesDiagnostic, SeriesDiagnostic]]:
        """Per functional: (class H_{-m-2} series, class H_{-m-1} series).

        The expected outcome is ("converged", "diverging").
        """
        out = []
        for p in self.phi:
            sq = np.abs(p.coeffs) ** 2
            env2 = env_product(p.tail, p.tail)
            res = []
            for s in (-self.m - 2, -self.m - 1):
                env = env_product(env2, ((1.0, float(s), 0.0),))
                res.append(classify_series(self.op, sq * self.op.weights**s, env, tol, growth))
            out.append(tuple(res))
        return out


def krein_q(fam: SingularFamily, z: complex, tol: Optional[float] = None) -> Tuple[np.ndarray, float]:
    """[q(z)]_{sigma sigma'} = (z - z1) <phi_sigma, (L - z)^{-1} h_{sigma', m+1}>.

    Returns the d x d value and the largest entrywise tail bound.
    """
    d, m = fam.d, fam.m
    factor = z - fam.op.z1
    Q = np.zeros((d, d), dtype=complex)
    worst = 0.0
    for t in range(d):
        g = resolvent_L(z, fam.h(t, m + 1))
        for s in range(d):
            v, rep = pair(fam.phi[s], g, tol)
            Q[s, t] = factor * v
            worst = max(worst, abs(factor) * rep.tail_bound)
    return Q, worst


def coords_from_pairings(fam: SingularFamily, data, G_tilde: Optional[np.ndarray] = None) -> np.ndarray:
    """d(k) = G_tilde^{-1} <h, k>_{-m}."""
    if G_tilde is None:
        G_tilde = fam.gram_tilde()[0]
    cond = np.linalg.cond(G_tilde)
    if cond > 1e12:
        warnings.warn(f"ill-conditioned generating Gram matrix (cond {cond:.2e})", RuntimeWarning)
    return np.linalg.solve(G_tilde, np.asarray(data, dtype=complex))


def coords_of_combination(fam: SingularFamily, c) -> np.ndarray:
    """Round trip: build k = sum c_alpha h_alpha, pair against every h_alpha, solve."""
    c = np.asarray(c, dtype=complex)
    m, d = fam.m, fam.d
    hs = [fam.h(s, j) for s in range(d) for j in range(1, m + 1)]
    k = fam.op.zeros(-m)
    for ca, ha in zip(c, hs):
        k = k + ha * ca
    data = np.array([inner(-m, ha, k) for ha in hs])
    return coords_from_pairings(fam, data)


@dataclass(frozen=True, eq=False)
class ModelVector:
    """f + k in H_m + K_A: regular coefficients and singular coordinates."""

    regular: ScaleVector
    singular: np.ndarray

    def __add__(self, other: "ModelVector") -> "ModelVector":
        return ModelVector(self.regular + other.regular, self.singular + other.singular)

    def __sub__(self, other: "ModelVector") -> "ModelVector":
        return ModelVector(self.regular - other.regular, self.singular - other.singular)

    def __neg__(self) -> "ModelVector":
        return ModelVector(-self.regular, -self.singular)

    def __mul__(self, s) -> "ModelVector":
        return ModelVector(self.regular * s, complex(s) * self.singular)

    __rmul__ = __mul__

    @classmethod
    def zero(cls, op: SpectralOperator, m: int, d: int) -> "ModelVector":
        return cls(op.zeros(m), np.zeros(m * d, dtype=complex))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.regular.coeffs)), np.max(np.abs(self.singular), initial=0.0)))


def metric(f: ModelVector, g: ModelVector, G: GramSpec) -> complex:
    """[f, g]_A = <f_reg, g_reg>_m + <d(f), G_A d(g)>."""
    if f.singular.shape != g.singular.shape or f.singular.shape != (G.m * G.d,):
        raise ConfigurationError("coordinate vectors do not match the Gram matrix")
    return inner(G.m, f.regular, g.regular) + complex(np.vdot(f.singular, G.GA @ g.singular))


@dataclass(frozen=True)
class PerpBasis:
    vectors: np.ndarray  # md x r, columns are coordinate vectors
    orthonormal: bool
    indefinite: bool

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def h_perp_basis(G: GramSpec) -> PerpBasis:
    """Coordinates spanning H_A^perp = {k : [G_A d(k)]_m = 0}.

    The basis is orthonormalized for <d, G_A d'> when that form is positive
    on the subspace; otherwise a raw orthonormal (Euclidean) null-space
    basis is returned and flagged indefinite.
    """
    md = G.m * G.d
    if G.m == 1:
        return PerpBasis(np.zeros((md, 0), dtype=complex), True, False)
    rows = block_m(G.GA, G.m)
    _, s, vh = np.linalg.svd(rows)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size else 0
    N = vh[rank:].conj().T
    form = N.conj().T @ G.GA @ N
    form = (form + form.conj().T) / 2
    ev = np.linalg.eigvalsh(form)
    if ev.size and ev[0] > RANK_TOL * max(1.0, abs(ev[-1])):
        L = np.linalg.cholesky(form)
        return PerpBasis(N @ np.linalg.inv(L).conj().T, True, False)
    return PerpBasis(N, False, bool(ev.size))


def phi_map(coords, G: GramSpec) -> np.ndarray:
    """Phi(k) = (G_min)^{-1} [G_A d(k)]_m."""
    Gmin = G.G_min
    sv = np.linalg.svd(Gmin, compute_uv=False)
    if not sv[-1] > RANK_TOL * max(sv[0], 1e-300):
        raise ConfigurationError("G_min is singular")
    return np.linalg.solve(Gmin, G.bracket_m(coords))


def perp_part(coords, G: GramSpec) -> np.ndarray:
    """d - eta(Phi(d)), the H_A^perp component of a coordinate vector."""
    coords = np.asarray(coords, dtype=complex)
    return coords - eta(phi_map(coords, G), G.m)


def regular_zero_model(fam: SingularFamily) -> ModelVector:
    return ModelVector.zero(fam.op, fam.m, fam.d)
