"""Model Gram matrices and the admissibility conditions of both models.

Singular coordinates are indexed by alpha = (sigma, j) with sigma in
0..d-1 and j in 1..m; the flat position is ``sigma * m + (j - 1)``, so the
block-diagonal Jordan matrix M_d acts blockwise per sigma.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import ConfigurationError, ConsistencyError

# relative tolerance of entrywise equality tests (scaled by max |G|)
EQ_TOL = 1e-12


def flat(sigma: int, j: int, m: int) -> int:
    return sigma * m + (j - 1)


def label(sigma: int, j: int) -> str:
    return f"({sigma + 1},{j})"


def eta(c, m: int) -> np.ndarray:
    """Coordinates of h_m(c): c placed in the j = m slots."""
    c = np.asarray(c, dtype=complex)
    out = np.zeros(c.size * m, dtype=complex)
    out[m - 1 :: m] = c
    return out


def block_m(x, m: int) -> np.ndarray:
    """The entries [x]_{sigma m} of a coordinate vector (or rows of a matrix)."""
    return np.asarray(x)[m - 1 :: m]


def build_M(m: int, z1: float) -> np.ndarray:
    """Jordan block at z1: z1 on the diagonal, ones on the superdiagonal."""
    if m < 1:
        raise ConfigurationError("order m must be >= 1")
    return z1 * np.eye(m) + np.diag(np.ones(m - 1), 1)


def build_Md(m: int, d: int, z1: float) -> np.ndarray:
    return np.kron(np.eye(d), build_M(m, z1))


@dataclass(frozen=True)
class Admissibility:
    hermitian: bool
    invertible: bool
    gacomm: bool
    a2: bool
    min_positive: bool

    def as_dict(self):
        return {
            "hermitian": self.hermitian,
            "invertible": self.invertible,
            "gacomm": self.gacomm,
            "a2": self.a2,
            "minPositive": self.min_positive,
        }


@dataclass(frozen=True, eq=False)
class GramSpec:
    """Gram matrix of the A-model together with its (m, d) shape."""

    GA: np.ndarray
    m: int
    d: int
    flags: Admissibility = field(init=False)

    def __post_init__(self):
        G = np.array(self.GA, dtype=complex)
        md = self.m * self.d
        if G.shape != (md, md):
            raise ConfigurationError(f"Gram matrix must be {md}x{md}, got {G.shape}")
        G.setflags(write=False)
        object.__setattr__(self, "GA", G)
        object.__setattr__(self, "flags", admissibility(G, self.m, self.d))

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.GA)))

    @property
    def G_min(self) -> np.ndarray:
        """[G_A]_{sigma m, sigma' m}."""
        m = self.m
        return self.GA[m - 1 :: m, m - 1 :: m]

    @property
    def X(self) -> np.ndarray:
        """md x d column block [G_A]_{alpha, sigma m}: <[G d]_m, c> = <d, X c>."""
        return self.GA[:, self.m - 1 :: self.m]

    def bracket_m(self, coords) -> np.ndarray:
        return block_m(self.GA @ np.asarray(coords, dtype=complex), self.m)

    def solve(self, rhs) -> np.ndarray:
        return np.linalg.solve(self.GA, rhs)


def _is_hermitian(G, tol):
    return bool(np.max(np.abs(G - G.conj().T), initial=0.0) <= tol)


def admissibility(G: np.ndarray, m: int, d: int) -> Admissibility:
    scale = float(np.max(np.abs(G), initial=0.0))
    tol = EQ_TOL * max(scale, 1.0)
    herm = _is_hermitian(G, tol)
    sv = np.linalg.svd(G, compute_uv=False)
    invertible = bool(sv.size and sv[-1] > 1e-10 * sv[0])
    gacomm, _ = check_gacomm(G, m, d)
    a2, _ = check_a2(G, m, d)
    Gmin = G[m - 1 :: m, m - 1 :: m]
    Gmin_h = (Gmin + Gmin.conj().T) / 2
    min_pos = bool(herm and np.linalg.eigvalsh(Gmin_h)[0] > tol)
    return Admissibility(herm, invertible, gacomm, a2, min_pos)


def build_GM(G, M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """G_M = G_A M_d and the boundary-form defect block G_M - G_M^*."""
    G = np.asarray(getattr(G, "GA", G), dtype=complex)
    m = M.shape[0]
    Md = np.kron(np.eye(G.shape[0] // m), M)
    GM = G @ Md
    return GM, GM - GM.conj().T


def check_gacomm(G, m: int, d: int) -> Tuple[bool, List[str]]:
    """The three entry families making G_M Hermitian (vacuous for m = 1).

    Returns the flag and the violated entries, named (sigma,j;sigma',j').
    """
    G = np.asarray(getattr(G, "GA", G), dtype=complex)
    tol = EQ_TOL * max(float(np.max(np.abs(G), initial=0.0)), 1.0)
    bad: List[str] = []
    if m == 1:
        return True, bad
    for s in range(d):
        for t in range(d):
            for j in range(1, m + 1):
                for jp in range(j + 1, m + 1):
                    if abs(G[flat(s, j, m), flat(t, jp, m)] - G[flat(s, jp, m), flat(t, j, m)]) > tol:
                        bad.append(f"symmetry {label(s, j)};{label(t, jp)}")
            for j in range(1, m):
                for jp in range(1, m - j + 1):
                    if abs(G[flat(s, j, m), flat(t, jp, m)]) > tol:
                        bad.append(f"zero {label(s, j)};{label(t, jp)}")
            for j in range(1, m):
                if abs(G[flat(s, j, m), flat(t, m, m)] - G[flat(s, j + 1, m), flat(t, m - 1, m)]) > tol:
                    bad.append(f"shift {label(s, j)};{label(t, m)}")
    return not bad, bad


def check_a2(G, m: int, d: int) -> Tuple[bool, List[str]]:
    """[G]_{sigma,m-1; sigma' m} = [G]_{sigma m; sigma',m-1} (vacuous for m = 1)."""
    G = np.asarray(getattr(G, "GA", G), dtype=complex)
    tol = EQ_TOL * max(float(np.max(np.abs(G), initial=0.0)), 1.0)
    bad: List[str] = []
    if m == 1:
        return True, bad
    for s in range(d):
        for t in range(d):
            lhs = G[flat(s, m - 1, m), flat(t, m, m)]
            rhs = G[flat(s, m, m), flat(t, m - 1, m)]
            if abs(lhs - rhs) > tol:
                bad.append(f"a2 {label(s, m - 1)};{label(t, m)}")
    return not bad, bad


@dataclass(frozen=True)
class BModelReport:
    ok: bool
    a2: bool
    min_positive: bool
    min_eigenvalue: float
    violations: List[str]


def check_bmodel(G, m: int, d: int) -> BModelReport:
    G = np.asarray(getattr(G, "GA", G), dtype=complex)
    a2, bad = check_a2(G, m, d)
    Gmin = G[m - 1 :: m, m - 1 :: m]
    lo = float(np.linalg.eigvalsh((Gmin + Gmin.conj().T) / 2)[0])
    tol = EQ_TOL * max(float(np.max(np.abs(G), initial=0.0)), 1.0)
    pos = lo > tol
    if not pos:
        bad = bad + [f"G_min not positive definite (smallest eigenvalue {lo:.3g})"]
    return BModelReport(a2 and pos, a2, pos, lo, bad)


def ring_matrix(G, m: int) -> np.ndarray:
    """[ring G]_{sigma j, sigma' j'} = [G]_{sigma, j-1; sigma' j'} for j >= 2, else 0."""
    G = np.asarray(getattr(G, "GA", G), dtype=complex)
    R = np.zeros_like(G)
    for row in range(G.shape[0]):
        if row % m != 0:
            R[row] = G[row - 1]
    return R


def solve_compatibility(xi, G: GramSpec, z1: float, tol: float = 1e-10) -> np.ndarray:
    """xi' with G_M^* xi = G_A xi', from xi' = (z1 + G_A^{-1} ring(G)) xi.

    The residual is verified against the direct product G_M^* xi.
    """
    xi = np.asarray(xi, dtype=complex)
    m = G.m
    xi_p = z1 * xi + G.solve(ring_matrix(G.GA, m) @ xi)
    GM, _ = build_GM(G.GA, build_M(m, z1))
    resid = np.linalg.norm(GM.conj().T @ xi - G.GA @ xi_p)
    scale = max(np.linalg.norm(GM) * np.linalg.norm(xi), 1.0)
    if resid > tol * scale:
        raise ConsistencyError(f"compatibility residual {resid:.3g} above tolerance")
    return xi_p


def antitriangular_gram(hankel, m: int) -> np.ndarray:
    """Block Hankel Gram matrix vanishing above the main anti-diagonal.

    ``hankel`` has shape (d, d, m): entry [s, t, i] is the common value of
    [G]_{s j; t j'} on the anti-diagonal j + j' = m + 1 + i.  The blocks
    must satisfy hankel[t, s] = conj(hankel[s, t]).  Every such matrix
    satisfies the gacomm entry families, and it is invertible iff hankel[:, :, 0]
    is.
    """
    H = np.asarray(hankel, dtype=complex)
    if H.ndim == 1:
        H = H.reshape(1, 1, -1)
    d = H.shape[0]
    if H.shape != (d, d, m):
        raise ConfigurationError(f"hankel parameters must have shape (d, d, {m})")
    if np.max(np.abs(H - np.conj(np.transpose(H, (1, 0, 2))))) > EQ_TOL * max(1.0, np.max(np.abs(H))):
        raise ConfigurationError("hankel parameters must be Hermitian in (sigma, sigma')")
    G = np.zeros((m * d, m * d), dtype=complex)
    for s in range(d):
        for t in range(d):
            for j in range(1, m + 1):
                for jp in range(1, m + 1):
                    i = j + jp - (m + 1)
                    if i >= 0:
                        G[flat(s, j, m), flat(t, jp, m)] = H[s, t, i]
    return G
