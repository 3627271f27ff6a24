"""Extension theory in the Pontryagin model H_A.

Elements of dom A_max are kept in the decomposed form f# + h_{m+1}(c) + k
(``DomainElementA``); boundary values are read off that decomposition and
never recovered from coefficient arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ConditionError, ConfigurationError, ConsistencyError, ExtensionSpectrumError, PoleError
from .gram import GramSpec, build_GM, build_M, build_Md, eta, solve_compatibility
from .model_space import ModelVector, SingularFamily, krein_q, metric
from .spectral import ScaleVector, apply_L, resolvent_L

POLE_TOL = 1e-12


@dataclass(frozen=True)
class ThetaRelation:
    """Linear relation {(X u, Y u) : u in C^d} in C^d."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=complex))
        Y = np.atleast_2d(np.asarray(self.Y, dtype=complex))
        if X.shape != Y.shape or X.shape[0] != X.shape[1]:
            raise ConfigurationError("X and Y must be square matrices of equal size")
        if np.linalg.matrix_rank(np.vstack([X, Y])) != X.shape[0]:
            raise ConfigurationError("[X; Y] must have full column rank")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def d(self) -> int:
        return self.X.shape[0]

    @classmethod
    def zero(cls, d: int) -> "ThetaRelation":
        """{0} x C^d, the parameter of A_0 and B_0."""
        return cls(np.zeros((d, d)), np.eye(d))

    @classmethod
    def scalar(cls, theta, d: int = 1) -> "ThetaRelation":
        """Graph of a matrix theta (a number is taken as theta * I)."""
        T = np.asarray(theta, dtype=complex)
        if T.ndim == 0:
            T = T * np.eye(d)
        return cls(np.eye(T.shape[0]), T)

    @property
    def self_adjoint(self) -> bool:
        P = self.X.conj().T @ self.Y
        return bool(np.allclose(P, P.conj().T, atol=1e-12 * max(1.0, np.max(np.abs(P)))))

    def inverse_shift(self, M: np.ndarray) -> np.ndarray:
        """(Theta - M)^{-1} = X (Y - M X)^{-1}."""
        S = self.Y - M @ self.X
        if np.linalg.cond(S) > 1e13:
            raise ExtensionSpectrumError("Y - M(z) X is singular: z is in the spectrum of the extension")
        return self.X @ np.linalg.inv(S)

    def contains(self, a, b, tol: float = 1e-8) -> bool:
        """(a, b) in Theta, relative least-squares residual test."""
        rhs = np.concatenate([np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)])
        A = np.vstack([self.X, self.Y])
        u, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        return bool(np.linalg.norm(A @ u - rhs) <= tol * max(1.0, np.linalg.norm(rhs)))


@dataclass(frozen=True, eq=False)
class DomainElementA:
    """f = f# + h_{m+1}(c) + k with f# in H_{m+2}, c in C^d, k given by d(k)."""

    f_sharp: ScaleVector
    c: np.ndarray
    k: np.ndarray

    def __add__(self, other: "DomainElementA") -> "DomainElementA":
        return DomainElementA(self.f_sharp + other.f_sharp, self.c + other.c, self.k + other.k)

    def __mul__(self, s) -> "DomainElementA":
        s = complex(s)
        return DomainElementA(self.f_sharp * s, s * self.c, s * self.k)

    __rmul__ = __mul__


@dataclass(frozen=True)
class WeylSample:
    z: complex
    q: np.ndarray
    r: np.ndarray
    M: np.ndarray
    tail_bound: float = 0.0


@dataclass(frozen=True)
class BoundaryForm:
    direct: complex
    formula: complex
    defect: complex
    green: complex

    @property
    def residual(self) -> float:
        return abs(self.direct - self.formula)


def check_not_pole(z: complex, z1: float):
    if abs(z - z1) <= POLE_TOL * max(1.0, abs(z1)):
        raise PoleError(f"z={z} coincides with the model parameter z1={z1}")


def eval_r(z: complex, G: GramSpec, z1: float) -> np.ndarray:
    """[r(z)]_{sigma sigma'} = -sum_j [G_A]_{sigma m, sigma' j} / (z - z1)^{m-j+1}."""
    check_not_pole(z, z1)
    m, d = G.m, G.d
    zeta = z - z1
    rows = G.GA[m - 1 :: m]  # d x md
    powers = np.array([zeta ** -(m - j + 1) for j in range(1, m + 1)])
    return -(rows.reshape(d, d, m) * powers).sum(axis=2)


def gamma_coords(z: complex, c, m: int, z1: float) -> np.ndarray:
    """Singular coordinates c_{sigma'} (z - z1)^{-(m-j'+1)} of the defect element."""
    check_not_pole(z, z1)
    c = np.asarray(c, dtype=complex)
    powers = np.array([(z - z1) ** -(m - j + 1) for j in range(1, m + 1)])
    return np.kron(c, powers)


class AModel:
    def __init__(self, fam: SingularFamily, gram: GramSpec, require_gacomm: bool = False):
        if (gram.m, gram.d) != (fam.m, fam.d):
            raise ConfigurationError("Gram matrix shape does not match (m, d) of the family")
        flags = gram.flags
        if not (flags.hermitian and flags.invertible):
            raise ConditionError("the A-model needs an invertible Hermitian Gram matrix")
        if require_gacomm and not flags.gacomm:
            raise ConditionError("Gram matrix violates the gacomm conditions")
        self.fam = fam
        self.G = gram
        self.op = fam.op
        self.m, self.d = fam.m, fam.d
        self.z1 = fam.op.z1
        self.Md = build_Md(self.m, self.d, self.z1)
        self.GM, self.defect = build_GM(gram.GA, build_M(self.m, self.z1))

    @property
    def boundary_triple(self) -> bool:
        """G_M Hermitian: Gamma is then a boundary triple for A_max."""
        return bool(np.max(np.abs(self.defect), initial=0.0) <= 1e-12 * max(1.0, self.G.scale))

    @property
    def weyl_symmetric(self) -> bool:
        """[G_A]_{sigma m, sigma' j} = [G_A]_{sigma j, sigma' m} for all j.

        This is what makes r(conj z) = r(z)^*; it holds for the generating
        Gram matrix and under the gacomm conditions, not for every Hermitian G_A.
        """
        m, d = self.m, self.d
        # T[s, t, j] = G[(s, m), (t, j)] and U[s, t, j] = G[(s, j), (t, m)]
        T = self.G.GA[m - 1 :: m, :].reshape(d, d, m)
        U = self.G.GA[:, m - 1 :: m].reshape(d, m, d).transpose(0, 2, 1)
        return bool(np.max(np.abs(T - U)) <= 1e-12 * max(1.0, self.G.scale))

    def _require_triple(self):
        if not self.boundary_triple:
            raise ConditionError("G_M is not Hermitian, the resolvent formula does not apply")

    # -- elements -----------------------------------------------------------

    def element(self, f_sharp: Optional[ScaleVector] = None, c=None, k=None) -> DomainElementA:
        f_sharp = self.op.zeros(self.m + 2) if f_sharp is None else f_sharp
        c = np.zeros(self.d, dtype=complex) if c is None else np.asarray(c, dtype=complex)
        k = np.zeros(self.m * self.d, dtype=complex) if k is None else np.asarray(k, dtype=complex)
        return DomainElementA(f_sharp, c, k)

    def vector(self, x: DomainElementA) -> ModelVector:
        return ModelVector(x.f_sharp + self.fam.h_m1(x.c), x.k)

    def apply_max(self, x: DomainElementA) -> ModelVector:
        reg = apply_L(x.f_sharp) + self.z1 * self.fam.h_m1(x.c)
        return ModelVector(reg, self.Md @ x.k + eta(x.c, self.m))

    def apply_max_prime(self, x: DomainElementA) -> ModelVector:
        reg = apply_L(x.f_sharp) + self.z1 * self.fam.h_m1(x.c)
        k_p = solve_compatibility(x.k, self.G, self.z1)
        return ModelVector(reg, k_p + eta(x.c, self.m))

    def gamma0(self, x: DomainElementA) -> np.ndarray:
        return np.array(x.c, dtype=complex)

    def gamma1(self, x: DomainElementA, tol: Optional[float] = None) -> np.ndarray:
        val, _ = self.fam.pair_phi(x.f_sharp, tol)
        return val - self.G.bracket_m(x.k)

    def boundary_form(self, x: DomainElementA, y: DomainElementA, rtol: float = 1e-9) -> BoundaryForm:
        """[f, A g] - [A f, g] directly, and through defect + boundary values."""
        f, g = self.vector(x), self.vector(y)
        direct = metric(f, self.apply_max(y), self.G) - metric(self.apply_max(x), g, self.G)
        defect = complex(np.vdot(x.k, self.defect @ y.k))
        g0x, g1x, g0y, g1y = self.gamma0(x), self.gamma1(x), self.gamma0(y), self.gamma1(y)
        green = complex(np.vdot(g0x, g1y) - np.vdot(g1x, g0y))
        res = BoundaryForm(direct, defect + green, defect, green)
        scale = max(1.0, abs(defect), abs(green), f.max_abs() * g.max_abs())
        if res.residual > rtol * scale:
            raise ConsistencyError(f"boundary form mismatch {res.residual:.3g}")
        return res

    def adjoint_identity(self, x: DomainElementA, y: DomainElementA) -> Tuple[complex, complex]:
        """Both sides of [f, g'] - [A_max f, g] = <G0 f, chi'> - <G1 f, chi>.

        (g, g') is taken from A'_max and (chi, chi') = (Gamma_0 y, Gamma_1 y).
        """
        lhs = metric(self.vector(x), self.apply_max_prime(y), self.G) - metric(self.apply_max(x), self.vector(y), self.G)
        rhs = complex(np.vdot(self.gamma0(x), self.gamma1(y)) - np.vdot(self.gamma1(x), self.gamma0(y)))
        return lhs, rhs

    # -- Weyl function --------------------------------------------------------

    def q(self, z: complex):
        return krein_q(self.fam, z)

    def r(self, z: complex) -> np.ndarray:
        return eval_r(z, self.G, self.z1)

    def weyl(self, z: complex) -> WeylSample:
        Q, tb = self.q(z)
        R = self.r(z)
        return WeylSample(z, Q, R, Q + R, tb)

    def gamma(self, z: complex, c) -> DomainElementA:
        """Defect element gamma(z) c written in dom A_max form.

        (L - z)^{-1} h_m(c) = h_{m+1}(c) + (z - z1)(L - z)^{-1} h_{m+1}(c).
        """
        c = np.asarray(c, dtype=complex)
        k = gamma_coords(z, c, self.m, self.z1)
        f_sharp = (z - self.z1) * resolvent_L(z, self.fam.h_m1(c))
        return DomainElementA(f_sharp, c, k)

    def gamma_vector(self, z: complex, c) -> ModelVector:
        """gamma(z) c as (L - z)^{-1} h_m(c) plus coordinates."""
        reg = resolvent_L(z, self.fam.h_m(c))
        return ModelVector(reg, gamma_coords(z, c, self.m, self.z1))

    def gamma_adjoint(self, w: complex, v: ModelVector) -> np.ndarray:
        """gamma(w)^* v, componentwise [gamma(w) e_sigma, v]_A."""
        return np.array([metric(self.gamma_vector(w, e), v, self.G) for e in np.eye(self.d)])

    # -- resolvents -----------------------------------------------------------

    def resolvent_A0(self, z: complex, v: ModelVector) -> DomainElementA:
        check_not_pole(z, self.z1)
        f_sharp = resolvent_L(z, v.regular).with_index(self.m + 2)
        k = np.linalg.solve(self.Md - z * np.eye(self.m * self.d), v.singular)
        return DomainElementA(f_sharp, np.zeros(self.d, dtype=complex), k)

    def gamma_adjoint_boundary(self, z: complex, v: ModelVector) -> np.ndarray:
        """Gamma_1 (A_0 - z)^{-1} v; equals gamma(conj z)^* v for a boundary triple."""
        return self.gamma1(self.resolvent_A0(z, v))

    def resolvent(self, z: complex, theta: ThetaRelation, v: ModelVector) -> DomainElementA:
        """(A_Theta - z)^{-1} v by the Krein-Naimark formula."""
        self._require_triple()
        base = self.resolvent_A0(z, v)
        w = self.weyl(z)
        T = theta.inverse_shift(w.M)
        s = T @ self.gamma_adjoint(np.conj(z), v)
        return base + self.gamma(z, s)

    def compressed_resolvent(self, z: complex, theta: ThetaRelation, f: ScaleVector) -> ScaleVector:
        """Projection to H_m of (A_Theta - z)^{-1} restricted to H_m."""
        self._require_triple()
        base = resolvent_L(z, f)
        pairing, _ = self.fam.pair_phi(base)
        s = theta.inverse_shift(self.weyl(z).M) @ pairing
        return (base + resolvent_L(z, self.fam.h_m(s))).with_index(self.m)
