"""The B-model: the relation B_max over H_A^min plus the multivalued part H_A^perp.

A graph element of B_max is carried by four data (f#, c, chi, k_perp):

    f  = f# + h_{m+1}(c) + h_m(chi)
    f' = L f# + z1 h_{m+1}(c) + k~ + k_perp,   d(k~) = M_d eta(chi) + eta(c),

with k_perp constrained to H_A^perp.  Relations are never materialized;
everything below works on those four data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .amodel import ThetaRelation, WeylSample, check_not_pole
from .errors import ConditionError, ConfigurationError, ConsistencyError, DomainError, PoleError
from .gram import GramSpec, build_GM, build_M, build_Md, check_bmodel, eta
from .model_space import ModelVector, SingularFamily, h_perp_basis, krein_q, metric, phi_map
from .spectral import ScaleVector, apply_L, resolvent_L

PERP_TOL = 1e-10
ANCHOR = 2j


@dataclass(frozen=True, eq=False)
class BmaxGraphElement:
    f_sharp: ScaleVector
    c: np.ndarray
    chi: np.ndarray
    k_perp: np.ndarray

    def __add__(self, other: "BmaxGraphElement") -> "BmaxGraphElement":
        return BmaxGraphElement(
            self.f_sharp + other.f_sharp, self.c + other.c, self.chi + other.chi, self.k_perp + other.k_perp
        )

    def __mul__(self, s) -> "BmaxGraphElement":
        s = complex(s)
        return BmaxGraphElement(self.f_sharp * s, s * self.c, s * self.chi, s * self.k_perp)

    __rmul__ = __mul__


@dataclass(frozen=True)
class DeltaPair:
    Delta: np.ndarray
    DeltaHat: np.ndarray
    G_min: np.ndarray

    @property
    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.DeltaHat)


def build_delta(G: GramSpec, z1: float, strict: bool = True, tol: float = 1e-12) -> DeltaPair:
    """Delta = [G_M]_{sigma m, sigma' m} and DeltaHat = G_min^{-1} Delta.

    The product entry is cross-checked against z1 G_min + [G_A]_{sigma,m-1; sigma' m};
    the two agree exactly when the a2 condition holds.
    """
    m = G.m
    GM, _ = build_GM(G.GA, build_M(m, z1))
    delta = GM[m - 1 :: m, m - 1 :: m]
    Gmin = G.G_min
    if m >= 2:
        alt = z1 * Gmin + G.GA[m - 2 :: m, m - 1 :: m]
    else:
        alt = z1 * Gmin
    if strict and np.max(np.abs(delta - alt)) > tol * max(1.0, G.scale, abs(z1) * G.scale):
        raise ConsistencyError("the two expressions for Delta disagree")
    sv = np.linalg.svd(Gmin, compute_uv=False)
    if not sv[-1] > 1e-12 * max(sv[0], 1e-300):
        raise ConfigurationError("G_min is singular")
    return DeltaPair(delta, np.linalg.solve(Gmin, delta), Gmin)


def eval_rhat(z: complex, dp: DeltaPair, tol: float = 1e-12) -> np.ndarray:
    """G_min (DeltaHat - z)^{-1}."""
    poles = dp.poles
    if np.min(np.abs(poles - z)) <= tol * max(1.0, abs(z)):
        raise PoleError(f"z={z} is an eigenvalue of DeltaHat")
    return dp.G_min @ np.linalg.inv(dp.DeltaHat - z * np.eye(dp.DeltaHat.shape[0]))


def rhat_perturbation_bound(G: GramSpec, bounds: np.ndarray, z1: float, z: complex, safety: float = 2.0) -> float:
    """First-order bound on the change of rhat(z) when the Gram entries move
    within ``bounds`` (entrywise, Hermitian pattern kept).

    Each independent entry is perturbed by its bound in the real and in the
    imaginary direction; the largest entry changes of rhat are summed and
    multiplied by ``safety``.
    """
    base = eval_rhat(z, build_delta(G, z1, strict=False))
    n = G.GA.shape[0]
    total = 0.0
    for a in range(n):
        for b in range(a, n):
            t = float(bounds[a, b])
            if t == 0.0:
                continue
            for direction in ((1.0, 0.0), (0.0, 1.0)) if a != b else ((1.0, 0.0),):
                E = np.zeros((n, n), dtype=complex)
                E[a, b] = complex(*direction) * t
                E[b, a] = np.conj(E[a, b])
                pert = GramSpec(G.GA + E, G.m, G.d)
                R = eval_rhat(z, build_delta(pert, z1, strict=False))
                total += float(np.max(np.abs(R - base)))
    return safety * total


@dataclass(frozen=True)
class SymmetryReport:
    samples: int
    max_residual: float
    ok: bool
    tol: float


@dataclass(frozen=True)
class SimplicityReport:
    sigma_min: float
    threshold: float
    samples: Tuple[complex, ...]
    probe: int
    verdict: str  # "simple" | "inconclusive" | "degenerate"

    def as_dict(self):
        return {
            "sigma_min": self.sigma_min,
            "threshold": self.threshold,
            "samples": [[z.real, z.imag] for z in self.samples],
            "probe": self.probe,
            "verdict": self.verdict,
        }


class BModel:
    def __init__(self, fam: SingularFamily, gram: GramSpec, strict: bool = True):
        if (gram.m, gram.d) != (fam.m, fam.d):
            raise ConfigurationError("Gram matrix shape does not match (m, d) of the family")
        if not (gram.flags.hermitian and gram.flags.invertible):
            raise ConditionError("the B-model needs an invertible Hermitian Gram matrix")
        self.report = check_bmodel(gram.GA, gram.m, gram.d)
        if strict and not self.report.ok:
            raise ConditionError("B-model conditions fail: " + "; ".join(self.report.violations))
        self.fam = fam
        self.G = gram
        self.op = fam.op
        self.m, self.d = fam.m, fam.d
        self.z1 = fam.op.z1
        self.Md = build_Md(self.m, self.d, self.z1)
        self.dp = build_delta(gram, self.z1, strict=strict)
        self.perp = h_perp_basis(gram)

    # -- graph elements -------------------------------------------------------

    def element(self, f_sharp=None, c=None, chi=None, k_perp=None) -> BmaxGraphElement:
        d, md = self.d, self.m * self.d
        f_sharp = self.op.zeros(self.m + 2) if f_sharp is None else f_sharp
        c = np.zeros(d, dtype=complex) if c is None else np.asarray(c, dtype=complex)
        chi = np.zeros(d, dtype=complex) if chi is None else np.asarray(chi, dtype=complex)
        k_perp = np.zeros(md, dtype=complex) if k_perp is None else np.asarray(k_perp, dtype=complex)
        return BmaxGraphElement(f_sharp, c, chi, k_perp)

    def in_perp(self, coords) -> bool:
        coords = np.asarray(coords, dtype=complex)
        res = np.max(np.abs(self.G.bracket_m(coords)), initial=0.0)
        return bool(res <= PERP_TOL * max(1.0, self.G.scale * np.max(np.abs(coords), initial=0.0)))

    def random_perp(self, rng: np.random.Generator) -> np.ndarray:
        r = self.perp.dim
        u = rng.normal(size=r) + 1j * rng.normal(size=r)
        return self.perp.vectors @ u

    def vector(self, x: BmaxGraphElement) -> ModelVector:
        return ModelVector(x.f_sharp + self.fam.h_m1(x.c), eta(x.chi, self.m))

    def apply_max(self, x: BmaxGraphElement) -> ModelVector:
        if not self.in_perp(x.k_perp):
            raise DomainError("k_perp does not lie in H_A^perp")
        reg = apply_L(x.f_sharp) + self.z1 * self.fam.h_m1(x.c)
        sing = self.Md @ eta(x.chi, self.m) + eta(x.c, self.m) + x.k_perp
        return ModelVector(reg, sing)

    def gamma0(self, x: BmaxGraphElement) -> np.ndarray:
        return np.array(x.c, dtype=complex)

    def gamma1(self, x: BmaxGraphElement, tol: Optional[float] = None) -> np.ndarray:
        val, _ = self.fam.pair_phi(x.f_sharp, tol)
        return val - self.dp.G_min @ x.chi

    def boundary_form(self, x: BmaxGraphElement, y: BmaxGraphElement) -> Tuple[complex, complex]:
        """[f, g'] - [f', g] and <G0 f, G1 g> - <G1 f, G0 g>."""
        f, g = self.vector(x), self.vector(y)
        lhs = metric(f, self.apply_max(y), self.G) - metric(self.apply_max(x), g, self.G)
        rhs = complex(np.vdot(self.gamma0(x), self.gamma1(y)) - np.vdot(self.gamma1(x), self.gamma0(y)))
        return lhs, rhs

    # -- Weyl function ----------------------------------------------------------

    def rhat(self, z: complex) -> np.ndarray:
        return eval_rhat(z, self.dp)

    def weyl(self, z: complex) -> WeylSample:
        R = self.rhat(z)
        Q, tb = krein_q(self.fam, z)
        return WeylSample(z, Q, R, Q + R, tb)

    def gamma(self, z: complex, c) -> BmaxGraphElement:
        """Eigen-element for z with Gamma'_0 = c, together with the k_perp
        that makes (f, z f) a graph pair of B_max."""
        check_not_pole(z, self.z1)
        c = np.asarray(c, dtype=complex)
        chi = np.linalg.solve(z * np.eye(self.d) - self.dp.DeltaHat, c)
        f_sharp = (z - self.z1) * resolvent_L(z, self.fam.h_m1(c))
        e = eta(chi, self.m)
        k_perp = z * e - self.Md @ e - eta(c, self.m)
        return BmaxGraphElement(f_sharp, c, chi, k_perp)

    def gamma_vector(self, z: complex, c) -> ModelVector:
        c = np.asarray(c, dtype=complex)
        chi = np.linalg.solve(z * np.eye(self.d) - self.dp.DeltaHat, c)
        return ModelVector(resolvent_L(z, self.fam.h_m(c)), eta(chi, self.m))

    def gamma_adjoint(self, w: complex, v: ModelVector) -> np.ndarray:
        """gamma(w)^* v through the metric."""
        return np.array([metric(self.gamma_vector(w, e), v, self.G) for e in np.eye(self.d)])

    def gamma_adjoint_boundary(self, z: complex, v: ModelVector) -> np.ndarray:
        """gamma(conj z)^* v = Gamma'_1 (B_0 - z)^{-1} v."""
        return self.gamma1(self.resolvent_B0(z, v))

    # -- resolvents ---------------------------------------------------------------

    def resolvent_B0(self, z: complex, v: ModelVector) -> BmaxGraphElement:
        eval_rhat(z, self.dp)
        f_sharp = resolvent_L(z, v.regular).with_index(self.m + 2)
        chi = np.linalg.solve(self.dp.DeltaHat - z * np.eye(self.d), phi_map(v.singular, self.G))
        e = eta(chi, self.m)
        k_perp = v.singular - self.Md @ e + z * e
        return BmaxGraphElement(f_sharp, np.zeros(self.d, dtype=complex), chi, k_perp)

    def resolvent(self, z: complex, theta: ThetaRelation, v: ModelVector, rtol: float = 1e-8) -> BmaxGraphElement:
        """(B_Theta - z)^{-1} v; gamma(conj z)^* v is computed two ways and compared."""
        base = self.resolvent_B0(z, v)
        adj = self.gamma_adjoint(np.conj(z), v)
        adj_b = self.gamma1(base)
        if np.max(np.abs(adj - adj_b)) > rtol * max(1.0, np.max(np.abs(adj))):
            raise ConsistencyError("the two evaluations of gamma(conj z)^* disagree")
        T = theta.inverse_shift(self.weyl(z).M)
        return base + self.gamma(z, T @ adj)

    def compressed_resolvent(self, z: complex, theta: ThetaRelation, f: ScaleVector) -> ScaleVector:
        base = resolvent_L(z, f)
        pairing, _ = self.fam.pair_phi(base)
        s = theta.inverse_shift(self.weyl(z).M) @ pairing
        return (base + resolvent_L(z, self.fam.h_m(s))).with_index(self.m)

    # -- structural checks --------------------------------------------------------

    def imag_rhat_identity(self, z: complex) -> Tuple[np.ndarray, np.ndarray]:
        """(Im rhat(z) / Im z, rhat(z) G_min^{-1} rhat(z)^*); the second is positive definite."""
        R = self.rhat(z)
        lhs = (R - R.conj().T) / (2j * z.imag)
        rhs = R @ np.linalg.solve(self.dp.G_min, R.conj().T)
        return lhs, rhs

    def surjectivity_witness(self, chi0, chi1, z0: complex = ANCHOR) -> BmaxGraphElement:
        """Graph element with (Gamma'_0, Gamma'_1) = (chi0, chi1)."""
        chi0 = np.asarray(chi0, dtype=complex)
        chi1 = np.asarray(chi1, dtype=complex)
        Q, _ = krein_q(self.fam, z0)
        w = np.linalg.solve(Q, chi1 + self.dp.G_min @ chi0)
        f_sharp = (z0 - self.z1) * resolvent_L(z0, self.fam.h_m1(w))
        return self.element(f_sharp.with_index(self.m + 2), chi0, chi0)

    def random_kernel_element(self, rng: np.random.Generator, modes: int = 8) -> BmaxGraphElement:
        """Element of ker Gamma' with finitely supported f#: <phi, f#> = G_min chi, c = 0."""
        coeffs = np.zeros(self.op.N, dtype=complex)
        coeffs[:modes] = rng.normal(size=modes) + 1j * rng.normal(size=modes)
        f_sharp = self.op.vector(coeffs, self.m + 2)
        pairing, _ = self.fam.pair_phi(f_sharp)
        chi = np.linalg.solve(self.dp.G_min, pairing)
        return self.element(f_sharp, None, chi, self.random_perp(rng))

    def check_symmetry(self, samples: int = 50, seed: int = 0, tol: float = 1e-9) -> SymmetryReport:
        """Boundary form of B_min on random pairs from ker Gamma' (relative residual)."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(samples):
            x, y = self.random_kernel_element(rng), self.random_kernel_element(rng)
            f, g = self.vector(x), self.vector(y)
            a = metric(f, self.apply_max(y), self.G)
            b = metric(self.apply_max(x), g, self.G)
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
        return SymmetryReport(samples, worst, worst <= tol, tol)

    def check_simplicity(
        self,
        points: Sequence[complex],
        probe: Optional[int] = None,
        threshold: float = 1e-6,
    ) -> SimplicityReport:
        """Sampled, heuristic test that the solution set of
        <phi, (L - z)^{-1} f> = rhat(z) chi (all sample z) is trivial.

        Unknowns are chi and the coefficients of f on the first ``probe``
        eigenvectors, scaled to unit H_m norm.  The system is column
        normalized; its smallest singular value is reported.  An eigenvector
        of L invisible to every functional is an exact nontrivial solution and
        is reported as degenerate; otherwise sigma_min above ``threshold``
        reads as simple.
        """
        pts = tuple(complex(z) for z in points)
        if any(abs(z.imag) == 0 for z in pts):
            raise ConfigurationError("simplicity samples must be nonreal")
        d, m = self.d, self.m
        if probe is None:
            probe = max(1, (len(pts) * d) // 2 - d)
        probe = min(probe, self.op.N)
        full = np.array([p.coeffs for p in self.fam.phi])
        # an eigenvector annihilated by every functional solves the system
        # for every z with chi = 0
        if np.any(np.all(np.abs(full) <= 1e-14 * np.max(np.abs(full)), axis=0)):
            return SimplicityReport(0.0, threshold, pts, probe, "degenerate")
        P = full[:, :probe]
        lam = self.op.eigenvalues[:probe]
        scale = self.op.weights[:probe] ** (-m / 2)
        rows = []
        for z in pts:
            block_f = P.conj() * (scale / (lam - z))
            rows.append(np.hstack([block_f, -self.rhat(z)]))
        A = np.vstack(rows)
        norms = np.linalg.norm(A, axis=0)
        s = np.linalg.svd(A / norms, compute_uv=False)
        smin = float(s[-1]) if A.shape[0] >= A.shape[1] else 0.0
        if smin > threshold:
            verdict = "simple"
        elif smin <= 1e-13:
            verdict = "degenerate"
        else:
            verdict = "inconclusive"
        return SimplicityReport(smin, threshold, pts, probe, verdict)
