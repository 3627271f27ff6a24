"""Audit of sampled matrix functions: symmetry, positivity of the imaginary
part, and negative squares of Nevanlinna-Pick kernels.

Counts of negative squares are lower bounds for the number of negative
squares of the function; a finite point set can never certify equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from .errors import ConfigurationError

NEG_TOL = 1e-9

Evaluator = Callable[[complex], np.ndarray]


def _as_matrix(value) -> np.ndarray:
    return np.atleast_2d(np.asarray(value, dtype=complex))


@dataclass(frozen=True)
class PickMatrix:
    points: tuple
    K: np.ndarray
    block: int


def build_pick(M: Evaluator, points: Sequence[complex]) -> PickMatrix:
    """K_{il} = (M(z_i) - M(z_l)^*) / (z_i - conj(z_l)), assembled blockwise."""
    pts = tuple(complex(z) for z in points)
    if not pts:
        raise ConfigurationError("need at least one point")
    for z in pts:
        if z.imag == 0:
            raise ConfigurationError(f"Pick points must be nonreal, got {z}")
    for i, zi in enumerate(pts):
        for zl in pts[i:]:
            if abs(zi - np.conj(zl)) <= 1e-12 * max(1.0, abs(zi)):
                raise ConfigurationError(f"points {zi} and {zl} are complex conjugate")
    vals = [_as_matrix(M(z)) for z in pts]
    d = vals[0].shape[0]
    n = len(pts)
    K = np.zeros((n * d, n * d), dtype=complex)
    for i, (zi, Mi) in enumerate(zip(pts, vals)):
        for l, (zl, Ml) in enumerate(zip(pts, vals)):
            K[i * d : (i + 1) * d, l * d : (l + 1) * d] = (Mi - Ml.conj().T) / (zi - np.conj(zl))
    K = (K + K.conj().T) / 2
    return PickMatrix(pts, K, d)


def pick_eigenvalues(P: PickMatrix) -> np.ndarray:
    return np.linalg.eigvalsh(P.K)


def count_negative_squares(P: PickMatrix, tol: float = NEG_TOL) -> int:
    """Eigenvalues below -tol * ||K||_2."""
    ev = pick_eigenvalues(P)
    norm = float(np.max(np.abs(ev), initial=0.0))
    return int(np.sum(ev < -tol * norm))


def negative_squares_trend(M: Evaluator, points: Sequence[complex], tol: float = NEG_TOL) -> List[int]:
    """Counts on the growing prefixes of ``points``; nondecreasing in theory."""
    return [count_negative_squares(build_pick(M, points[: k + 1]), tol) for k in range(len(points))]


def ladder_points(size: int = 6, shift: float = 0.0, base: float = 1.0, ratio: float = 2.0) -> List[complex]:
    """shift + i * base * ratio**k, k = 0..size-1."""
    return [complex(shift, base * ratio**k) for k in range(size)]


def random_point_sets(count: int = 20, max_size: int = 8, seed: int = 0) -> List[List[complex]]:
    """Point sets in the upper half-plane: jittered geometric ladders."""
    rng = np.random.default_rng(seed)
    sets = []
    for _ in range(count):
        size = int(rng.integers(2, max_size + 1))
        im = np.exp(rng.uniform(np.log(0.1), np.log(20.0), size=size))
        re = rng.uniform(-5.0, 5.0, size=size)
        sets.append([complex(a, b) for a, b in zip(re, im)])
    return sets


@dataclass(frozen=True)
class StrictnessReport:
    symmetry_defect: float
    min_imag_eigenvalue: float
    strict: bool

    def as_dict(self):
        return {
            "symmetry_defect": self.symmetry_defect,
            "min_imag_eigenvalue": self.min_imag_eigenvalue,
            "strict": self.strict,
        }


def check_symmetry_and_strictness(M: Evaluator, grid: Sequence[complex], tol: float = 1e-12) -> StrictnessReport:
    """max ||M(conj z) - M(z)^*|| and min eig of Im M(z) / Im z over the grid."""
    sym = 0.0
    low = np.inf
    for z in grid:
        z = complex(z)
        if z.imag == 0:
            raise ConfigurationError(f"grid points must be nonreal, got {z}")
        Mz = _as_matrix(M(z))
        sym = max(sym, float(np.max(np.abs(_as_matrix(M(np.conj(z))) - Mz.conj().T))))
        im = (Mz - Mz.conj().T) / (2j * z.imag)
        low = min(low, float(np.linalg.eigvalsh((im + im.conj().T) / 2)[0]))
    return StrictnessReport(sym, low, bool(low > tol))
