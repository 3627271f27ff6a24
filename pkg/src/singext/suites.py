"""Invariant suites run by ``singext verify``.

Every suite is deterministic given the seed and reports a single residual
against its tolerance.  Suites that depend on the B-model are skipped when
its conditions fail, except the symmetry suite, which is then exactly the
place where the failure must show up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .amodel import AModel, ThetaRelation
from .bmodel import BModel, rhat_perturbation_bound
from .config import ModelConfig
from .errors import ConditionError, SingExtError
from .gram import check_a2, eta, solve_compatibility
from .model_space import ModelVector, krein_q, perp_part, phi_map
from .nevanlinna import (
    build_pick,
    check_symmetry_and_strictness,
    count_negative_squares,
    ladder_points,
    random_point_sets,
)

PASS, FAIL, SKIP = "pass", "fail", "skipped"

MODES = 8


@dataclass
class SuiteResult:
    name: str
    status: str
    residual: float = 0.0
    tol: float = 0.0
    detail: Dict[str, object] = field(default_factory=dict)

    def as_dict(self):
        res = self.residual if math.isfinite(self.residual) else None
        return {"name": self.name, "status": self.status, "residual": res, "tol": self.tol, "detail": self.detail}


def default_grid() -> List[complex]:
    """Twelve points: an imaginary-axis ladder and the same ladder shifted by 1."""
    return ladder_points(6, 0.0, 0.5) + ladder_points(6, 1.0, 0.5)


def simplicity_points() -> List[complex]:
    return [1j, 2j, 4j, 8j, 1 + 1j, 2 + 2j]


def _cvec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def random_f_sharp(op, index, rng, modes=MODES):
    coeffs = np.zeros(op.N, dtype=complex)
    coeffs[:modes] = _cvec(rng, modes)
    return op.vector(coeffs, index)


def random_model_vector(op, m, d, rng, modes=MODES) -> ModelVector:
    return ModelVector(random_f_sharp(op, m, rng, modes), _cvec(rng, m * d))


def random_a_element(A: AModel, rng):
    return A.element(random_f_sharp(A.op, A.m + 2, rng), _cvec(rng, A.d), _cvec(rng, A.m * A.d))


def random_b_element(B: BModel, rng):
    return B.element(random_f_sharp(B.op, B.m + 2, rng), _cvec(rng, B.d), _cvec(rng, B.d), B.random_perp(rng))


def rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


def vec_rel(u: ModelVector, v: ModelVector) -> float:
    diff = (u - v).max_abs()
    return diff / max(1.0, u.max_abs(), v.max_abs())


def nonreal_points(rng, count) -> List[complex]:
    re = rng.uniform(-4, 4, size=count)
    im = rng.uniform(0.2, 4, size=count) * rng.choice([-1, 1], size=count)
    return [complex(a, b) for a, b in zip(re, im)]


class Context:
    """Models built once per verification run."""

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.grid = cfg.grid or default_grid()
        self.tol = cfg.tolerances["identity"]
        self.A: Optional[AModel] = None
        self.B: Optional[BModel] = None
        self.a_reason = self.b_reason = ""
        try:
            self.A = AModel(cfg.fam, cfg.gram)
        except SingExtError as exc:
            self.a_reason = str(exc)
        try:
            self.B = BModel(cfg.fam, cfg.gram)
        except SingExtError as exc:
            self.b_reason = str(exc)


def suite_boundary_form(ctx: Context) -> SuiteResult:
    A = ctx.A
    if A is None:
        return SuiteResult("boundary_form", SKIP, detail={"reason": ctx.a_reason})
    worst = 0.0
    for _ in range(100):
        x, y = random_a_element(A, ctx.rng), random_a_element(A, ctx.rng)
        bf = A.boundary_form(x, y, rtol=math.inf)
        worst = max(worst, bf.residual / max(1.0, abs(bf.direct), abs(bf.defect), abs(bf.green)))
    tol = 1e-9
    return SuiteResult("boundary_form", PASS if worst <= tol else FAIL, worst, tol, {"pairs": 100})


def suite_adjoint_identity(ctx: Context) -> SuiteResult:
    A = ctx.A
    if A is None:
        return SuiteResult("adjoint_identity", SKIP, detail={"reason": ctx.a_reason})
    worst = 0.0
    for _ in range(100):
        lhs, rhs = A.adjoint_identity(random_a_element(A, ctx.rng), random_a_element(A, ctx.rng))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
    tol = 1e-9
    return SuiteResult("adjoint_identity", PASS if worst <= tol else FAIL, worst, tol, {"pairs": 100})


def suite_symmetry(ctx: Context) -> SuiteResult:
    """Symmetry of B_min on ker Gamma' and the Green identity on B_max pairs."""
    cfg = ctx.cfg
    try:
        B = ctx.B or BModel(cfg.fam, cfg.gram, strict=False)
    except SingExtError as exc:
        return SuiteResult("symmetry", FAIL, math.inf, 1e-9, {"reason": str(exc)})
    sym = B.check_symmetry(50, cfg.seed)
    green = 0.0
    for _ in range(50):
        lhs, rhs = B.boundary_form(random_b_element(B, ctx.rng), random_b_element(B, ctx.rng))
        green = max(green, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
    worst = max(sym.max_residual, green)
    tol = 1e-9
    detail = {"kernel_residual": sym.max_residual, "green_residual": green, "a2": B.report.a2}
    return SuiteResult("symmetry", PASS if worst <= tol else FAIL, worst, tol, detail)


def suite_eigen_fields(ctx: Context) -> SuiteResult:
    if ctx.A is None:
        return SuiteResult("eigen_fields", SKIP, detail={"reason": ctx.a_reason})
    worst_a = worst_b = 0.0
    for z in nonreal_points(ctx.rng, 20):
        c = _cvec(ctx.rng, ctx.A.d)
        x = ctx.A.gamma(z, c)
        worst_a = max(worst_a, vec_rel(ctx.A.apply_max(x), ctx.A.vector(x) * z))
        if ctx.B is not None:
            y = ctx.B.gamma(z, c)
            worst_b = max(worst_b, vec_rel(ctx.B.apply_max(y), ctx.B.vector(y) * z))
    worst = max(worst_a, worst_b)
    tol = 1e-9
    detail = {"a_residual": worst_a, "b_residual": worst_b if ctx.B else None}
    return SuiteResult("eigen_fields", PASS if worst <= tol else FAIL, worst, tol, detail)


def suite_weyl(ctx: Context) -> SuiteResult:
    if ctx.A is None:
        return SuiteResult("weyl_two_path", SKIP, detail={"reason": ctx.a_reason})
    worst = 0.0
    sym = 0.0
    for z in ctx.grid:
        for model in (ctx.A, ctx.B):
            if model is None:
                continue
            M = model.weyl(z).M
            via = np.column_stack([model.gamma1(model.gamma(z, e)) for e in np.eye(model.d)])
            worst = max(worst, rel(via, M))
            if model is ctx.B or ctx.A.weyl_symmetric:
                sym = max(sym, rel(model.weyl(np.conj(z)).M, M.conj().T))
    tol = ctx.tol
    res = max(worst, sym)
    return SuiteResult("weyl_two_path", PASS if res <= tol else FAIL, res, tol, {"two_path": worst, "symmetry": sym})


def _resolvent_checks(model, theta, z, w, v):
    Rz, Rw = model.resolvent(z, theta, v), model.resolvent(w, theta, v)
    lhs = model.vector(Rz) - model.vector(Rw)
    rhs = model.vector(model.resolvent(z, theta, model.vector(Rw))) * (z - w)
    ident = vec_rel(lhs, rhs)
    eq = vec_rel(model.apply_max(Rz) - model.vector(Rz) * z, v)
    member = 0.0 if theta.contains(model.gamma0(Rz), model.gamma1(Rz)) else 1.0
    return ident, eq, member


def suite_resolvent(ctx: Context) -> SuiteResult:
    cfg = ctx.cfg
    theta = cfg.theta if cfg.theta.self_adjoint else ThetaRelation.scalar(0.5, cfg.fam.d)
    zero = ThetaRelation.zero(cfg.fam.d)
    models = []
    if ctx.A is not None and ctx.A.boundary_triple:
        models.append(("a", ctx.A))
    if ctx.B is not None:
        models.append(("b", ctx.B))
    if not models:
        return SuiteResult("resolvent", SKIP, detail={"reason": "no model admits the resolvent formula"})
    detail = {}
    worst = 0.0
    for name, model in models:
        ident = eq = member = reduce = 0.0
        for _ in range(5):
            z, w = nonreal_points(ctx.rng, 2)
            v = random_model_vector(cfg.op, model.m, model.d, ctx.rng)
            i, e, mb = _resolvent_checks(model, theta, z, w, v)
            ident, eq, member = max(ident, i), max(eq, e), max(member, mb)
            base = model.resolvent_A0(z, v) if name == "a" else model.resolvent_B0(z, v)
            reduce = max(reduce, vec_rel(model.vector(model.resolvent(z, zero, v)), model.vector(base)))
        detail[name] = {"identity": ident, "equation": eq, "membership": member, "zero_relation": reduce}
        worst = max(worst, ident, eq, member, reduce)
    tol = ctx.tol
    return SuiteResult("resolvent", PASS if worst <= tol else FAIL, worst, tol, detail)


def suite_compressed(ctx: Context) -> SuiteResult:
    cfg = ctx.cfg
    theta = cfg.theta if cfg.theta.self_adjoint else ThetaRelation.scalar(0.5, cfg.fam.d)
    models = []
    if ctx.A is not None and ctx.A.boundary_triple:
        models.append(("a", ctx.A))
    if ctx.B is not None:
        models.append(("b", ctx.B))
    if not models:
        return SuiteResult("compressed", SKIP, detail={"reason": "no model admits the resolvent formula"})
    worst = 0.0
    detail = {}
    for name, model in models:
        res = 0.0
        for z in nonreal_points(ctx.rng, 5):
            f = random_f_sharp(cfg.op, model.m, ctx.rng)
            v = ModelVector(f, np.zeros(model.m * model.d, dtype=complex))
            full = model.vector(model.resolvent(z, theta, v)).regular
            comp = model.compressed_resolvent(z, theta, f)
            res = max(res, rel(comp.coeffs, full.coeffs))
        detail[name] = res
        worst = max(worst, res)
    tol = ctx.tol
    return SuiteResult("compressed", PASS if worst <= tol else FAIL, worst, tol, detail)


def suite_nevanlinna(ctx: Context) -> SuiteResult:
    B = ctx.B
    if B is None:
        return SuiteResult("nevanlinna", SKIP, detail={"reason": ctx.b_reason})
    tol_neg = ctx.cfg.tolerances["negativity"]
    counts = [count_negative_squares(build_pick(lambda z: B.weyl(z).M, s), tol_neg) for s in random_point_sets(20, 8, ctx.cfg.seed)]
    strict = check_symmetry_and_strictness(lambda z: B.weyl(z).M, ctx.grid)
    poles = B.dp.poles
    imag_poles = float(np.max(np.abs(poles.imag)))
    z = ctx.grid[0]
    lhs, rhs = B.imag_rhat_identity(z)
    ident = rel(lhs, rhs)
    ok = max(counts) == 0 and strict.strict and imag_poles <= 1e-10 and ident <= ctx.tol and strict.symmetry_defect <= 1e-10
    detail = {
        "negative_squares": counts,
        "min_imag_eigenvalue": strict.min_imag_eigenvalue,
        "symmetry_defect": strict.symmetry_defect,
        "pole_imag_max": imag_poles,
        "imag_identity": ident,
    }
    return SuiteResult("nevanlinna", PASS if ok else FAIL, float(max(counts)), 0.0, detail)


def suite_structural(ctx: Context) -> SuiteResult:
    cfg = ctx.cfg
    G = cfg.gram
    if ctx.A is None:
        return SuiteResult("structural", SKIP, detail={"reason": ctx.a_reason})
    m, d = G.m, G.d
    a2, _ = check_a2(G.GA, m, d)
    incl = decomp = compat = 0.0
    gmin_ok = ctx.B is not None
    for _ in range(20):
        c = _cvec(ctx.rng, d)
        k = eta(c, m)
        diff = solve_compatibility(k, G, cfg.op.z1) - ctx.A.Md @ k
        if a2:
            incl = max(incl, float(np.max(np.abs(G.bracket_m(diff)))) / max(1.0, G.scale * np.max(np.abs(diff))))
        xi = _cvec(ctx.rng, m * d)
        xp = solve_compatibility(xi, G, cfg.op.z1, tol=math.inf)
        compat = max(compat, float(np.linalg.norm(ctx.A.GM.conj().T @ xi - G.GA @ xp)))
        if gmin_ok:
            dp = perp_part(xi, G)
            decomp = max(decomp, float(np.max(np.abs(eta(phi_map(xi, G), m) + dp - xi))))
            decomp = max(decomp, float(np.max(np.abs(G.bracket_m(dp)))) / max(1.0, G.scale * np.max(np.abs(xi))))
    worst = max(incl, decomp, compat)
    tol = 1e-10
    detail = {"perp_inclusion": incl if a2 else None, "decomposition": decomp if gmin_ok else None, "compatibility": compat}
    return SuiteResult("structural", PASS if worst <= tol else FAIL, worst, tol, detail)


def stability_rows(cfg: ModelConfig, points: List[complex]) -> List[Dict[str, object]]:
    """Change of each reported scalar between N/2 and N against its tail bound."""
    half = cfg.with_truncation(cfg.op.N // 2)
    rows = []

    def add(name, a, b, bound):
        delta = abs(a - b)
        rows.append(
            {
                "quantity": name,
                "delta": delta,
                "bound": bound,
                "relative": delta / max(abs(b), 1e-300),
            }
        )

    tilde = cfg.raw["gram"]["mode"] == "tilde"
    if tilde:
        G1, T1 = half.fam.gram_tilde()
        G2, _ = cfg.fam.gram_tilde()
        for a in range(G1.shape[0]):
            for b in range(a, G1.shape[0]):
                add(f"gram[{a},{b}]", G1[a, b], G2[a, b], T1[a, b])
    for z in points:
        Q1, t1 = krein_q(half.fam, z)
        Q2, _ = krein_q(cfg.fam, z)
        for s in range(Q1.shape[0]):
            for t in range(Q1.shape[1]):
                add(f"q[{s},{t}]({z})", Q1[s, t], Q2[s, t], t1)
        try:
            B1, B2 = BModel(half.fam, half.gram), BModel(cfg.fam, cfg.gram)
        except ConditionError:
            continue
        rb = 0.0
        if tilde:
            rb = rhat_perturbation_bound(half.gram, half.fam.gram_tilde()[1], cfg.op.z1, z)
        M1, M2 = B1.weyl(z).M, B2.weyl(z).M
        for s in range(M1.shape[0]):
            for t in range(M1.shape[1]):
                add(f"M_B[{s},{t}]({z})", M1[s, t], M2[s, t], t1 + rb)
    return rows


def suite_truncation(ctx: Context) -> SuiteResult:
    cfg = ctx.cfg
    if cfg.op.law is None or cfg.fam.law != "power" or cfg.op.N < 8:
        return SuiteResult("truncation", SKIP, detail={"reason": "needs a power-law operator and family"})
    rows = stability_rows(cfg, ctx.grid[:4])
    bound_ok = all(r["delta"] <= r["bound"] + 1e-12 for r in rows)
    worst = max(r["relative"] for r in rows)
    tol = 1e-4
    ok = bound_ok and worst < tol
    detail = {"N": cfg.op.N, "N_half": cfg.op.N // 2, "within_bound": bound_ok, "rows": len(rows),
              "max_delta": max(r["delta"] for r in rows)}
    return SuiteResult("truncation", PASS if ok else FAIL, worst, tol, detail)


def suite_simplicity(ctx: Context) -> SuiteResult:
    B = ctx.B
    if B is None:
        return SuiteResult("simplicity", SKIP, detail={"reason": ctx.b_reason})
    rep = B.check_simplicity(simplicity_points(), threshold=ctx.cfg.tolerances["simplicity"])
    return SuiteResult("simplicity", PASS if rep.verdict == "simple" else FAIL, rep.sigma_min, rep.threshold, rep.as_dict())


SUITES: List[Callable[[Context], SuiteResult]] = [
    suite_boundary_form,
    suite_adjoint_identity,
    suite_symmetry,
    suite_eigen_fields,
    suite_weyl,
    suite_resolvent,
    suite_compressed,
    suite_nevanlinna,
    suite_structural,
    suite_truncation,
    suite_simplicity,
]


def run_suites(cfg: ModelConfig) -> List[SuiteResult]:
    ctx = Context(cfg)
    out = []
    for suite in SUITES:
        try:
            out.append(suite(ctx))
        except SingExtError as exc:
            out.append(SuiteResult(suite.__name__.replace("suite_", ""), FAIL, math.inf, 0.0, {"error": str(exc)}))
    return out
