"""Command line front end: ``singext check|weyl|resolvent|pick|verify``.

Exit codes: 0 success, 2 configuration error, 3 condition failure,
4 numerical failure, 5 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .amodel import AModel
from .bmodel import BModel
from .config import SCHEMA_ID, ModelConfig, load_config, to_complex
from .errors import ConditionError, ConfigurationError, SingExtError
from .gram import check_a2, check_gacomm
from .model_space import ModelVector
from .nevanlinna import (
    build_pick,
    check_symmetry_and_strictness,
    count_negative_squares,
    ladder_points,
    pick_eigenvalues,
    random_point_sets,
)
from .suites import FAIL, default_grid, run_suites, vec_rel

EXIT_OK, EXIT_CONFIG, EXIT_CONDITION, EXIT_NUMERICAL, EXIT_SUITE = 0, 2, 3, 4, 5

POLE_WARN = 1e-6


def jsonable(obj):
    """Plain JSON types; complex numbers become [re, im], non-finite floats null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump(report: Dict[str, Any]) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def parse_grid(spec: Optional[str], cfg: ModelConfig) -> List[complex]:
    """Grid SPEC: 'default', 'ladder:N[:SHIFT[:BASE]]', '@file.csv' (z_re,z_im)
    or a comma separated list of Python complex literals such as '1j,2+0.5j'."""
    if spec is None:
        return cfg.grid or default_grid()
    spec = spec.strip()
    try:
        if spec == "default":
            return default_grid()
        if spec.startswith("ladder:"):
            parts = spec.split(":")[1:]
            n = int(parts[0])
            shift = float(parts[1]) if len(parts) > 1 else 0.0
            base = float(parts[2]) if len(parts) > 2 else 0.5
            return ladder_points(n, shift, base)
        if spec.startswith("@"):
            with open(spec[1:], newline="") as fh:
                rows = [r for r in csv.reader(fh) if r and not r[0].startswith("z_re")]
            return [complex(float(r[0]), float(r[1])) for r in rows]
        return [complex(tok.replace(" ", "")) for tok in spec.split(",") if tok.strip()]
    except (ValueError, OSError, IndexError) as exc:
        raise ConfigurationError(f"cannot parse grid spec {spec!r}: {exc}") from exc


def base_report(command: str, cfg: ModelConfig, model: Optional[str], seed: int) -> Dict[str, Any]:
    return {
        "schema": SCHEMA_ID,
        "command": command,
        "model": model,
        "provenance": {
            "config_sha256": cfg.sha256,
            "N": cfg.op.N,
            "seed": seed,
            "version": __version__,
        },
    }


def model_conditions(cfg: ModelConfig, model: str) -> bool:
    f = cfg.gram.flags
    if not (f.hermitian and f.invertible):
        return False
    return f.gacomm if model == "a" else (f.a2 and f.min_positive)


def build_model(cfg: ModelConfig, model: str):
    if not model_conditions(cfg, model):
        flags = cfg.gram.flags.as_dict()
        raise ConditionError(f"conditions of model {model.upper()} fail: {flags}")
    if model == "a":
        return AModel(cfg.fam, cfg.gram, require_gacomm=True)
    return BModel(cfg.fam, cfg.gram)


# -- commands -------------------------------------------------------------------


def cmd_check(cfg: ModelConfig, args) -> int:
    G = cfg.gram
    rep = base_report("check", cfg, args.model, cfg.seed)
    rep["conditions"] = G.flags.as_dict()
    rep["violations"] = {
        "gacomm": check_gacomm(G.GA, G.m, G.d)[1],
        "a2": check_a2(G.GA, G.m, G.d)[1],
    }
    rep["gram"] = {"mode": cfg.raw["gram"]["mode"], "matrix": G.GA}
    if cfg.raw["gram"]["mode"] == "tilde":
        rep["gram"]["tail_bounds"] = cfg.fam.gram_tilde()[1]
    rep["membership"] = [
        {"minus_m_minus_2": a.status, "minus_m_minus_1": b.status, "window_ratio": b.window_ratio}
        for a, b in cfg.fam.membership()
    ]
    ok = model_conditions(cfg, args.model)
    if args.model == "b" and ok:
        B = BModel(cfg.fam, cfg.gram)
        rep["delta"] = {"Delta": B.dp.Delta, "DeltaHat": B.dp.DeltaHat, "poles": B.dp.poles}
    rep["ok"] = ok
    emit(dump(rep), args.out)
    return EXIT_OK if ok else EXIT_CONDITION


def weyl_csv(samples, d: int, second: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["z_re", "z_im"]
    for name in ("q", second, "M"):
        for s in range(d):
            for t in range(d):
                header += [f"{name}{s + 1}{t + 1}_re", f"{name}{s + 1}{t + 1}_im"]
    w.writerow(header)
    for smp in samples:
        row = [repr(smp.z.real), repr(smp.z.imag)]
        for mat in (smp.q, smp.r, smp.M):
            for v in mat.reshape(-1):
                row += [repr(float(v.real)), repr(float(v.imag))]
        w.writerow(row)
    return buf.getvalue()


def cmd_weyl(cfg: ModelConfig, args) -> int:
    model = build_model(cfg, args.model)
    grid = parse_grid(args.grid, cfg)
    warnings = []
    poles = [cfg.op.z1] + (list(model.dp.poles) if args.model == "b" else [])
    for z in grid:
        near = min(abs(z - p) for p in poles)
        if near < POLE_WARN * max(1.0, abs(z)):
            warnings.append({"z": z, "distance_to_pole": near})
    samples = [model.weyl(z) for z in grid]
    text = weyl_csv(samples, cfg.fam.d, "r" if args.model == "a" else "rhat")
    rep = base_report("weyl", cfg, args.model, cfg.seed)
    nonreal = [z for z in grid if z.imag != 0]
    if nonreal:
        rep["strictness"] = check_symmetry_and_strictness(lambda z: model.weyl(z).M, nonreal).as_dict()
    rep["points"] = len(grid)
    rep["max_tail_bound"] = max(s.tail_bound for s in samples)
    rep["warnings"] = warnings
    if args.out:
        Path(args.out).write_text(text)
        sys.stdout.write(dump(rep))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def read_input_vector(path: Optional[str], cfg: ModelConfig) -> ModelVector:
    m, d, N = cfg.fam.m, cfg.fam.d, cfg.op.N
    if path is None:
        return ModelVector(cfg.op.basis(1, m), np.zeros(m * d, dtype=complex))
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read input vector {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    reg = [to_complex(v) for v in raw.get("regular", [])]
    sing = [to_complex(v) for v in raw.get("singular", [])] or [0j] * (m * d)
    if len(reg) > N or len(sing) != m * d:
        raise ConfigurationError(f"input vector needs at most {N} regular and exactly {m * d} singular entries")
    coeffs = np.zeros(N, dtype=complex)
    coeffs[: len(reg)] = reg
    return ModelVector(cfg.op.vector(coeffs, m), np.array(sing, dtype=complex))


def cmd_resolvent(cfg: ModelConfig, args) -> int:
    model = build_model(cfg, args.model)
    if args.z is None:
        raise ConfigurationError("resolvent needs --z")
    try:
        z = complex(args.z.replace(" ", ""))
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse --z {args.z!r}") from exc
    v = read_input_vector(args.input, cfg)
    theta = cfg.theta
    x = model.resolvent(z, theta, v)
    full = model.vector(x)
    rep = base_report("resolvent", cfg, args.model, cfg.seed)
    rep["z"] = z
    rep["theta"] = {"X": theta.X, "Y": theta.Y, "self_adjoint": theta.self_adjoint}
    if args.compressed:
        comp = model.compressed_resolvent(z, theta, v.regular)
        rep["regular"] = comp.coeffs
        rep["residual"] = float(np.max(np.abs(comp.coeffs - full.regular.coeffs)))
        rep["residual_kind"] = "compressed formula vs projected Krein-Naimark output"
    else:
        rep["regular"] = full.regular.coeffs
        rep["singular"] = full.singular
        rep["boundary"] = {"gamma0": model.gamma0(x), "gamma1": model.gamma1(x)}
        rep["residual"] = vec_rel(model.apply_max(x) - full * z, v)
        rep["residual_kind"] = "relative defect of (A - z) x = v"
    emit(dump(rep), args.out)
    return EXIT_OK


def cmd_pick(cfg: ModelConfig, args) -> int:
    model = build_model(cfg, args.model)
    tol = cfg.tolerances["negativity"]
    sets = [parse_grid(args.grid, cfg)] if args.grid else random_point_sets(20, 8, args.seed)
    results = []
    for pts in sets:
        P = build_pick(lambda z: model.weyl(z).M, pts)
        results.append({"points": pts, "negative_squares": count_negative_squares(P, tol), "eigenvalues": pick_eigenvalues(P)})
    rep = base_report("pick", cfg, args.model, args.seed)
    rep["sets"] = results
    rep["kappa_lower_bound"] = max(r["negative_squares"] for r in results)
    rep["note"] = "counts are lower bounds for the number of negative squares"
    if args.out and args.out.endswith(".csv"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["set", "index", "eigenvalue"])
        for i, r in enumerate(results):
            for j, ev in enumerate(r["eigenvalues"]):
                w.writerow([i, j, repr(float(ev))])
        Path(args.out).write_text(buf.getvalue())
        sys.stdout.write(dump({k: v for k, v in rep.items() if k != "sets"} | {"counts": [r["negative_squares"] for r in results]}))
    else:
        emit(dump(rep), args.out)
    return EXIT_OK


def cmd_verify(cfg: ModelConfig, args) -> int:
    if args.seed != cfg.seed:
        cfg.seed = args.seed
    results = run_suites(cfg)
    rep = base_report("verify", cfg, None, args.seed)
    rep["conditions"] = cfg.gram.flags.as_dict()
    rep["suites"] = [r.as_dict() for r in results]
    failed = [r.name for r in results if r.status == FAIL]
    rep["failed"] = failed
    rep["ok"] = not failed
    emit(dump(rep), args.out)
    return EXIT_SUITE if failed else EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "weyl": cmd_weyl,
    "resolvent": cmd_resolvent,
    "pick": cmd_pick,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singext", description="Extensions of singularly perturbed self-adjoint operators.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON configuration (schema singular-ext/1)")
    p.add_argument("--model", choices=["a", "b"], default="b", help="A-model (Pontryagin space) or B-model")
    p.add_argument("--grid", help="grid SPEC: default | ladder:N[:SHIFT[:BASE]] | @file.csv | 1j,2+0.5j,...")
    p.add_argument("--seed", type=int, help="seed for random samples (default: config seed)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--compressed", action="store_true", help="resolvent: compressed resolvent only")
    p.add_argument("--z", help="resolvent: spectral parameter, e.g. 0.5+1j")
    p.add_argument("--input", help="resolvent: JSON input vector {regular: [...], singular: [...]}")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is None:
            args.seed = cfg.seed
        return COMMANDS[args.command](cfg, args)
    except SingExtError as exc:
        sys.stderr.write(f"singext: {type(exc).__name__}: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
