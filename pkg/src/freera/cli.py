"""Command-line front end.

Inputs are JSON files:

* polynomial: ``{"nrows", "ncols", "g", "terms": [{"row", "col", "word", "coeff"}]}``
  (a bare list of terms is read as a 1 x 1 polynomial; ``g`` is then inferred)
* pencil: ``{"size", "g", "A0", "A"}``
* module: ``{"l", "g", "order": "deglex", "generators": [polynomial, ...]}``
* map: ``{"nu", "ell", "basis", "images"}``
* matrix tuple: ``{"X": [matrix, ...]}`` or a bare list of matrices

Results go to stdout as JSON with 17 significant digits; diagnostics go to
stderr.  Exit status: 0 on a result, 1 on input errors, 2 on an
indeterminate verdict.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import config
from .certify import Certificate, check_defining, check_positive, size_bound, vanishes_on
from .cpmap import LinearStarMap, OperatorSystem, is_completely_positive
from .errors import IndeterminateError, VerificationError
from .freepoly import LinearPencil, MatPoly, MatrixTuple, check_word, deglex, degree_bounded_chips, evaluate
from .leftmod import GroebnerError, LeftModule
from .radical import decompose_pencil, lreal_radical, lreal_radical_zero

EXIT_OK, EXIT_INPUT, EXIT_INDETERMINATE = 0, 1, 2


class InputError(ValueError):
    """Ill-formed input, with a location for the diagnostic."""


# ---------------------------------------------------------------------------
# serialization


def dumps(obj: Any, indent: int | None = 2) -> str:
    """JSON text with every float written as ``%.17g`` (lossless for doubles)."""
    return _dump(_plain(obj), indent, 0)


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _dump(obj: Any, indent: int | None, level: int) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        if obj == int(obj) and abs(obj) < 1e16:
            return f"{obj:.1f}"
        return "%.17g" % obj
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        # numeric rows stay on one line
        if indent is None or all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_dump(v, None, 0) for v in obj) + "]"
        pad = " " * (indent * (level + 1))
        inner = ",\n".join(pad + _dump(v, indent, level + 1) for v in obj)
        return "[\n" + inner + "\n" + " " * (indent * level) + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if indent is None:
            return "{" + ", ".join(f"{json.dumps(k)}: {_dump(v, None, 0)}" for k, v in obj.items()) + "}"
        pad = " " * (indent * (level + 1))
        inner = ",\n".join(f"{pad}{json.dumps(k)}: {_dump(v, indent, level + 1)}" for k, v in obj.items())
        return "{\n" + inner + "\n" + " " * (indent * level) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def poly_record(p: MatPoly) -> dict:
    terms = [{"row": i, "col": j, "word": list(w), "coeff": float(c)}
             for (i, j, w), c in sorted(p.terms.items(), key=lambda t: (t[0][0], t[0][1], deglex(t[0][2])))]
    return {"nrows": p.nrows, "ncols": p.ncols, "g": p.g, "terms": terms}


def pencil_record(L: LinearPencil) -> dict:
    return {"size": L.size, "g": L.g, "A0": L.A0, "A": list(L.A)}


def module_record(I: LeftModule) -> dict:
    return {"l": I.ell, "g": I.g, "order": "deglex", "generators": [poly_record(q) for q in I.generators]}


def map_record(tau: LinearStarMap) -> dict:
    return {"nu": tau.domain.nu, "ell": tau.ell, "basis": tau.domain.basis, "images": tau.images}


def _need(rec: dict, key: str, where: str) -> Any:
    if not isinstance(rec, dict):
        raise InputError(f"{where}: expected an object")
    if key not in rec:
        raise InputError(f"{where}: missing field '{key}'")
    return rec[key]


def _matrix(v: Any, where: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        M = np.array(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: not a numeric array ({exc})") from exc
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise InputError(f"{where}: expected a matrix, got {M.ndim} dimensions")
    if shape is not None and M.shape != shape:
        raise InputError(f"{where}: expected shape {shape}, got {M.shape}")
    return M


def parse_poly(rec: Any, where: str = "polynomial", g: int | None = None) -> MatPoly:
    if isinstance(rec, list):
        rec = {"nrows": 1, "ncols": 1, "terms": rec}
    terms = _need(rec, "terms", where)
    if not isinstance(terms, list):
        raise InputError(f"{where}.terms: expected a list")
    nrows, ncols = int(rec.get("nrows", 1)), int(rec.get("ncols", 1))
    words = []
    for k, t in enumerate(terms):
        loc = f"{where}.terms[{k}]"
        w = _need(t, "word", loc)
        if not isinstance(w, list) or not all(isinstance(a, int) and a != 0 for a in w):
            raise InputError(f"{loc}.word: expected a list of nonzero integers")
        words.append(tuple(w))
    gg = rec.get("g", g)
    if gg is None:
        gg = max([abs(a) for w in words for a in w], default=0)
    gg = int(gg)
    out: dict = {}
    for k, (t, w) in enumerate(zip(terms, words)):
        loc = f"{where}.terms[{k}]"
        i, j = int(t.get("row", 0)), int(t.get("col", 0))
        if not (0 <= i < nrows and 0 <= j < ncols):
            raise InputError(f"{loc}: entry ({i}, {j}) outside a {nrows} x {ncols} polynomial")
        try:
            w = check_word(w, gg)
        except ValueError as exc:
            raise InputError(f"{loc}.word: {exc}") from exc
        c = _need(t, "coeff", loc)
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise InputError(f"{loc}.coeff: expected a number")
        out[(i, j, w)] = out.get((i, j, w), 0.0) + float(c)
    return MatPoly(nrows, ncols, gg, out)


def parse_pencil(rec: Any, where: str = "pencil") -> LinearPencil:
    A0 = _matrix(_need(rec, "A0", where), f"{where}.A0")
    n = A0.shape[0]
    if "size" in rec and int(rec["size"]) != n:
        raise InputError(f"{where}: size {rec['size']} does not match A0 of size {n}")
    A = _need(rec, "A", where)
    if not isinstance(A, list):
        raise InputError(f"{where}.A: expected a list of matrices")
    if "g" in rec and int(rec["g"]) != len(A):
        raise InputError(f"{where}: g = {rec['g']} but {len(A)} coefficient matrices")
    mats = [_matrix(M, f"{where}.A[{k}]", (n, n)) for k, M in enumerate(A)]
    try:
        return LinearPencil(A0, mats)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc


def parse_module(rec: Any, where: str = "module") -> LeftModule:
    ell, g = int(_need(rec, "l", where)), int(_need(rec, "g", where))
    if rec.get("order", "deglex") != "deglex":
        raise InputError(f"{where}.order: only 'deglex' is supported")
    gens = [parse_poly(q, f"{where}.generators[{k}]", g) for k, q in enumerate(_need(rec, "generators", where))]
    for k, q in enumerate(gens):
        if q.nrows != 1 or q.ncols != ell:
            raise InputError(f"{where}.generators[{k}]: expected a 1 x {ell} row")
    return LeftModule(ell, g, gens)


def parse_map(rec: Any, where: str = "map") -> LinearStarMap:
    nu, ell = int(_need(rec, "nu", where)), int(_need(rec, "ell", where))
    basis = [_matrix(M, f"{where}.basis[{k}]", (nu, nu)) for k, M in enumerate(_need(rec, "basis", where))]
    images = [_matrix(M, f"{where}.images[{k}]", (ell, ell)) for k, M in enumerate(_need(rec, "images", where))]
    try:
        return LinearStarMap(OperatorSystem(nu, basis), ell, images)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from exc


def parse_tuple(rec: Any, where: str = "X") -> list[np.ndarray]:
    mats = rec["X"] if isinstance(rec, dict) and "X" in rec else rec
    if not isinstance(mats, list):
        raise InputError(f"{where}: expected a list of matrices")
    return [_matrix(M, f"{where}[{k}]") for k, M in enumerate(mats)]


def load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


# ---------------------------------------------------------------------------
# result records


def certificate_record(cert: Certificate, p: MatPoly, L: LinearPencil) -> dict:
    residual = (p - cert.expansion(L))
    return {
        "kind": "certificate",
        "tau": [poly_record(t) for t in cert.tau],
        "kappa": [poly_record(k) for k in cert.kappa],
        "A": cert.A,
        "B": cert.B,
        "module_terms": [{"r": poly_record(r), "iota": poly_record(i)} for r, i in cert.module_terms],
        "expansion_residual": max((abs(v) for v in residual.terms.values()), default=0.0),
    }


def witness_record(w) -> dict:
    return {"kind": "witness", "n": w.n, "X": list(w.X.X), "v": w.v, "value": w.value,
            "min_eig": w.min_eig, "module_residual": w.module_residual, "gns_rank": w.gns_rank}


def _chips(args, ell: int, g: int, p: MatPoly | None = None, gens: Sequence[MatPoly] = ()):
    if args.degree is None:
        return None
    return degree_bounded_chips(ell, g, args.degree)


def _module_for(args, ell: int, g: int) -> LeftModule:
    if getattr(args, "module", None):
        I = parse_module(load_json(args.module))
        if I.ell != ell or I.g != g:
            raise InputError(f"{args.module}: module has (l, g) = ({I.ell}, {I.g}), expected ({ell}, {g})")
        return I
    return LeftModule(ell, g)


# ---------------------------------------------------------------------------
# subcommands


def cmd_radical_zero(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    r = lreal_radical_zero(L)
    out = {"generators": [poly_record(q) for q in r.generators], "reduced_pencil": pencil_record(r.reduced_pencil),
           "feasible": r.feasible, "hull": r.hull}
    if args.verbose:
        out["audit"] = [_audit_record(rec) for rec in r.audit]
    return out


def _audit_record(rec: dict) -> dict:
    out = {}
    for k, v in rec.items():
        if isinstance(v, LinearPencil):
            v = pencil_record(v)
        elif isinstance(v, MatPoly):
            v = poly_record(v)
        elif isinstance(v, list) and v and isinstance(v[0], MatPoly):
            v = [poly_record(q) for q in v]
        out[k] = v
    return out


def cmd_radical(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    I = _module_for(args, args.ell, L.g)
    chips = degree_bounded_chips(I.ell, L.g, 1 if args.degree is None else args.degree)
    cb = lreal_radical(I, L, chips, strong=args.strict)
    return {"generators": [poly_record(q) for q in cb.module.groebner],
            "iotas": [poly_record(q) for q in cb.iotas], "thetas": [poly_record(q) for q in cb.thetas],
            "chip_dim": chips.dim}


def cmd_groebner(args) -> dict:
    I = parse_module(load_json(args.module))
    return {"basis": [poly_record(q) for q in I.groebner]}


def cmd_feasible(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    return {"feasible": lreal_radical_zero(L).feasible}


def cmd_affine_hull(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    d = decompose_pencil(L)
    out = {"feasible": d.feasible, "hull": d.hull, "generators": [poly_record(q) for q in d.generators],
           "reduced_pencil": pencil_record(d.reduced_pencil)}
    if args.samples:
        out["sampling"] = sample_hull(L, d.hull, args.samples, args.seed, args.radius)
    return out


def sample_hull(L: LinearPencil, hull: np.ndarray, samples: int, seed: int, radius: float = 2.0,
                slab: float = 1e-2) -> dict:
    """Rejection-sample scalar points of the spectrahedron and report the
    largest violation of the hull equations.

    Half of the proposals are drawn on the hull itself and half in a slab of
    half-width ``slab`` around it, so a hull that is too small shows up as
    accepted points with a visible violation.
    """
    rng = np.random.default_rng(seed)
    g = L.g
    H = np.atleast_2d(hull) if np.size(hull) else np.zeros((0, g + 1))
    accepted, worst, tries = 0, 0.0, 0
    while accepted < samples and tries < 1000 * max(samples, 1):
        tries += 1
        pt = rng.uniform(-radius, radius, g)
        if H.shape[0]:
            c0, C = H[:, 0], H[:, 1:]
            pt = pt - np.linalg.pinv(C) @ (C @ pt + c0)
            if tries % 2:
                pt = pt + np.linalg.pinv(C) @ rng.uniform(-slab, slab, H.shape[0])
        if np.linalg.eigvalsh(L.at_point(pt)).min() >= 0:
            accepted += 1
            if H.shape[0]:
                worst = max(worst, float(np.abs(H[:, 0] + H[:, 1:] @ pt).max()))
    return {"accepted": accepted, "tries": tries, "max_violation": worst}


def cmd_check_pos(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    p = parse_poly(load_json(args.p), "p", L.g)
    I = _module_for(args, p.nrows, L.g)
    out = check_positive(p, L, I, _chips(args, p.nrows, L.g), strict=args.strict)
    if isinstance(out, Certificate):
        return {"verdict": "positive", "certificate": certificate_record(out, p, L)}
    return {"verdict": "not-positive", "witness": witness_record(out)}


def cmd_check_defining(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    p = parse_poly(load_json(args.p), "p", L.g)
    cert = check_defining(p, L)
    if cert is None:
        return {"verdict": "no-certificate"}
    return {"verdict": "defining", "residual": cert.residual,
            "q_terms": [poly_record(q) for q in cert.q_terms],
            "pencil_terms": [poly_record(q) for q in cert.pencil_terms]}


def cmd_vanishes(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    p = parse_poly(load_json(args.p), "p", L.g)
    I = _module_for(args, p.ncols, L.g)
    return {"vanishes": vanishes_on(p, L, I, _chips(args, p.ncols, L.g))}


def cmd_size_bound(args) -> dict:
    L = parse_pencil(load_json(args.pencil))
    I = _module_for(args, args.ell, L.g)
    chips = degree_bounded_chips(I.ell, L.g, 1 if args.degree is None else args.degree)
    return {"size_bound": size_bound(chips, L, strict=args.strict, I=I), "chip_dim": chips.dim}


def cmd_check_cp(args) -> dict:
    tau = parse_map(load_json(args.map))
    r = is_completely_positive(tau)
    if r.verdict == "indeterminate":
        raise IndeterminateError(r.message)
    out: dict = {"verdict": r.verdict}
    if r.basis is not None:
        out["A0"] = r.basis.A0
    if r.certificate is not None:
        out["certificate"] = certificate_record(r.certificate, r.L_B.to_matpoly(), r.L_A)
    if r.witness is not None:
        out["witness"] = witness_record(r.witness)
        out["S"] = r.S
        out["tau_S_min_eig"] = r.tau_S_min_eig
    return out


def cmd_eval(args) -> dict:
    p = parse_poly(load_json(args.p), "p")
    Xs = parse_tuple(load_json(args.X))
    if len(Xs) != p.g:
        raise InputError(f"{args.X}: polynomial needs {p.g} matrices, got {len(Xs)}")
    if Xs:
        n = Xs[0].shape[0]
        for k, M in enumerate(Xs):
            if M.shape != (n, n):
                raise InputError(f"{args.X}[{k}]: expected shape {(n, n)}, got {M.shape}")
    val = evaluate(p, MatrixTuple(Xs, Xs[0].shape[0]) if Xs else [], n=args.n)
    return {"value": val}


COMMANDS = {
    "radical-zero": cmd_radical_zero,
    "radical": cmd_radical,
    "groebner": cmd_groebner,
    "feasible": cmd_feasible,
    "affine-hull": cmd_affine_hull,
    "check-pos": cmd_check_pos,
    "check-defining": cmd_check_defining,
    "vanishes": cmd_vanishes,
    "size-bound": cmd_size_bound,
    "check-cp": cmd_check_cp,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, help="relative rank threshold (default 1e-8)")
    common.add_argument("--residual-tol", type=float, help="certificate acceptance threshold (default 1e-6)")
    common.add_argument("--sdp-max-iter", type=int, help="interior-point iteration cap (default 500)")
    common.add_argument("--degree", type=int, help="override the chip-space degree")
    common.add_argument("--strict", action="store_true", help="use the strong radical / strict positivity set")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    common.add_argument("-v", "--verbose", action="store_true", help="include audit records")
    common.add_argument("--compact", action="store_true", help="print JSON on one line")

    ap = argparse.ArgumentParser(prog="freera", description="Free real algebraic geometry on spectrahedra.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, *fields):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for f in fields:
            f(sp)
        return sp

    pencil_pos = lambda sp: sp.add_argument("pencil", help="pencil JSON file")  # noqa: E731
    pencil_opt = lambda sp: sp.add_argument("--pencil", required=True, help="pencil JSON file")  # noqa: E731
    p_opt = lambda sp: sp.add_argument("--p", required=True, help="polynomial JSON file")  # noqa: E731
    mod_opt = lambda sp: sp.add_argument("--module", help="module JSON file (default: the zero module)")  # noqa: E731
    ell_opt = lambda sp: sp.add_argument("--ell", type=int, default=1, help="row length when no module is given")  # noqa: E731

    add("radical-zero", "L-real radical of the zero module", pencil_pos)
    add("radical", "L-real radical of a module", pencil_opt, mod_opt, ell_opt)
    add("groebner", "reduced left Groebner basis", lambda sp: sp.add_argument("module", help="module JSON file"))
    add("feasible", "whether L(X) >= 0 has a solution", pencil_pos)

    def hull_opts(sp):
        sp.add_argument("--samples", type=int, default=0, help="rejection-sample this many feasible points")
        sp.add_argument("--radius", type=float, default=2.0, help="sampling box half-width")

    add("affine-hull", "affine hull of the scalar spectrahedron", pencil_pos, hull_opts)
    add("check-pos", "certificate or witness for positivity", p_opt, pencil_opt, mod_opt)
    add("check-defining", "boundary-aware certificate for a defining polynomial", p_opt, pencil_opt)
    add("vanishes", "whether p vanishes on the L-real zero set", p_opt, pencil_opt, mod_opt)
    add("size-bound", "matrix size sufficient for refutations", pencil_opt, mod_opt, ell_opt)
    add("check-cp", "complete positivity of a linear *-map",
        lambda sp: sp.add_argument("--map", required=True, help="map JSON file"))
    add("eval", "evaluate a polynomial at a matrix tuple", p_opt,
        lambda sp: sp.add_argument("--X", required=True, help="matrix tuple JSON file"),
        lambda sp: sp.add_argument("--n", type=int, help="matrix size when g = 0"))
    return ap


def _overrides(args) -> dict:
    out = {}
    if args.rank_tol is not None:
        out["rank"] = args.rank_tol
    if args.residual_tol is not None:
        out["residual"] = args.residual_tol
    if args.sdp_max_iter is not None:
        out["sdp_max_iter"] = args.sdp_max_iter
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        with config.using(**_overrides(args)) as tol:
            result = COMMANDS[args.command](args)
            config_echo = {"rank_tol": tol.rank, "residual_tol": tol.residual, "sdp_max_iter": tol.sdp_max_iter,
                           "degree": args.degree, "strict": args.strict, "seed": args.seed}
    except (InputError, GroebnerError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (IndeterminateError, VerificationError) as exc:
        print(f"indeterminate: {exc}", file=stderr)
        print(dumps({"command": args.command, "verdict": "indeterminate", "message": str(exc)},
                    None if args.compact else 2), file=stdout)
        return EXIT_INDETERMINATE
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    record = {"command": args.command, "config": config_echo} | result
    print(dumps(record, None if args.compact else 2), file=stdout)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))
