"""Command-line front end: one JSON line on stdout, status in the exit code.

Exit codes: 0 certified / true, 1 refuted / false, 2 usage or input error,
3 numerical or capacity error.  Negative numbers in comma lists need the
``--flag=value`` spelling (``--box=-2,2``), as usual with argparse.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .certify import (
    Outcome,
    certify_lipschitz,
    chain_certificate,
    check_condition,
    check_constancy,
)
from .errors import CapacityError, InputError, NumericalError
from .funcrep import PointSet, load_function, load_points
from .geometry import NORMS, DEFAULT_NORM, DualBall
from .oracle import lipschitz_exact, lipschitz_sampled
from .subdiff import eps_subdiff, support, vertices

__all__ = ["run", "main", "build_parser"]

EXIT_TRUE, EXIT_FALSE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _floats(v) -> list:
    return [float(t) for t in v]


def _point(text: str, dim: int) -> np.ndarray:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"bad point literal {text!r}: {exc}") from exc
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    arr = np.asarray(value, dtype=float)
    if arr.shape != (dim,):
        raise InputError(f"point {text!r} must have {dim} entries")
    return arr


def _float_list(text: str) -> list[float]:
    try:
        out = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc
    if not out:
        raise InputError("empty number list")
    return out


def _box(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise InputError(f"--box expects lo,hi, got {text!r}")
    return vals[0], vals[1]


def _modulus(args, dim: int):
    if args.h is not None:
        h = load_function(args.h)
        if h.dim != dim:
            raise InputError(f"modulus has dim {h.dim}, functions have dim {dim}")
        return h
    return DualBall(args.K, args.norm)


def _grid(args, dim: int) -> PointSet:
    if args.grid is not None:
        grid = load_points(args.grid)
        if grid.dim != dim:
            raise InputError(f"grid has dim {grid.dim}, functions have dim {dim}")
        return grid
    if args.box is None or args.per_dim is None:
        raise _Usage("certify needs --grid or both --box and --per-dim")
    lo, hi = _box(args.box)
    return PointSet.lattice(dim, lo, hi, args.per_dim)


def _pair(args):
    f = load_function(args.f)
    g = load_function(args.g)
    if f.dim != g.dim:
        raise InputError(f"dimension mismatch: f has dim {f.dim}, g has dim {g.dim}")
    return f, g


# -- commands -------------------------------------------------------------


def _cmd_subdiff(args):
    f = load_function(args.f)
    x = _point(args.x, f.dim)
    S = eps_subdiff(f, x, args.eps)
    doc = {}
    if args.vertices:
        doc["vertices"] = [_floats(v) for v in vertices(S)]
    else:
        eye = np.eye(f.dim)
        doc["bounds"] = [[-support(S, -e), support(S, e)] for e in eye]
    doc["epsilon"] = S.epsilon
    doc["point"] = _floats(x)
    return doc, True


def _cmd_check(args):
    f, g = _pair(args)
    x = _point(args.x, f.dim)
    r = check_condition(f, g, _modulus(args, f.dim), x, args.eps, args.cond, args.norm)
    return r.to_doc(), r.verdict


def _cmd_certify(args):
    f, g = _pair(args)
    modulus = _modulus(args, f.dim)
    grid = _grid(args, f.dim)
    conds = [c.strip() for c in args.cond.split(",") if c.strip()]
    report = certify_lipschitz(
        f, g, modulus, grid, _float_list(args.eps), conds, args.norm, exact=args.exact
    )
    return report.to_doc(), report.overall is Outcome.CERTIFIED


def _cmd_chain(args):
    f, g = _pair(args)
    cert = chain_certificate(
        f, g, _modulus(args, f.dim), _point(args.x, f.dim), _point(args.y, f.dim),
        args.m, args.eps, args.norm,
    )
    return cert.to_doc(), cert.holds


def _cmd_estimate(args):
    f, g = _pair(args)
    if args.exact:
        k, cell = lipschitz_exact(f, g, args.norm)
        witness = {
            "piece_pair": list(cell.piece_pair),
            "interior_point": _floats(cell.interior_point),
            "margin": float(cell.margin),
        }
        return {"method": "exact", "K": k, "witness": witness}, True
    if args.samples is None or args.box is None:
        raise _Usage("estimate needs --exact or --samples with --box")
    k = lipschitz_sampled(f, g, _box(args.box), args.samples, args.seed, args.norm)
    return {"method": "sampled", "K": k, "witness": None}, True


def _cmd_constancy(args):
    f, g = _pair(args)
    grid = load_points(args.grid)
    if grid.dim != f.dim:
        raise InputError(f"grid has dim {grid.dim}, functions have dim {f.dim}")
    res = check_constancy(f, g, grid, _float_list(args.eps), args.tol, args.norm)
    return res.to_doc(), res.constant


# -- parser ---------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _add_modulus(p):
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--K", type=float, help="radius of the dual-norm ball")
    grp.add_argument("--h", help="max-affine modulus file with h(0) = 0")


def _add_norm(p):
    p.add_argument("--norm", choices=NORMS, default=DEFAULT_NORM, help="primal norm")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dclip", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("subdiff", help="epsilon-subdifferential of f at x")
    p.add_argument("--f", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--vertices", action="store_true")
    p.set_defaults(func=_cmd_subdiff)

    p = sub.add_parser("check", help="one condition at one (x, eps)")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    _add_modulus(p)
    p.add_argument("--x", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--cond", choices=["II", "IV", "VI"], required=True)
    _add_norm(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("certify", help="sweep conditions over a grid")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    _add_modulus(p)
    p.add_argument("--grid")
    p.add_argument("--box")
    p.add_argument("--per-dim", type=int)
    p.add_argument("--eps", required=True)
    p.add_argument("--cond", default="II,IV,VI")
    p.add_argument("--exact", action="store_true")
    _add_norm(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("chain", help="segment chain certificate between x and y")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    _add_modulus(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_norm(p)
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("estimate", help="Lipschitz constant of f - g")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box")
    _add_norm(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("constancy", help="is f - g constant on the grid")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_norm(p)
    p.set_defaults(func=_cmd_constancy)
    return parser


def _emit(doc, out) -> None:
    out.write(json.dumps(doc) + "\n")


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    """Execute one command; write its JSON line to ``out`` and return the exit code."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        doc, ok = args.func(args)
    except _Usage as exc:
        _emit({"error": "usage", "message": str(exc)}, out)
        return EXIT_INPUT
    except (InputError, OSError) as exc:
        _emit({"error": "input", "message": str(exc)}, out)
        return EXIT_INPUT
    except (NumericalError, CapacityError) as exc:
        _emit({"error": "numerical", "message": str(exc)}, out)
        return EXIT_NUMERIC
    _emit(doc, out)
    return EXIT_TRUE if ok else EXIT_FALSE


def main() -> None:
    sys.exit(run())
