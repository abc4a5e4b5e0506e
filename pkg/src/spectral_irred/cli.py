"""Command-line front end.

    spectral-irred orbits --family even-quartic --max-edges 12
    spectral-irred qes --family qes-sextic:m=1,p=0 --alpha 0

Exit status: 0 on success, 2 on usage errors, 3 on numerical failures (the
error is written to stderr as one JSON object).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .problems import ParameterError, ProblemFamily, UnsupportedError, parse_family

log = logging.getLogger("spectral_irred")


class UsageError(Exception):
    pass


def _complex(text: str) -> complex:
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _cnum(z: complex) -> list[float]:
    return [z.real, z.imag]


def _header(cmd: str, args: argparse.Namespace) -> dict:
    params = {k: (str(v) if isinstance(v, complex) else v) for k, v in sorted(vars(args).items())
              if k not in ("func", "command", "out")}
    return {"tool": "spectral-irred", "version": __version__, "command": cmd, "parameters": params}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(cmd: str, args, body: dict) -> None:
    _emit(json.dumps({"header": _header(cmd, args), **body}, indent=1, sort_keys=True) + "\n", args.out)


def _emit_csv(cmd: str, args, columns, rows) -> None:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_header(cmd, args), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    _emit(buf.getvalue(), args.out)


def _family(args) -> ProblemFamily:
    return parse_family(args.family)


# -- subcommands ------------------------------------------------------------


def cmd_trees(args) -> None:
    from .trees import enumerate_trees

    fam = _family(args)
    codes = sorted(enumerate_trees(fam, args.max_edges))
    head = "# " + json.dumps(_header("trees", args), sort_keys=True) + "\n"
    _emit(head + "".join(c + "\n" for c in codes), args.out)


def cmd_orbits(args) -> None:
    from .braids import generators, orbits
    from .trees import enumerate_trees

    fam = _family(args)
    codes = enumerate_trees(fam, args.max_edges)
    rep = orbits(codes, generators(fam), fam, args.max_edges, args.cap)
    body = json.loads(rep.to_json())
    _emit_json("orbits", args, body)


def cmd_det(args) -> None:
    import numpy as np

    from .shooting import det_scan

    fam = _family(args)
    xs = np.linspace(-args.radius, args.radius, args.grid)
    lams = [args.center + complex(x, y) for y in xs for x in xs]
    rows = det_scan(fam, [args.alpha], lams, args.tol)
    _emit_csv("det", args, ("alpha_re", "alpha_im", "lambda_re", "lambda_im", "F_re", "F_im", "log_scale"), rows)


def cmd_eigs(args) -> None:
    from .shooting import eigenvalues_in_disk

    fam = _family(args)
    vals = eigenvalues_in_disk(fam, args.alpha, args.center, args.radius, tol=args.tol)
    _emit_json("eigs", args, {"eigenvalues": [_cnum(v) for v in vals], "count": len(vals)})


def cmd_qes(args) -> None:
    from .qes import charpoly, elementary_eigenvalues, qes_polynomial

    fam = _family(args)
    poly = qes_polynomial(fam, args.alpha)
    roots = elementary_eigenvalues(fam, args.alpha)
    _emit_json("qes", args, {
        "polynomial": str(charpoly(fam).as_expr()),
        "coefficients": [_cnum(c) for c in poly.coefficients],
        "roots": [_cnum(r) for r in roots],
    })


def cmd_track(args) -> None:
    from .continuation import AlphaPath, track

    fam = _family(args)
    if not args.path:
        raise UsageError("track needs --path")
    text = Path(args.path).read_text(encoding="utf-8") if Path(args.path).exists() else args.path
    path = AlphaPath.from_json(text)
    lam0 = args.lam0 if args.lam0 is not None else args.center
    pts = track(fam, path, lam0)
    _emit_csv("track", args, ("alpha_re", "alpha_im", "lambda_re", "lambda_im"),
              [(a.real, a.imag, l.real, l.imag) for a, l in pts])


def cmd_branch(args) -> None:
    from .continuation import find_branch_points

    fam = _family(args)
    c, r = args.center, args.radius
    region = ((c.real - r, c.real + r), (c.imag - r, c.imag + r))
    pts = find_branch_points(fam, region, grid=args.grid, tol=args.tol)
    if args.format == "json":
        _emit_json("branch", args, {"branch_points": [bp.to_dict() for bp in pts]})
    else:
        from .continuation import cycles

        rows = [(bp.alpha_star.real, bp.alpha_star.imag, bp.lambda_star.real, bp.lambda_star.imag,
                 cycles(bp.permutation), bp.residual_F, bp.residual_dF) for bp in pts]
        _emit_csv("branch", args, ("alpha_re", "alpha_im", "lambda_re", "lambda_im", "permutation",
                                   "residual_F", "residual_dF"), rows)


def cmd_rescale(args) -> None:
    from .problems import Kind
    from .rescale import CSV_HEADER, frame_points

    fam = _family(args)
    if fam.kind is not Kind.QES_SEXTIC:
        raise UsageError("rescale needs a qes-sextic family")
    pts = frame_points(fam.m, fam.p, args.radius)
    _emit_csv("rescale", args, CSV_HEADER, [f.row() for f in pts])


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectral-irred", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--family", required=True,
                        help="even-quartic | pt-cubic | qes-sextic:m=M,p=P | qes-quartic:m=M")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--threads", type=int, default=1, help="upper bound for worker threads")
        sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(func=func)
        return sp

    sp = add("trees", cmd_trees, "enumerate trees and write their codes")
    sp.add_argument("--max-edges", type=int, required=True)
    sp = add("orbits", cmd_orbits, "orbits of the braid moves (JSON)")
    sp.add_argument("--max-edges", type=int, required=True)
    sp.add_argument("--cap", type=int, default=None, help="largest tree visited during the search")
    sp = add("det", cmd_det, "determinant on a lambda grid (CSV)")
    sp.add_argument("--alpha", type=_complex, default=0j)
    sp.add_argument("--center", type=_complex, default=0j)
    sp.add_argument("--radius", type=_positive, default=4.0)
    sp.add_argument("--grid", type=int, default=21)
    sp.add_argument("--tol", type=_positive, default=1e-16)
    sp = add("eigs", cmd_eigs, "eigenvalues in a disk (JSON)")
    sp.add_argument("--alpha", type=_complex, default=0j)
    sp.add_argument("--center", type=_complex, default=0j)
    sp.add_argument("--radius", type=_positive, default=6.0)
    sp.add_argument("--tol", type=_positive, default=1e-10)
    sp = add("qes", cmd_qes, "elementary polynomial and its roots (JSON)")
    sp.add_argument("--alpha", type=_complex, default=0j)
    sp = add("track", cmd_track, "follow an eigenvalue along an alpha path (CSV)")
    sp.add_argument("--path", help="JSON waypoint array or a file containing one")
    sp.add_argument("--lam0", type=_complex, default=None, help="starting eigenvalue (default --center)")
    sp.add_argument("--center", type=_complex, default=0j)
    sp = add("branch", cmd_branch, "branch points in a square of the alpha plane")
    sp.add_argument("--center", type=_complex, default=0j)
    sp.add_argument("--radius", type=_positive, default=3.0)
    sp.add_argument("--grid", type=int, default=12)
    sp.add_argument("--tol", type=_positive, default=1e-10)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp = add("rescale", cmd_rescale, "sextic branch points in the beta frame (CSV)")
    sp.add_argument("--radius", type=_positive, default=16.0, help="beta window")
    return p


def _numeric_errors() -> tuple[type, ...]:
    from .braids import ConsistencyError
    from .cellmap import CellMapError
    from .continuation import ProximityError, ResolutionError
    from .rescale import DegenerateScaleError
    from .shooting import AsymptoticSeedError, ContourError, ScalingError

    return (ConsistencyError, CellMapError, ProximityError, ResolutionError, DegenerateScaleError,
            AsymptoticSeedError, ContourError, ScalingError, ArithmeticError)


def _fail(code: int, err: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(err).__name__, "message": str(err)}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("SML_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        return _fail(2, UsageError("--threads must be at least 1"))
    # every driver runs single-threaded, which satisfies any --threads cap
    try:
        args.func(args)
    except (UsageError, ParameterError, UnsupportedError) as e:
        return _fail(2, e)
    except _numeric_errors() as e:
        return _fail(3, e)
    return 0


if __name__ == "__main__":
    sys.exit(main())
