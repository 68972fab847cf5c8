"""Command-line front end: `ortheta <subcommand> ...` with JSON output."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import errors as E

log = logging.getLogger("ortheta")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# input helpers


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise E.ParseError(f"{path}: {exc}") from exc


def load_lattice(path: str):
    from .lattice import make_lattice

    d = _read_json(path)
    if not isinstance(d, dict) or "gram" not in d:
        raise E.ParseError(f"{path}: lattice JSON needs a 'gram' entry")
    return make_lattice(d["gram"], d.get("name"))


def _ints(s: str) -> tuple:
    try:
        return tuple(Fraction(t.strip()) for t in s.split(",") if t.strip())
    except ValueError as exc:
        raise E.ParseError(f"bad vector {s!r}") from exc


def load_form(spec: str, L, seed: int, weight=None, horizon=None):
    """A coefficient file, 'delta[:prec]' or 'synthetic[:max_n]' (seeded by --seed)."""
    from .modform import delta_coeffs, load_coeffs, synthetic_coeffs

    kind, _, rest = spec.partition(":")
    if kind == "delta" and not os.path.exists(spec):
        return delta_coeffs(int(rest) if rest else int(horizon or 12), L)
    if kind == "synthetic" and not os.path.exists(spec):
        if weight is None:
            raise UsageError("synthetic forms need --kappa to fix the weight")
        return synthetic_coeffs(L, weight, Fraction(rest) if rest else Fraction(horizon or 6), seed=seed)
    return load_coeffs(spec, L)


def _complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _tau(s: str):
    parts = s.split(",")
    if len(parts) != 2:
        raise E.ParseError("tau must be given as 'x,y'")
    x = Fraction(parts[0].strip())
    return (x, float(parts[1]))


def _matrix_arg(s: str, b: int) -> np.ndarray:
    if s == "id":
        return np.eye(b)
    if os.path.exists(s):
        return np.asarray(_read_json(s), dtype=float)
    return np.array([[float(x) for x in row.split(",")] for row in s.split("/")])


def _poly_arg(spec: str, n: int):
    from .harmonic import Poly, parse_poly_spec

    if os.path.exists(spec):
        return Poly.from_json(_read_json(spec)), None
    return parse_poly_spec(spec, n)


# ---------------------------------------------------------------------------
# subcommands


def cmd_lattice(args):
    from .lattice import discriminant_group, signature_of, split_at

    L = load_lattice(args.input)
    if args.action == "info":
        D = discriminant_group(L)
        bp, bm = signature_of(L.gram)
        return {
            "lattice": L.to_json(),
            "signature": [bp, bm],
            "rank": L.rank,
            "det": L.det,
            "discriminant": {
                "order": len(D),
                "invariant_factors": list(D.invariant_factors),
                "cosets": [{"gamma": [str(x) for x in g], "q": str(q)} for g, q in zip(D.coset_reps, D.q_values)],
            },
        }
    if args.z is None:
        raise UsageError("lattice split needs --z")
    sp = split_at(L, _ints(args.z), _ints(args.z_prime) if args.z_prime else None)
    return {
        "z": list(sp.z),
        "z_prime": [str(x) for x in sp.z_prime],
        "N": sp.N,
        "zeta": list(sp.zeta),
        "L1_basis": [list(v) for v in sp.L1_basis],
        "L1": None if sp.L1 is None else sp.L1.to_json(),
        "D_L_order": len(sp.D),
        "D_L1_order": None if sp.D1 is None else len(sp.D1),
    }


def cmd_weil(args):
    from .lattice import discriminant_group
    from .weil import rho_word

    L = load_lattice(args.input)
    D = discriminant_group(L)
    op = rho_word(D, None, args.word)
    return {"word": args.word, "keys": [[str(x) for x in g] for g in D.coset_reps], "matrix": op.to_json()}


def cmd_harmonic(args):
    from .harmonic import dim_harmonic, vilenkin_basis

    basis = vilenkin_basis(args.n, args.k)
    return {
        "n": args.n,
        "k": args.k,
        "dimension": dim_harmonic(args.n, args.k),
        "basis": [{"kappa": str(kap), "poly": p.to_json()} for kap, p in basis],
    }


def cmd_theta(args):
    from .lattice import adapted_isometry, build_tower, discriminant_group, standard_isometry
    from .theta import theta_full

    L = load_lattice(args.input)
    if args.isometry == "adapted":
        tw = build_tower(L)
        v0 = adapted_isometry(L, tw) if tw.s else standard_isometry(L)
    else:
        v0 = standard_isometry(L)
    p, _ = _poly_arg(args.p, L.b_plus) if args.p else (None, None)
    g = _matrix_arg(args.g, L.rank)
    tv = theta_full(L, v0, _tau(args.tau), g=g, p=p, R=args.radius)
    D = discriminant_group(L)
    return {
        "tau": args.tau,
        "radius": args.radius,
        "points": tv.points,
        "tail_estimate": tv.tail,
        "values": [{"gamma": [str(x) for x in k], "value": _complex(tv.values[k])} for k in D.coset_reps],
    }


def _tower_arg(L, zs: str | None):
    from .lattice import build_tower

    if not zs:
        return build_tower(L)
    return build_tower(L, [_ints(z) for z in zs.split(";")])


def cmd_lift(args):
    from .harmonic import MultiIndexKappa
    from .lift import ParabolicElement, lift_value, lift_value_b2

    L = load_lattice(args.lattice)
    tw = _tower_arg(L, args.tower)
    if tw.s == 0:
        raise E.InvalidTower("the lattice has no isotropic split")
    kap = MultiIndexKappa.parse(args.kappa)
    r = len(tw.splits[0].L1_basis)
    gz = ParabolicElement.parse(args.gz, r)
    f = load_form(args.form, L, args.seed, kap.k + Fraction(L.sig, 2), args.cutoff)
    oracle_opts = {"y_max": args.ymax, "nx": args.nx, "ny": args.ny, "R": args.radius}
    if L.b_plus == 2:
        if kap.n != 2:
            raise E.ValidationError("for b+ = 2 give kappa as a single signed entry, e.g. '12' or '-12'")
        ex = lift_value_b2(f, tw, kap.sign, kap.k, gz, args.cutoff)
    else:
        ex = lift_value(f, tw, kap, gz, args.cutoff, args.ct, oracle_opts=oracle_opts)
    out = ex.to_json()
    out["lattice"] = L.to_json()
    return out


def cmd_exponents(args):
    from .lift import cuspidal_exponents

    return cuspidal_exponents(args.b, args.s)


def _restriction_setup(L, kjson):
    from .qmath import solve_in_span
    from .restrict import restriction_setup

    try:
        z, zp, k1 = kjson["z"], kjson["z_prime"], kjson["K1"]
    except (KeyError, TypeError) as exc:
        raise E.ParseError("K JSON needs 'z', 'z_prime' and 'K1' (rows in L coordinates)") from exc
    from .lattice import split_at

    sp = split_at(L, _ints(",".join(map(str, z))), _ints(",".join(map(str, zp))))
    rows = [list(r) for r in sp.L1_basis]
    k1_l1 = []
    for v in k1:
        c = solve_in_span(rows, [Fraction(x) for x in v])
        if any(x.denominator != 1 for x in c):
            raise E.NotInLattice(f"K1 vector {v} is not in L1")
        k1_l1.append([int(x) for x in c])
    return restriction_setup(L, z, zp, k1_l1)


def cmd_restrict(args):
    from .harmonic import MultiIndexKappa
    from .lift import ParabolicElement
    from .restrict import default_restriction_setup, restriction_value

    if args.lattice:
        L = load_lattice(args.lattice)
        if not args.K:
            raise UsageError("restrict with --lattice also needs --K")
        setup = _restriction_setup(L, _read_json(args.K))
    else:
        setup = default_restriction_setup()
    kap = MultiIndexKappa.parse(args.kappa)
    f = load_form(args.form, setup.L, args.seed, kap.k + Fraction(setup.L.sig, 2), args.cutoff)
    gK = ParabolicElement.parse(args.gk, 2)
    rv = restriction_value(f, setup, kap, gK, args.cutoff, args.ct, {"y_max": args.ymax, "nx": args.nx, "ny": args.ny, "R": args.radius})
    out = rv.to_json()
    out["K"] = setup.K.to_json()
    return out


def cmd_bessel(args):
    from .bessel import I_closed, I_quadrature, SectionPoint, proportionality_check, sample_points
    from .harmonic import MultiIndexKappa

    bp, bm = args.bplus, args.bminus
    if bp == 2:
        kap = MultiIndexKappa((args.k,), args.sign)
    else:
        if args.k1 is None:
            raise UsageError("--k1 is required for b+ > 2")
        ent = (args.k, args.k1) + (0,) * (bp - 3)
        kap = MultiIndexKappa(ent, args.sign)
    rng = np.random.default_rng(args.seed)
    pts = sample_points(bp, bm, args.samples, rng, args.radius)
    rows = []
    worst = 0.0
    for u in pts:
        closed = I_closed(u, kap, bp, bm)
        q = I_quadrature(u, kap, bp, bm)
        err = abs(q.value - closed)
        worst = max(worst, err)
        rows.append({"u": list(u), "closed": _complex(closed), "quadrature": _complex(q.value), "abs_error": err, "quadrature_error_estimate": q.error_estimate, "tau_defect": SectionPoint(u, bp, bm).tau_defect()})
    prop = proportionality_check(pts, kap, bp, bm, 1e-6)
    return {
        "b_plus": bp,
        "b_minus": bm,
        "kappa": str(kap),
        "samples": rows,
        "max_abs_error": worst,
        "tolerance": args.tol or 1e-3,
        "passed": worst <= (args.tol or 1e-3) and prop["passed"],
        "proportionality": prop,
    }


def cmd_oracle(args):
    from .lattice import adapted_isometry, build_tower, standard_isometry
    from .oracle import make_grid, petersson_lift

    L = load_lattice(args.lattice)
    tw = build_tower(L)
    v0 = adapted_isometry(L, tw) if tw.s else standard_isometry(L)
    p, kap = _poly_arg(args.p, L.b_plus)
    weight = (p.degree if not p.is_zero() else 0) + Fraction(L.sig, 2)
    f = load_form(args.form, L, args.seed, weight)
    if args.gz:
        from .lift import ParabolicElement

        if not tw.s:
            raise UsageError("--gz needs an isotropic split")
        g = ParabolicElement.parse(args.gz, len(tw.splits[0].L1_basis)).matrix(tw.splits[0])
    else:
        g = _matrix_arg(args.g, L.rank)
    grid = make_grid(args.ymax, args.nx, args.ny, args.rule)
    ov = petersson_lift(f, L, v0, g, p, args.radius, grid)
    return {
        "value": _complex(ov.value),
        "error_estimate": ov.error_estimate,
        "grid_delta": ov.grid_delta,
        "cusp_tail": ov.cusp_tail,
        "theta_tail": ov.theta_tail,
        "nodes": ov.nodes,
        "kappa": None if kap is None else str(kap),
    }


def cmd_verify(args):
    from .checks import Options, run_suite

    opt = Options(tol=args.tol if args.tol is not None else 1e-12, seed=args.seed, full=args.suite == "full")
    rows = run_suite(opt, timing=args.timing, log=log.info)
    failed = [r["check"] for r in rows if r["status"] == "fail"]
    report = {"suite": args.suite, "seed": args.seed, "tol": opt.tol, "checks": rows, "failed": failed, "passed": not failed}
    return report, (EXIT_NUMERIC if failed else EXIT_OK)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    glob = _Parser(add_help=False)
    glob.add_argument("--tol", type=float, default=None, help="tolerance for float-rounding checks")
    glob.add_argument("--threads", type=int, default=None, help="worker threads for BLAS-backed numerics")
    glob.add_argument("--out", default=None, help="write JSON here instead of standard output")
    glob.add_argument("--seed", type=int, default=0, help="seed for synthetic coefficients and sample points")
    glob.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="ortheta", description="Theta lifts to orthogonal groups: lattices, Weil representation, Fourier expansions.", parents=[glob])
    p.add_argument("--version", action="version", version=f"ortheta {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("lattice", parents=[glob], help="discriminant form and isotropic splits")
    s.add_argument("action", choices=["info", "split"])
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--z")
    s.add_argument("--z-prime", dest="z_prime")
    s.set_defaults(fn=cmd_lattice)

    s = sub.add_parser("weil", parents=[glob], help="Weil representation matrix of a word in S, T, t")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--word", required=True)
    s.set_defaults(fn=cmd_weil)

    s = sub.add_parser("harmonic", parents=[glob], help="Vilenkin basis of harmonic polynomials")
    s.add_argument("action", choices=["basis"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(fn=cmd_harmonic)

    s = sub.add_parser("theta", parents=[glob], help="vector-valued Siegel theta function")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--tau", required=True, help="x,y with x rational")
    s.add_argument("--p", help="kappa:..., basis:k=..,idx=.., monomial:..., one, or a polynomial JSON file")
    s.add_argument("--g", default="id")
    s.add_argument("--radius", type=float, default=8.0)
    s.add_argument("--isometry", choices=["standard", "adapted"], default="standard")
    s.set_defaults(fn=cmd_theta)

    def oracle_flags(s, nx=48, ny=96):
        s.add_argument("--ymax", type=float, default=6.0)
        s.add_argument("--nx", type=int, default=nx)
        s.add_argument("--ny", type=int, default=ny)
        s.add_argument("--radius", type=float, default=8.0)

    s = sub.add_parser("lift", parents=[glob], help="Fourier expansion of the theta lift at a parabolic element")
    s.add_argument("--lattice", required=True)
    s.add_argument("--form", required=True, help="coefficient JSON, delta[:prec] or synthetic[:max_n]")
    s.add_argument("--kappa", required=True)
    s.add_argument("--gz", default="a=1;g1=id")
    s.add_argument("--cutoff", type=Fraction, default=Fraction(6))
    s.add_argument("--ct", choices=["recursive", "b2-formula", "oracle", "zero"], default="recursive")
    s.add_argument("--tower", help="isotropic vectors z;z1;... in successive L1 coordinates")
    oracle_flags(s)
    s.set_defaults(fn=cmd_lift)

    s = sub.add_parser("exponents", parents=[glob], help="cuspidal exponent table")
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--s", type=int, required=True)
    s.set_defaults(fn=cmd_exponents)

    s = sub.add_parser("restrict", parents=[glob], help="restriction of a lift to a signature (3,1) sublattice")
    s.add_argument("--lattice")
    s.add_argument("--K", help="JSON with z, z_prime and K1 rows in L coordinates")
    s.add_argument("--form", default="synthetic")
    s.add_argument("--kappa", default="6,4")
    s.add_argument("--gk", default="u=0.1,-0.2;a=0.9;g1=id")
    s.add_argument("--cutoff", type=Fraction, default=Fraction(4))
    s.add_argument("--ct", choices=["oracle", "none"], default="none")
    oracle_flags(s, 24, 48)
    s.set_defaults(fn=cmd_restrict)

    s = sub.add_parser("bessel", parents=[glob], help="inverse Fourier transform identities")
    s.add_argument("action", choices=["check"])
    s.add_argument("--bplus", type=int, required=True)
    s.add_argument("--bminus", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--k1", type=int)
    s.add_argument("--sign", type=int, choices=[1, -1], default=1)
    s.add_argument("--samples", type=int, default=5)
    s.add_argument("--radius", type=float, default=0.4)
    s.set_defaults(fn=cmd_bessel)

    s = sub.add_parser("oracle", parents=[glob], help="Petersson-integral reference value of the lift")
    s.add_argument("--lattice", required=True)
    s.add_argument("--form", required=True)
    s.add_argument("--p", required=True)
    s.add_argument("--g", default="id")
    s.add_argument("--gz", help="parabolic element instead of --g")
    s.add_argument("--rule", choices=["gauss", "midpoint"], default="gauss")
    oracle_flags(s)
    s.set_defaults(fn=cmd_oracle)

    s = sub.add_parser("verify", parents=[glob], help="run every invariant check")
    s.add_argument("--suite", choices=["fast", "full"], default="fast")
    s.add_argument("--timing", action="store_true", help="add wall times (the report is then not bit-reproducible)")
    s.set_defaults(fn=cmd_verify)
    return p


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be positive")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    # numpy is already loaded here, so the variables alone come too late for BLAS
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    threadpool_limits(limits=n)


def _emit(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=False, default=str)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text + "\n")


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"ortheta: usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        _set_threads(args.threads)
        res = args.fn(args)
        code = EXIT_OK
        if isinstance(res, tuple):
            res, code = res
        _emit(res, args.out)
        return code
    except UsageError as exc:
        sys.stderr.write(f"ortheta: usage error: {exc}\n")
        return EXIT_USAGE
    except E.ValidationError as exc:
        sys.stderr.write(f"ortheta: {type(exc).__name__}: {exc}\n")
        return EXIT_VALIDATION
    except E.OrthetaError as exc:
        sys.stderr.write(f"ortheta: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
