"""Command-line front end: ``mgcdiff <subcommand> [options]``."""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds, experiments, features, gmm, kernel, trp
from .errors import MgcError, ValidationError

EXIT_USAGE = 64
EXIT_NO_INPUT = 66


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _json(doc, out):
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _context(args):
    return kernel.MgcContext(gmm.gmm_load(args.model), args.epsilon)


def _matrix(path):
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed matrix file ({exc})") from None


def cmd_fit(args):
    data = gmm.read_points(args.data)
    model = gmm.gmm_fit_em(data, args.components, tied=args.tied, seed=args.seed,
                           tol=args.tol, max_iter=args.max_iter)
    if args.out is None:
        raise ValidationError("fit requires --out")
    gmm.gmm_store(model, args.out)


def cmd_embed(args):
    ctx = _context(args)
    vecs = features.embed_batch(ctx, gmm.read_points(args.data), args.l, nu_floor=args.nu_floor)
    out = args.out or (experiments.default_out_dir() / "embedding.csv")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    features.write_embeddings(out, vecs, args.l, ctx)


def cmd_nu(args):
    ctx = _context(args)
    nu = kernel.stationary_density(ctx, gmm.read_points(args.data))
    _emit("nu\n" + "".join(f"{v!r}\n" for v in np.atleast_1d(nu).tolist()), args.out)


def cmd_dist(args):
    ctx = _context(args)
    x = gmm.read_points(args.data)
    z = None if args.data2 is None else gmm.read_points(args.data2)
    if args.l is None:
        d = kernel.pairwise_diffusion_distances(ctx, x, z, nu_floor=args.nu_floor)
    else:
        fx = features.embed_batch(ctx, x, args.l, nu_floor=args.nu_floor)
        fz = fx if z is None else features.embed_batch(ctx, z, args.l, nu_floor=args.nu_floor)
        d = np.array([np.linalg.norm(fz - row, axis=1) for row in fx])
    lines = [",".join(repr(float(v)) for v in row) for row in d]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_bound(args):
    ctx = _context(args)
    s = bounds.worst_case_norms(ctx, args.radius)
    doc = {
        "l": args.l,
        "epsilon": args.epsilon,
        "nu_min": args.nu_min,
        "radius": args.radius,
        "h_mode": args.h_mode,
        "worst_norms": s.tolist(),
        "gb1": bounds.bound_gb1(s, args.l),
        "gb2": bounds.bound_gb2(s, args.l),
        "eta": bounds.bound_eta(ctx, args.l, args.nu_min, args.h_mode, args.radius, worst_norms=s),
    }
    _json(doc, args.out)


def cmd_select_l(args):
    ctx = _context(args)
    budget = bounds.select_truncation(ctx, args.zeta, args.nu_min, args.radius,
                                      l_cap=args.l_cap, h_mode=args.h_mode)
    _emit(budget.to_json() + "\n", args.out)


def cmd_trp(args):
    a = _matrix(args.a)
    b = _matrix(args.b).ravel()
    problem = trp.TrpProblem(a, b, args.rho)
    sol = trp.trp_solve(problem)
    _json({
        "x_star": sol.x_star.tolist(),
        "tau": sol.tau,
        "value": sol.value,
        "case": sol.case,
        "kkt": sol.kkt_residuals(problem),
    }, args.out)


def cmd_example1(args):
    out = args.out or experiments.default_out_dir()
    rep = experiments.run_example1(args.samples, args.components, args.seed,
                                   out_dir=out, plots=args.plots)
    _json(rep.summary(), None)


def _grid(text, kind):
    try:
        return tuple(kind(v) for v in text.split(","))
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}") from None


def cmd_example2(args):
    cfg = experiments.SweepConfig(
        epsilons=_grid(args.epsilons, float) if args.epsilons else experiments._default_epsilons(),
        orders=_grid(args.orders, int) if args.orders else tuple(range(1, 15)),
        n_points=args.samples,
        nu_min=args.nu_min,
        seed=args.seed,
        n_components=args.components,
        n_pairs=args.pairs,
        n_extreme=args.extreme,
        literal_delta=args.literal_delta,
        h_mode=args.h_mode,
        out_dir=args.out or experiments.default_out_dir(),
        plots=args.plots,
    )
    rep = experiments.run_example2(cfg)
    print(f"{len(rep.rows)} cells, {len(rep.violations)} bound violations, "
          f"data radius {rep.radius:.6g}")


def _model_args(p, l=False):
    p.add_argument("--model", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    if l:
        p.add_argument("--l", type=int, required=True)


def build_parser():
    parser = _Parser(prog="mgcdiff", description="Diffusion geometry under Gaussian-mixture measures.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a Gaussian mixture by EM")
    p.add_argument("--data", required=True)
    p.add_argument("--components", type=int, required=True)
    p.add_argument("--tied", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("embed", help="truncated diffusion representation of each point")
    _model_args(p, l=True)
    p.add_argument("--data", required=True)
    p.add_argument("--nu-floor", type=float, default=kernel.NU_FLOOR)
    p.add_argument("--out")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("dist", help="diffusion distance matrix")
    _model_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--data2")
    p.add_argument("--l", type=int, help="use the order-l embedding instead of the closed form")
    p.add_argument("--nu-floor", type=float, default=kernel.NU_FLOOR)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("nu", help="stationary density at each point")
    _model_args(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_nu)

    p = sub.add_parser("bound", help="certified truncation bound for one order")
    _model_args(p, l=True)
    p.add_argument("--nu-min", type=float, required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--h-mode", choices=bounds.H_MODES, default="unit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("select-l", help="smallest order meeting a distance tolerance")
    _model_args(p)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--nu-min", type=float, required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--l-cap", type=int, default=100)
    p.add_argument("--h-mode", choices=bounds.H_MODES, default="unit")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select_l)

    p = sub.add_parser("trp", help="maximize ||Ax - b||^2 over a ball")
    p.add_argument("--a", required=True, help="CSV matrix A")
    p.add_argument("--b", required=True, help="CSV vector b")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_trp)

    p = sub.add_parser("example1", help="stationary density on the two-squares measure")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--components", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example1)

    p = sub.add_parser("example2", help="truncation error sweep over eps and l")
    p.add_argument("--samples", type=int, default=3000)
    p.add_argument("--components", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilons", help="comma-separated eps grid")
    p.add_argument("--orders", help="comma-separated l grid")
    p.add_argument("--nu-min", type=float, default=1e-3)
    p.add_argument("--pairs", type=int, default=10_000)
    p.add_argument("--extreme", type=int, default=100)
    p.add_argument("--literal-delta", action="store_true")
    p.add_argument("--h-mode", choices=bounds.H_MODES, default="unit")
    p.add_argument("--plots", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example2)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code or 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_NO_INPUT
    except MgcError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
