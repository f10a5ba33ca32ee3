"""Command-line front end.

Exit status: 0 on success (for ``verify``: every suite passed), 2 for
invalid arguments, 3 when a numerical solve or check fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import shooting, spectral, verify
from .circle import DomainError, Grid, GridFunction
from .forms import ProblemParams

EXIT_USAGE = 2
EXIT_NUMERIC = 3


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def _write_csv(header, rows, path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def read_potential(coeffs_text: str | None, path: str | None, n: int) -> GridFunction:
    """Potential from cosine coefficients ``c0,c1,...`` or a two-column ``s,phi`` CSV."""
    grid = Grid(n)
    if (coeffs_text is None) == (path is None):
        raise DomainError("give exactly one of --phi and --phi-file")
    if coeffs_text is not None:
        try:
            coeffs = [float(c) for c in coeffs_text.split(",")]
        except ValueError as exc:
            raise DomainError(f"cannot parse --phi {coeffs_text!r}") from exc
        k = np.arange(len(coeffs))
        return GridFunction(grid, np.cos(np.outer(grid.nodes, k)) @ np.array(coeffs))
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        data = np.array([[float(x) for x in r[:2]] for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise DomainError(f"{path}: expected a header and numeric s,phi rows") from exc
    if data.ndim != 2 or data.shape[0] != n:
        raise DomainError(f"{path}: expected {n} rows for --grid-n {n}, found {len(data)}")
    if not np.allclose(data[:, 0], grid.nodes, atol=1e-9):
        raise DomainError(f"{path}: s column must be the grid nodes -pi + 2 pi j / n")
    return GridFunction(grid, data[:, 1])


def _subsample(profile: GridFunction, n: int) -> GridFunction:
    m = profile.grid.n_nodes
    if m % n:
        raise DomainError(f"--grid-n {n} must divide the profile grid size {m}")
    return GridFunction(Grid(n), profile.values[:: m // n])


# --------------------------------------------------------------------------
# subcommands


def cmd_mu_curve(args):
    curve = shooting.mu_curve(args.a, args.p, args.alpha_min, args.alpha_max, args.steps,
                              parallel=args.parallel)
    failed = [r for r in curve.rows if r.error]
    _write_csv(["alpha", "mu_constant", "mu_branch", "mu", "branch"],
               [(r.alpha, r.mu_constant, r.mu_branch, r.mu, r.branch) for r in curve.rows],
               args.output)
    if failed:
        for r in failed:
            print(f"alpha={r.alpha:.12g}: {r.error}", file=sys.stderr)
        return EXIT_NUMERIC
    curve.check()
    return 0


def cmd_profile(args):
    params = ProblemParams(args.a, args.p, args.alpha)
    limit = shooting.dirichlet_nu(params.p, params.alpha)
    main = limit if params.a == 0.5 else shooting.solve_branch(params)
    u = _subsample(main.profile, args.grid_n)
    _write_csv(["s", "u"], zip(u.nodes, u.values), args.output)
    limit_path = args.limit_output
    if limit_path is None and args.output:
        out = Path(args.output)
        limit_path = str(out.with_name(out.stem + "_limit" + out.suffix))
    if limit_path:
        v = _subsample(limit.profile, args.grid_n)
        _write_csv(["s", "u"], zip(v.nodes, v.values), limit_path)
    print(f"mu={main.mu:.12g} nu={limit.mu:.12g} branch={main.branch} "
          f"min_u={main.min_u:.6g}", file=sys.stderr)
    return 0


def cmd_bifurcation(args):
    b = shooting.bifurcation_alpha(args.a, args.p)
    _write_csv(["alpha_star_formula", "alpha_star_empirical", "discrepancy"],
               [(b.alpha_formula, b.alpha_empirical, b.discrepancy)])
    return 0


def cmd_nu(args):
    print(fmt(shooting.dirichlet_nu(args.p, args.alpha).mu))
    return 0


def cmd_klt(args):
    params = ProblemParams(args.a, args.p, 1.0)
    phi = read_potential(args.phi, args.phi_file, args.grid_n)
    report = spectral.klt_check(params, phi, args.cutoff, strict=False)
    _write_csv(["lambda1", "bound", "margin", "q_norm", "closed_form"],
               [(report.lambda1, report.bound, report.margin, report.q_norm, report.closed_form)])
    return 0 if report.margin >= -spectral.KLT_TOL else EXIT_NUMERIC


def cmd_hardy(args):
    params = ProblemParams(args.a, args.p, 1.0)
    phi = read_potential(args.phi, args.phi_file, args.grid_n)
    from .circle import lp_norm

    tau = spectral.hardy_tau(params, phi)
    closed = 4 * params.a**2 + lp_norm(phi, params.q) * (params.p - 2) <= 1
    _write_csv(["tau", "closed_form"], [(tau, closed)])
    return 0


def cmd_verify(args):
    results = verify.run_suites(seed=args.seed)
    _write_csv(["suite", "status", "cases", "worst_margin", "detail"],
               [(r.name, "pass" if r.passed else "FAIL", str(r.cases), r.worst_margin, r.detail)
                for r in results])
    return 0 if all(r.passed for r in results) else EXIT_NUMERIC


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magring", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def ap(p, alpha=True):
        p.add_argument("--a", type=float, required=True, help="magnetic flux (reduced to [0, 1/2])")
        p.add_argument("--p", type=float, required=True, help="exponent p > 2")
        if alpha:
            p.add_argument("--alpha", type=float, required=True)

    s = sub.add_parser("mu-curve", help="CSV of alpha -> mu_{a,p}(alpha)")
    ap(s, alpha=False)
    s.add_argument("--alpha-min", type=float, required=True)
    s.add_argument("--alpha-max", type=float, required=True)
    s.add_argument("--steps", type=int, required=True, help="number of alpha values")
    s.add_argument("--parallel", action="store_true", help="independent solves on a thread pool")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_mu_curve)

    s = sub.add_parser("profile", help="CSV s,u of the optimal profile and of the Dirichlet limit")
    ap(s)
    s.add_argument("--grid-n", type=int, default=512)
    s.add_argument("--output", "-o")
    s.add_argument("--limit-output", help="CSV for the Dirichlet limit profile")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("bifurcation", help="alpha* from the formula and from branch onset")
    ap(s, alpha=False)
    s.set_defaults(func=cmd_bifurcation)

    s = sub.add_parser("nu", help="nu_p(alpha), the Dirichlet constant")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.set_defaults(func=cmd_nu)

    for name, func, text in (("klt", cmd_klt, "eigenvalue bound for H_a - phi"),
                             ("hardy", cmd_hardy, "Hardy constant tau for a potential")):
        s = sub.add_parser(name, help=text)
        ap(s, alpha=False)
        s.add_argument("--phi", help="cosine coefficients c0,c1,... of phi")
        s.add_argument("--phi-file", help="CSV with header and columns s,phi on the grid")
        s.add_argument("--grid-n", type=int, default=512)
        if name == "klt":
            s.add_argument("--cutoff", type=int, default=None, help="Fourier cutoff K (default: adaptive)")
        s.set_defaults(func=func)

    s = sub.add_parser("verify", help="run the property suites")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"magring {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (shooting.ConvergenceError, verify.DescentError, verify.PositivityLost,
            AssertionError) as exc:
        print(f"magring {args.command}: numerical failure: {exc}", file=sys.stderr)
        history = getattr(exc, "history", None) or getattr(exc, "trajectory", None)
        if history:
            print(f"  last residuals: {history[-5:]}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
