"""Command-line interface.

Every subcommand takes a required ``--seed`` (where randomness is involved)
and an ``--out-dir``; alongside its outputs it writes ``manifest.json`` with
the argument vector, the parameters, the package version and a SHA-256
digest of each output file.  Exit codes: 0 success, 2 bad usage or input,
3 an internal audit (KKT conditions, bound violations) failed.
"""

import argparse
import dataclasses
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .bounds import re_constant_estimate
from .correlation import correlation_profile
from .design import design_to_csv, expand_design, gen_clustered, gen_equicorrelated, gen_instance, read_design
from .experiments import (
    TABLE1_CONFIGS,
    ExperimentConfig,
    LambdaGrid,
    bound_validation,
    build_replicate,
    coverage_check,
    curve_csv,
    run_replicates,
    summarize,
    summary_csv,
    table1,
    violations_csv,
)
from .lasso import kkt_check, lars_lasso_path, path_to_csv, solve_at

EXIT_OK, EXIT_USAGE, EXIT_AUDIT = 0, 2, 3


class UsageError(Exception):
    pass


def _write(out_dir, name, text, written):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    written.append(path)
    return path


def _jsonable(v):
    if dataclasses.is_dataclass(v):
        return dataclasses.asdict(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _manifest(args, argv, written):
    params = {k: v for k, v in vars(args).items() if k != "func"}
    digests = {}
    for path in written:
        with open(path, "rb") as fh:
            digests[os.path.basename(path)] = hashlib.sha256(fh.read()).hexdigest()
    doc = {
        "subcommand": args.command,
        "argv": list(argv),
        "parameters": params,
        "base_seed": params.get("seed"),
        "version": __version__,
        "outputs": digests,
    }
    with open(os.path.join(args.out_dir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _grid(text):
    try:
        lo, hi, count = text.split(",")
        return LambdaGrid(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX,COUNT ({exc})") from None


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _read_response(path):
    """One value per line after a header line ``y``."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "y":
        raise UsageError(f"{path}: line 1: expected header 'y'")
    vals = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            vals.append(float(line))
        except ValueError:
            raise UsageError(f"{path}: line {lineno}: not a number: {line!r}") from None
    return np.array(vals)


def _vector_csv(name, v):
    return name + "\n" + "".join(f"{x:.17g}\n" for x in v)


# -- subcommands ---------------------------------------------------------------


def cmd_generate(args, written):
    if args.kind == "equicorrelated":
        D = gen_equicorrelated(args.n, args.p, args.rho, args.seed)
    elif args.kind == "expanded":
        if args.eta is None:
            raise UsageError("--kind expanded needs --eta")
        base = gen_equicorrelated(args.n, args.p, args.rho, args.seed)
        D = expand_design(base, args.eta, args.seed + 1)
    else:
        if args.nu is None:
            raise UsageError("--kind clustered needs --nu")
        D = gen_clustered(args.n, args.p, args.nu, args.seed)
    _write(args.out_dir, "design.csv", design_to_csv(D), written)
    if args.s is not None:
        inst = gen_instance(D, args.s, args.sigma, args.seed + 2)
        _write(args.out_dir, "response.csv", _vector_csv("y", inst.Y), written)
        _write(args.out_dir, "beta0.csv", _vector_csv("beta0", inst.beta0), written)
    print(f"wrote {D.n}x{D.p} design ({D.provenance})")
    return EXIT_OK


def cmd_path(args, written):
    D = read_design(args.design)
    Y = _read_response(args.response)
    if Y.shape[0] != D.n:
        raise UsageError(f"response has {Y.shape[0]} values, design has {D.n} rows")
    path = lars_lasso_path(D, Y)
    _write(args.out_dir, "path.csv", path_to_csv(path), written)
    worst, ok = 0.0, True
    points = list(path.knots)
    points += [0.5 * (a + b) for a, b in zip(path.knots[:-1], path.knots[1:])]
    for lam in points:
        rep = kkt_check(D, Y, solve_at(path, lam), lam, args.kkt_tol)
        worst = max(worst, rep.max_gradient_violation)
        ok &= rep.passed
    report = {"knots": len(path.knots), "checked": len(points), "max_gradient_violation": worst, "tol": args.kkt_tol, "passed": ok}
    _write(args.out_dir, "kkt.json", json.dumps(report, indent=2) + "\n", written)
    print(f"{len(path.knots)} knots, lambda_0 = {path.lambda_max:.6g}, KKT {'passed' if ok else 'FAILED'} (max violation {worst:.3g})")
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_corr(args, written):
    D = read_design(args.design)
    seed_atoms = np.sqrt(D.n) * np.eye(D.n) if args.seed_basis == "standard" else None
    strategies = tuple(args.strategies.split(","))
    prof = correlation_profile(D, args.kappa, args.x_grid, args.sigma, seed_atoms=seed_atoms, strategies=strategies)
    problems = prof.audit(D)
    _write(args.out_dir, "profile.json", prof.to_json() + "\n", written)
    print(f"K_kappa_hat = {prof.K_kappa_hat:.6g}, F_hat = {prof.F_hat:.6g}, lambda_kappa = {prof.lambda_kappa:.6g}")
    if problems:
        print(f"certificate audit failed: {problems}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _config(args, **kw):
    fields = dict(
        n=args.n,
        p=args.p,
        s=args.s,
        sigma=args.sigma,
        rho=args.rho,
        eta=args.eta,
        replicates=args.replicates,
        grid=args.grid,
        mode=args.mode,
        base_seed=args.seed,
        scale=args.scale,
        design="clustered" if args.nu is not None else "equicorrelated",
        nu=args.nu,
    )
    fields.update(kw)
    try:
        return ExperimentConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_experiment(args, written):
    if args.replicates < 1:
        raise UsageError("--replicates must be at least 1")
    if args.preset == "table1":
        rows = [_config(args, n=n, p=p, s=s, sigma=sg, rho=rho, eta=None, nu=None, design="equicorrelated") for n, p, s, sg, rho in TABLE1_CONFIGS]
        summaries = table1(rows, jobs=args.jobs)
        _write(args.out_dir, "summary.csv", summary_csv(summaries), written)
    elif args.preset in ("fig1", "fig2"):
        eta = 0.001 if args.preset == "fig1" else 0.1
        grid = args.grid or LambdaGrid()
        c1 = _config(args, n=20, p=40, s=4, sigma=1.0, rho=0.0, eta=None, grid=grid, nu=None, design="equicorrelated")
        c2 = _config(args, n=20, p=40, s=4, sigma=1.0, rho=0.0, eta=eta, grid=grid, nu=None, design="equicorrelated")
        s1 = summarize(run_replicates(c1, args.jobs), c1)
        s2 = summarize(run_replicates(c2, args.jobs), c2)
        summaries = [s1, s2]
        _write(args.out_dir, "summary.csv", summary_csv(summaries), written)
        _write(args.out_dir, "curve.csv", curve_csv({"algorithm1": s1, "algorithm2": s2}), written)
    else:
        cfg = _config(args)
        summaries = [summarize(run_replicates(cfg, args.jobs), cfg)]
        _write(args.out_dir, "summary.csv", summary_csv(summaries), written)
        if cfg.grid is not None:
            label = f"algorithm{cfg.algorithm}"
            _write(args.out_dir, "curve.csv", curve_csv({label: summaries[0]}), written)
    for row in summaries:
        print(
            f"{row.config.label()}: lambda_min {row.lambda_min_mean:.3f} +- {row.lambda_min_se:.3f}, "
            f"PE_min {row.pe_min_mean:.3f} +- {row.pe_min_se:.3f}"
        )
    return EXIT_OK


def cmd_validate_bounds(args, written):
    cfg = _config(args, grid=args.grid or LambdaGrid())
    rep = bound_validation(cfg)
    _write(args.out_dir, "violations.csv", violations_csv(rep), written)
    print(f"{rep.pairs} (replicate, lambda) pairs, {rep.pairs_on_T} on the event, {rep.violations} violations")
    if args.re_sbar:
        X = build_replicate(cfg, 0)[0]
        est = re_constant_estimate(X, args.re_sbar, args.re_budget, args.seed)
        print(f"indicative RE constant for replicate 0: phi_hat({args.re_sbar}) = {est.phi_hat:.4g} (an upper estimate)")
    return EXIT_OK if rep.ok() else EXIT_AUDIT


def cmd_coverage(args, written):
    cfg = _config(args, scale="sqrt_n")
    res = coverage_check(cfg, args.kappa, args.draws, classical=args.classical)
    doc = {
        "frequency": res.frequency,
        "draws": res.draws,
        "kappa": res.kappa,
        "target": 1 - res.kappa,
        "lambda_kappa": res.lambda_kappa,
        "K_kappa_hat": res.K_kappa_hat,
    }
    _write(args.out_dir, "coverage.json", json.dumps(doc, indent=2) + "\n", written)
    print(f"P(T) ~ {res.frequency:.4f} over {res.draws} draws (target >= {1 - res.kappa:g})")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _add_design_flags(p, with_seed=True):
    p.add_argument("--n", type=int, default=20, help="observations (default 20)")
    p.add_argument("--p", type=int, default=40, help="variables before expansion (default 40)")
    p.add_argument("--s", type=int, default=4, help="nonzero true coefficients, all equal to 1 (default 4)")
    p.add_argument("--sigma", type=float, default=1.0, help="noise level (default 1)")
    p.add_argument("--rho", type=float, default=0.0, help="equicorrelation in [0, 1) (default 0)")
    p.add_argument("--eta", type=float, default=None, help="append p-1 copies X_j + eta N of every column")
    p.add_argument("--nu", type=float, default=None, help="use the clustered design X_1 + nu N instead")
    p.add_argument("--replicates", type=int, default=1000, help="Monte-Carlo replicates (default 1000)")
    p.add_argument("--grid", type=_grid, default=None, help="lambda grid MIN,MAX,COUNT (figure default 0,10,101)")
    p.add_argument("--mode", choices=["exact", "grid"], default="exact", help="per-replicate optimum: closed form or best grid point (default exact)")
    p.add_argument("--scale", choices=["unit", "sqrt_n"], default="unit", help="column norm used for fitting (default unit)")
    p.add_argument("--seed", type=int, required=True, help="base seed; replicate r uses a seed derived from it")


def build_parser():
    ap = argparse.ArgumentParser(prog="lassocorr", description="Lasso paths, correlation factors and tuning-parameter experiments.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser(
        "generate",
        help="draw a design matrix",
        description="Write design.csv (header '# n,p,normalized,provenance', then one row per line). "
        "With --s also write response.csv and beta0.csv (header line, one value per line).",
    )
    g.add_argument("--kind", choices=["equicorrelated", "expanded", "clustered"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True, help="columns (base columns for --kind expanded)")
    g.add_argument("--rho", type=float, default=0.0, help="equicorrelation for equicorrelated/expanded (default 0)")
    g.add_argument("--eta", type=float, help="perturbation size for --kind expanded")
    g.add_argument("--nu", type=float, help="perturbation size for --kind clustered")
    g.add_argument("--s", type=int, help="also draw a response with s unit coefficients")
    g.add_argument("--sigma", type=float, default=1.0, help="noise level for the response (default 1)")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out-dir", default=".", help="output directory (default .)")
    g.set_defaults(func=cmd_generate)

    pa = sub.add_parser(
        "path",
        help="exact Lasso path of a response on a design",
        description="Write path.csv (lambda then p coefficients, one row per knot) and kkt.json. Exit 3 if the KKT audit fails.",
    )
    pa.add_argument("--design", required=True, help="design CSV as written by 'generate'")
    pa.add_argument("--response", required=True, help="response CSV: header 'y', one value per line")
    pa.add_argument("--kkt-tol", type=float, default=1e-8, help="KKT audit tolerance (default 1e-8)")
    pa.add_argument("--out-dir", default=".")
    pa.set_defaults(func=cmd_path)

    c = sub.add_parser(
        "corr",
        help="certified correlation factors of a design",
        description="Write profile.json {kappa, x_grid, K_upper, K_kappa_hat, F_hat, lambda_kappa, sigma}. Exit 3 if a certificate fails its audit.",
    )
    c.add_argument("--design", required=True)
    c.add_argument("--kappa", type=float, default=0.05, help="probability level (default 0.05)")
    c.add_argument("--sigma", type=float, default=1.0, help="noise level for lambda_kappa (default 1)")
    c.add_argument("--x-grid", type=_floats, default=None, help="comma-separated x values (default 0,0.25,0.5,1,2,4,sqrt(n))")
    c.add_argument("--seed-basis", choices=["none", "standard"], default="none", help="add the scaled standard basis as candidate atoms")
    c.add_argument(
        "--strategies",
        default="distinct,span,shell",
        help="comma list from distinct,span,shell,greedy_cluster,column_subset (default distinct,span,shell)",
    )
    c.add_argument("--out-dir", default=".")
    c.set_defaults(func=cmd_corr)

    e = sub.add_parser(
        "experiment",
        help="Monte-Carlo study of the optimal tuning parameter",
        description="Write summary.csv (config columns, lambda_min_mean, lambda_min_se, pe_min_mean, pe_min_se; "
        "se = sample sd / sqrt(R)) and, when a grid is used, curve.csv (lambda, pe_mean, ci_low, ci_high, algorithm; "
        "band = mean +- 1.96 se).  Presets: table1 (15 rows), fig1 (eta=0.001), fig2 (eta=0.1).",
    )
    e.add_argument("--preset", choices=["table1", "fig1", "fig2"], default=None)
    _add_design_flags(e)
    e.add_argument("--jobs", type=int, default=1, help="worker processes; results do not depend on it (default 1)")
    e.add_argument("--out-dir", default=".")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser(
        "validate-bounds",
        help="check the prediction bounds on the event T",
        description="Write violations.csv (replicate, lambda, onT, pe, slow_bound, improved_bound, violated). Exit 3 on any violation.",
    )
    _add_design_flags(v)
    v.add_argument("--re-sbar", type=int, default=0, help="also print an indicative RE constant for this sparsity")
    v.add_argument("--re-budget", type=int, default=200, help="random supports for the RE search (default 200)")
    v.add_argument("--out-dir", default=".")
    v.set_defaults(func=cmd_validate_bounds, replicates=100)

    cv = sub.add_parser(
        "coverage",
        help="empirical probability of the event T at lambda_kappa",
        description="Write coverage.json {frequency, draws, kappa, target, lambda_kappa, K_kappa_hat}. Uses columns of norm sqrt(n).",
    )
    _add_design_flags(cv)
    cv.add_argument("--kappa", type=float, default=0.05, help="(default 0.05)")
    cv.add_argument("--draws", type=int, default=10_000, help="noise draws per design (default 10000)")
    cv.add_argument("--classical", action="store_true", help="use K_kappa = 1 instead of the certified estimate")
    cv.add_argument("--out-dir", default=".")
    cv.set_defaults(func=cmd_coverage, replicates=1)
    return ap


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    written = []
    try:
        code = args.func(args, written)
    except (UsageError, ValueError) as exc:
        print(f"lassocorr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lassocorr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _manifest(args, argv, written)
    return code


if __name__ == "__main__":
    sys.exit(main())
