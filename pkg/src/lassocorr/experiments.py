"""Monte-Carlo harness for the tuning-parameter study.

Replicate ``r`` of a configuration draws everything from
``seed_r = derive_seed(base_seed, r)``: the base design from
``derive_seed(seed_r, 0)``, the expansion noise from ``derive_seed(seed_r, 1)``
and the regression noise from ``derive_seed(seed_r, 2)``.  Two
configurations that differ only in ``eta`` therefore share base designs and
noise, which makes the with/without-expansion comparison paired.

Scale
-----
Designs are generated with columns of norm ``sqrt(n)``.  With
``scale="unit"`` (the default for the tuning-parameter study) each column is
divided by ``sqrt(n)`` before the response is formed, and the path and the
prediction error both use that unit-norm design.  ``scale="sqrt_n"`` keeps
the norm ``sqrt(n)`` columns throughout.  The unit scale is the one under
which the optimal tuning parameters land near 3.6 at ``n=20, p=40, s=4``.
The expansion perturbation ``eta N`` is added at the working scale, i.e. to
unit-norm columns under ``scale="unit"``; on the ``sqrt(n)``-normalized base
this is an expansion with ``eta sqrt(n)``.
"""

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bounds import improved_slow_rate, slow_rate_bound
from .correlation import correlation_profile, dual_norm_sup, tuning_lambda_kappa
from .design import expand_design, gen_clustered, gen_equicorrelated, make_beta0
from .lasso import lars_lasso_path, optimal_lambda, pe_curve, solve_many
from .simcore import EmptyInputError, derive_seed, generator

__all__ = [
    "LambdaGrid",
    "ExperimentConfig",
    "ReplicateResult",
    "SummaryRow",
    "ValidationReport",
    "CoverageResult",
    "TABLE1_CONFIGS",
    "TABLE1_REFERENCE",
    "build_replicate",
    "run_replicate",
    "run_algorithm1",
    "run_algorithm2",
    "run_replicates",
    "summarize",
    "table1",
    "bound_validation",
    "coverage_check",
    "summary_csv",
    "curve_csv",
    "violations_csv",
]

BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class LambdaGrid:
    lo: float = 0.0
    hi: float = 10.0
    count: int = 101

    def __post_init__(self):
        if self.lo < 0:
            raise ValueError(f"grid minimum must be non-negative, got {self.lo}")
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        if not self.hi > self.lo:
            raise ValueError(f"grid maximum {self.hi} must exceed minimum {self.lo}")

    def values(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation setting.

    ``design`` is ``"equicorrelated"`` (parameter ``rho``) or ``"clustered"``
    (parameter ``nu``).  Setting ``eta`` appends ``p - 1`` perturbed copies of
    every column.  ``mode="exact"`` finds each replicate's optimum in closed
    form; ``mode="grid"`` takes the best grid point.  A ``grid`` is needed in
    grid mode and optional otherwise (it only adds error curves).
    """

    n: int
    p: int
    s: int
    sigma: float
    rho: float = 0.0
    eta: float = None
    replicates: int = 1000
    grid: LambdaGrid = None
    mode: str = "exact"
    base_seed: int = 0
    kappa: float = 0.05
    scale: str = "unit"
    design: str = "equicorrelated"
    nu: float = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.n < 1 or self.p < 1:
            raise EmptyInputError(f"need n >= 1 and p >= 1, got n={self.n}, p={self.p}")
        if not 0 <= self.s <= self.p:
            raise ValueError(f"need 0 <= s <= p, got s={self.s}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.mode not in ("exact", "grid"):
            raise ValueError(f"mode must be 'exact' or 'grid', got {self.mode!r}")
        if self.mode == "grid" and self.grid is None:
            object.__setattr__(self, "grid", LambdaGrid())
        if self.scale not in ("unit", "sqrt_n"):
            raise ValueError(f"scale must be 'unit' or 'sqrt_n', got {self.scale!r}")
        if self.design not in ("equicorrelated", "clustered"):
            raise ValueError(f"unknown design {self.design!r}")
        if self.design == "clustered" and self.nu is None:
            raise ValueError("clustered design needs nu")
        if self.eta is not None and not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not 0 < self.kappa <= 1:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")

    @property
    def algorithm(self):
        return 1 if self.eta is None else 2

    def label(self):
        parts = [f"n={self.n}", f"p={self.p}", f"s={self.s}", f"sigma={self.sigma:g}"]
        if self.design == "clustered":
            parts.append(f"nu={self.nu:g}")
        else:
            parts.append(f"rho={self.rho:g}")
        if self.eta is not None:
            parts.append(f"eta={self.eta:g}")
        return " ".join(parts)


@dataclass(frozen=True)
class ReplicateResult:
    lambda_star: float
    pe_star: float
    pe_curve: np.ndarray
    t_indicator: np.ndarray
    seed_used: int


@dataclass(frozen=True)
class SummaryRow:
    """Means and standard errors over replicates.

    ``se`` is the sample standard deviation (denominator ``R - 1``) over
    ``sqrt(R)``, set to 0 when ``R = 1``; curve bands are ``mean +- 1.96 se``.
    """

    config: ExperimentConfig
    lambda_min_mean: float
    lambda_min_se: float
    pe_min_mean: float
    pe_min_se: float
    grid: np.ndarray = field(default=None, repr=False)
    curve_mean: np.ndarray = field(default=None, repr=False)
    curve_ci_low: np.ndarray = field(default=None, repr=False)
    curve_ci_high: np.ndarray = field(default=None, repr=False)


# (n, p, s, sigma, rho) in the published row order
TABLE1_CONFIGS = [
    (20, 40, 4, 1.0, 0.99),
    (20, 40, 4, 1.0, 0.9),
    (20, 40, 4, 1.0, 0.0),
    (50, 40, 4, 1.0, 0.99),
    (50, 40, 4, 1.0, 0.9),
    (50, 40, 4, 1.0, 0.0),
    (20, 400, 4, 1.0, 0.99),
    (20, 400, 4, 1.0, 0.9),
    (20, 400, 4, 1.0, 0.0),
    (20, 40, 10, 1.0, 0.99),
    (20, 40, 10, 1.0, 0.9),
    (20, 40, 10, 1.0, 0.0),
    (20, 40, 4, 3.0, 0.99),
    (20, 40, 4, 3.0, 0.9),
    (20, 40, 4, 3.0, 0.0),
]

# published (lambda_mean, lambda_se, pe_mean, pe_se) for each row above
TABLE1_REFERENCE = {
    (20, 40, 4, 1.0, 0.99): (0.69, 0.03, 1.77, 0.05),
    (20, 40, 4, 1.0, 0.9): (1.58, 0.03, 2.37, 0.04),
    (20, 40, 4, 1.0, 0.0): (3.60, 0.03, 3.17, 0.03),
    (50, 40, 4, 1.0, 0.99): (0.67, 0.03, 1.29, 0.04),
    (50, 40, 4, 1.0, 0.9): (1.71, 0.03, 1.85, 0.03),
    (50, 40, 4, 1.0, 0.0): (3.91, 0.03, 3.48, 0.02),
    (20, 400, 4, 1.0, 0.99): (0.97, 0.03, 1.75, 0.05),
    (20, 400, 4, 1.0, 0.9): (2.11, 0.04, 2.58, 0.04),
    (20, 400, 4, 1.0, 0.0): (4.82, 0.03, 3.34, 0.03),
    (20, 40, 10, 1.0, 0.99): (0.59, 0.03, 6.50, 0.22),
    (20, 40, 10, 1.0, 0.9): (1.46, 0.03, 7.97, 0.19),
    (20, 40, 10, 1.0, 0.0): (2.90, 0.03, 6.65, 0.06),
    (20, 40, 4, 3.0, 0.99): (2.42, 0.15, 6.16, 0.17),
    (20, 40, 4, 3.0, 0.9): (5.33, 0.13, 6.47, 0.14),
    (20, 40, 4, 3.0, 0.0): (12.33, 0.10, 3.80, 0.03),
}


# -- one replicate -------------------------------------------------------------


def build_replicate(config, r):
    """Design, true coefficients, noise and response of replicate ``r``.

    Returns
    -------
    X : (n, p_total) array at the configured scale
    beta0, eps, Y : arrays
    seed_r : int
    """
    seed_r = derive_seed(config.base_seed, r)
    s_design, s_expand, s_noise = (derive_seed(seed_r, k) for k in range(3))
    if config.design == "clustered":
        D = gen_clustered(config.n, config.p, config.nu, s_design)
    else:
        D = gen_equicorrelated(config.n, config.p, config.rho, s_design)
    if config.eta is not None:
        # the perturbation eta N is added at the working scale
        eta = config.eta * np.sqrt(config.n) if config.scale == "unit" else config.eta
        D = expand_design(D, eta, s_expand)
    X = D.X / np.sqrt(config.n) if config.scale == "unit" else np.array(D.X)
    beta0 = make_beta0(X.shape[1], config.s)
    eps = generator(s_noise).standard_normal(config.n)
    Y = X @ beta0 + config.sigma * eps
    return X, beta0, eps, Y, seed_r


def run_replicate(config, r):
    X, beta0, eps, Y, seed_r = build_replicate(config, r)
    path = lars_lasso_path(X, Y)
    if config.grid is not None:
        lams = config.grid.values()
        curve = pe_curve(path, X, beta0, lams)
        t_ind = 2.0 * config.sigma * dual_norm_sup(X, eps) <= lams
    else:
        lams = curve = t_ind = np.empty(0)
    if config.mode == "exact":
        lam_star, pe_star = optimal_lambda(path, X, beta0)
    else:
        k = int(np.argmin(curve))
        lam_star, pe_star = float(lams[k]), float(curve[k])
    return ReplicateResult(lam_star, pe_star, curve, t_ind, seed_r)


def _run_chunk(args):
    config, rs = args
    return [run_replicate(config, r) for r in rs]


def run_replicates(config, jobs=1):
    """All replicates of ``config`` in index order; the result does not depend on ``jobs``."""
    R = config.replicates
    if jobs <= 1:
        return [run_replicate(config, r) for r in range(R)]
    chunks = [(config, list(range(lo, min(lo + 50, R)))) for lo in range(0, R, 50)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return [res for part in ex.map(_run_chunk, chunks) for res in part]


def run_algorithm1(config, jobs=1):
    """Replicates without column expansion."""
    if config.eta is not None:
        raise ValueError("Algorithm 1 configs must not set eta")
    return run_replicates(config, jobs)


def run_algorithm2(config, jobs=1):
    """Replicates with ``p - 1`` perturbed copies appended to every column."""
    if config.eta is None or not config.eta > 0:
        raise ValueError("Algorithm 2 configs need eta > 0")
    return run_replicates(config, jobs)


# -- aggregation ---------------------------------------------------------------


def _mean_se(values):
    v = np.asarray(values, dtype=np.float64)
    mean = float(np.sum(v) / v.size)
    se = 0.0 if v.size == 1 else float(np.std(v, ddof=1) / np.sqrt(v.size))
    return mean, se


def summarize(results, config):
    if not results:
        raise EmptyInputError("no replicate results to summarize")
    lam_mean, lam_se = _mean_se([r.lambda_star for r in results])
    pe_mean, pe_se = _mean_se([r.pe_star for r in results])
    grid = curve_mean = lo = hi = None
    if config.grid is not None and results[0].pe_curve.size:
        C = np.vstack([r.pe_curve for r in results])
        R = C.shape[0]
        curve_mean = C.sum(axis=0) / R
        se = np.zeros(C.shape[1]) if R == 1 else C.std(axis=0, ddof=1) / np.sqrt(R)
        lo, hi = curve_mean - 1.96 * se, curve_mean + 1.96 * se
        grid = config.grid.values()
    return SummaryRow(config, lam_mean, lam_se, pe_mean, pe_se, grid, curve_mean, lo, hi)


def table1(rows=None, replicates=1000, base_seed=0, jobs=1, **overrides):
    """One :class:`SummaryRow` per configuration, in input order.

    ``rows`` are ``ExperimentConfig`` objects or ``(n, p, s, sigma, rho)``
    tuples; the default is :data:`TABLE1_CONFIGS`.
    """
    rows = TABLE1_CONFIGS if rows is None else rows
    out = []
    for row in rows:
        if isinstance(row, ExperimentConfig):
            cfg = row
        else:
            n, p, s, sigma, rho = row
            cfg = ExperimentConfig(n, p, s, sigma, rho, replicates=replicates, base_seed=base_seed, **overrides)
        if cfg.eta is not None:
            raise ValueError("table rows must be Algorithm 1 configs")
        out.append(summarize(run_replicates(cfg, jobs), cfg))
    return out


# -- bound validation ----------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Per (replicate, lambda) bound checks.

    ``rows`` hold ``(replicate, lambda, onT, pe, slow_bound, improved_bound,
    violated)``.  A pair counts as violated only when it is on the event and
    either bound fails by more than the slack.
    """

    rows: list
    pairs: int
    pairs_on_T: int
    violations: int

    def ok(self):
        return self.violations == 0


def bound_validation(config, keep_rows=True):
    """Check both prediction bounds at every grid point of every replicate."""
    if config.grid is None:
        config = replace(config, grid=LambdaGrid())
    lams = config.grid.values()
    rows, on_count, bad = [], 0, 0
    for r in range(config.replicates):
        X, beta0, eps, Y, _ = build_replicate(config, r)
        path = lars_lasso_path(X, Y)
        B = solve_many(path, lams)
        stoch = 2.0 * config.sigma * dual_norm_sup(X, eps)
        D = (B - beta0) @ X.T
        pes = np.einsum("ij,ij->i", D, D)
        for lam, b, pe in zip(lams, B, pes):
            on = bool(stoch <= lam)
            slow = slow_rate_bound(lam, beta0)
            imp = improved_slow_rate(lam, beta0, b)
            violated = on and (pe > imp + BOUND_SLACK or imp > slow + BOUND_SLACK)
            on_count += on
            bad += violated
            if keep_rows:
                rows.append((r, float(lam), int(on), float(pe), slow, imp, int(violated)))
    return ValidationReport(rows, len(lams) * config.replicates, on_count, bad)


# -- coverage of the event -----------------------------------------------------


@dataclass(frozen=True)
class CoverageResult:
    frequency: float
    draws: int
    kappa: float
    lambda_kappa: list
    K_kappa_hat: list


def coverage_check(config, kappa=None, draws=10_000, classical=False, profile_kwargs=None):
    """Empirical ``P(T)`` at the tuning parameter ``lambda_kappa``.

    Each of ``config.replicates`` design draws gets its own correlation
    profile (or ``K_kappa = 1`` when ``classical``) and ``draws`` noise
    vectors; the returned frequency pools all of them.  The design keeps
    columns of norm ``sqrt(n)``, the normalization the tuning parameter
    formula assumes.
    """
    kappa = config.kappa if kappa is None else kappa
    if not 0 < kappa <= 1:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    cfg = replace(config, scale="sqrt_n")
    hits, total, lks, kks = 0, 0, [], []
    for r in range(cfg.replicates):
        X, _, _, _, seed_r = build_replicate(cfg, r)
        n, p = X.shape
        if classical:
            kk = 1.0
        else:
            kk = correlation_profile(X, kappa, **(profile_kwargs or {})).K_kappa_hat
        lam = tuning_lambda_kappa(kk, cfg.sigma, n, p, kappa)
        E = generator(derive_seed(seed_r, 3)).standard_normal((draws, n))
        stoch = 2.0 * cfg.sigma * np.max(np.abs(E @ X), axis=1)
        hits += int(np.sum(stoch <= lam))
        total += draws
        lks.append(lam)
        kks.append(kk)
    return CoverageResult(hits / total, total, float(kappa), lks, kks)


# -- CSV output ----------------------------------------------------------------

_CONFIG_COLUMNS = ["n", "p", "s", "sigma", "rho", "eta", "nu", "design", "replicates", "mode", "scale", "base_seed"]


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return v


def summary_csv(rows):
    """``summary.csv``: config columns then the optimum means and standard errors."""
    header = _CONFIG_COLUMNS + ["lambda_min_mean", "lambda_min_se", "pe_min_mean", "pe_min_se"]
    out = []
    for row in rows:
        cfg = asdict(row.config)
        out.append(
            [_fmt(cfg[c]) for c in _CONFIG_COLUMNS]
            + [_fmt(row.lambda_min_mean), _fmt(row.lambda_min_se), _fmt(row.pe_min_mean), _fmt(row.pe_min_se)]
        )
    return _csv(header, out)


def curve_csv(series):
    """``curve.csv`` from ``{algorithm label: SummaryRow}``; bands are 1.96 se."""
    out = []
    for label, row in series.items():
        if row.curve_mean is None:
            raise ValueError(f"series {label!r} has no error curve (no grid configured)")
        for lam, m, lo, hi in zip(row.grid, row.curve_mean, row.curve_ci_low, row.curve_ci_high):
            out.append([_fmt(float(lam)), _fmt(float(m)), _fmt(float(lo)), _fmt(float(hi)), label])
    return _csv(["lambda", "pe_mean", "ci_low", "ci_high", "algorithm"], out)


def violations_csv(report):
    header = ["replicate", "lambda", "onT", "pe", "slow_bound", "improved_bound", "violated"]
    return _csv(header, [[_fmt(v) for v in row] for row in report.rows])
