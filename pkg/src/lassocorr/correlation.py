"""Correlation function ``K(x)``, correlation factors and the event ``T``.

``K(x)`` is the smallest number of atoms on the sphere of radius ``sqrt(n)``
whose symmetric convex hull, inflated by ``1 + x``, contains every column of
the design.  It is combinatorial, so everything here is a certified *upper*
bound: each estimate comes with a :class:`Certificate` (the atoms plus an
explicit coefficient matrix) that can be audited independently.  Plugging an
upper bound on ``K`` into

    K_kappa = inf_x (1 + x) sqrt(log(2 K(x) / kappa) / log(2 p / kappa))
    F       = inf_x (1 + x) sqrt(log(1 + K(x)) / log(1 + p))

gives upper bounds on both factors, which keeps the tuning parameter
``lambda_kappa = K_kappa 2 sigma sqrt(2 n log(2 p / kappa))`` valid.

Candidate dictionaries
----------------------
``distinct``   the columns themselves, merged when equal up to sign (x = 0)
``span``       an orthonormal basis of the column span
``shell``      a cross-polytope of atoms ``(u +- z e_k) / sqrt(1 + z^2)``
               around the dominant direction ``u``, plus stray columns
``seed``       caller-supplied atoms (e.g. the standard basis)
``greedy_cluster`` / ``column_subset``
               column atoms certified by Lasso-path membership tests
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .design import DesignMatrix
from .lasso import lars_lasso_path
from .simcore import as_matrix, as_vector

__all__ = [
    "Certificate",
    "CorrelationProfile",
    "StructuralBound",
    "dual_norm_sup",
    "event_T_holds",
    "sconv_membership",
    "min_l1_representation",
    "correlation_function_upper",
    "correlation_profile",
    "correlation_factor_kappa",
    "correlation_factor_F",
    "kappa_factor",
    "F_factor",
    "tuning_lambda_kappa",
    "expectation_bound",
    "structural_bounds",
    "default_x_grid",
]

MEMBERSHIP_TOL = 1e-6
# two unit columns closer than this (up to sign) are merged as one atom
DUPLICATE_TOL = 1e-9
# relative singular value below which a direction counts as absent
RANK_TOL = 1e-12


def _array(X):
    if isinstance(X, DesignMatrix):
        return X.X
    return as_matrix(X)


# -- the stochastic term -------------------------------------------------------


def dual_norm_sup(X, eps):
    """``sup_b |eps^T X b| / ||b||_1``, which equals ``max_j |eps^T X_j|``."""
    X = _array(X)
    eps = as_vector(eps)
    if eps.shape[0] != X.shape[0]:
        raise ValueError(f"eps has length {eps.shape[0]}, design has {X.shape[0]} rows")
    return float(np.max(np.abs(X.T @ eps)))


def event_T_holds(X, eps, sigma, lam):
    """Whether ``2 sigma max_j |eps^T X_j| <= lam``."""
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    return bool(2.0 * sigma * dual_norm_sup(X, eps) <= lam)


# -- membership in the inflated symmetric hull --------------------------------


def _dictionary(dictionary):
    if isinstance(dictionary, np.ndarray) and dictionary.ndim == 2:
        D = as_matrix(dictionary)
    else:
        D = as_matrix(np.column_stack([as_vector(d) for d in dictionary]))
    if D.shape[1] == 0:
        raise ValueError("dictionary is empty")
    return D


def min_l1_representation(dictionary, target, tol=MEMBERSHIP_TOL):
    """Smallest-l1 coefficients ``c`` with ``||D c - target|| <= tol sqrt(n)``.

    The Lasso path of ``target`` on the dictionary traces, for each residual
    level, the minimal l1 norm reaching it (the penalized and constrained
    forms share solutions).  The path is scanned from ``c = 0`` until the
    residual first drops to the threshold; inside that segment the crossing
    point solves a quadratic.

    Returns
    -------
    c : (K,) array, or None when the residual threshold is never reached.
    """
    D = _dictionary(dictionary)
    t = as_vector(target)
    n = D.shape[0]
    thr = tol * np.sqrt(n)
    if np.linalg.norm(t) <= thr:
        return np.zeros(D.shape[1])
    path = lars_lasso_path(D, t)
    coefs = path.coefs_at_knots()
    res = np.linalg.norm(t[:, None] - D @ coefs.T, axis=0)
    # aim a hair inside the threshold so rounding cannot push the result out
    thr *= 1 - 1e-6
    hit = np.flatnonzero(res <= thr)
    if hit.size == 0:
        return None
    k = int(hit[0])
    # residual along segment k-1 is r(lam) = r0 + lam * dr for lam in [knots[k], knots[k-1]]
    seg = k - 1
    base, slope = path.bases[seg], path.slopes[seg]
    r0 = t - D @ base
    dr = -(D @ slope)
    a, b, c = dr @ dr, 2.0 * (r0 @ dr), r0 @ r0 - thr * thr
    lo, hi = path.knots[k], path.knots[seg]
    lam = lo
    if a > 0:
        disc = b * b - 4.0 * a * c
        if disc >= 0:
            roots = np.array([(-b - np.sqrt(disc)) / (2 * a), (-b + np.sqrt(disc)) / (2 * a)])
            roots = roots[(roots >= lo) & (roots <= hi)]
            if roots.size:
                lam = float(roots.max())
    coef = base + lam * slope
    coef[coef * path.signs[seg] < 0] = 0.0
    return coef


def sconv_membership(dictionary, target, budget, tol=MEMBERSHIP_TOL):
    """Whether ``target`` lies within ``tol sqrt(n)`` of ``budget * sconv(dictionary)``.

    Examples
    --------
    >>> import numpy as np
    >>> D = np.eye(3) * np.sqrt(3)
    >>> sconv_membership(D, D[:, 0], 1.0)
    True
    >>> sconv_membership(D, 2 * D[:, 0], 1.5)
    False
    """
    if not budget > 0:
        raise ValueError(f"budget must be positive, got {budget}")
    c = min_l1_representation(dictionary, target, tol)
    return c is not None and float(np.abs(c).sum()) <= budget * (1 + 1e-12)


# -- certificates --------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Atoms on ``sqrt(n) S^{n-1}`` and coefficients writing every column.

    ``atoms`` has shape ``(n, K)`` and ``coefs`` shape ``(K, p)``; column ``m``
    of the design is claimed to equal ``atoms @ coefs[:, m]`` within
    ``tol sqrt(n)`` with ``||coefs[:, m]||_1 <= 1 + x``.
    """

    x: float
    atoms: np.ndarray
    coefs: np.ndarray
    strategy: str

    @property
    def size(self):
        return self.atoms.shape[1]

    def audit(self, X, tol=MEMBERSHIP_TOL):
        """Check the explicit coefficients; returns a list of problems (empty when valid)."""
        X = _array(X)
        n = X.shape[0]
        problems = []
        norms = np.linalg.norm(self.atoms, axis=0)
        bad = np.flatnonzero(np.abs(norms - np.sqrt(n)) > 1e-9)
        if bad.size:
            problems.append(f"atoms {bad[:5].tolist()} are off the sqrt(n) sphere")
        res = np.linalg.norm(X - self.atoms @ self.coefs, axis=0)
        bad = np.flatnonzero(res > tol * np.sqrt(n))
        if bad.size:
            problems.append(f"columns {bad[:5].tolist()} have residual up to {res.max():.3g}")
        l1 = np.abs(self.coefs).sum(axis=0)
        bad = np.flatnonzero(l1 > (1 + self.x) * (1 + 1e-12))
        if bad.size:
            problems.append(f"columns {bad[:5].tolist()} need l1 up to {l1.max():.6g} > {1 + self.x:.6g}")
        return problems

    def audit_membership(self, X, tol=MEMBERSHIP_TOL, columns=None):
        """Re-derive membership of each column from scratch with the Lasso path.

        Returns the indices of columns that fail.
        """
        X = _array(X)
        cols = range(X.shape[1]) if columns is None else columns
        return [int(m) for m in cols if not sconv_membership(self.atoms, X[:, m], 1 + self.x, tol)]


def _to_sphere(v, n):
    return v * (np.sqrt(n) / np.linalg.norm(v))


def _distinct_columns(X, block=512):
    """Representatives of the columns up to sign, and each column's (index, sign).

    Column ``j`` is merged into the earliest column it matches; blocks of
    the Gram matrix are formed one at a time to bound memory.
    """
    p = X.shape[1]
    U = X / np.linalg.norm(X, axis=0)
    first = np.arange(p)
    sgn = np.ones(p)
    for lo in range(0, p, block):
        hi = min(lo + block, p)
        G = U[:, :hi].T @ U[:, lo:hi]  # (hi, hi - lo)
        close = 1.0 - np.abs(G) <= DUPLICATE_TOL
        close[np.arange(lo, hi)[None, :] <= np.arange(hi)[:, None]] = False
        has = close.any(axis=0)
        k = np.argmax(close, axis=0)
        cols = np.arange(lo, hi)[has]
        first[cols] = k[has]
        sgn[cols] = np.sign(G[k[has], np.flatnonzero(has)])
    # follow chains to the representative, composing signs
    for j in range(p):
        k = first[j]
        if k != j:
            first[j] = first[k]
            sgn[j] *= sgn[k]
    reps = [j for j in range(p) if first[j] == j]
    index = {j: i for i, j in enumerate(reps)}
    owner = np.array([index[first[j]] for j in range(p)])
    return reps, owner, sgn


# Each builder below returns a list of "steps" (x_required, K, make) meaning
# K atoms certify every column for all x >= x_required; ``make(x)`` builds
# the certificate.  Taking the running minimum over steps gives a
# nonincreasing K_upper.


def _steps_distinct(X):
    n, p = X.shape
    reps, owner, sign = _distinct_columns(X)

    def make(x):
        atoms = np.column_stack([_to_sphere(X[:, j], n) for j in reps])
        coefs = np.zeros((len(reps), p))
        scale = np.linalg.norm(X, axis=0) / np.sqrt(n)
        coefs[owner, np.arange(p)] = sign * scale
        return Certificate(float(x), atoms, coefs, "distinct")

    # columns carry norm sqrt(n) only when normalized; allow the general case
    need = float(np.max(np.linalg.norm(X, axis=0)) / np.sqrt(n)) - 1.0
    return [(max(need, 0.0), len(reps), make)]


def _steps_basis(X, B, label):
    """Atoms ``sqrt(n) b_k`` for an orthonormal basis ``B`` of a space holding all columns."""
    n, p = X.shape
    C = B.T @ X / np.sqrt(n)
    if np.any(np.linalg.norm(X - np.sqrt(n) * B @ C, axis=0) > MEMBERSHIP_TOL * np.sqrt(n)):
        return []
    need = float(np.abs(C).sum(axis=0).max()) - 1.0

    def make(x):
        return Certificate(float(x), np.sqrt(n) * B, C, label)

    return [(max(need, 0.0), B.shape[1], make)]


def _steps_span(X):
    Uc, sv, _ = np.linalg.svd(X, full_matrices=False)
    r = int(np.sum(sv > RANK_TOL * sv[0]))
    return _steps_basis(X, Uc[:, :r], "span")


def _steps_seed(X, seed_atoms):
    """Caller atoms; each column's minimal l1 cost comes from the Lasso path."""
    n, p = X.shape
    A = np.column_stack([_to_sphere(a, n) for a in _dictionary(seed_atoms).T])
    Q, _ = np.linalg.qr(A)
    if A.shape[1] <= n and np.allclose(Q.T @ Q, np.eye(Q.shape[1])) and np.allclose(
        A.T @ A, n * np.eye(A.shape[1]), atol=1e-9 * n
    ):
        return _steps_basis(X, A / np.sqrt(n), "seed")
    C = np.zeros((A.shape[1], p))
    for m in range(p):
        c = min_l1_representation(A, X[:, m])
        if c is None:
            return []
        C[:, m] = c
    need = float(np.abs(C).sum(axis=0).max()) - 1.0

    def make(x):
        return Certificate(float(x), A, C, "seed")

    return [(max(need, 0.0), A.shape[1], make)]


def _steps_shell(X):
    """Cross-polytope of ``2 r`` atoms around the dominant direction.

    Write a unit column as ``g u + d`` with ``d`` orthogonal to ``u`` and
    coordinates ``c = E^T d`` in an orthonormal basis ``E`` of the residual
    space.  With ``S = sqrt(1 + z^2)`` the atoms ``(u +- z e_k) / S`` reach the
    column with l1 cost ``g S`` provided ``||c||_1 <= z g``.  Columns failing
    that at a given ``z`` are added as atoms of their own.
    """
    n, p = X.shape
    norms = np.linalg.norm(X, axis=0)
    T = X / norms
    Uc, _, _ = np.linalg.svd(T, full_matrices=False)
    u = Uc[:, 0]
    g = u @ T
    sgn = np.where(g < 0, -1.0, 1.0)
    g = np.abs(g)
    Dres = T - np.outer(u, u @ T)
    Ue, sv, _ = np.linalg.svd(Dres, full_matrices=False)
    r = int(np.sum(sv > RANK_TOL * max(sv[0], 1e-300))) if sv.size and sv[0] > RANK_TOL else 0
    E = Ue[:, :r]
    C = E.T @ Dres  # (r, p)
    l1 = np.abs(C).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        zreq = np.where(l1 > 0, l1 / g, 0.0)
    zreq[g <= 0] = np.inf
    scale = norms / np.sqrt(n)
    # a column covered at z costs g S scale, and the atom radius is 1 + x = S
    # only for unit-norm columns; general norms need S g scale <= S
    ok_norm = g * scale <= 1.0 + 1e-12

    steps = []

    def make_for(z):
        S = np.sqrt(1.0 + z * z)
        covered = (zreq <= z) & ok_norm
        if r == 0:
            shell = u[:, None]
        else:
            shell = np.hstack([(u[:, None] + z * E), (u[:, None] - z * E)]) / S
        stray = np.flatnonzero(~covered)
        atoms = np.hstack([shell, T[:, stray]]) * np.sqrt(n)
        coefs = np.zeros((atoms.shape[1], p))
        cov = np.flatnonzero(covered)
        if r == 0:
            coefs[0, cov] = sgn[cov] * g[cov] * scale[cov]
        else:
            # z > 0 here: the zero threshold is skipped when r > 0
            # sign-aligned column: g u + sgn * d
            Cc = C[:, cov] * sgn[cov]
            beta = np.maximum((g[cov] - l1[cov] / z) / (2 * r), 0.0)
            plus = beta + np.maximum(Cc, 0.0) / z
            minus = beta + np.maximum(-Cc, 0.0) / z
            f = sgn[cov] * S * scale[cov]
            coefs[:r, cov] = plus * f
            coefs[r : 2 * r, cov] = minus * f
        coefs[atoms.shape[1] - stray.size + np.arange(stray.size), stray] = scale[stray]
        return atoms, coefs

    k_shell = 1 if r == 0 else 2 * r
    # sweep z over the thresholds; each distinct threshold is a step
    zok = np.where(ok_norm, zreq, np.inf)
    order = np.argsort(zok, kind="stable")
    zsorted = zok[order]
    # largest column scale among those still uncovered after the first i
    tail = np.maximum.accumulate(scale[order][::-1])[::-1]
    zs = np.unique(zsorted[np.isfinite(zsorted)])
    covered_counts = np.searchsorted(zsorted, zs, side="right")
    for z, covered in zip(zs, covered_counts):
        if r > 0 and z == 0:
            continue
        K = k_shell + (p - int(covered))
        if K >= p:
            continue
        need_stray = float(tail[covered]) - 1.0 if covered < p else 0.0
        x_req = max(float(np.sqrt(1.0 + z * z) - 1.0), need_stray)

        def make(x, z=z):
            atoms, coefs = make_for(z)
            return Certificate(float(x), atoms, coefs, "shell")

        steps.append((x_req, K, make))
    return steps


def _greedy_atoms(X, x, order, tol, initial=()):
    """Visit columns in ``order``; an uncovered column becomes a new atom."""
    n = X.shape[0]
    atoms = [np.asarray(a) for a in initial]
    for m in order:
        col = X[:, m]
        if atoms and sconv_membership(np.column_stack(atoms), col, 1 + x, tol):
            continue
        atoms.append(_to_sphere(col, n))
    return atoms


def _coefs_for(X, atoms, x, tol):
    A = np.column_stack(atoms)
    C = np.zeros((A.shape[1], X.shape[1]))
    for m in range(X.shape[1]):
        c = min_l1_representation(A, X[:, m], tol)
        if c is None or np.abs(c).sum() > (1 + x) * (1 + 1e-12):
            return None
        C[:, m] = c
    return A, C


def _farthest_point_order(X):
    """Columns ordered so each next one is least aligned (up to sign) with those before."""
    U = X / np.linalg.norm(X, axis=0)
    p = U.shape[1]
    order = [0]
    best = np.abs(U.T @ U[:, 0])
    best[0] = np.inf
    for _ in range(p - 1):
        j = int(np.argmin(best))
        order.append(j)
        best = np.maximum(best, np.abs(U.T @ U[:, j]))
        best[j] = np.inf
    return order


def correlation_function_upper(X, x, strategy="greedy_cluster", tol=MEMBERSHIP_TOL, seed_atoms=None):
    """Certified upper bound on ``K(x)``.

    Parameters
    ----------
    X : DesignMatrix or (n, p) array
    x : float
        Inflation, ``x >= 0``.
    strategy : str
        ``"greedy_cluster"`` visits columns in index order and turns each
        column not yet covered by the current atoms into a new atom.
        ``"column_subset"`` uses the shortest prefix of a farthest-point
        ordering of the columns that covers everything.  ``"best"`` takes
        the smaller of the cheap closed-form dictionaries (distinct columns,
        span basis, shell) and the two searches.
    seed_atoms : sequence of vectors, optional
        Atoms placed in the dictionary before any column (rescaled to the
        sphere), e.g. an orthonormal basis.

    Returns
    -------
    K_hat : int
    certificate : Certificate
    """
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x}")
    X = _array(X)
    n, p = X.shape
    seeds = [] if seed_atoms is None else [_to_sphere(a, n) for a in _dictionary(seed_atoms).T]
    if strategy == "greedy_cluster":
        atoms = _greedy_atoms(X, x, range(p), tol, seeds)
    elif strategy == "column_subset":
        order = _farthest_point_order(X)

        def covers(k):
            atoms = seeds + [_to_sphere(X[:, j], n) for j in order[:k]]
            return _coefs_for(X, atoms, x, tol) is not None

        lo, hi = 0, p  # covers(p) holds once x absorbs column norms
        if not covers(hi):
            raise ValueError(f"columns are not covered even by all {p} column atoms at x={x}")
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if covers(mid):
                hi = mid
            else:
                lo = mid
        atoms = seeds + [_to_sphere(X[:, j], n) for j in order[:hi]]
        if seeds and covers(0):
            atoms = list(seeds)
    elif strategy == "best":
        steps = _candidate_steps(X, seed_atoms)
        best = min((s for s in steps if s[0] <= x), key=lambda s: s[1], default=None)
        searched = [correlation_function_upper(X, x, s, tol, seed_atoms) for s in ("greedy_cluster", "column_subset")]
        K, cert = min(searched, key=lambda kc: kc[0])
        if best is not None and best[1] < K:
            return best[1], best[2](x)
        return K, cert
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    out = _coefs_for(X, atoms, x, tol)
    if out is None:
        raise RuntimeError("greedy dictionary failed its own audit")
    A, C = out
    return A.shape[1], Certificate(float(x), A, C, strategy)


def _candidate_steps(X, seed_atoms=None, strategies=("distinct", "span", "shell")):
    steps = []
    if "distinct" in strategies:
        steps += _steps_distinct(X)
    if "span" in strategies:
        steps += _steps_span(X)
    if "shell" in strategies:
        steps += _steps_shell(X)
    if seed_atoms is not None:
        steps += _steps_seed(X, seed_atoms)
    return steps


# -- factors -------------------------------------------------------------------


def kappa_factor(x, K, p, kappa):
    """``(1 + x) sqrt(log(2 K / kappa) / log(2 p / kappa))``."""
    return (1.0 + x) * np.sqrt(np.log(2.0 * K / kappa) / np.log(2.0 * p / kappa))


def F_factor(x, K, p):
    """``(1 + x) sqrt(log(1 + K) / log(1 + p))``."""
    return (1.0 + x) * np.sqrt(np.log1p(K) / np.log1p(p))


def _check_kappa(kappa):
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")


def default_x_grid(n):
    return [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, float(np.sqrt(n))]


@dataclass(frozen=True)
class CorrelationProfile:
    """Upper estimates of ``K`` on a grid of ``x`` and the derived factors.

    ``certificates[i]`` witnesses ``K_upper[i]`` at ``x_grid[i]``.
    """

    x_grid: np.ndarray
    K_upper: np.ndarray
    K_kappa_hat: float
    F_hat: float
    kappa: float
    lambda_kappa: float
    sigma: float
    certificates: tuple = field(repr=False)

    def to_json(self):
        return json.dumps(
            {
                "kappa": self.kappa,
                "x_grid": [float(v) for v in self.x_grid],
                "K_upper": [int(k) for k in self.K_upper],
                "K_kappa_hat": self.K_kappa_hat,
                "F_hat": self.F_hat,
                "lambda_kappa": self.lambda_kappa,
                "sigma": self.sigma,
            },
            indent=2,
        )

    def audit(self, X, tol=MEMBERSHIP_TOL):
        """Problems found across all certificates, keyed by grid position."""
        out = {}
        for i, cert in enumerate(self.certificates):
            probs = cert.audit(X, tol)
            if cert.size != self.K_upper[i]:
                probs.append(f"certificate has {cert.size} atoms, K_upper says {self.K_upper[i]}")
            if probs:
                out[i] = probs
        return out


def _staircase(steps, xs):
    """Best step usable at each x (running minimum of K over steps with x_req <= x)."""
    order = sorted(range(len(steps)), key=lambda i: (steps[i][0], steps[i][1]))
    xreq = np.array([steps[i][0] for i in order])
    best, run = [], None
    for i in order:
        if run is None or steps[i][1] < steps[run][1]:
            run = i
        best.append(run)
    pos = np.searchsorted(xreq, np.asarray(xs) + 1e-15, side="right") - 1
    return [steps[best[k]] if k >= 0 else None for k in pos]


def correlation_profile(
    X,
    kappa=0.05,
    x_grid=None,
    sigma=1.0,
    seed_atoms=None,
    strategies=("distinct", "span", "shell"),
    tol=MEMBERSHIP_TOL,
):
    """Certified ``K`` upper bounds and the factors ``K_kappa``, ``F`` and ``lambda_kappa``.

    The infima over ``x`` are taken over ``x_grid`` together with the exact
    breakpoints of every candidate dictionary (the x at which it first
    covers all columns), so the factors do not depend on grid resolution.
    Those minimizing breakpoints are appended to the reported grid.
    Strategies ``"greedy_cluster"`` and ``"column_subset"`` may be added;
    they run a Lasso-path membership test per column and grid point.
    """
    _check_kappa(kappa)
    X = _array(X)
    n, p = X.shape
    grid = default_x_grid(n) if x_grid is None else [float(v) for v in x_grid]
    if any(v < 0 for v in grid):
        raise ValueError("x_grid must be non-negative")
    steps = _candidate_steps(X, seed_atoms, strategies)
    for s in ("greedy_cluster", "column_subset"):
        if s in strategies:
            for x in grid:
                try:
                    K, cert = correlation_function_upper(X, x, s, tol, seed_atoms)
                except ValueError:
                    continue
                steps.append((x, K, lambda x_, cert=cert: Certificate(float(x_), cert.atoms, cert.coefs, cert.strategy)))
    if not steps:
        raise RuntimeError("no candidate dictionary covers the design")
    xs = sorted(set(grid) | {s[0] for s in steps})
    stair = _staircase(steps, xs)
    kk = [kappa_factor(x, s[1], p, kappa) if s else np.inf for x, s in zip(xs, stair)]
    ff = [F_factor(x, s[1], p) if s else np.inf for x, s in zip(xs, stair)]
    ik, iF = int(np.argmin(kk)), int(np.argmin(ff))
    report = sorted(set(grid) | {xs[ik], xs[iF]})
    rstair = _staircase(steps, report)
    keep = [i for i, s in enumerate(rstair) if s is not None]
    report = [report[i] for i in keep]
    rstair = [rstair[i] for i in keep]
    K_upper = np.array([s[1] for s in rstair], dtype=int)
    certs = tuple(s[2](x) for x, s in zip(report, rstair))
    K_kappa_hat = float(kk[ik])
    return CorrelationProfile(
        np.array(report),
        K_upper,
        K_kappa_hat,
        float(ff[iF]),
        float(kappa),
        tuning_lambda_kappa(K_kappa_hat, sigma, n, p, kappa),
        float(sigma),
        certs,
    )


def correlation_factor_kappa(X, kappa, x_grid=None, **kwargs):
    """Upper bound on ``K_kappa``; see :func:`correlation_profile`."""
    return correlation_profile(X, kappa, x_grid, **kwargs).K_kappa_hat


def correlation_factor_F(X, x_grid=None, **kwargs):
    """Upper bound on ``F``; see :func:`correlation_profile`."""
    return correlation_profile(X, 1.0, x_grid, **kwargs).F_hat


def tuning_lambda_kappa(K_kappa_hat, sigma, n, p, kappa):
    """``K_kappa 2 sigma sqrt(2 n log(2 p / kappa))``."""
    _check_kappa(kappa)
    return float(K_kappa_hat * 2.0 * sigma * np.sqrt(2.0 * n * np.log(2.0 * p / kappa)))


def expectation_bound(F_hat, sigma, n, p, M):
    """``F sigma sqrt(8 n log(1 + p) / 3) M``, bounding ``E sup_{|b|_1 <= M} sigma |eps^T X b|``."""
    return float(F_hat * sigma * np.sqrt(8.0 * n * np.log1p(p) / 3.0) * M)


# -- closed-form bounds for structured designs --------------------------------


@dataclass(frozen=True)
class StructuralBound:
    kind: str
    params: dict
    K_kappa_bound: float
    F_bound: float

    @property
    def vacuous(self):
        """True when the bound says nothing beyond the trivial value 1."""
        return self.K_kappa_bound >= 1.0 and self.F_bound >= 1.0


def structural_bounds(kind, p, kappa, **params):
    """Closed-form factor bounds for three structured designs.

    ``kind="low_dim"`` (``W`` = dimension of the column span),
    ``kind="sparse"`` (``d`` nonzeros per column, needs ``n``),
    ``kind="equal_columns"`` (``v`` distinct columns).
    """
    _check_kappa(kappa)
    if kind == "low_dim":
        W = params["W"]
        x, K = np.sqrt(W), W
        kb, fb = kappa_factor(x, K, p, kappa), F_factor(x, K, p)
    elif kind == "sparse":
        d, n = params["d"], params["n"]
        if not 1 <= d <= n:
            raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
        kb = np.sqrt(d) * np.sqrt(np.log(2.0 * n / kappa) / np.log(2.0 * p / kappa))
        fb = np.sqrt(d) * np.sqrt(np.log1p(n) / np.log1p(p))
    elif kind == "equal_columns":
        v = params["v"]
        kb, fb = kappa_factor(0.0, v, p, kappa), F_factor(0.0, v, p)
    else:
        raise ValueError(f"unknown structure {kind!r}")
    if not (np.isfinite(kb) and np.isfinite(fb) and kb > 0 and fb > 0):
        raise ValueError("bound is not finite and positive for these parameters")
    return StructuralBound(kind, dict(params), float(kb), float(fb))
