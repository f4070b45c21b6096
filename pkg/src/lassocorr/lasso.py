"""Exact Lasso regularization path, a coordinate-descent cross-check, and
prediction-error evaluation.

The objective is ``||Y - X b||_2^2 + lam * ||b||_1`` (no 1/2 factor).  Its
optimality conditions read ``2 X^T (Y - X b) in lam * sign(b)``, so the path
starts at ``lam_0 = 2 max_j |X_j^T Y|``.

Internally the homotopy runs on ``gamma = lam / 2``, the common absolute
correlation of the active columns with the residual.  On a fixed active set
``A`` with signs ``s`` the solution is ``b_A(gamma) = u - gamma v`` with
``u = (X_A^T X_A)^{-1} X_A^T Y`` and ``v = (X_A^T X_A)^{-1} s``; both are
recomputed from a fresh QR factorization after every event.
"""

import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .design import DesignMatrix
from .simcore import as_matrix, as_vector

__all__ = [
    "LassoPath",
    "KktReport",
    "ConvergenceError",
    "lars_lasso_path",
    "solve_at",
    "solve_many",
    "coordinate_descent_solve",
    "kkt_check",
    "prediction_error",
    "pe_curve",
    "optimal_lambda",
    "path_to_csv",
]

# relative width inside which two event values count as simultaneous
EVENT_RTOL = 1e-12
# squared relative projection residual below which a column is treated as
# linearly dependent on the active set
RANK_RTOL = 1e-10
# slack when deciding whether a parked column's correlation stays on,
# leaves, or crosses the boundary
BOUNDARY_RTOL = 1e-9


class ConvergenceError(RuntimeError):
    """Coordinate descent hit its cycle cap; ``beta`` holds the last iterate."""

    def __init__(self, message, beta):
        super().__init__(message)
        self.beta = beta


def _array(X):
    if isinstance(X, DesignMatrix):
        return X.X
    return as_matrix(X)


@dataclass(frozen=True)
class LassoPath:
    """Piecewise-affine solution path.

    ``knots`` decrease from ``lam_0`` to 0.  On ``[knots[k+1], knots[k]]`` the
    solution is ``bases[k] + lam * slopes[k]`` with nonzeros confined to
    ``active_sets[k]`` and carrying the signs in ``signs[k]``.  Evaluation
    zeroes any coefficient whose rounding puts it on the wrong side of zero
    (this only happens at the knot where it enters or leaves).  A path for
    ``Y = 0`` has the single knot 0 and no segments.
    """

    knots: np.ndarray
    bases: np.ndarray
    slopes: np.ndarray
    signs: np.ndarray
    active_sets: tuple

    @property
    def lambda_max(self):
        return float(self.knots[0])

    @property
    def p(self):
        return self.bases.shape[1]

    def __len__(self):
        return len(self.knots) - 1

    def coefs_at_knots(self):
        """Solutions at every knot, shape ``(len(knots), p)``."""
        out = np.zeros((len(self.knots), self.p))
        if len(self):
            out[:-1] = self._eval(np.arange(len(self)), self.knots[:-1])
            out[-1] = self._eval(np.array([len(self) - 1]), self.knots[-1:])[0]
        return out

    def _eval(self, k, lams):
        B = self.bases[k] + lams[:, None] * self.slopes[k]
        B[B * self.signs[k] < 0] = 0.0
        return B

    def segment_of(self, lam):
        """Index of the segment containing ``lam`` (``-1`` when ``lam >= lam_0``)."""
        if lam >= self.knots[0]:
            return -1
        # knots decrease; find k with knots[k+1] <= lam < knots[k]
        k = int(np.searchsorted(-self.knots, -lam, side="right")) - 1
        return min(k, len(self) - 1)


@dataclass(frozen=True)
class KktReport:
    max_gradient_violation: float
    sign_consistency: bool
    active_set: tuple
    tol: float

    @property
    def passed(self):
        return self.max_gradient_violation <= self.tol and self.sign_consistency

    def __bool__(self):
        return self.passed


def _factor(X, active):
    """QR of the active columns, in insertion order."""
    Q, R = qr(X[:, active], mode="economic")
    return Q, R


def _is_independent(X, active, j):
    col = X[:, j]
    if len(active) >= X.shape[0]:
        return False
    if not active:
        return col @ col > 0
    _, R = _factor(X, active + [j])
    return R[-1, -1] ** 2 > RANK_RTOL * (col @ col)


def _direction(X, Y, active, signs):
    """Solution ``u - gamma v`` on the active set and the correlations
    ``cu + gamma a`` it induces on every column."""
    Q, R = _factor(X, active)
    u = solve_triangular(R, Q.T @ Y)
    v = solve_triangular(R, solve_triangular(R, np.asarray(signs, dtype=np.float64), trans="T"))
    cu = X.T @ (Y - X[:, active] @ u)
    a = X.T @ (X[:, active] @ v)
    return u, v, cu, a


def lars_lasso_path(X, Y, max_steps=None):
    """Exact Lasso path by the LARS homotopy with drop steps.

    Variables leave the active set when their coefficient crosses zero.
    Simultaneous events are applied lowest column index first.  A column
    that is linearly dependent on the current active set is parked at the
    boundary (its coefficient stays zero) and re-examined whenever the active
    set changes; this keeps duplicated columns from breaking the solve.

    Parameters
    ----------
    X : DesignMatrix or (n, p) array
    Y : (n,) array
    max_steps : int, optional
        Cap on the number of events; defaults to ``8 (n + p) + 100``.

    Returns
    -------
    LassoPath
    """
    X = _array(X)
    Y = as_vector(Y)
    n, p = X.shape
    if Y.shape[0] != n:
        raise ValueError(f"Y has length {Y.shape[0]}, expected {n}")
    if max_steps is None:
        max_steps = 8 * (n + p) + 100

    c = X.T @ Y
    gamma = float(np.max(np.abs(c)))
    if gamma == 0.0:
        empty = np.zeros((0, p))
        return LassoPath(np.zeros(1), empty, empty, empty, ())

    beta = np.zeros(p)
    active, signs = [], []
    parked = {}  # dependent columns held at zero on the boundary
    entering = {int(j): np.sign(c[j]) for j in np.flatnonzero(np.abs(c) >= gamma * (1 - EVENT_RTOL))}
    dropping = []
    gamma_floor = gamma * EVENT_RTOL

    knots = [2.0 * gamma]
    bases, slopes, sign_rows, act_sets = [], [], [], []

    for _ in range(max_steps):
        # columns moving off a boundary at this knot, with that boundary's sign
        leaving = {}
        for j in dropping:
            k = active.index(j)
            leaving[j] = signs[k]
            del active[k], signs[k]
            beta[j] = 0.0
        just_entered = set()
        for j in sorted(entering):
            if _is_independent(X, active, j):
                active.append(j)
                signs.append(entering[j])
                just_entered.add(j)
            else:
                parked[j] = entering[j]
        review = bool(parked) and bool(entering or dropping)

        while True:
            if not active:
                raise RuntimeError("active set became empty before lambda reached 0")
            u, v, cu, a = _direction(X, Y, active, signs)
            if not review:
                break
            review = False
            c_knot = cu + gamma * a
            for j in sorted(parked):
                if abs(c_knot[j]) < gamma * (1 - BOUNDARY_RTOL):
                    del parked[j]
                    continue
                sj = np.sign(c_knot[j])
                rate = sj * a[j]
                if rate < 1 - BOUNDARY_RTOL and _is_independent(X, active, j):
                    # staying out would push |c_j| past gamma
                    del parked[j]
                    active.append(j)
                    signs.append(sj)
                    just_entered.add(j)
                    review = True
                    break
                if rate > 1 + BOUNDARY_RTOL:
                    del parked[j]
                    leaving[j] = sj

        ceiling = gamma * (1 - EVENT_RTOL)
        inactive = np.ones(p, dtype=bool)
        inactive[active] = False
        inactive[list(parked)] = False
        idx = np.flatnonzero(inactive)
        with np.errstate(divide="ignore", invalid="ignore"):
            up = cu[idx] / (1.0 - a[idx])
            lo = -cu[idx] / (1.0 + a[idx])
        # a column leaving a boundary cannot meet that same boundary again
        # within the segment (both are affine in gamma)
        for j, sj in leaving.items():
            i = np.searchsorted(idx, j)
            if i < idx.size and idx[i] == j:
                (up if sj > 0 else lo)[i] = -np.inf
        up = np.where(np.isfinite(up) & (up > gamma_floor) & (up < ceiling), up, -np.inf)
        lo = np.where(np.isfinite(lo) & (lo > gamma_floor) & (lo < ceiling), lo, -np.inf)
        entry = np.maximum(up, lo)
        entry_sign = np.where(up >= lo, 1.0, -1.0)

        with np.errstate(divide="ignore", invalid="ignore"):
            cross = u / v
        # likewise a coefficient that just left zero cannot return to it
        cross[[k for k, j in enumerate(active) if j in just_entered]] = -np.inf
        cross = np.where(
            np.isfinite(cross) & (cross > gamma_floor) & (cross < ceiling), cross, -np.inf
        )

        g_next = max(float(entry.max(initial=-np.inf)), float(cross.max(initial=-np.inf)), 0.0)

        base = np.zeros(p)
        slope = np.zeros(p)
        sign_row = np.zeros(p)
        base[active] = u
        slope[active] = -0.5 * v
        sign_row[active] = signs
        bases.append(base)
        slopes.append(slope)
        sign_rows.append(sign_row)
        act_sets.append(tuple(active))
        knots.append(2.0 * g_next)

        if g_next == 0.0:
            break
        floor = g_next * (1 - EVENT_RTOL)
        hits = np.flatnonzero(entry >= floor)
        entering = {int(idx[i]): entry_sign[i] for i in hits}
        dropping = [active[i] for i in np.flatnonzero(cross >= floor)]
        beta = base + 2.0 * g_next * slope
        beta[dropping] = 0.0
        gamma = g_next
    else:
        raise RuntimeError(f"homotopy did not reach lambda = 0 within {max_steps} events")

    return LassoPath(
        np.array(knots), np.array(bases), np.array(slopes), np.array(sign_rows), tuple(act_sets)
    )


def solve_at(path, lam):
    """Lasso solution at ``lam`` read off the path."""
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    k = path.segment_of(lam)
    if k < 0:
        return np.zeros(path.p)
    return path._eval(np.array([k]), np.array([float(lam)]))[0]


def solve_many(path, lams):
    """Solutions at several ``lams`` at once, shape ``(len(lams), p)``."""
    lams = np.asarray(lams, dtype=np.float64)
    if np.any(lams < 0):
        raise ValueError("lambda must be non-negative")
    out = np.zeros((lams.size, path.p))
    if not len(path):
        return out
    k = np.searchsorted(-path.knots, -lams, side="right") - 1
    inside = lams < path.knots[0]
    k = np.minimum(k[inside], len(path) - 1)
    out[inside] = path._eval(k, lams[inside])
    return out


def _soft(z, t):
    return np.sign(z) * max(abs(z) - t, 0.0)


def coordinate_descent_solve(X, Y, lam, tol=1e-10, max_cycles=100_000, beta_init=None):
    """Cyclic coordinate minimization of the same objective.

    Coordinates are visited in order ``0 .. p-1``; iteration stops once a
    full cycle changes no coordinate by more than ``tol``.

    Raises
    ------
    ConvergenceError
        After ``max_cycles`` cycles, carrying the last iterate.
    """
    X = _array(X)
    Y = as_vector(Y)
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    p = X.shape[1]
    G = X.T @ X
    diag = np.diag(G).copy()
    h = X.T @ Y  # X^T Y - G beta, kept current
    beta = np.zeros(p) if beta_init is None else np.array(beta_init, dtype=np.float64)
    if beta_init is not None:
        h -= G @ beta
    half = 0.5 * lam
    for _ in range(max_cycles):
        biggest = 0.0
        for j in range(p):
            if diag[j] == 0.0:
                continue
            old = beta[j]
            new = _soft(h[j] + diag[j] * old, half) / diag[j]
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                h -= G[:, j] * delta
                biggest = max(biggest, abs(delta))
        if biggest <= tol:
            return beta
    raise ConvergenceError(f"no convergence after {max_cycles} cycles", beta)


def kkt_check(X, Y, beta, lam, tol=1e-8):
    """Subgradient optimality audit for ``beta`` at ``lam``.

    With ``g = 2 X^T (Y - X beta)`` the conditions are ``|g_j| <= lam`` for
    every ``j`` and ``g_j = lam * sign(beta_j)`` on the support.  The reported
    violation is the largest amount by which either fails.
    """
    X = _array(X)
    Y = as_vector(Y)
    beta = as_vector(beta)
    g = 2.0 * (X.T @ (Y - X @ beta))
    support = np.flatnonzero(beta)
    viol = float(np.max(np.abs(g) - lam, initial=0.0))
    if support.size:
        viol = max(viol, float(np.max(np.abs(g[support] - lam * np.sign(beta[support])))))
    # a nonzero coefficient whose gradient points the other way is a sign error
    sign_ok = bool(np.all(g[support] * np.sign(beta[support]) >= -tol))
    return KktReport(max(viol, 0.0), sign_ok, tuple(int(j) for j in support), tol)


def prediction_error(X, beta, beta0):
    """``||X (beta - beta0)||_2^2``."""
    X = _array(X)
    d = X @ (as_vector(beta) - as_vector(beta0))
    return float(d @ d)


def pe_curve(path, X, beta0, lams):
    """Prediction error at each entry of ``lams``."""
    X = _array(X)
    B = solve_many(path, lams)
    D = (B - np.asarray(beta0)) @ X.T
    return np.einsum("ij,ij->i", D, D)


def optimal_lambda(path, X, beta0):
    """Exact minimizer of the prediction error over ``[0, lam_0]``.

    On each segment ``X (b(lam) - beta0) = r + lam q`` is affine in ``lam``, so
    the error is a univariate quadratic minimized in closed form.  Segments
    are scanned from ``lam_0`` downward and a later segment wins only on a
    strict improvement, so ties resolve to the largest ``lam``.

    Returns
    -------
    (lambda_star, pe_star)
    """
    X = _array(X)
    beta0 = as_vector(beta0)
    r0 = -(X @ beta0)
    best_lam, best_pe = path.lambda_max, float(r0 @ r0)
    for k in range(len(path)):
        hi, lo = path.knots[k], path.knots[k + 1]
        r = X @ (path.bases[k] - beta0)
        q = X @ path.slopes[k]
        qq = q @ q
        lam = hi if qq == 0.0 else min(hi, max(lo, -(r @ q) / qq))
        d = r + lam * q
        pe = float(d @ d)
        if pe < best_pe:
            best_lam, best_pe = float(lam), pe
    return best_lam, best_pe


def path_to_csv(path):
    """One row per knot: ``lambda`` followed by the ``p`` coefficients."""
    buf = io.StringIO()
    buf.write("lambda," + ",".join(f"beta_{j + 1}" for j in range(path.p)) + "\n")
    for lam, row in zip(path.knots, path.coefs_at_knots()):
        buf.write(",".join(f"{v:.17g}" for v in (lam, *row)) + "\n")
    return buf.getvalue()
