"""Prediction-error bounds for the Lasso and helpers to check them.

On the event ``T = {2 sigma max_j |eps^T X_j| <= lam}`` any design obeys

    slow rate      ||X(b - b0)||^2 <= 2 lam ||b0||_1
    improved       ||X(b - b0)||^2 <= 2 lam min(||b0||_1, ||(b - b0)_J0||_1)

with ``J0`` the support of ``b0``.  Under the restricted eigenvalue
condition with constant ``phi`` the fast rate ``lam^2 sbar / (n phi^2)``
applies.  For highly correlated designs a bound with exponent ``alpha`` is
evaluated as a formula; its constant ``C(alpha, A)`` is supplied by the
caller (default 1) since no explicit value is known.
"""

from dataclasses import dataclass

import numpy as np

from .design import DesignMatrix
from .simcore import as_matrix, as_vector, derive_seed, generator

__all__ = [
    "REViolatedError",
    "ReConstantEstimate",
    "HighCorrParams",
    "slow_rate_bound",
    "improved_slow_rate",
    "fast_rate_bound",
    "re_ratio",
    "re_constant_estimate",
    "high_corr_bound",
    "high_corr_bound_display",
    "event_T_alpha_statistic",
    "event_T_alpha_estimate",
]

CONE = 3.0


class REViolatedError(ValueError):
    """The restricted eigenvalue constant is not positive; the fast rate does not apply."""


def _array(X):
    if isinstance(X, DesignMatrix):
        return X.X
    return as_matrix(X)


def slow_rate_bound(lam, beta0):
    """``2 lam ||beta0||_1``."""
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    return 2.0 * lam * float(np.abs(as_vector(beta0)).sum())


def improved_slow_rate(lam, beta0, betahat):
    """``2 lam min(||beta0||_1, ||(betahat - beta0)_J0||_1)`` with ``J0 = supp(beta0)``."""
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    beta0 = as_vector(beta0)
    betahat = as_vector(betahat)
    if beta0.shape != betahat.shape:
        raise ValueError(f"shape mismatch: {beta0.shape} vs {betahat.shape}")
    J0 = beta0 != 0
    on_support = float(np.abs(betahat[J0] - beta0[J0]).sum())
    return 2.0 * lam * min(float(np.abs(beta0).sum()), on_support)


def fast_rate_bound(lam, sbar, phi, n):
    """``lam^2 sbar / (n phi^2)``; raises :class:`REViolatedError` when ``phi <= 0``."""
    if not phi > 0:
        raise REViolatedError(f"restricted eigenvalue constant must be positive, got {phi}")
    return lam * lam * sbar / (n * phi * phi)


# -- restricted eigenvalue -----------------------------------------------------


@dataclass(frozen=True)
class ReConstantEstimate:
    """Smallest RE ratio found; an upper estimate of ``phi(sbar)``.

    ``witness`` is ``(J0, Delta)`` with ``|J0| <= sbar`` and
    ``||Delta_{J0^c}||_1 <= 3 ||Delta_{J0}||_1``.
    """

    sbar: int
    phi_hat: float
    witness: tuple
    samples: int


def re_ratio(X, J0, delta):
    """``||X delta||_2 / (sqrt(n) ||delta_J0||_2)``."""
    X = _array(X)
    J0 = np.asarray(J0, dtype=int)
    on = np.linalg.norm(delta[J0])
    if on == 0:
        return np.inf
    return float(np.linalg.norm(X @ delta) / (np.sqrt(X.shape[0]) * on))


def _in_cone(J0, delta, p):
    mask = np.zeros(p, dtype=bool)
    mask[J0] = True
    return np.abs(delta[~mask]).sum() <= CONE * np.abs(delta[mask]).sum() + 1e-9


def _pull_into_cone(delta, mask):
    """Shrink the off-support part so the cone constraint holds."""
    on = CONE * np.abs(delta[mask]).sum()
    off = np.abs(delta[~mask]).sum()
    if off > on:
        delta = delta.copy()
        delta[~mask] *= on / off
    return delta


def _refine(X, J0, delta, steps):
    """Projected gradient descent on ``||X d||^2 / (n ||d_J0||^2)`` inside the cone.

    The map back into the cone rescales the off-support block, which keeps
    every iterate feasible; the best iterate is returned.
    """
    n, p = X.shape
    mask = np.zeros(p, dtype=bool)
    mask[J0] = True
    best, best_val = delta, re_ratio(X, J0, delta)
    d = delta / np.linalg.norm(delta[mask])
    step = 0.5 / max(np.linalg.norm(X, 2) ** 2 / n, 1e-300)
    for _ in range(steps):
        Xd = X @ d
        q = (Xd @ Xd) / n
        # gradient of q / ||d_J0||^2 at ||d_J0|| = 1
        grad = 2.0 * (X.T @ Xd) / n
        grad[mask] -= 2.0 * q * d[mask]
        cand = _pull_into_cone(d - step * grad, mask)
        nrm = np.linalg.norm(cand[mask])
        if nrm == 0:
            break
        cand /= nrm
        val = re_ratio(X, J0, cand)
        if val < best_val:
            best, best_val = cand, val
            d = cand
        else:
            step *= 0.5
    return best, best_val


def re_constant_estimate(X, sbar, budget=200, seed=0, refine_steps=30):
    """Upper estimate of the restricted eigenvalue constant ``phi(sbar)``.

    Candidates are (a) for the most aligned pair of columns, ``e_i - s e_j``
    on ``J0 = {i}``; (b) ``budget`` random supports of size ``sbar``, each
    contributing the smallest singular direction of ``X_J0`` and a random
    cone direction, both polished by projected gradient.  Sample ``r`` is
    drawn from ``derive_seed(seed, r)`` alone, so raising ``budget`` only adds
    candidates and the estimate never increases.
    """
    X = _array(X)
    n, p = X.shape
    if not 1 <= sbar <= p:
        raise ValueError(f"need 1 <= sbar <= p, got sbar={sbar}, p={p}")
    cands = []
    if p >= 2:
        G = X.T @ X
        np.fill_diagonal(G, 0.0)
        i, j = np.unravel_index(int(np.argmax(np.abs(G))), G.shape)
        delta = np.zeros(p)
        delta[i], delta[j] = 1.0, -np.sign(G[i, j]) or -1.0
        cands.append(((int(i),), delta))
    for r in range(budget):
        g = generator(derive_seed(seed, r))
        J0 = np.sort(g.choice(p, size=sbar, replace=False))
        _, _, Vt = np.linalg.svd(X[:, J0], full_matrices=True)
        delta = np.zeros(p)
        delta[J0] = Vt[-1]
        d1, _ = _refine(X, J0, delta, refine_steps)
        cands.append((tuple(J0.tolist()), d1))
        if sbar < p:
            mask = np.zeros(p, dtype=bool)
            mask[J0] = True
            delta = g.standard_normal(p)
            delta[~mask] *= CONE * np.abs(delta[mask]).sum() * g.uniform() / np.abs(delta[~mask]).sum()
            d2, _ = _refine(X, J0, delta, refine_steps)
            cands.append((tuple(J0.tolist()), d2))
    vals = [re_ratio(X, J0, d) for J0, d in cands]
    k = int(np.argmin(vals))
    J0, delta = cands[k]
    assert _in_cone(list(J0), delta, p)
    return ReConstantEstimate(int(sbar), float(vals[k]), (J0, delta), budget)


# -- highly correlated designs -------------------------------------------------


@dataclass(frozen=True)
class HighCorrParams:
    """Inputs of the correlated-design bound.

    Give ``lambda_tilde`` directly, or give ``sigma`` and ``kappa`` (and
    optionally ``C``) to use ``sigma C sqrt(n^(2 - alpha) log(2 / kappa))``.
    ``C`` stands in for a constant known only to exist; ``A`` is recorded for
    provenance and does not enter the arithmetic.
    """

    alpha: float
    lambda_tilde: float = None
    C: float = 1.0
    A: float = None
    kappa: float = None
    sigma: float = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    def lambda_tilde_for(self, n):
        if self.lambda_tilde is not None:
            return float(self.lambda_tilde)
        if self.sigma is None or self.kappa is None:
            raise ValueError("need lambda_tilde, or sigma and kappa")
        return float(self.sigma * self.C * np.sqrt(n ** (2.0 - self.alpha) * np.log(2.0 / self.kappa)))


def high_corr_bound(params, n, beta0_l1):
    """Tuning parameter and prediction bound for exponent ``alpha``.

    ``lam = (2 lt n^(a-1))^(2/(1+a)) ||b0||_1^((a-1)/(1+a))`` and
    ``bound = 10.5 (2 lt n^(a-1))^(2/(1+a)) ||b0||_1^(2a/(1+a))``, so that
    ``bound = 10.5 lam ||b0||_1``.

    Returns
    -------
    (lam, bound) : tuple of float
    """
    if not beta0_l1 > 0:
        raise ValueError(f"||beta0||_1 must be positive, got {beta0_l1}")
    a = params.alpha
    lt = params.lambda_tilde_for(n)
    base = (2.0 * lt * n ** (a - 1.0)) ** (2.0 / (1.0 + a))
    lam = base * beta0_l1 ** ((a - 1.0) / (1.0 + a))
    bound = 10.5 * base * beta0_l1 ** (2.0 * a / (1.0 + a))
    return float(lam), float(bound)


def high_corr_bound_display(sigma, C, alpha, n, kappa, beta0_l1):
    """``10.5 (sigma C sqrt(n^alpha log(2/kappa)))^(2/(1+alpha)) ||b0||_1^(2 alpha/(1+alpha))``.

    This is the probability-form bound written directly in terms of
    ``sigma``; substituting ``lambda_tilde`` into :func:`high_corr_bound`
    gives ``2^(2/(1+alpha))`` times this value (the factor 2 in
    ``2 lambda_tilde`` is absent here).  Both are provided so either reading
    can be used.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    base = (sigma * C * np.sqrt(n**alpha * np.log(2.0 / kappa))) ** (2.0 / (1.0 + alpha))
    return float(10.5 * base * beta0_l1 ** (2.0 * alpha / (1.0 + alpha)))


def event_T_alpha_statistic(X, eps, sigma, alpha, beta):
    """``2 sigma |eps^T X b| / (||X b||^(1-alpha) ||b||_1^alpha)`` (0 when ``X b = 0``)."""
    X = _array(X)
    Xb = X @ beta
    num = 2.0 * sigma * abs(float(eps @ Xb))
    if num == 0.0:
        return 0.0
    return num / (np.linalg.norm(Xb) ** (1.0 - alpha) * np.abs(beta).sum() ** alpha)


def _search_sup(X, eps, sigma, alpha, budget, g):
    """Lower bound on the supremum from basis vectors, random and coordinate search."""
    n, p = X.shape
    c = X.T @ eps
    norms = np.linalg.norm(X, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        basis = np.where(norms > 0, 2.0 * sigma * np.abs(c) / norms ** (1.0 - alpha), 0.0)
    best = float(basis.max())
    best_beta = np.zeros(p)
    best_beta[int(np.argmax(basis))] = 1.0
    stat = lambda b: event_T_alpha_statistic(X, eps, sigma, alpha, b)
    n_random = budget // 2
    for _ in range(n_random):
        k = int(g.integers(1, min(p, 8) + 1))
        idx = g.choice(p, size=k, replace=False)
        b = np.zeros(p)
        b[idx] = g.standard_normal(k)
        v = stat(b)
        if v > best:
            best, best_beta = v, b
    # coordinate moves from the incumbent
    for _ in range(budget - n_random):
        j = int(g.integers(p))
        b = best_beta.copy()
        b[j] += g.standard_normal() * max(np.abs(best_beta).max(), 1.0)
        v = stat(b)
        if v > best:
            best, best_beta = v, b
    return best


def event_T_alpha_estimate(X, sigma, alpha, lambda_tilde, draws=1000, search_budget=1000, seed=0):
    """Optimistic estimate of ``P(T_alpha)``.

    For each noise draw the supremum is bounded below by a search over
    ``search_budget`` candidates; a draw counts as inside ``T_alpha`` when
    that lower bound is ``<= lambda_tilde``.  Since the true supremum can be
    larger, the frequency over-estimates the probability.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    X = _array(X)
    n = X.shape[0]
    hits = 0
    for d in range(draws):
        eps = generator(derive_seed(seed, d, 0)).standard_normal(n)
        g = generator(derive_seed(seed, d, 1))
        if _search_sup(X, eps, sigma, alpha, search_budget, g) <= lambda_tilde:
            hits += 1
    return hits / draws
