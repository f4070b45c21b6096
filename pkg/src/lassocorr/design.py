"""Design matrices and regression instances for the simulation study.

Three generators are provided:

* :func:`gen_equicorrelated` -- i.i.d. Gaussian rows with covariance
  ``(1 - rho) I + rho 11^T``;
* :func:`expand_design` -- every column gets ``p - 1`` noisy copies
  ``X_j + eta N`` appended (impertinent variables);
* :func:`gen_clustered` -- one fixed direction plus ``p - 1`` noisy copies.

Every generator rescales columns to Euclidean norm ``sqrt(n)`` as its last
step, i.e. ``(X^T X)_jj = n``.  No centering is done.
"""

import io
import re
from dataclasses import dataclass

import numpy as np

from .simcore import EmptyInputError, as_matrix, as_vector, derive_seed, generator

__all__ = [
    "Provenance",
    "DesignMatrix",
    "RegressionInstance",
    "normalize_columns",
    "gen_equicorrelated",
    "expand_design",
    "gen_clustered",
    "make_beta0",
    "gen_instance",
    "design_to_csv",
    "design_from_csv",
    "write_design",
    "read_design",
]

NORM_RTOL = 1e-9


@dataclass(frozen=True)
class Provenance:
    """Which generator produced a design, with its parameters.

    ``kind`` is one of ``"equicorrelated"``, ``"expanded"``, ``"clustered"``
    or ``"external"``.
    """

    kind: str
    rho: float = None
    eta: float = None
    base_p: int = None
    nu: float = None

    def __str__(self):
        if self.kind == "equicorrelated":
            return f"equicorrelated({self.rho!r})"
        if self.kind == "expanded":
            return f"expanded({self.eta!r};{self.base_p})"
        if self.kind == "clustered":
            return f"clustered({self.nu!r})"
        return "external"

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text == "external":
            return cls("external")
        m = re.fullmatch(r"(\w+)\(([^)]*)\)", text)
        if m is None:
            raise ValueError(f"cannot parse provenance {text!r}")
        kind, args = m.group(1), m.group(2).split(";")
        if kind == "equicorrelated" and len(args) == 1:
            return cls(kind, rho=float(args[0]))
        if kind == "expanded" and len(args) == 2:
            return cls(kind, eta=float(args[0]), base_p=int(args[1]))
        if kind == "clustered" and len(args) == 1:
            return cls(kind, nu=float(args[0]))
        raise ValueError(f"cannot parse provenance {text!r}")


@dataclass(frozen=True)
class DesignMatrix:
    X: np.ndarray
    normalized: bool
    provenance: Provenance

    def __post_init__(self):
        X = as_matrix(self.X)
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise EmptyInputError("design needs n >= 1 and p >= 1")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.normalized:
            n = X.shape[0]
            sq = np.einsum("ij,ij->j", X, X)
            bad = np.abs(sq - n) > NORM_RTOL * n
            if np.any(bad):
                j = int(np.flatnonzero(bad)[0])
                raise ValueError(f"column {j} has squared norm {sq[j]!r}, expected {n}")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @classmethod
    def external(cls, X, normalize=True):
        """Wrap a user matrix, rescaling columns to norm ``sqrt(n)`` by default."""
        X = as_matrix(X)
        if normalize:
            X = normalize_columns(X)
        return cls(X, normalize, Provenance("external"))


@dataclass(frozen=True)
class RegressionInstance:
    """One draw of ``Y = X beta0 + sigma * eps``."""

    design: DesignMatrix
    beta0: np.ndarray
    sigma: float
    eps: np.ndarray
    Y: np.ndarray

    @property
    def s(self):
        return int(np.count_nonzero(self.beta0))


def normalize_columns(X):
    """Rescale each column to Euclidean norm ``sqrt(n)``.

    A zero column cannot be rescaled and raises ``ValueError``.
    """
    X = np.array(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero column")
    X *= np.sqrt(X.shape[0]) / norms
    return X


def _check_shape(n, p):
    if n < 1 or p < 1:
        raise EmptyInputError(f"need n >= 1 and p >= 1, got n={n}, p={p}")


def gen_equicorrelated(n, p, rho, seed):
    """Rows i.i.d. ``N(0, (1 - rho) I + rho 11^T)``, columns normalized.

    Sampled through the one-factor form ``sqrt(1 - rho) z_i + sqrt(rho) z0_i``
    where ``z0_i`` is a single standard normal shared by all entries of row i.
    """
    _check_shape(n, p)
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    g = generator(seed)
    z0 = g.standard_normal(n)
    Z = g.standard_normal((n, p))
    X = np.sqrt(1.0 - rho) * Z + np.sqrt(rho) * z0[:, None]
    return DesignMatrix(normalize_columns(X), True, Provenance("equicorrelated", rho=float(rho)))


def expand_design(base, eta, seed):
    """Append ``p - 1`` perturbed copies ``X_j + eta N`` of every column.

    Column order: the ``p`` originals, then the copies of column 0, then the
    copies of column 1, and so on.  The whole ``n x p^2`` matrix is
    normalized once at the end.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not base.normalized:
        raise ValueError("expand_design needs a normalized base design")
    n, p = base.n, base.p
    N = generator(seed).standard_normal((p, n, p - 1))
    copies = base.X.T[:, :, None] + eta * N  # (p, n, p-1)
    added = copies.transpose(1, 0, 2).reshape(n, p * (p - 1))
    X = np.hstack([base.X, added])
    prov = Provenance("expanded", eta=float(eta), base_p=p)
    return DesignMatrix(normalize_columns(X), True, prov)


def gen_clustered(n, p, nu, seed):
    """Columns ``X_1 + nu N`` around the fixed direction ``X_1 = (1, ..., 1)``.

    The first column is the all-ones vector (norm ``sqrt(n)``); the remaining
    ``p - 1`` are perturbed copies.  ``nu = 0`` gives ``p`` identical columns.
    """
    _check_shape(n, p)
    if nu < 0:
        raise ValueError(f"nu must be non-negative, got {nu}")
    first = np.ones(n)
    N = generator(seed).standard_normal((n, p - 1))
    X = np.hstack([first[:, None], first[:, None] + nu * N])
    return DesignMatrix(normalize_columns(X), True, Provenance("clustered", nu=float(nu)))


def make_beta0(p, s, amplitude=1.0):
    """First ``s`` entries equal to ``amplitude``, the rest zero."""
    if not 0 <= s <= p:
        raise ValueError(f"need 0 <= s <= p, got s={s}, p={p}")
    beta0 = np.zeros(p)
    beta0[:s] = amplitude
    return beta0


def gen_instance(design, s, sigma, seed):
    """Draw noise and form ``Y = X beta0 + sigma eps``.

    For an expanded design the signal sits on the first ``s`` *original*
    columns, which by the ordering of :func:`expand_design` are also the
    first ``s`` columns overall; the appended copies get zero weight.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    p_signal = design.provenance.base_p if design.provenance.kind == "expanded" else design.p
    if s > p_signal:
        raise ValueError(f"s={s} exceeds the {p_signal} available signal columns")
    beta0 = make_beta0(design.p, s)
    eps = generator(seed).standard_normal(design.n)
    Y = design.X @ beta0 + sigma * eps
    return RegressionInstance(design, beta0, float(sigma), eps, Y)


# -- CSV import/export -----------------------------------------------------------


def design_to_csv(design):
    buf = io.StringIO()
    buf.write(f"# {design.n},{design.p},{str(design.normalized).lower()},{design.provenance}\n")
    for row in design.X:
        buf.write(",".join(f"{v:.17g}" for v in row))
        buf.write("\n")
    return buf.getvalue()


def design_from_csv(text):
    """Parse :func:`design_to_csv` output; errors name the offending line."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("line 1: expected header '# n,p,normalized,provenance'")
    fields = lines[0][1:].strip().split(",", 3)
    if len(fields) != 4:
        raise ValueError("line 1: expected header '# n,p,normalized,provenance'")
    try:
        n, p = int(fields[0]), int(fields[1])
    except ValueError:
        raise ValueError(f"line 1: bad shape {fields[0]!r},{fields[1]!r}") from None
    if fields[2] not in ("true", "false"):
        raise ValueError(f"line 1: normalized must be true/false, got {fields[2]!r}")
    normalized = fields[2] == "true"
    try:
        prov = Provenance.parse(fields[3])
    except ValueError as exc:
        raise ValueError(f"line 1: {exc}") from None
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = [float(v) for v in line.split(",")]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric entry") from None
        if len(row) != p:
            raise ValueError(f"line {lineno}: expected {p} values, got {len(row)}")
        rows.append(row)
    if len(rows) != n:
        raise ValueError(f"expected {n} data rows, got {len(rows)}")
    X = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    return DesignMatrix(X, normalized, prov)


def write_design(design, path):
    with open(path, "w") as fh:
        fh.write(design_to_csv(design))


def read_design(path):
    with open(path) as fh:
        return design_from_csv(fh.read())


def instance_seeds(seed):
    """Seeds for the design draw, the expansion draw and the noise draw."""
    return derive_seed(seed, 0), derive_seed(seed, 1), derive_seed(seed, 2)
