"""KKT residual map for the doubly-nonnegative projection problem, the
relative termination metric, and post-solve diagnostics.

A point is optimal for ``min 0.5*||X - G||^2`` over the DNN cone exactly
when ``X = G + S + Z`` with ``S`` PSD, ``Z`` entrywise nonnegative,
``<X, S> = 0`` and ``X o Z = 0``; the residual functions below measure the
violation of that system.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from .linalg import as_sym_matrix, fro, inner, proj_nonneg, proj_psd, sym_eig

RANK_TOL = 1e-8  # eigenvalues above RANK_TOL * lambda_max count toward the rank


class InvalidInput(ValueError):
    pass


class DegenerateRatio(ZeroDivisionError):
    """Strict-complementarity ratio undefined (X + S is the zero matrix)."""


@dataclass
class KktPoint:
    """Primal/dual triple ``(X, S, Z)`` for the projection of ``G``."""

    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        n = self.x.shape[0]
        for name in ("x", "s", "z", "g"):
            m = getattr(self, name)
            if m.shape != (n, n):
                raise InvalidInput(
                    f"{name} has shape {m.shape}, expected {(n, n)}")

    @property
    def n(self):
        return self.x.shape[0]


@dataclass
class Diagnostics:
    """Scalar summary of a solve: termination metric, complementarity, ranks."""

    eta: float
    sc: float
    rank_x: int
    rank_s: int
    parts: list[float] = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d["parts"] = [float(v) for v in self.parts]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(eta=d["eta"], sc=d["sc"], rank_x=d["rank_x"],
                   rank_s=d["rank_s"], parts=list(d["parts"]))


def kkt_residual(point: KktPoint):
    """The three residual blocks of the optimality system.

    Returns ``(X - G - S - Z, X - P_psd(X - S), X - P_nonneg(X - Z))``;
    all three vanish exactly at an optimal primal/dual triple.
    """
    x, s, z, g = point.x, point.s, point.z, point.g
    r1 = x - g - s - z
    r2 = x - proj_psd(x - s)[0]
    r3 = x - proj_nonneg(x - z)
    return r1, r2, r3


def kkt_parts(point: KktPoint):
    """The seven raw component norms entering the relative KKT residual.

    Order: affine residual; PSD feasibility of X and of S; scaled
    ``|<X,S>|``; nonnegativity of X and of Z; scaled ``|<X,Z>|``.
    """
    x, s, z, g = point.x, point.s, point.z, point.g
    parts = np.empty(7)
    parts[0] = fro(x - g - s - z)
    parts[1] = fro(x - proj_psd(x)[0])
    parts[2] = fro(s - proj_psd(s)[0])
    parts[3] = abs(inner(x, s)) / (1.0 + fro(s))
    parts[4] = fro(x - proj_nonneg(x))
    parts[5] = fro(z - proj_nonneg(z))
    parts[6] = abs(inner(x, z)) / (1.0 + fro(z))
    return parts


def relative_kkt(point: KktPoint):
    """Relative KKT residual: max of the seven parts over ``max(1, ||G||)``."""
    return float(kkt_parts(point).max() / max(1.0, fro(point.g)))


def rank_of(a, rank_tol=RANK_TOL):
    """Numerical rank: eigenvalues exceeding ``rank_tol * lambda_max``."""
    lam = sym_eig(a).lam
    top = lam[0] if lam.size else 0.0
    if top <= 0.0:
        return 0
    return int(np.sum(lam > rank_tol * top))


def strict_complementarity(x, s, rank_tol=RANK_TOL):
    """Strict-complementarity ratio ``lambda_min(X+S) / lambda_max(X+S)``.

    Returns ``(sc, rank_x, rank_s)``.  A ratio safely above the solve
    tolerance certifies ``rank(X) + rank(S) = n``.  Raises DegenerateRatio
    when ``X + S`` is the zero matrix.
    """
    x = as_sym_matrix(x, "x")
    s = as_sym_matrix(s, "s")
    w = x + s
    if fro(w) == 0.0:
        raise DegenerateRatio("X + S is zero; complementarity ratio undefined")
    lam = sym_eig(w).lam
    sc = float(lam[-1] / lam[0])
    return sc, rank_of(x, rank_tol), rank_of(s, rank_tol)


def diagnostics(point: KktPoint, rank_tol=RANK_TOL) -> Diagnostics:
    """Full post-solve diagnostics for a primal/dual triple."""
    parts = kkt_parts(point)
    eta = float(parts.max() / max(1.0, fro(point.g)))
    try:
        sc, rank_x, rank_s = strict_complementarity(point.x, point.s, rank_tol)
    except DegenerateRatio:
        sc, rank_x, rank_s = float("-inf"), 0, 0
    return Diagnostics(eta=eta, sc=sc, rank_x=rank_x, rank_s=rank_s,
                       parts=[float(v) for v in parts])
