"""Constraint-nondegeneracy determination for a DNN-feasible matrix.

A feasible point of the projection problem is constraint nondegenerate
exactly when the only symmetric ``H`` vanishing on the support of ``X``
with ``P_alpha^T (H_zero + H_zero^T) P = 0`` is ``H = 0``, where
``P_alpha`` spans the positive eigenspace and ``H_zero`` collects the
entries on the zero pattern.  Counting dimensions gives the quick
necessary condition ``(n-r)(n-r+1)/2 <= |support|``; when it holds the
full check materializes the linear map from the free upper-triangular
entries to the ``n*r`` constrained values and tests full column rank.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .linalg import as_sym_matrix, sym_eig

RANK_TOL = 1e-8
SUPPORT_TOL = 1e-8
MEMORY_BUDGET = 2 * 1024 ** 3        # bytes allowed for the coefficient matrix
MAX_COLS = 50_000                    # beyond this, do not even try
DENSE_SVD_COLS = 2_000               # SVD below, pivoted QR above


@dataclass
class SupportData:
    """Positive eigenspace and entry support of a DNN-feasible matrix."""

    alpha: np.ndarray       # indices of eigenvalues above the rank tolerance
    p: np.ndarray           # full eigenvector matrix, eigenvalues descending
    e_set: list             # upper-triangular (i, j), i <= j, with X_ij > 0
    ebar_set: list          # the complementary upper-triangular pattern


@dataclass
class DegeneracyVerdict:
    status: str             # Degenerate | Nondegenerate | OutOfBudget
    reason: str             # necessary_condition_failed | rank_deficient_columns
                            # | full_column_rank | budget
    dims: tuple             # (n*|alpha|, |ebar|)
    rank_tol: float = RANK_TOL
    support_tol: float = SUPPORT_TOL

    def to_dict(self):
        return {"status": self.status, "reason": self.reason,
                "rows": int(self.dims[0]), "cols": int(self.dims[1]),
                "rank_tol": self.rank_tol, "support_tol": self.support_tol}


def support(x, rank_tol=RANK_TOL, support_tol=SUPPORT_TOL) -> SupportData:
    """Split eigenvalues and entries of ``x`` into active/inactive sets."""
    x = as_sym_matrix(x, "x")
    d = sym_eig(x)
    top = d.lam[0] if d.lam.size else 0.0
    if top > 0.0:
        alpha = np.flatnonzero(d.lam > rank_tol * top)
    else:
        alpha = np.array([], dtype=int)
    n = x.shape[0]
    cut = support_tol * max(x.max(), 0.0)
    e_set, ebar_set = [], []
    for i in range(n):
        for j in range(i, n):
            (e_set if x[i, j] > cut else ebar_set).append((i, j))
    return SupportData(alpha=alpha, p=d.p, e_set=e_set, ebar_set=ebar_set)


def necessary_condition(n, alpha_size, e_size):
    """Quick dimension count: False certifies degeneracy outright."""
    free = n - alpha_size
    return free * (free + 1) // 2 <= e_size


def _coefficient_matrix(sup: SupportData):
    """Dense map from free upper-triangular entries to the constrained block.

    Column for entry (i, j) is ``vec(P_alpha^T (E_ij + E_ji) P)``; diagonal
    entries contribute ``2 E_ii``.
    """
    p = sup.p
    pa = p[:, sup.alpha]                 # n x r
    r = pa.shape[1]
    n = p.shape[0]
    cols = len(sup.ebar_set)
    mat = np.empty((n * r, cols))
    for col, (i, j) in enumerate(sup.ebar_set):
        # P_alpha^T (E_ij + E_ji) P = pa_i p_j^T + pa_j p_i^T  (rows of pa/p)
        block = np.outer(pa[i], p[j]) + np.outer(pa[j], p[i])
        mat[:, col] = block.reshape(-1)
    return mat


def nondegeneracy_check(x, rank_tol=RANK_TOL, support_tol=SUPPORT_TOL,
                        memory_budget=MEMORY_BUDGET) -> DegeneracyVerdict:
    """Full degeneracy determination with an honest out-of-budget outcome.

    Never raises on size: systems whose coefficient matrix would exceed
    ``memory_budget`` bytes (or 50k columns) yield status ``OutOfBudget``.
    """
    sup = support(x, rank_tol, support_tol)
    n = x.shape[0]
    rows = n * len(sup.alpha)
    cols = len(sup.ebar_set)
    dims = (rows, cols)
    if not necessary_condition(n, len(sup.alpha), len(sup.e_set)):
        return DegeneracyVerdict("Degenerate", "necessary_condition_failed",
                                 dims, rank_tol, support_tol)
    if cols == 0:
        # no free entries at all: the map is injective on {0}
        return DegeneracyVerdict("Nondegenerate", "full_column_rank",
                                 dims, rank_tol, support_tol)
    if cols > MAX_COLS or rows * cols * 8 > memory_budget:
        return DegeneracyVerdict("OutOfBudget", "budget",
                                 dims, rank_tol, support_tol)
    mat = _coefficient_matrix(sup)
    if cols <= DENSE_SVD_COLS:
        sv = np.linalg.svd(mat, compute_uv=False)
        full = sv.size >= cols and sv[cols - 1] > rank_tol * sv[0]
    else:
        _q, rfac, _piv = scipy.linalg.qr(mat, mode="economic", pivoting=True)
        diag = np.abs(np.diag(rfac))
        full = diag.size >= cols and diag[-1] > rank_tol * diag[0]
    if full:
        return DegeneracyVerdict("Nondegenerate", "full_column_rank",
                                 dims, rank_tol, support_tol)
    return DegeneracyVerdict("Degenerate", "rank_deficient_columns",
                             dims, rank_tol, support_tol)
