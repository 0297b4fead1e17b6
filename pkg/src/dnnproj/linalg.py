"""Dense symmetric-matrix utilities: spectral decomposition, the two
elementary cone projections, and matrix file I/O.

Everything here operates on plain ``numpy`` arrays.  Matrices are kept
exactly symmetric by averaging with the transpose after any operation that
could introduce round-off asymmetry; all solvers in this package rely on
that invariant.
"""

from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse

EIG_TOL = 1e-12  # relative accuracy expected from the dense eigensolver


class InvalidMatrix(ValueError):
    """Input matrix is not finite / not square / not symmetric."""


class EigFailure(RuntimeError):
    """The eigensolver backend failed to converge."""


def sym(a):
    """Symmetrize ``a`` by averaging with its transpose."""
    return 0.5 * (a + a.T)


def as_sym_matrix(a, name="matrix"):
    """Validate and return a finite, exactly symmetric 2-D float array.

    Raises InvalidMatrix for non-square or non-finite input.  Mild
    asymmetry (round-off level) is repaired by averaging; anything beyond
    that is rejected.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrix(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    scale = max(1.0, np.abs(a).max())
    if np.abs(a - a.T).max() > 1e-8 * scale:
        raise InvalidMatrix(f"{name} is not symmetric")
    return sym(a)


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigendecomposition ``A = P diag(lam) P^T`` with ``lam`` non-increasing."""

    lam: np.ndarray  # eigenvalues, descending
    p: np.ndarray    # orthonormal eigenvectors, columns matching lam

    @property
    def n(self):
        return self.lam.shape[0]


def sym_eig(a) -> SpectralDecomp:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Raises InvalidMatrix on non-finite input and EigFailure if the LAPACK
    backend does not converge.
    """
    a = as_sym_matrix(a)
    try:
        lam, p = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend dependent
        raise EigFailure(f"eigendecomposition failed: {exc}") from exc
    # eigh returns ascending order; flip to descending
    return SpectralDecomp(lam=lam[::-1].copy(), p=p[:, ::-1].copy())


def proj_psd(a):
    """Project onto the positive semidefinite cone.

    Returns ``(x, decomp)`` where ``x`` is the nearest PSD matrix (clamp
    the negative eigenvalues to zero) and ``decomp`` is the spectral
    decomposition of the *input*, returned so callers can reuse it when
    building Jacobians.
    """
    d = sym_eig(a)
    pos = np.maximum(d.lam, 0.0)
    x = sym((d.p * pos) @ d.p.T)
    return x, d


def proj_psd_from(decomp: SpectralDecomp):
    """PSD projection assembled from an existing decomposition."""
    pos = np.maximum(decomp.lam, 0.0)
    return sym((decomp.p * pos) @ decomp.p.T)


def proj_nonneg(a):
    """Entrywise projection onto the nonnegative orthant."""
    a = np.asarray(a, dtype=float)
    return np.maximum(a, 0.0)


def fro(a):
    """Frobenius norm."""
    return float(np.linalg.norm(a, "fro"))


def inner(a, b):
    """Trace inner product ``<A, B>``."""
    return float(np.sum(a * b))


# ---------------------------------------------------------------------------
# matrix file I/O: MatrixMarket coordinate symmetric, and dense CSV
# ---------------------------------------------------------------------------

def write_matrix_market(path, a):
    """Write a symmetric matrix in MatrixMarket coordinate symmetric format."""
    a = as_sym_matrix(a)
    coo = scipy.sparse.coo_matrix(a)
    scipy.io.mmwrite(str(path), coo, symmetry="symmetric", precision=17)


def read_matrix_market(path):
    m = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(m):
        m = m.toarray()
    return as_sym_matrix(np.asarray(m, dtype=float), name=str(path))


def write_csv(path, a):
    """Write a dense matrix as CSV with full (17 significant digit) precision."""
    np.savetxt(str(path), np.asarray(a, dtype=float), delimiter=",", fmt="%.17g")


def read_csv(path):
    a = np.loadtxt(str(path), delimiter=",", dtype=float)
    if a.ndim == 1:  # 1x1 matrices collapse under loadtxt
        a = a.reshape(1, 1) if a.size == 1 else a.reshape(1, -1)
    return a


def write_matrix(path, a):
    """Write ``a`` choosing the format from the file extension (.mtx/.mm vs .csv)."""
    path = str(path)
    if path.endswith((".mtx", ".mm")):
        write_matrix_market(path, a)
    elif path.endswith(".csv"):
        write_csv(path, a)
    else:
        raise ValueError(f"unknown matrix file extension: {path}")


def read_matrix(path):
    """Read a matrix, auto-detecting the format from the file extension."""
    path = str(path)
    if path.endswith((".mtx", ".mm")):
        return read_matrix_market(path)
    if path.endswith(".csv"):
        return read_csv(path)
    raise ValueError(f"unknown matrix file extension: {path}")
