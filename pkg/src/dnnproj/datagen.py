"""Deterministic instance generation.

Four synthetic families (known-zero projection, Hankel, noisy low-rank
sparse, Toeplitz), plus parsers for BIQMAC / QAPLIB problem files and the
lifting that turns a linearly constrained quadratic program with
complementarity pairs into a penalized matrix whose DNN projection is the
inner step of a dual bisection scheme.

Randomness comes from the counter-based Philox generator keyed by
``(seed, stream)``; each generator documents which streams it consumes
(scheme "philox-v1"), so identical inputs give bit-identical instances on
any platform.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import fro, sym
from .residuals import InvalidInput


class ParseError(ValueError):
    """A problem file is malformed; the message carries the line number."""


# stream ids for the philox-v1 keying scheme
_STREAM_ZERO_PSD = 1
_STREAM_ZERO_NONNEG = 2
_STREAM_LOWRANK_MASK = 3
_STREAM_LOWRANK_VALUE = 4
_STREAM_LOWRANK_NOISE = 5
_STREAM_TOEPLITZ = 6


def _stream(seed, stream_id):
    return np.random.Generator(np.random.Philox(key=[int(seed), stream_id]))


@dataclass
class Instance:
    """A unit-Frobenius-norm symmetric matrix to project, plus provenance."""

    g: np.ndarray
    family: str
    n: int
    seed: int | None = None
    provenance: dict = field(default_factory=dict)


def _normalize(g, family, n, seed, provenance):
    g = sym(g)
    nrm = fro(g)
    inst = Instance(g=g / nrm, family=family, n=n, seed=seed,
                    provenance=dict(provenance, pre_norm=nrm))
    return inst


def zero_proj_parts(n, seed):
    """The PSD/nonnegative pair behind a zero-projection instance.

    Streams: (seed, 1) standard normals for the rank-2 PSD factor,
    (seed, 2) uniforms for the rank-<=2 nonnegative factor.
    """
    a = _stream(seed, _STREAM_ZERO_PSD).standard_normal((n, 2))
    b = _stream(seed, _STREAM_ZERO_NONNEG).uniform(size=(n, 2))
    return a @ a.T, b @ b.T


def gen_zero_proj(n, seed=0) -> Instance:
    """Instance whose DNN projection is the zero matrix.

    ``-G`` is a PSD matrix plus an entrywise nonnegative one, so
    ``(X, S, Z) = (0, S, Z)`` solves the KKT system exactly, and the
    normalization preserves that structure.
    """
    if n < 3:
        raise InvalidInput("zero-projection family needs n >= 3")
    s, z = zero_proj_parts(n, seed)
    return _normalize(-(s + z), "zero", n, seed, {})


def gen_hankel(n) -> Instance:
    """Deterministic Hankel instance: constant ascending skew-diagonals,
    ``-(i+j-1)`` while ``i+j-1 <= n`` and ``i+j-n`` afterwards (1-based)."""
    if n < 2:
        raise InvalidInput("hankel family needs n >= 2")
    idx = np.arange(1, n + 1, dtype=float)
    g = scipy.linalg.hankel(-idx, idx)
    return _normalize(g, "hankel", n, None, {})


def gen_lowrank_sparse(n, seed=0) -> Instance:
    """Noisy low-rank sparse instance.

    A rank-<=10 nonpositive part from a half-dense nonnegative factor,
    blended 85/15 with a symmetrized Gaussian noise matrix.  Streams:
    (seed, 3) Bernoulli placement mask, (seed, 4) uniform values,
    (seed, 5) the noise draw.
    """
    if n < 10:
        raise InvalidInput("low-rank sparse family needs n >= 10")
    mask = _stream(seed, _STREAM_LOWRANK_MASK).random((n, 10)) < 0.5
    vals = _stream(seed, _STREAM_LOWRANK_VALUE).uniform(size=(n, 10))
    v = np.where(mask, vals, 0.0)
    g0 = -(v @ v.T)
    e = _stream(seed, _STREAM_LOWRANK_NOISE).standard_normal((n, n))
    e = 0.5 * (e + e.T)
    return _normalize(0.85 * g0 + 0.15 * e, "lowrank", n, seed, {})


def gen_toeplitz(n, seed=0) -> Instance:
    """Toeplitz instance: first ``n/25`` diagonals set to +1, the rest to
    negative uniforms.  Stream: (seed, 6)."""
    if n % 25 != 0:
        raise InvalidInput(f"toeplitz family needs n divisible by 25, got {n}")
    c = -_stream(seed, _STREAM_TOEPLITZ).uniform(size=n)
    c[: n // 25] = 1.0
    return _normalize(scipy.linalg.toeplitz(c), "toeplitz", n, seed, {})


FAMILIES = {
    "zero": gen_zero_proj,
    "hankel": lambda n, seed=0: gen_hankel(n),
    "lowrank": gen_lowrank_sparse,
    "toeplitz": gen_toeplitz,
}


def generate(family, n, seed=0) -> Instance:
    """Dispatch on family name ('zero', 'hankel', 'lowrank', 'toeplitz')."""
    try:
        maker = FAMILIES[family]
    except KeyError:
        raise InvalidInput(
            f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    return maker(n, seed=seed)


# ---------------------------------------------------------------------------
# quadratic programs with complementarity pairs, and their matrix lifting
# ---------------------------------------------------------------------------

@dataclass
class QopData:
    """min u'Qu + 2c'u  s.t.  u >= 0,  Au + b = 0,  u_i u_j = 0 for pairs."""

    q: np.ndarray          # m x m symmetric objective matrix
    c: np.ndarray          # length-m linear term
    a: np.ndarray          # q x m equality constraint matrix
    b: np.ndarray          # length-q constant (Au + b = 0)
    pairs: list            # complementarity index pairs (i, j), 0-based, i < j

    @property
    def m(self):
        return self.q.shape[0]


@dataclass
class QopLift:
    """Order-(m+1) matrices of the lifted program and the scalar knobs.

    ``h0`` picks out the (0,0) corner exactly; ``h1`` aggregates the
    equality-constraint Gram block with the complementarity pattern and is
    PSD plus entrywise-nonnegative by construction; ``penalty`` weighs the
    h1 term and ``shift`` the h0 term in the projected matrix.
    """

    q0: np.ndarray
    h0: np.ndarray
    h1: np.ndarray
    penalty: float
    shift: float

    @property
    def n(self):
        return self.q0.shape[0]


def parse_biqmac(path) -> QopData:
    """Read a BIQMAC-style binary quadratic file and lift it.

    Format: header line ``d nnz``, then ``nnz`` lines ``i j v`` giving the
    upper-triangular objective entries (1-based).  The library states its
    objectives as maximizations; the returned data is the equivalent
    minimization.
    """
    with open(path) as fh:
        lines = fh.readlines()
    rows = [(no, ln.split()) for no, ln in enumerate(lines, start=1)
            if ln.strip()]
    if not rows:
        raise ParseError(f"{path}: line 1: empty file")
    no, head = rows[0]
    if len(head) < 2:
        raise ParseError(f"{path}: line {no}: expected header 'd nnz'")
    try:
        d, nnz = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"{path}: line {no}: bad header {head!r}")
    if len(rows) - 1 < nnz:
        raise ParseError(
            f"{path}: line {rows[-1][0]}: truncated, expected {nnz} entries")
    q_raw = np.zeros((d, d))
    for no, toks in rows[1:nnz + 1]:
        if len(toks) < 3:
            raise ParseError(f"{path}: line {no}: expected 'i j v'")
        try:
            i, j, v = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            raise ParseError(f"{path}: line {no}: bad entry {toks!r}")
        if not (1 <= i <= d and 1 <= j <= d):
            raise ParseError(f"{path}: line {no}: index out of range")
        if i == j:
            q_raw[i - 1, i - 1] += v
        else:
            q_raw[i - 1, j - 1] += 0.5 * v
            q_raw[j - 1, i - 1] += 0.5 * v
    return lift_biq(d, q_raw)


def lift_biq(d, q_raw) -> QopData:
    """Binary quadratic -> complementarity form.

    Each binary variable gets a slack: ``x_i + y_i = 1`` with
    ``x_i * y_i = 0`` and both nonnegative; the maximization objective is
    negated into the canonical minimization.  The lifted order is 2d+1.
    """
    m = 2 * d
    q = np.zeros((m, m))
    q[:d, :d] = -np.asarray(q_raw, dtype=float)
    a = np.hstack([np.eye(d), np.eye(d)])
    b = -np.ones(d)
    pairs = [(i, d + i) for i in range(d)]
    return QopData(q=sym(q), c=np.zeros(m), a=a, b=b, pairs=pairs)


def parse_qaplib(path):
    """Read a QAPLIB file: size ``k``, then the k x k flow and distance
    matrices, whitespace separated.  Returns ``(k, flow, dist)``."""
    values = []
    last_line = 0
    with open(path) as fh:
        for no, ln in enumerate(fh, start=1):
            last_line = no
            for tok in ln.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ParseError(f"{path}: line {no}: bad token {tok!r}")
    if not values:
        raise ParseError(f"{path}: line 1: empty file")
    k = int(values[0])
    if k <= 0 or values[0] != k:
        raise ParseError(f"{path}: line 1: bad size {values[0]!r}")
    need = 1 + 2 * k * k
    if len(values) < need:
        raise ParseError(
            f"{path}: line {last_line}: truncated, expected {need} numbers, "
            f"got {len(values)}")
    body = np.asarray(values[1:need])
    flow = body[: k * k].reshape(k, k)
    dist = body[k * k:].reshape(k, k)
    return k, flow, dist


def lift_qap(flow, dist) -> QopData:
    """Quadratic assignment -> complementarity form.

    Variables are the k^2 entries of the assignment matrix in row-major
    order; the objective is the Kronecker form, equalities force unit row
    and column sums (both kept, one is redundant), and complementarity
    pairs are distinct entries sharing a row or a column.  Lifted order is
    k^2 + 1.
    """
    flow = np.asarray(flow, dtype=float)
    dist = np.asarray(dist, dtype=float)
    k = flow.shape[0]
    m = k * k
    q = sym(np.kron(flow, dist))
    a = np.zeros((2 * k, m))
    for i in range(k):
        a[i, i * k:(i + 1) * k] = 1.0          # row sums
        a[k + i, i::k] = 1.0                   # column sums
    b = -np.ones(2 * k)
    pairs = []
    for i in range(k):
        for p in range(k):
            u = i * k + p
            for qcol in range(p + 1, k):       # same row
                pairs.append((u, i * k + qcol))
            for j in range(i + 1, k):          # same column
                pairs.append((u, j * k + p))
    return QopData(q=q, c=np.zeros(m), a=a, b=b, pairs=pairs)


# table-driven shifts used in the reference experiments, by instance prefix
DEFAULT_SHIFTS = {"bqp": -100.0, "bur": 1e4, "chr": 1e5, "nug": 5e5,
                  "tai": 7e7}


def default_shift(name):
    """Shift value for a problem name, matched by its family prefix."""
    for prefix, y in DEFAULT_SHIFTS.items():
        if name.startswith(prefix):
            return y
    raise InvalidInput(f"no default shift for problem {name!r}")


def build_lift(qop: QopData, shift, penalty=None) -> QopLift:
    """Assemble the lifted matrices of order m+1.

    ``penalty`` defaults to ``1e6 * ||Q0|| / max(1, ||H1||)``.
    """
    m = qop.m
    n = m + 1
    q0 = np.zeros((n, n))
    q0[0, 1:] = qop.c
    q0[1:, 0] = qop.c
    q0[1:, 1:] = qop.q
    h0 = np.zeros((n, n))
    h0[0, 0] = 1.0
    stacked = np.hstack([qop.b[:, None], qop.a])   # q x (1+m)
    h1 = stacked.T @ stacked                       # Gram block, PSD
    for i, j in qop.pairs:
        h1[i + 1, j + 1] += 0.5
        h1[j + 1, i + 1] += 0.5
    h1 = sym(h1)
    if penalty is None:
        penalty = 1e6 * fro(q0) / max(1.0, fro(h1))
    return QopLift(q0=sym(q0), h0=h0, h1=h1, penalty=float(penalty),
                   shift=float(shift))


def penalized_matrix(lift: QopLift):
    """The matrix ``Q0 + penalty*H1 - shift*H0`` whose negation is projected."""
    return sym(lift.q0 + lift.penalty * lift.h1 - lift.shift * lift.h0)


def lift_instance(lift: QopLift, name="lift") -> Instance:
    """Normalized projection instance ``-(Q0 + penalty*H1 - shift*H0)``.

    Projecting this matrix onto the DNN cone is the inner step of the
    dual-cone projection ``M + P_dnn(-M)`` used by the bisection scheme.
    """
    g = -penalized_matrix(lift)
    return _normalize(g, name, lift.n, None,
                      {"penalty": lift.penalty, "shift": lift.shift})
