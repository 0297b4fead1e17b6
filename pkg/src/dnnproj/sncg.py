"""Semismooth Newton-CG solver for the augmented Lagrangian subproblem.

Each outer iteration of the augmented Lagrangian method minimizes

    f(X) = 0.5*||X - G||^2
         + (1/(2*sigma)) * ( ||P_psd(S - sigma*X)||^2
                           + ||P_nonneg(Z - sigma*X)||^2 )

over symmetric X, where (S, Z) are the current multiplier estimates and
sigma > 0 the penalty.  f is differentiable and strongly convex with
modulus 1, and its generalized Jacobian  I + sigma*(V1 + V2)  is positive
definite everywhere, so an inexact Newton direction from conjugate
gradients plus an Armijo backtracking line search converges globally and
superlinearly in the tail.

V1 is a generalized Jacobian element of the PSD-cone projection at
``S - sigma*X`` (a Hadamard multiplier in the eigenbasis), V2 one of the
nonnegative-orthant projection (a 0/1 entry mask).
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import EigFailure, SpectralDecomp, fro, inner, proj_psd_from, sym, sym_eig


class LineSearchFailure(RuntimeError):
    """No acceptable Armijo step within the backtracking budget."""


class CgBreakdown(RuntimeError):
    """Conjugate gradient produced a non-finite or non-descent iterate."""


PRECOND_FORMS = ("none", "sigma_form", "theta_form", "xi_form", "auto")


@dataclass
class Subproblem:
    """Frozen data of one augmented Lagrangian subproblem."""

    g: np.ndarray      # matrix being projected
    s: np.ndarray      # current PSD multiplier estimate
    z: np.ndarray      # current nonnegative multiplier estimate
    sigma: float       # penalty parameter, > 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        n = self.g.shape[0]
        if self.s.shape != (n, n) or self.z.shape != (n, n):
            raise ValueError("subproblem matrices must share one order")


@dataclass
class SncgConfig:
    """Tuning knobs for the Newton-CG inner solver.

    mu is the Armijo slope fraction in (0, 1/2); delta the backtracking
    ratio; eta_cg caps the CG residual; tau sets the superlinear forcing
    exponent (CG residual <= ||grad||^(1+tau) near the solution).
    """

    mu: float = 1e-4
    eta_cg: float = 0.1
    tau: float = 0.5
    delta: float = 0.5
    grad_tol: float = 1e-12
    max_newton: int = 100
    max_cg: int = 500
    max_backtracks: int = 50
    precond: str = "auto"

    def __post_init__(self):
        if not 0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 1/2)")
        if not 0 < self.eta_cg < 1:
            raise ValueError("eta_cg must lie in (0, 1)")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.precond not in PRECOND_FORMS:
            raise ValueError(f"precond must be one of {PRECOND_FORMS}")


@dataclass
class JacobianData:
    """Frozen generalized-Jacobian data at one point.

    ``decomp`` decomposes ``S - sigma*X``; ``alpha`` indexes its strictly
    positive eigenvalues (they come first, eigenvalues are descending).
    ``ratios[i, j] = lam_i / (lam_i - lam_j)`` couples positive eigenvalue
    i with nonpositive eigenvalue j; entries lie in (0, 1].  ``mask`` is 1
    where ``Z - sigma*X >= 0`` (ties count as 1) and 0 elsewhere.
    """

    decomp: SpectralDecomp
    alpha: np.ndarray
    ratios: np.ndarray
    mask: np.ndarray
    sigma: float

    @property
    def pos_count(self):
        return int(self.alpha.size)

    @property
    def p1(self):
        return self.decomp.p[:, : self.pos_count]

    @property
    def p2(self):
        return self.decomp.p[:, self.pos_count:]


def eval_subproblem(x, sp: Subproblem):
    """Objective value of the subproblem at ``x`` (eigenvalues only)."""
    w1 = sym(sp.s - sp.sigma * x)
    try:
        lam = np.linalg.eigvalsh(w1)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigFailure(f"eigvalsh failed: {exc}") from exc
    psd_part = float(np.sum(np.maximum(lam, 0.0) ** 2))
    w2 = sp.z - sp.sigma * x
    nonneg_part = float(np.sum(np.maximum(w2, 0.0) ** 2))
    return 0.5 * fro(x - sp.g) ** 2 + (psd_part + nonneg_part) / (2.0 * sp.sigma)


def grad_subproblem(x, sp: Subproblem):
    """Gradient of the subproblem and the decomposition of ``S - sigma*X``.

    grad = X - G - P_psd(S - sigma*X) - P_nonneg(Z - sigma*X); the returned
    decomposition is reused by ``build_jacobian``.
    """
    w1 = sym(sp.s - sp.sigma * x)
    decomp = sym_eig(w1)
    w2 = sp.z - sp.sigma * x
    grad = x - sp.g - proj_psd_from(decomp) - np.maximum(w2, 0.0)
    return sym(grad), decomp


def build_jacobian(x, sp: Subproblem, decomp: SpectralDecomp) -> JacobianData:
    """Select the generalized-Jacobian element at ``x``.

    Positive eigenvalues are classified strictly (zeros join the
    nonpositive block); mask ties at exactly zero resolve to 1.
    """
    lam = decomp.lam
    r = int(np.sum(lam > 0.0))
    alpha = np.arange(r)
    if 0 < r < lam.size:
        lp = lam[:r, None]
        ln = lam[None, r:]
        ratios = lp / (lp - ln)
    else:
        ratios = np.zeros((r, lam.size - r))
    mask = ((sp.z - sp.sigma * x) >= 0.0).astype(float)
    return JacobianData(decomp=decomp, alpha=alpha, ratios=ratios,
                        mask=mask, sigma=sp.sigma)


def apply_psd_jacobian(jd: JacobianData, d):
    """Directional action of the PSD-projection Jacobian element.

    In the eigenbasis this is the Hadamard multiplier with ones on the
    positive-positive block, ``ratios`` on the mixed blocks and zeros on
    the nonpositive-nonpositive block; only the blocks touching the
    positive eigenvectors are formed.
    """
    n = d.shape[0]
    r = jd.pos_count
    if r == 0:
        return np.zeros_like(d)
    if r == n:
        return d.copy()
    p1, p2 = jd.p1, jd.p2
    u = p1.T @ d                      # r x n
    t11 = u @ p1                      # r x r
    t12 = jd.ratios * (u @ p2)        # r x s
    cross = p1 @ (t12 @ p2.T)
    return sym(p1 @ (t11 @ p1.T) + cross + cross.T)


def apply_nonneg_jacobian(jd: JacobianData, d):
    """Directional action of the orthant-projection Jacobian element."""
    return jd.mask * d


def apply_newton_operator(jd: JacobianData, d):
    """Apply ``I + sigma*(V1 + V2)``; self-adjoint and positive definite."""
    return d + jd.sigma * (apply_psd_jacobian(jd, d) + apply_nonneg_jacobian(jd, d))


def _precond_auto_form(jd: JacobianData):
    # fewer positive eigenvalues -> work with the blocks touching them
    return "sigma_form" if jd.pos_count < jd.decomp.n / 2 else "theta_form"


def apply_precond_inverse(jd: JacobianData, d, form="auto"):
    """Apply ``(I + sigma*V1)^{-1}``, the preconditioner of the Newton system.

    Three algebraically identical forms are available.  ``sigma_form``
    subtracts the correction on the blocks touching positive eigenvectors
    (cheap when they are few); ``theta_form`` corrects on the complement
    (cheap when most eigenvalues are positive); ``xi_form`` applies the
    full Hadamard inverse directly.
    """
    sg = jd.sigma
    n = d.shape[0]
    r = jd.pos_count
    if form == "auto":
        form = _precond_auto_form(jd)
    if form == "sigma_form":
        if r == 0:
            return d.copy()
        p1, p2 = jd.p1, jd.p2
        u = p1.T @ d
        t11 = (sg / (1.0 + sg)) * (u @ p1)
        out = d - p1 @ (t11 @ p1.T)
        if r < n:
            coef = sg * jd.ratios / (1.0 + sg * jd.ratios)
            cross = p1 @ ((coef * (u @ p2)) @ p2.T)
            out = out - cross - cross.T
        return sym(out)
    if form == "theta_form":
        p1, p2 = jd.p1, jd.p2
        out = d.copy()
        if r < n:
            v = p2.T @ d
            out = out + sg * (p2 @ (v @ p2) @ p2.T)
            if r > 0:
                coef = sg * (1.0 - jd.ratios) / (1.0 + sg * jd.ratios)
                cross = p1 @ ((coef * (p1.T @ d @ p2)) @ p2.T)
                out = out + cross + cross.T
        return sym(out / (1.0 + sg))
    if form == "xi_form":
        xi = np.ones((n, n))
        xi[:r, :r] = 1.0 / (1.0 + sg)
        if 0 < r < n:
            xi[:r, r:] = 1.0 / (1.0 + sg * jd.ratios)
            xi[r:, :r] = xi[:r, r:].T
        p = jd.decomp.p
        return sym(p @ (xi * (p.T @ d @ p)) @ p.T)
    raise ValueError(f"unknown preconditioner form: {form}")


def cg_solve(operator, rhs, tol, max_cg, precond=None):
    """Conjugate gradients for ``operator(x) = rhs`` from the zero start.

    ``operator`` must be self-adjoint positive definite; ``precond``, if
    given, applies the inverse of a self-adjoint positive definite
    preconditioner.  Stops when the true residual norm drops to ``tol``
    (absolute).  Returns ``(x, iterations, converged)``; hitting the
    iteration cap is not an error because any CG iterate of a definite
    system is still a descent direction for the Newton step.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rnorm = fro(r)
    if rnorm <= tol:
        return x, 0, True
    z = precond(r) if precond is not None else r
    p = z.copy()
    rz = inner(r, z)
    for k in range(1, max_cg + 1):
        ap = operator(p)
        denom = inner(p, ap)
        if not np.isfinite(denom) or denom <= 0.0:
            raise CgBreakdown(f"curvature {denom!r} at CG iteration {k}")
        step = rz / denom
        x += step * p
        r -= step * ap
        if not np.all(np.isfinite(x)):
            raise CgBreakdown(f"non-finite iterate at CG iteration {k}")
        if fro(r) <= tol:
            return x, k, True
        z = precond(r) if precond is not None else r
        rz_next = inner(r, z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    return x, max_cg, False


def line_search(sp: Subproblem, x, direction, grad, cfg: SncgConfig, f0=None):
    """Armijo backtracking: smallest m with
    ``f(x + delta^m d) <= f(x) + mu*delta^m*<grad, d>``.

    Returns ``(step, m)``.  Requires a descent direction.
    """
    slope = inner(grad, direction)
    if not slope < 0.0:
        raise LineSearchFailure(f"not a descent direction (slope {slope:.3e})")
    if f0 is None:
        f0 = eval_subproblem(x, sp)
    step = 1.0
    for m in range(cfg.max_backtracks + 1):
        if eval_subproblem(x + step * direction, sp) <= f0 + cfg.mu * step * slope:
            return step, m
        step *= cfg.delta
    raise LineSearchFailure(
        f"no Armijo step within {cfg.max_backtracks} backtracks")


@dataclass
class SncgStats:
    """Per-iteration trace of one Newton-CG solve."""

    grad_norms: list[float] = field(default_factory=list)
    cg_iters: list[int] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.step_sizes)

    def to_dict(self):
        return {
            "grad_norms": [float(v) for v in self.grad_norms],
            "cg_iters": [int(v) for v in self.cg_iters],
            "step_sizes": [float(v) for v in self.step_sizes],
            "iterations": self.iterations,
            "converged": self.converged,
        }


def sncg_solve(sp: Subproblem, x0, cfg: SncgConfig = SncgConfig()):
    """Drive ``||grad f(X)||`` below ``cfg.grad_tol`` by Newton-CG.

    Returns ``(x, stats)``; ``stats.converged`` is False when the Newton
    budget ran out first.  Line-search and eigensolver failures propagate
    with the iteration index attached.
    """
    x = sym(np.array(x0, dtype=float, copy=True))
    stats = SncgStats()
    while True:
        grad, decomp = grad_subproblem(x, sp)
        gnorm = fro(grad)
        stats.grad_norms.append(gnorm)
        if gnorm <= cfg.grad_tol:
            stats.converged = True
            return x, stats
        if stats.iterations >= cfg.max_newton:
            return x, stats
        jd = build_jacobian(x, sp, decomp)
        precond = None
        if cfg.precond != "none":
            form = cfg.precond
            def precond(v, _jd=jd, _form=form):
                return apply_precond_inverse(_jd, v, form=_form)
        cg_tol = min(cfg.eta_cg, gnorm ** (1.0 + cfg.tau))
        try:
            direction, cg_k, _ = cg_solve(
                lambda v: apply_newton_operator(jd, v), -grad, cg_tol,
                cfg.max_cg, precond)
            f0 = eval_subproblem(x, sp)
            step, _m = line_search(sp, x, direction, grad, cfg, f0)
        except (LineSearchFailure, CgBreakdown) as exc:
            raise type(exc)(f"newton iteration {stats.iterations}: {exc}") from exc
        x = sym(x + step * direction)
        stats.cg_iters.append(cg_k)
        stats.step_sizes.append(step)
