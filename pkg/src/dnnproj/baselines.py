"""First-order comparison solvers for the DNN projection problem.

Three methods share the projection-based iteration cost (one
eigendecomposition per step) and the same relative-KKT termination
metric:

* ``apg_solve``     -- accelerated proximal gradient on the reduced dual
                       (the PSD multiplier alone, the orthant multiplier
                       eliminated in closed form);
* ``admm_solve``    -- alternating direction method of multipliers on a
                       two-block consensus split of the primal;
* ``dykstra_solve`` -- Dykstra's alternating projection scheme for the
                       intersection of the PSD cone and the orthant.

All return ``(KktPoint, SolveReport)``.  The relative KKT residual is
evaluated every ``check_every`` iterations (it needs extra
eigendecompositions), so reported iteration counts are multiples of the
check interval.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_sym_matrix, fro, proj_nonneg, proj_psd
from .reporting import IterationRecord, SolveReport, Timer
from .residuals import KktPoint, diagnostics, relative_kkt

DEFAULT_MAX_ITER = 20000
DEFAULT_CHECK_EVERY = 10


def _finish(solver, point, records, iters, converged, timer, config):
    return SolveReport(
        solver=solver,
        alm_iters=iters,
        newton_iters_total=0,
        warmstart_iters=0,
        cg_iters_total=0,
        eta_final=records[-1].eta if records else float("nan"),
        converged=converged,
        wall_time=timer.elapsed(),
        diagnostics=diagnostics(point),
        per_iteration=records,
        config=config,
    )


def _should_check(k, max_iter, check_every):
    return k == 1 or k % check_every == 0 or k == max_iter


def apg_solve(g, tol=1e-12, max_iter=DEFAULT_MAX_ITER,
              check_every=DEFAULT_CHECK_EVERY):
    """Accelerated proximal gradient on the PSD-multiplier dual problem.

    Minimizes ``phi(S) = 0.5*||P_nonneg(S + G)||^2`` over PSD ``S`` with
    the standard extrapolated proximal-gradient recursion (unit step; the
    gradient of phi is 1-Lipschitz).  The primal and the eliminated
    multiplier are recovered as ``X = P_nonneg(S + G)`` and
    ``Z = P_nonneg(-(S + G))``, which makes the affine and orthant parts
    of the KKT system hold exactly at every iterate.
    """
    g = as_sym_matrix(g, "g")
    timer = Timer()
    n = g.shape[0]
    s = np.zeros((n, n))
    s_ex = s
    t = 1.0
    records = []
    converged = False
    point = None
    for k in range(1, max_iter + 1):
        step_target = s_ex - proj_nonneg(s_ex + g)
        s_new = proj_psd(step_target)[0]
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        s_ex = s_new + ((t - 1.0) / t_new) * (s_new - s)
        s = s_new
        t = t_new
        if _should_check(k, max_iter, check_every):
            w = s + g
            x = proj_nonneg(w)
            z = proj_nonneg(-w)
            point = KktPoint(x=x, s=s, z=z, g=g)
            eta = relative_kkt(point)
            phi = 0.5 * fro(x) ** 2
            records.append(IterationRecord(eta=eta, iteration=k, value=phi))
            if eta <= tol:
                converged = True
                break
    report = _finish("apg", point, records, k, converged, timer,
                     {"tol": tol, "max_iter": max_iter,
                      "check_every": check_every})
    return point, report


@dataclass
class AdmmConfig:
    """Splitting weight, penalty and (over-relaxed) step length."""

    alpha_weight: float = 0.5
    sigma: float = 1.0
    tau_step: float = 1.618

    def __post_init__(self):
        if not 0 < self.alpha_weight < 1:
            raise ValueError("alpha_weight must lie in (0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.tau_step < (1 + math.sqrt(5)) / 2:
            raise ValueError("tau_step must lie in (0, (1+sqrt(5))/2)")


def admm_multipliers(x1, x2, w, g, cfg: AdmmConfig):
    """Multiplier recovery from the two block subproblems.

    By construction ``S + Z = alpha*X1 + (1-alpha)*X2 - G + sigma*(X1 - X2)``
    holds exactly at every iterate; at consensus it collapses to the KKT
    stationarity ``S + Z = X - G``.
    """
    a = cfg.alpha_weight
    s = a * (x1 - g) + w + cfg.sigma * (x1 - x2)
    z = (1.0 - a) * (x2 - g) - w
    return s, z


def admm_solve(g, cfg: AdmmConfig | None = None, tol=1e-12,
               max_iter=DEFAULT_MAX_ITER, check_every=DEFAULT_CHECK_EVERY):
    """Two-block ADMM: ``X1`` in the PSD cone, ``X2`` in the orthant,
    consensus constraint ``X1 = X2``.

    The objective weight ``alpha`` splits ``0.5*||X - G||^2`` between the
    blocks; both block updates are single projections.
    """
    g = as_sym_matrix(g, "g")
    cfg = cfg or AdmmConfig()
    timer = Timer()
    a, sg, tau = cfg.alpha_weight, cfg.sigma, cfg.tau_step
    x2 = proj_nonneg(g)
    w = np.zeros_like(g)
    records = []
    converged = False
    point = None
    for k in range(1, max_iter + 1):
        x1 = proj_psd((a * g + sg * x2 - w) / (a + sg))[0]
        x2 = proj_nonneg(((1.0 - a) * g + sg * x1 + w) / (1.0 - a + sg))
        w = w + tau * sg * (x1 - x2)
        if _should_check(k, max_iter, check_every):
            s, z = admm_multipliers(x1, x2, w, g, cfg)
            point = KktPoint(x=x2, s=s, z=z, g=g)
            eta = relative_kkt(point)
            records.append(IterationRecord(eta=eta, iteration=k, sigma=sg))
            if eta <= tol:
                converged = True
                break
    report = _finish("admm", point, records, k, converged, timer,
                     {"alpha_weight": a, "sigma": sg, "tau_step": tau,
                      "tol": tol, "max_iter": max_iter,
                      "check_every": check_every})
    return point, report


def dykstra_solve(g, tol=1e-12, max_iter=DEFAULT_MAX_ITER,
                  check_every=DEFAULT_CHECK_EVERY):
    """Dykstra's alternating projections onto PSD cone and orthant.

    Classical two-set recursion with correction terms ``p`` (PSD) and
    ``q`` (orthant); the identity ``x + p + q = G`` holds exactly at every
    sweep, so ``(x, -p, -q)`` always satisfies the affine KKT equation and
    both corrections are exact cone elements.
    """
    g = as_sym_matrix(g, "g")
    timer = Timer()
    x = g.copy()
    p = np.zeros_like(g)
    q = np.zeros_like(g)
    records = []
    converged = False
    point = None
    for k in range(1, max_iter + 1):
        y = proj_psd(x + p)[0]
        p = x + p - y
        x = proj_nonneg(y + q)
        q = y + q - x
        if _should_check(k, max_iter, check_every):
            point = KktPoint(x=x, s=-p, z=-q, g=g)
            eta = relative_kkt(point)
            records.append(IterationRecord(eta=eta, iteration=k))
            if eta <= tol:
                converged = True
                break
    report = _finish("dykstra", point, records, k, converged, timer,
                     {"tol": tol, "max_iter": max_iter,
                      "check_every": check_every})
    return point, report
