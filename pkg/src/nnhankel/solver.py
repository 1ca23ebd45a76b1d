"""Dense convex solvers for the two correction problems.

Both problems share a real linear system ``A z ~ b`` and simple bounds
``z >= lower``:

* exact stage: ``min sum(w * z**2)`` s.t. ``A z = b``, ``z >= lower``
* residual stage: ``min ||A z - b||_2`` s.t. ``z >= lower``

The residual stage is solved as a nonnegative least-squares problem in the
shifted variable ``y = z - lower`` (Lawson-Hanson active set). The exact
stage is a strictly convex QP solved by a primal active-set method working
in the scaled variable ``u = sqrt(w) * z``.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, Infeasible, MaxIterations, TooLarge

__all__ = [
    "SolverConfig",
    "KktReport",
    "RealifiedSystem",
    "OracleResult",
    "nnls",
    "check_feasibility",
    "solve_stage_a",
    "solve_stage_b",
    "kkt_verify",
    "enumerate_active_set_oracle",
]

EPS = np.finfo(float).eps
# relative singular-value cutoff for rank decisions in the QP subproblems
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    tol_feas: float = 1e-8
    tol_kkt: float = 1e-8
    max_iter: int | None = None
    tiebreak_epsilon: float = 1e-10

    def __post_init__(self):
        if not (self.tol_feas > 0 and self.tol_kkt > 0):
            raise ValueError("tolerances must be strictly positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tiebreak_epsilon < 0:
            raise ValueError("tiebreak_epsilon must be nonnegative")

    def iterations_for(self, p):
        return self.max_iter if self.max_iter is not None else 50 * p


@dataclass(frozen=True)
class KktReport:
    """First-order optimality diagnostics.

    Residuals are scaled to be dimensionless (see :func:`kkt_verify`).
    """

    equality_residual: float
    bound_violation: float
    stationarity_residual: float
    complementarity_residual: float
    iterations: int = 0

    def max_residual(self):
        return max(
            self.equality_residual,
            self.bound_violation,
            self.stationarity_residual,
            self.complementarity_residual,
        )

    def certified(self, tol=1e-8):
        return self.max_residual() <= tol

    def as_dict(self):
        return {
            "equality_residual": self.equality_residual,
            "bound_violation": self.bound_violation,
            "stationarity_residual": self.stationarity_residual,
            "complementarity_residual": self.complementarity_residual,
            "iterations": self.iterations,
        }


@dataclass(frozen=True, eq=False)
class RealifiedSystem:
    """Real form of the complex constraint ``C z = r`` plus bounds ``z >= lower``."""

    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        lower = np.asarray(self.lower, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[0] != b.size or A.shape[1] != lower.size:
            raise DimensionMismatch(
                f"A {A.shape}, b {b.shape} and lower {lower.shape} are inconsistent"
            )
        if A.shape[1] < 1:
            raise DimensionMismatch("system needs at least one unknown")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lower", lower)

    @property
    def shape(self):
        return self.A.shape

    def residual(self, z):
        return float(np.linalg.norm(self.A @ z - self.b))

    def feasibility_threshold(self, cfg):
        return cfg.tol_feas * max(1.0, float(np.linalg.norm(self.b)))


# -- nonnegative least squares ----------------------------------------------


def nnls(A, b, cfg=None):
    """Solve ``min ||A y - b||_2`` subject to ``y >= 0``.

    Lawson-Hanson active-set method. The iteration budget counts inner
    least-squares solves.

    Returns
    -------
    y : ndarray
        Minimizer, exactly zero on the active set.
    report : KktReport
        ``equality_residual`` is 0 (no equality constraints); stationarity
        and complementarity are measured on ``g = A^T (A y - b)``.
    """
    cfg = cfg or SolverConfig()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[0] != b.size:
        raise DimensionMismatch(f"A {A.shape} incompatible with b {b.shape}")
    m, p = A.shape
    if p < 1:
        raise DimensionMismatch("A must have at least one column")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("nnls input must be finite")

    max_iter = cfg.iterations_for(p)
    tol = 10 * EPS * max(m, p) * max(1.0, np.abs(A).max(initial=0.0)) * max(
        1.0, np.abs(b).max(initial=0.0)
    )

    y = np.zeros(p)
    passive = np.zeros(p, dtype=bool)
    # columns whose entry was rejected by the subproblem; cleared on progress
    skipped = np.zeros(p, dtype=bool)
    it = 0
    while True:
        w = A.T @ (b - A @ y)
        cand = ~passive & ~skipped & (w > tol)
        if not cand.any():
            break
        j = int(np.argmax(np.where(cand, w, -np.inf)))
        passive[j] = True
        first = True
        while True:
            it += 1
            if it > max_iter:
                raise MaxIterations("nnls", max_iter)
            s = np.zeros(p)
            s[passive] = linalg.lstsq(A[:, passive], b, lapack_driver="gelsy")[0]
            if first and s[j] <= 0:
                # numerically useless column; Lawson-Hanson sets w_j = 0
                passive[j] = False
                skipped[j] = True
                break
            first = False
            bad = passive & (s <= 0)
            if not bad.any():
                y = s
                skipped[:] = False
                break
            alpha = np.min(y[bad] / (y[bad] - s[bad]))
            y = y + alpha * (s - y)
            passive &= y > tol
            y[~passive] = 0.0

    report = _nnls_report(A, b, y, it)
    return y, report


def _nnls_report(A, b, y, iterations):
    g = A.T @ (A @ y - b)
    scale = max(1.0, float(np.abs(A.T @ b).max(initial=0.0)))
    free = y > 0
    stat = float(np.abs(g[free]).max(initial=0.0)) / scale
    comp = float(np.maximum(-g[~free], 0.0).max(initial=0.0)) / scale
    viol = float(np.maximum(-y, 0.0).max(initial=0.0))
    return KktReport(0.0, viol, stat, comp, iterations)


# -- minimum weighted norm QP ------------------------------------------------


def _row_basis(B, f):
    """Orthonormal-row equivalent of ``B u = f`` dropping dependent rows."""
    if B.shape[0] == 0:
        return B, f
    U, s, Vt = linalg.svd(B, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((0, B.shape[1])), np.zeros(0)
    r = int(np.sum(s > PIVOT_TOL * s[0]))
    return Vt[:r], (U[:, :r].T @ f) / s[:r]


def _min_norm_qp(A, b, weights, lower, z0, cfg):
    """``min sum(weights * z**2)`` s.t. ``A z = b``, ``z >= lower``, from a feasible start.

    Works on the scaled variable ``u = sqrt(w) z``. Each pass first solves
    the equality subproblem with the bounds at ``lb`` fixed and takes the
    longest feasible step toward it. At a subproblem optimum the bound
    multipliers come from a small NNLS: a zero residual certifies the KKT
    conditions, otherwise the residual is a strict descent direction that
    keeps ``A z = b`` and the active bounds. This avoids the cycling of
    single-swap active-set rules at degenerate vertices.

    Returns ``(z, active_mask, iterations)``.
    """
    sw = np.sqrt(np.asarray(weights, dtype=float))
    G, h = _row_basis(A / sw, b)
    p = A.shape[1]
    lb = sw * lower
    u = np.maximum(sw * z0, lb)
    # orthonormal basis of the directions that keep G u = h
    N = linalg.null_space(G, rcond=PIVOT_TOL) if G.shape[0] else np.eye(p)

    max_iter = cfg.iterations_for(p)
    scale = max(1.0, float(np.abs(u).max(initial=0.0)))
    tol_step = 1e-13 * scale
    for it in range(1, max_iter + 1):
        active = u <= lb + tol_step
        u[active] = lb[active]
        free = ~active
        if N.shape[1] == 0:
            break

        target = lb.copy()
        if free.any():
            rhs = h - G[:, active] @ lb[active]
            target[free] = linalg.lstsq(G[:, free], rhs, lapack_driver="gelsd",
                                        cond=PIVOT_TOL)[0]
        obj = u @ u
        if np.abs(target - u).max(initial=0.0) > tol_step:
            moved = _advance(u, target - u, lb, free, tol_step)
            if moved @ moved < obj:
                u = moved
                continue

        # optimality test: u - sum(nu_i e_i) must be orthogonal to null(G)
        if active.any():
            nu, _ = nnls(N[active].T, N.T @ u, cfg)
            resid = N.T @ u - N[active].T @ nu
        else:
            resid = N.T @ u
        d = -(N @ resid)
        if np.linalg.norm(d) <= cfg.tol_kkt * scale:
            break
        moved = _advance(u, d, lb, free, tol_step)
        if not moved @ moved < obj:
            break  # stationary to working precision
        u = moved
    else:
        raise MaxIterations("stage A active-set QP", max_iter)

    # polish: the subproblem solution on the final face is exact where the
    # descent steps leave rounding noise
    active = u <= lb + tol_step
    free = ~active
    if free.any():
        polished = lb.copy()
        polished[free] = linalg.lstsq(G[:, free], h - G[:, active] @ lb[active],
                                      lapack_driver="gelsd", cond=PIVOT_TOL)[0]
        if np.all(polished[free] >= lb[free] - tol_step):
            u = polished
    # unscaling can land one ulp below a bound
    z = np.maximum(u / sw, lower)
    z[active] = lower[active]
    return z, active, it


def _advance(u, d, lb, free, tol_step):
    """Exact line search for ``||u||^2`` along ``d``, cut at the first bound."""
    dd = d @ d
    t = min(1.0, max(0.0, -(u @ d) / dd)) if dd > 0 else 0.0
    hit = free & (d < -tol_step)
    if hit.any():
        t = min(t, float(np.min((lb[hit] - u[hit]) / d[hit])))
    return np.maximum(u + max(t, 0.0) * d, lb)


# -- stage drivers -------------------------------------------------------------


def check_feasibility(sys, cfg=None):
    """Decide whether ``A z = b`` has a solution with ``z >= lower``.

    Computes ``min ||A z - b||`` over the bounds through the shifted NNLS and
    compares it with ``tol_feas * max(1, ||b||)``.

    Returns
    -------
    feasible : bool
    min_residual : float
    witness : ndarray
        Bound-feasible point attaining ``min_residual``.
    """
    cfg = cfg or SolverConfig()
    y, report = nnls(sys.A, sys.b - sys.A @ sys.lower, cfg)
    z = y + sys.lower
    z[y == 0] = sys.lower[y == 0]
    rho = sys.residual(z)
    feasible = rho <= sys.feasibility_threshold(cfg)
    return feasible, rho, z, report.iterations


def solve_stage_a(sys, w, cfg=None, start=None):
    """Minimum weighted-norm exact correction.

    Parameters
    ----------
    sys : RealifiedSystem
    w : array_like
        Positive anti-diagonal weights.
    start : array_like, optional
        Bound-feasible point with ``A z ~ b``; computed by
        :func:`check_feasibility` when omitted.

    Raises
    ------
    Infeasible
        When no bound-feasible ``z`` satisfies ``A z = b``.
    """
    cfg = cfg or SolverConfig()
    w = np.asarray(w, dtype=float)
    if w.shape != sys.lower.shape:
        raise DimensionMismatch("weights do not match the number of unknowns")
    iters = 0
    if start is None:
        feasible, rho, start, iters = check_feasibility(sys, cfg)
        if not feasible:
            raise Infeasible(rho, start)
    z, _, qp_iters = _min_norm_qp(sys.A, sys.b, w, sys.lower, np.asarray(start, float), cfg)
    report = kkt_verify(sys, w, z, "A")
    return z, _with_iterations(report, iters + qp_iters)


def solve_stage_b(sys, w, cfg=None, tiebreak=True, witness=None):
    """Residual-minimizing correction under the bounds.

    Returns ``(z, min_residual, report)``. With ``tiebreak`` the minimizer
    of smallest weighted norm is reported: every minimizer shares the fitted
    vector ``A z``, so this is the exact-stage QP with right-hand side
    ``A @ witness``.
    """
    cfg = cfg or SolverConfig()
    w = np.asarray(w, dtype=float)
    iters = 0
    if witness is None:
        _, rho, witness, iters = check_feasibility(sys, cfg)
    else:
        rho = sys.residual(witness)
    z = np.asarray(witness, dtype=float)
    if tiebreak:
        fitted = sys.A @ z
        zt, _, qp_iters = _min_norm_qp(sys.A, fitted, w, sys.lower, z, cfg)
        iters += qp_iters
        slack = rho * cfg.tiebreak_epsilon + 100 * EPS * max(1.0, float(np.linalg.norm(sys.b)))
        if sys.residual(zt) <= rho + slack and np.all(zt >= sys.lower):
            z = zt
    report = kkt_verify(sys, w, z, "B")
    return z, sys.residual(z), _with_iterations(report, iters)


def _with_iterations(report, iterations):
    return KktReport(
        report.equality_residual,
        report.bound_violation,
        report.stationarity_residual,
        report.complementarity_residual,
        int(iterations),
    )


def kkt_verify(sys, w, z, stage, active_tol=1e-9):
    """Optimality diagnostics for a candidate ``z``.

    For stage ``"A"`` the multipliers of ``W z = A^T mu + nu`` are fitted on
    the inactive coordinates; for stage ``"B"`` the bound multipliers are
    the gradient ``A^T (A z - b)``. A bound counts as active when
    ``z - lower <= active_tol * max(1, |lower|)``.

    Scaling: equality residual by ``max(1, ||b||)``, stationarity and
    complementarity by the largest magnitude among the terms entering the
    stationarity equation (floored at 1). Bound violation is absolute.
    Stage ``"B"`` has no equality constraints, so its equality residual is 0.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    p = sys.lower.size
    if z.size != p or w.size != p:
        raise DimensionMismatch(f"expected vectors of length {p}")
    if stage not in ("A", "B"):
        raise ValueError(f"stage must be 'A' or 'B', got {stage!r}")

    gap = z - sys.lower
    viol = float(np.maximum(-gap, 0.0).max(initial=0.0))
    active = gap <= active_tol * np.maximum(1.0, np.abs(sys.lower))
    free = ~active

    if stage == "A":
        bnorm = max(1.0, float(np.linalg.norm(sys.b)))
        eq = float(np.linalg.norm(sys.A @ z - sys.b)) / bnorm
        Wz = w * z
        if free.any():
            mu = linalg.lstsq(sys.A[:, free].T, Wz[free], lapack_driver="gelsd")[0]
        else:
            mu = np.zeros(sys.A.shape[0])
        AtMu = sys.A.T @ mu
        nu = Wz - AtMu
        scale = max(1.0, float(np.abs(Wz).max(initial=0.0)), float(np.abs(AtMu).max(initial=0.0)))
    else:
        eq = 0.0
        Atb = sys.A.T @ sys.b
        AtAz = sys.A.T @ (sys.A @ z)
        nu = AtAz - Atb
        scale = max(1.0, float(np.abs(Atb).max(initial=0.0)), float(np.abs(AtAz).max(initial=0.0)))

    stat = float(np.abs(nu[free]).max(initial=0.0)) / scale
    # dual sign on the active bounds, plus nu * slack there (nonzero only
    # within active_tol of the bound)
    dual = float(np.maximum(-nu[active], 0.0).max(initial=0.0))
    prod = float(np.abs(nu[active] * np.maximum(gap[active], 0.0)).max(initial=0.0))
    return KktReport(eq, viol, stat, max(dual, prod) / scale)


# -- brute-force oracle ----------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    """Optimal values found by exhaustive active-set enumeration.

    ``stage_a_objective`` is ``min sum(w z^2)`` (``inf`` when the exact
    problem is infeasible); ``stage_b_objective`` is ``min ||A z - b||^2``.
    """

    stage_a_objective: float
    stage_b_objective: float
    stage_a_z: np.ndarray | None = field(default=None, repr=False)
    stage_b_z: np.ndarray | None = field(default=None, repr=False)

    @property
    def feasible(self):
        return np.isfinite(self.stage_a_objective)


def enumerate_active_set_oracle(sys, w, tol_feas=1e-9, max_unknowns=9):
    """Solve both problems by trying every set of active bounds.

    For each subset the bound-fixed coordinates are pinned and the remaining
    equality-constrained quadratic is solved in closed form (minimum-norm
    least squares). Candidates violating a remaining bound, or, for the exact
    stage, the equality constraint, are discarded. The optimum of each
    convex problem is attained on some face where the reduced solution is
    unique, so the best surviving candidate is the global optimum.
    """
    A, b, lower = sys.A, sys.b, sys.lower
    w = np.asarray(w, dtype=float)
    p = lower.size
    if p > max_unknowns:
        raise TooLarge(f"enumeration limited to {max_unknowns} unknowns, got {p}")
    sw = np.sqrt(w)
    bnorm = max(1.0, float(np.linalg.norm(b)))
    feas_tol = 1e-9 * max(1.0, float(np.abs(lower).max(initial=0.0)))

    best_a, best_za = np.inf, None
    best_b, best_zb = np.inf, None
    for mask in itertools.product((False, True), repeat=p):
        act = np.array(mask)
        free = ~act
        z = lower.copy()
        rhs = b - A[:, act] @ lower[act]
        if free.any():
            # residual stage: plain least squares on the free columns
            z[free] = np.linalg.lstsq(A[:, free], rhs, rcond=None)[0]
        if np.all(z[free] >= lower[free] - feas_tol):
            val = float(np.sum((A @ z - b) ** 2))
            if val < best_b:
                best_b, best_zb = val, z.copy()

        za = lower.copy()
        if free.any():
            u = np.linalg.lstsq(A[:, free] / sw[free], rhs, rcond=None)[0]
            za[free] = u / sw[free]
        if np.linalg.norm(A @ za - b) > tol_feas * bnorm:
            continue
        if np.all(za[free] >= lower[free] - feas_tol):
            val = float(np.sum(w * za**2))
            if val < best_a:
                best_a, best_za = val, za.copy()

    return OracleResult(best_a, best_b, best_za, best_zb)
