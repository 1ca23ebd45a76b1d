"""Two-stage nearest nonnegative Hankel correction for a prescribed eigenpair."""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidEigenpair, NotHankel
from .hankel import (
    Eigenpair,
    HankelGenerator,
    antidiag_weights,
    eigmap_matrix,
    eigpair_residual,
    generator_of,
    hankel_from_generator,
    weighted_frobenius_norm,
)
from .solver import (
    KktReport,
    RealifiedSystem,
    SolverConfig,
    check_feasibility,
    solve_stage_a,
    solve_stage_b,
)

__all__ = [
    "STAGE_A",
    "STAGE_B",
    "SolveResult",
    "VerificationReport",
    "realify",
    "build_system",
    "nearest_nonneg_hankel",
    "verify_solution",
]

STAGE_A = "A"  # exact eigenpair, minimum-norm correction
STAGE_B = "B"  # residual minimization

# imaginary parts at or below this are treated as absent
IMAG_CUTOFF = 1e-15


@dataclass(frozen=True, eq=False)
class SolveResult:
    stage: str
    delta_generator: np.ndarray
    corrected_generator: np.ndarray
    frob_norm: float
    eig_residual: float
    kkt: KktReport
    wall_seconds: float
    min_residual: float = field(default=0.0)

    @property
    def n(self):
        return (self.delta_generator.size + 1) // 2

    def corrected(self):
        return hankel_from_generator(self.corrected_generator)

    def delta(self):
        return hankel_from_generator(self.delta_generator)


def realify(x, r, c):
    """Stack real and imaginary parts of ``C z = r`` into a real system.

    The imaginary block is dropped when both ``C`` and ``r`` are real to
    within ``IMAG_CUTOFF``. Bounds are ``z >= -c``: since ``H`` is Hankel,
    ``H + Delta H >= 0`` holds entrywise iff each anti-diagonal value does.
    """
    x = np.asarray(x, dtype=complex)
    r = np.asarray(r, dtype=complex)
    c = c.c if isinstance(c, HankelGenerator) else np.asarray(c, dtype=float)
    n = x.size
    if r.shape != (n,) or c.shape != (2 * n - 1,):
        raise DimensionMismatch("x, r and the generator have inconsistent lengths")
    C = eigmap_matrix(x)
    imag = max(np.abs(C.imag).max(initial=0.0), np.abs(r.imag).max(initial=0.0))
    if imag <= IMAG_CUTOFF:
        A, b = C.real, r.real
    else:
        A = np.vstack([C.real, C.imag])
        b = np.concatenate([r.real, r.imag])
    return RealifiedSystem(A, b, -c)


def build_system(g, pair):
    r = eigpair_residual(g, pair)
    return realify(pair.x, r, g), r


def _as_pair(pair):
    if not isinstance(pair, Eigenpair):
        raise TypeError("expected an Eigenpair")
    if not np.any(pair.x != 0):
        raise InvalidEigenpair("eigenvector must be nonzero")
    return pair


def nearest_nonneg_hankel(g, pair, cfg=None, tiebreak=True):
    """Nearest nonnegative Hankel matrix realizing (or best fitting) an eigenpair.

    Stage A is attempted first: if some nonnegative Hankel ``H + Delta H``
    has ``(lam, x)`` as an exact eigenpair, the one with the smallest
    ``||Delta H||_F`` is returned. Otherwise stage B returns a nonnegative
    Hankel matrix minimizing ``||(H + Delta H) x - lam x||_2``; with
    ``tiebreak`` the minimizer of smallest ``||Delta H||_F`` is chosen.

    Parameters
    ----------
    g : HankelGenerator
    pair : Eigenpair
    cfg : SolverConfig, optional

    Returns
    -------
    SolveResult
    """
    cfg = cfg or SolverConfig()
    pair = _as_pair(pair)
    if pair.n != g.n:
        raise DimensionMismatch(f"eigenvector length {pair.n} != n = {g.n}")
    t0 = time.perf_counter()

    sys, r = build_system(g, pair)
    w = antidiag_weights(g.n)
    feasible, rho, witness, iters = check_feasibility(sys, cfg)
    if feasible:
        z, kkt = solve_stage_a(sys, w, cfg, start=witness)
        stage = STAGE_A
    else:
        z, _, kkt = solve_stage_b(sys, w, cfg, tiebreak=tiebreak, witness=witness)
        stage = STAGE_B
    kkt = KktReport(
        kkt.equality_residual,
        kkt.bound_violation,
        kkt.stationarity_residual,
        kkt.complementarity_residual,
        kkt.iterations + iters,
    )

    corrected = g.c + z
    eig_residual = float(np.linalg.norm(eigpair_residual(corrected, pair)))
    wall = time.perf_counter() - t0
    return SolveResult(
        stage=stage,
        delta_generator=z,
        corrected_generator=corrected,
        frob_norm=weighted_frobenius_norm(z, w),
        eig_residual=eig_residual,
        kkt=kkt,
        wall_seconds=wall,
        min_residual=rho,
    )


@dataclass(frozen=True)
class VerificationReport:
    min_entry: float
    hankel_exact: bool
    eig_residual: float
    frob_norm: float
    failures: tuple = ()

    @property
    def ok(self):
        return not self.failures

    def lines(self):
        yield f"min entry of corrected matrix: {self.min_entry:.6e}"
        yield f"Hankel structure exact:       {self.hankel_exact}"
        yield f"recomputed eigen residual:    {self.eig_residual:.6e}"
        yield f"recomputed ||Delta H||_F:     {self.frob_norm:.6e}"
        for f in self.failures:
            yield f"FAIL: {f}"
        yield "verification passed" if self.ok else "verification FAILED"


def _mismatch(a, b, rel):
    return abs(a - b) > rel * max(1.0, abs(a), abs(b))


def verify_solution(g, result, pair, cfg=None, rel=1e-10):
    """Recompute a result's claims from dense matrices.

    Builds ``H``, ``Delta H`` and ``H_hat`` densely, checks that ``H_hat``
    equals ``H + Delta H``, is Hankel and nonnegative, and recomputes the
    eigen residual and ``||Delta H||_F``. Any mismatch beyond ``rel``
    (relative to ``max(1, |value|)``) is recorded in ``failures``.
    """
    cfg = cfg or SolverConfig()
    failures = []
    n = g.n
    if result.delta_generator.shape != (2 * n - 1,) or result.corrected_generator.shape != (2 * n - 1,):
        raise DimensionMismatch("result does not match the instance dimension")

    H = hankel_from_generator(g)
    dH = hankel_from_generator(result.delta_generator)
    H_hat = hankel_from_generator(result.corrected_generator)
    scale = max(1.0, float(np.abs(H).max()), float(np.abs(dH).max()))

    if np.abs(H + dH - H_hat).max() > rel * scale:
        failures.append("corrected matrix != H + Delta H")
    try:
        generator_of(dH, 0.0)
        generator_of(H_hat, 0.0)
        hankel_exact = True
    except NotHankel:
        hankel_exact = False
        failures.append("corrected matrix is not Hankel")

    min_entry = float(H_hat.min())
    if min_entry < -rel * scale:
        failures.append(f"negative entry {min_entry:.3e}")

    res = float(np.linalg.norm(H_hat @ pair.x - pair.lam * pair.x))
    fro = float(np.linalg.norm(dH, "fro"))
    if _mismatch(res, result.eig_residual, rel):
        failures.append(f"eig_residual {result.eig_residual:.12g} != recomputed {res:.12g}")
    if _mismatch(fro, result.frob_norm, rel):
        failures.append(f"frob_norm {result.frob_norm:.12g} != recomputed {fro:.12g}")
    if result.stage not in (STAGE_A, STAGE_B):
        failures.append(f"unknown stage {result.stage!r}")
    elif result.stage == STAGE_A:
        r = np.linalg.norm(H @ pair.x - pair.lam * pair.x)
        if res > cfg.tol_feas * max(1.0, r):
            failures.append("stage A result does not realize the eigenpair")

    return VerificationReport(min_entry, hankel_exact, res, fro, tuple(failures))
