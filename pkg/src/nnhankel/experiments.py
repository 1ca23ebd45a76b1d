"""Seeded random instances, size sweeps and CSV output for the timing study.

Every trial is addressed by a 64-bit seed derived from
``(base_seed, n, trial)``; the instance is a pure function of that seed, so
sweeps are reproducible and independent of how trials are scheduled.
"""

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput
from .hankel import Eigenpair, HankelGenerator, weighted_frobenius_norm, antidiag_weights
from .pipeline import STAGE_A, STAGE_B, nearest_nonneg_hankel
from .solver import SolverConfig

log = logging.getLogger(__name__)

PLANTED = "planted"
ARBITRARY = "arbitrary"
MODES = (PLANTED, ARBITRARY)

# how "arbitrary" eigenpairs are drawn
ARBITRARY_KINDS = ("complex", "real", "perron")

CSV_HEADER = ["n", "trial", "mode", "stage", "eig_residual", "frob_norm", "wall_seconds", "seed"]

# residual cluster boundaries
CLUSTER_SPLIT = 1e-6
GAP = (1e-6, 1e-2)

# Philox streams within one trial seed
_STREAM_HANKEL = 0
_STREAM_PAIR = 1
_STREAM_PLANT = 2


def _rng(seed, stream):
    # Philox is counter based; the 128-bit key holds (stream, seed)
    return np.random.Generator(np.random.Philox(key=(stream << 64) | (int(seed) & (2**64 - 1))))


def trial_seed(base_seed, n, trial):
    """Mix ``(base_seed, n, trial)`` into one 64-bit seed via SeedSequence."""
    ss = np.random.SeedSequence([int(base_seed) & (2**64 - 1), int(n), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gen_random_hankel(n, seed):
    """Hankel generator with i.i.d. standard normal anti-diagonal values."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return HankelGenerator(_rng(seed, _STREAM_HANKEL).standard_normal(2 * n - 1))


def plant_nonneg_hankel(n, seed):
    """Nonnegative Hankel generator (``|N(0, 1)|`` entries) and one of its eigenpairs.

    The matrix is real symmetric, so the eigenpair is real; the eigenvector
    has unit 2-norm. Which eigenpair is used is drawn from the seed.
    """
    rng = _rng(seed, _STREAM_PLANT)
    c = np.abs(rng.standard_normal(2 * n - 1))
    g = HankelGenerator(c)
    vals, vecs = np.linalg.eigh(g.dense())
    k = int(rng.integers(n))
    x = vecs[:, k] / np.linalg.norm(vecs[:, k])
    return g, Eigenpair(vals[k], x)


def gen_candidate_eigenpair(g, mode, seed, kind="complex"):
    """Candidate eigenpair for the instance ``g``.

    ``planted`` returns a true eigenpair of a random nonnegative Hankel
    matrix, so the exact stage is feasible for any ``g``. ``arbitrary``
    draws an unrelated pair; ``kind`` selects the distribution:

    ``complex``
        ``lam`` and the entries of ``x`` standard complex normal.
    ``real``
        ``lam`` and ``x`` real standard normal.
    ``perron``
        ``x > 0`` and ``lam < 0`` (always infeasible).

    ``x`` is normalized to unit 2-norm in every case.
    """
    n = g.n
    if mode == PLANTED:
        return plant_nonneg_hankel(n, seed)[1]
    if mode != ARBITRARY:
        raise ValueError(f"unknown mode {mode!r}")
    rng = _rng(seed, _STREAM_PAIR)
    if kind == "complex":
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lam = complex(rng.standard_normal(), rng.standard_normal())
    elif kind == "real":
        x = rng.standard_normal(n)
        lam = rng.standard_normal()
    elif kind == "perron":
        x = np.abs(rng.standard_normal(n)) + 0.1
        lam = -abs(rng.standard_normal()) - 0.1
    else:
        raise ValueError(f"unknown arbitrary kind {kind!r}")
    return Eigenpair(lam, x / np.linalg.norm(x))


@dataclass(frozen=True)
class TrialRecord:
    n: int
    trial: int
    mode: str
    stage: str
    eig_residual: float
    frob_norm: float
    wall_seconds: float
    seed: int
    planted_norm: float = field(default=float("nan"), compare=False)

    def row(self):
        return [
            str(self.n),
            str(self.trial),
            self.mode,
            self.stage,
            format(self.eig_residual, ".17g"),
            format(self.frob_norm, ".17g"),
            format(self.wall_seconds, ".17g"),
            str(self.seed),
        ]

    def key(self):
        """All fields except the timing."""
        return (self.n, self.trial, self.mode, self.stage, self.eig_residual, self.frob_norm, self.seed)


@dataclass(frozen=True)
class SweepConfig:
    sizes: tuple = tuple(range(10, 101, 10))
    trials_per_size: int = 10
    base_seed: int = 0
    planted_fraction: float = 0.5
    arbitrary_kind: str = "complex"
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise ValueError("sizes must be nonempty")
        if any(s < 1 for s in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sizes must be positive and strictly increasing")
        if self.trials_per_size < 1:
            raise ValueError("trials_per_size must be >= 1")
        if not 0.0 <= self.planted_fraction <= 1.0:
            raise ValueError("planted_fraction must lie in [0, 1]")
        if self.arbitrary_kind not in ARBITRARY_KINDS:
            raise ValueError(f"arbitrary_kind must be one of {ARBITRARY_KINDS}")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "sizes", sizes)

    def mode_for(self, trial):
        # spread planted trials evenly so each size gets round(f * trials)
        f = self.planted_fraction
        planted = np.floor((trial + 1) * f + 1e-12) > np.floor(trial * f + 1e-12)
        return PLANTED if planted else ARBITRARY

    def tasks(self):
        for n in self.sizes:
            for t in range(self.trials_per_size):
                yield n, t, self.mode_for(t), trial_seed(self.base_seed, n, t)


def make_instance(n, mode, seed, kind="complex"):
    """Return ``(H generator, eigenpair, planted shift norm)`` for one trial.

    For planted trials the last value is ``||H_planted - H||_F``, an upper
    bound on the optimal correction; it is NaN otherwise.
    """
    g = gen_random_hankel(n, seed)
    if mode == PLANTED:
        g_hat, pair = plant_nonneg_hankel(n, seed)
        shift = weighted_frobenius_norm(g_hat.c - g.c, antidiag_weights(n))
    else:
        pair = gen_candidate_eigenpair(g, mode, seed, kind)
        shift = float("nan")
    return g, pair, shift


def run_trial(n, trial, mode, seed, kind="complex", solver=None):
    g, pair, shift = make_instance(n, mode, seed, kind)
    t0 = time.perf_counter()
    res = nearest_nonneg_hankel(g, pair, solver)
    wall = time.perf_counter() - t0
    return TrialRecord(n, trial, mode, res.stage, res.eig_residual, res.frob_norm, wall, seed, shift)


def _run_task(args):
    return run_trial(*args)


def iter_sweep(cfg, workers=1):
    """Yield trial records in (size, trial) order."""
    tasks = [(n, t, mode, seed, cfg.arbitrary_kind, cfg.solver) for n, t, mode, seed in cfg.tasks()]
    if workers <= 1:
        for task in tasks:
            yield _run_task(task)
        return
    with ProcessPoolExecutor(max_workers=workers) as ex:
        yield from ex.map(_run_task, tasks)


def run_sweep(cfg, workers=1):
    """Run every (size, trial) of ``cfg`` and return the records."""
    records = list(iter_sweep(cfg, workers))
    for rec in records:
        lo, hi = GAP
        if lo < rec.eig_residual < hi:
            log.warning("n=%d trial=%d residual %.3e falls inside the gap", rec.n, rec.trial, rec.eig_residual)
    return records


def csv_writer(fh):
    """CSV writer on ``fh`` with the header row already written."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    return w


def write_record(writer, fh, rec):
    # flushed per row so an aborted sweep leaves a usable partial file
    writer.writerow(rec.row())
    fh.flush()


def write_csv(records, path_or_file):
    """Write records with the fixed header; floats use 17 significant digits."""
    if hasattr(path_or_file, "write"):
        w = csv_writer(path_or_file)
        for rec in records:
            write_record(w, path_or_file, rec)
        return
    with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
        write_csv(records, fh)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        TrialRecord(
            int(r["n"]), int(r["trial"]), r["mode"], r["stage"],
            float(r["eig_residual"]), float(r["frob_norm"]), float(r["wall_seconds"]), int(r["seed"]),
        )
        for r in rows
    ]


@dataclass(frozen=True)
class SizeSummary:
    n: int
    count_a: int
    count_b: int
    residual_quantiles: tuple  # min, 25%, median, 75%, max
    mean_seconds: float
    max_seconds: float


@dataclass(frozen=True)
class Cluster:
    label: str
    count: int
    residual_min: float
    residual_max: float


@dataclass(frozen=True)
class Summary:
    sizes: tuple
    clusters: tuple
    gap_violations: tuple

    def both_stages_everywhere(self):
        return all(s.count_a > 0 and s.count_b > 0 for s in self.sizes)

    def table(self):
        lines = [f"{'n':>5} {'A':>4} {'B':>4} {'res_min':>11} {'res_med':>11} {'res_max':>11} {'t_mean[s]':>10} {'t_max[s]':>10}"]
        for s in self.sizes:
            q = s.residual_quantiles
            lines.append(
                f"{s.n:>5} {s.count_a:>4} {s.count_b:>4} {q[0]:>11.3e} {q[2]:>11.3e} {q[4]:>11.3e}"
                f" {s.mean_seconds:>10.4f} {s.max_seconds:>10.4f}"
            )
        lines.append("")
        for c in self.clusters:
            if c.count:
                lines.append(f"cluster {c.label}: {c.count} records, residual in [{c.residual_min:.3e}, {c.residual_max:.3e}]")
            else:
                lines.append(f"cluster {c.label}: empty")
        lines.append(f"records inside gap {GAP}: {len(self.gap_violations)}")
        return "\n".join(lines)


def summarize(records):
    """Per-size stage counts, residual quantiles and timings, plus residual clusters.

    Records split into a small-residual cluster (``<= 1e-6``) and a large one.
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records to summarize")
    sizes = []
    for n in sorted({r.n for r in records}):
        rs = [r for r in records if r.n == n]
        res = np.array([r.eig_residual for r in rs])
        secs = np.array([r.wall_seconds for r in rs])
        sizes.append(
            SizeSummary(
                n,
                sum(r.stage == STAGE_A for r in rs),
                sum(r.stage == STAGE_B for r in rs),
                tuple(float(v) for v in np.quantile(res, [0, 0.25, 0.5, 0.75, 1])),
                float(secs.mean()),
                float(secs.max()),
            )
        )
    res = np.array([r.eig_residual for r in records])
    clusters = []
    for label, mask in (("small", res <= CLUSTER_SPLIT), ("large", res > CLUSTER_SPLIT)):
        vals = res[mask]
        clusters.append(
            Cluster(label, int(mask.sum()),
                    float(vals.min()) if vals.size else float("nan"),
                    float(vals.max()) if vals.size else float("nan"))
        )
    gap = tuple(r for r in records if GAP[0] < r.eig_residual < GAP[1])
    return Summary(tuple(sizes), tuple(clusters), gap)
