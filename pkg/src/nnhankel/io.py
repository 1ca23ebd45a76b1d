"""JSON instance and result files.

Instance::

    {"n": 3, "hankel_generator": [...], "lambda": {"re": -1.0, "im": 0.0},
     "x": [{"re": 1.0, "im": 0.0}, ...]}

Result::

    {"stage": "A", "delta_generator": [...], "corrected_generator": [...],
     "frob_norm": ..., "eig_residual": ..., "kkt": {...}, "wall_seconds": ...}

Floats are written with ``repr`` precision (round-trip exact).
"""

import json
from importlib import resources

import numpy as np

from .hankel import Eigenpair, HankelGenerator
from .pipeline import STAGE_A, STAGE_B, SolveResult
from .solver import KktReport

FIXTURES = ("example1", "example2", "intro3x3")


class FileFormatError(ValueError):
    pass


def _complex(d, what):
    try:
        return complex(float(d["re"]), float(d["im"]))
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"{what} must be an object with numeric 're' and 'im'") from e


def _floats(seq, what, length):
    if not isinstance(seq, list) or len(seq) != length:
        raise FileFormatError(f"{what} must be a list of {length} numbers")
    try:
        return np.array([float(v) for v in seq])
    except (TypeError, ValueError) as e:
        raise FileFormatError(f"{what} must contain numbers") from e


def instance_to_dict(g, pair):
    return {
        "n": g.n,
        "hankel_generator": [float(v) for v in g.c],
        "lambda": {"re": pair.lam.real, "im": pair.lam.imag},
        "x": [{"re": float(v.real), "im": float(v.imag)} for v in pair.x],
    }


def instance_from_dict(d):
    """Parse an instance dict; the eigenvector is not validated here."""
    if not isinstance(d, dict):
        raise FileFormatError("instance must be a JSON object")
    try:
        n = d["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise FileFormatError("n must be a positive integer")
        c = _floats(d["hankel_generator"], "hankel_generator", 2 * n - 1)
        lam = _complex(d["lambda"], "lambda")
        xs = d["x"]
        if not isinstance(xs, list) or len(xs) != n:
            raise FileFormatError(f"x must be a list of {n} complex entries")
        x = np.array([_complex(v, "x entry") for v in xs])
    except KeyError as e:
        raise FileFormatError(f"missing field {e.args[0]!r}") from e
    return HankelGenerator(c), lam, x


def result_to_dict(res):
    return {
        "stage": res.stage,
        "delta_generator": [float(v) for v in res.delta_generator],
        "corrected_generator": [float(v) for v in res.corrected_generator],
        "frob_norm": float(res.frob_norm),
        "eig_residual": float(res.eig_residual),
        "kkt": res.kkt.as_dict(),
        "wall_seconds": float(res.wall_seconds),
    }


def result_from_dict(d, n=None):
    if not isinstance(d, dict):
        raise FileFormatError("result must be a JSON object")
    try:
        stage = d["stage"]
        if stage not in (STAGE_A, STAGE_B):
            raise FileFormatError(f"stage must be 'A' or 'B', got {stage!r}")
        delta = d["delta_generator"]
        if n is None:
            if not isinstance(delta, list):
                raise FileFormatError("delta_generator must be a list")
            n = (len(delta) + 1) // 2
        p = 2 * n - 1
        k = d["kkt"]
        kkt = KktReport(
            float(k["equality_residual"]),
            float(k["bound_violation"]),
            float(k["stationarity_residual"]),
            float(k["complementarity_residual"]),
            int(k.get("iterations", 0)),
        )
        return SolveResult(
            stage=stage,
            delta_generator=_floats(delta, "delta_generator", p),
            corrected_generator=_floats(d["corrected_generator"], "corrected_generator", p),
            frob_norm=float(d["frob_norm"]),
            eig_residual=float(d["eig_residual"]),
            kkt=kkt,
            wall_seconds=float(d["wall_seconds"]),
        )
    except KeyError as e:
        raise FileFormatError(f"missing field {e.args[0]!r}") from e
    except (TypeError, ValueError) as e:
        if isinstance(e, FileFormatError):
            raise
        raise FileFormatError(str(e)) from e


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: {e}") from e


def read_instance(path):
    """Return ``(generator, lam, x)`` from an instance file."""
    return instance_from_dict(_load_json(path))


def write_instance(path, g, pair):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance_to_dict(g, pair)))


def read_result(path, n=None):
    return result_from_dict(_load_json(path), n)


def write_result(path, res):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(result_to_dict(res)))


def load_fixture(name):
    """Bundled instance ``example1``, ``example2`` or ``intro3x3`` as ``(g, Eigenpair)``."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURES}")
    text = resources.files(__package__).joinpath("data", f"{name}.json").read_text("utf-8")
    g, lam, x = instance_from_dict(json.loads(text))
    return g, Eigenpair(lam, x)


def fixture_path(name):
    return resources.files(__package__).joinpath("data", f"{name}.json")
