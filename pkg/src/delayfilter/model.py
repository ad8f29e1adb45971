"""State-space system definition, noise specification, model files.

The package works with discrete-time systems

    x[k+1] = A x[k] + B u[k] + H e[k] + w[k]
    y[k]   = C x[k] + D u[k] + v[k]

where u is a known input, e an unknown input to be reconstructed and
w, v are process and measurement noise. A validated SystemModel pins
the dimensions (n, m, l, p) = (states, known inputs, outputs, unknown
inputs) and guarantees rank(H) = p, p < n and l <= n. Absent B and D
are stored as explicit n x 0 and l x 0 zero maps so a single code path
covers systems with and without known inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    ModelFileError,
    NotSymmetric,
    QIndefinite,
    RankDeficientH,
    RNotPositiveDefinite,
    TooManyInputs,
    TooManyOutputs,
)
from .linalg import as_float_matrix, is_symmetric, numerical_rank, readonly, sym_eig_bounds

SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Validated system matrices. Construct through validate_model."""

    A: np.ndarray
    B: np.ndarray
    H: np.ndarray
    C: np.ndarray
    D: np.ndarray
    n: int
    m: int
    l: int
    p: int


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Validated stationary noise covariances (Q for process, R for sensors)."""

    Q: np.ndarray
    R: np.ndarray


def validate_model(A, H, C, B=None, D=None) -> SystemModel:
    """Check shapes, dimension bounds and rank(H) = p; return a SystemModel.

    B and D may be None when there is no known input.
    """
    A = as_float_matrix(A, "A")
    H = as_float_matrix(H, "H")
    C = as_float_matrix(C, "C")

    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if H.shape[0] != n:
        raise DimensionMismatch(f"H has {H.shape[0]} rows, expected n={n}")
    if C.shape[1] != n:
        raise DimensionMismatch(f"C has {C.shape[1]} columns, expected n={n}")
    p = H.shape[1]
    l = C.shape[0]
    if p < 1:
        raise DimensionMismatch("H must have at least one column")
    if l < 1:
        raise DimensionMismatch("C must have at least one row")
    if l > n:
        raise TooManyOutputs(f"l={l} outputs exceed n={n} states")
    if p >= n:
        raise TooManyInputs(f"p={p} unknown inputs require p < n={n}")

    if B is None:
        B = np.zeros((n, 0))
    B = as_float_matrix(B, "B")
    if B.shape[0] != n:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, expected n={n}")
    m = B.shape[1]
    if D is None:
        D = np.zeros((l, m))
    D = as_float_matrix(D, "D")
    if D.shape != (l, m):
        raise DimensionMismatch(f"D must be {(l, m)}, got {D.shape}")

    if numerical_rank(H) < p:
        raise RankDeficientH(f"rank(H)={numerical_rank(H)} < p={p}")

    return SystemModel(
        A=readonly(A), B=readonly(B), H=readonly(H), C=readonly(C), D=readonly(D),
        n=n, m=m, l=l, p=p,
    )


def validate_noise(Q, R, model: SystemModel) -> NoiseSpec:
    """Check symmetry and definiteness of the covariance pair (Q, R)."""
    Q = as_float_matrix(Q, "Q")
    R = as_float_matrix(R, "R")
    if Q.shape != (model.n, model.n):
        raise DimensionMismatch(f"Q must be {(model.n, model.n)}, got {Q.shape}")
    if R.shape != (model.l, model.l):
        raise DimensionMismatch(f"R must be {(model.l, model.l)}, got {R.shape}")
    if not is_symmetric(Q, SYMMETRY_RTOL):
        raise NotSymmetric("Q is not symmetric")
    if not is_symmetric(R, SYMMETRY_RTOL):
        raise NotSymmetric("R is not symmetric")
    qmin, qmax = sym_eig_bounds(Q)
    if qmin < -PSD_RTOL * (1.0 + qmax):
        raise QIndefinite(f"Q has eigenvalue {qmin:.3e} below tolerance")
    rmin, _ = sym_eig_bounds(R)
    if rmin <= 0.0:
        raise RNotPositiveDefinite(f"R minimum eigenvalue {rmin:.3e} is not positive")
    return NoiseSpec(Q=readonly(Q), R=readonly(R))


# Model files are strict JSON: required A, H, C; optional B, D, Q, R, delay.
_REQUIRED_KEYS = ("A", "H", "C")
_OPTIONAL_KEYS = ("B", "D", "Q", "R", "delay")


def parse_model_document(doc: dict):
    """Validate a parsed model document.

    Returns (SystemModel, NoiseSpec or None, delay or None) where delay
    is an integer or the string "auto". Q and R must be given together.
    """
    if not isinstance(doc, dict):
        raise ModelFileError("model document must be a JSON object")
    unknown = set(doc) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS)
    if unknown:
        raise ModelFileError(f"unknown keys in model file: {sorted(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise ModelFileError(f"model file missing required keys: {missing}")

    model = validate_model(doc["A"], doc["H"], doc["C"], doc.get("B"), doc.get("D"))

    noise = None
    if ("Q" in doc) != ("R" in doc):
        raise ModelFileError("Q and R must be given together")
    if "Q" in doc:
        noise = validate_noise(doc["Q"], doc["R"], model)

    delay = doc.get("delay")
    if delay is not None:
        if delay == "auto":
            pass
        elif isinstance(delay, int) and not isinstance(delay, bool):
            if delay < 0:
                raise ModelFileError("delay must be a nonnegative integer or \"auto\"")
        else:
            raise ModelFileError("delay must be a nonnegative integer or \"auto\"")
    return model, noise, delay


def load_model_file(path):
    """Read and validate a JSON model file. See parse_model_document."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"model file {path} is not valid JSON: {exc}") from None
    return parse_model_document(doc)
