"""Invariant zeros of (A, H, C) from the system pencil.

A zero is a complex z at which the pencil

    Z(z) = [[zI - A, H], [C, 0]]

loses column rank relative to its normal rank. Zeros are computed as
generalized eigenvalues of the pencil pair and then confirmed by a
rank-drop test, which filters out the spurious finite eigenvalues the
structurally singular leading matrix introduces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import PencilDegenerate
from .linalg import numerical_rank
from .model import SystemModel

NO_ZEROS = "NoZeros"
ALL_INSIDE = "AllInsideUnitCircle"
ON_CIRCLE = "OnUnitCircle"
OUTSIDE = "OutsideUnitCircle"

UNIT_CIRCLE_TOL = 1e-9
CLUSTER_TOL = 1e-6
# Confirmation: smallest structural singular value must drop by this factor
# relative to its typical value at non-zero sample points.
CONFIRM_RATIO = 1e-6

_SAMPLER_SEED = 0x5eed
_COMPRESS_SEED = 1729


@dataclass(frozen=True)
class ZeroReport:
    zeros: tuple            # complex, repeated per multiplicity
    normal_rank: int
    classification: str

    def to_json_dict(self) -> dict:
        groups = []
        for z, mult in _cluster(list(self.zeros)):
            groups.append({"value": [float(z.real), float(z.imag)], "multiplicity": mult})
        return {
            "zeros": groups,
            "normal_rank": self.normal_rank,
            "classification": self.classification,
        }


def rosenbrock_pencil(model: SystemModel):
    """(E, F) with Z(s) = s E - F, E = [[I, 0], [0, 0]], F = [[A, -H], [-C, 0]].

    Rank drops of Z(s) are generalized eigenvalues of the pair (F, E).
    """
    n, l, p = model.n, model.l, model.p
    E = np.zeros((n + l, n + p))
    E[:n, :n] = np.eye(n)
    F = np.zeros((n + l, n + p))
    F[:n, :n] = model.A
    F[:n, n:] = -model.H
    F[n:, :n] = -model.C
    return E, F


def _sample_points(model: SystemModel, count: int, rng) -> list[complex]:
    """Random complex points with modulus in [1.5, 3], away from eig(A)."""
    eigs = np.linalg.eigvals(model.A)
    points = []
    attempts = 0
    while len(points) < count and attempts < 100 * count:
        attempts += 1
        radius = rng.uniform(1.5, 3.0)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        s = radius * np.exp(1j * angle)
        if np.min(np.abs(eigs - s)) > 1e-2:
            points.append(complex(s))
    if len(points) < count:
        raise PencilDegenerate("could not find sample points away from eig(A)")
    return points


def _rank_profile(model: SystemModel, samples: int = 4):
    """(normal rank, reference smallest structural singular value).

    The reference is the median sigma_(n+p) of Z(s) over the sample
    points; a candidate zero must push that value down by CONFIRM_RATIO.
    """
    E, F = rosenbrock_pencil(model)
    rng = np.random.default_rng(_SAMPLER_SEED)
    cols = E.shape[1]
    best_rank = 0
    small_sigmas = []
    for s in _sample_points(model, samples, rng):
        sv = np.linalg.svd(s * E - F, compute_uv=False)
        tol = sv[0] * max(E.shape) * 1e-12
        best_rank = max(best_rank, int(np.count_nonzero(sv > tol)))
        if sv.size >= cols:
            small_sigmas.append(sv[cols - 1])
        else:
            small_sigmas.append(0.0)
    return best_rank, float(np.median(small_sigmas))


def normal_rank(model: SystemModel, samples: int = 4) -> int:
    """Max rank of Z(s) over random sample points (seeded, deterministic)."""
    rank, _ = _rank_profile(model, samples)
    return rank


def _cluster(values: list[complex]) -> list[tuple[complex, int]]:
    """Greedy clustering within CLUSTER_TOL; returns (center, count) pairs."""
    groups: list[list[complex]] = []
    for z in sorted(values, key=lambda c: (c.real, c.imag)):
        for g in groups:
            center = sum(g) / len(g)
            if abs(z - center) <= CLUSTER_TOL:
                g.append(z)
                break
        else:
            groups.append([z])
    out = []
    for g in groups:
        center = sum(g) / len(g)
        if abs(center.imag) <= 1e-10 * max(1.0, abs(center.real)):
            center = complex(center.real, 0.0)
        out.append((center, len(g)))
    return out


def invariant_zeros(model: SystemModel) -> ZeroReport:
    """Confirmed finite rank-drop points of the pencil, with multiplicities.

    Non-square pencils are first compressed to square by one fixed
    random row mixing; any true zero survives the compression, and the
    rank-drop confirmation removes everything the compression invents.
    Candidates of modulus beyond 1e6 * max(1, spectral radius of A) are
    treated as artifacts of the eigenvalue at infinity and dropped.
    """
    nrank, sigma_ref = _rank_profile(model)
    n, l, p = model.n, model.l, model.p
    if nrank < n + p:
        raise PencilDegenerate(
            f"pencil normal rank {nrank} < n+p = {n + p}; no unbiased-gain "
            "theory applies to this system"
        )

    E, F = rosenbrock_pencil(model)
    if l == p:
        Fs, Es = F, E
    else:
        rng = np.random.default_rng(_COMPRESS_SEED)
        W = rng.standard_normal((n + p, n + l))
        Fs, Es = W @ F, W @ E

    alpha, beta = scipy.linalg.eig(Fs, Es, right=False, homogeneous_eigvals=True)

    modulus_cap = 1e6 * max(1.0, float(np.max(np.abs(np.linalg.eigvals(model.A)))))
    confirmed = []
    for a, b in zip(alpha, beta):
        if abs(b) <= 1e-10 * max(1.0, abs(a)):
            continue                      # eigenvalue at infinity
        z = a / b
        if abs(z) > modulus_cap:
            continue                      # infinity leaking through roundoff
        sv = np.linalg.svd(z * E - F, compute_uv=False)
        if sv[n + p - 1] <= CONFIRM_RATIO * sigma_ref:
            confirmed.append(complex(z))

    zeros = []
    for center, mult in _cluster(confirmed):
        zeros.extend([center] * mult)
    zeros.sort(key=lambda c: (c.real, c.imag))
    report = ZeroReport(zeros=tuple(zeros), normal_rank=nrank, classification="")
    return ZeroReport(
        zeros=report.zeros,
        normal_rank=nrank,
        classification=classify_zeros(report),
    )


def classify_zeros(report) -> str:
    """Classification from max modulus with a 1e-9 band at the unit circle."""
    zeros = report.zeros if isinstance(report, ZeroReport) else tuple(report)
    if len(zeros) == 0:
        return NO_ZEROS
    moduli = [abs(z) for z in zeros]
    if any(m > 1.0 + UNIT_CIRCLE_TOL for m in moduli):
        return OUTSIDE
    if any(1.0 - UNIT_CIRCLE_TOL <= m <= 1.0 + UNIT_CIRCLE_TOL for m in moduli):
        return ON_CIRCLE
    return ALL_INSIDE
