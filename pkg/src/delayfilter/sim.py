"""Ground-truth simulation and experiment drivers.

simulate() realizes the system recursion exactly, so trajectory
residuals are zero by construction and every run is reproducible from
its seed. run_experiment() drives the filter over a trajectory and
scores it against the truth; monte_carlo_bias() repeats that over many
seeded noise realizations to estimate the error bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadCoefficient, BadIndices, DimensionMismatch, PreconditionViolated
from .filtering import FilterConfig, init_filter, step
from .linalg import psd_factor, readonly
from .model import NoiseSpec, SystemModel, validate_model
from .signals import SignalSpec, signal_values


@dataclass(frozen=True, eq=False)
class Trajectory:
    T: int
    x: np.ndarray          # (T+1) x n true states
    y: np.ndarray          # (T+1) x l outputs
    e: np.ndarray          # (T+1) x p unknown inputs
    u: np.ndarray          # (T+1) x m known inputs
    w: np.ndarray          # (T+1) x n process noise (row T unused)
    v: np.ndarray          # (T+1) x l measurement noise
    seed: object


@dataclass(frozen=True, eq=False)
class ErrorStats:
    """Post-warm-up error summary of one filter run.

    ks holds the measurement times that produced estimates; row i of
    state_errors is x[ks[i]-r] minus its estimate, row i of
    input_errors is e[ks[i]-r-1] minus its reconstruction. state_bias
    averages the state error over the window (single-run proxy for the
    multi-trial bias report).
    """

    ks: np.ndarray
    state_errors: np.ndarray
    input_errors: np.ndarray
    state_rms: float
    input_rms: float
    state_max_abs: float
    input_max_abs: float
    state_bias: np.ndarray


def _rms(a: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(a)))) if a.size else 0.0


def simulate(model: SystemModel, noise: NoiseSpec | None, e_signals, T: int,
             seed=0, x0=None, u_signals=None, noise_on: bool = True) -> Trajectory:
    """Simulate k = 0..T with seeded Gaussian noise when enabled.

    e_signals must give one SignalSpec per unknown-input channel, and
    u_signals one per known-input channel (omitted means zero known
    input). Noise and stochastic signal channels draw from independent
    substreams spawned off the seed, so runs are byte-reproducible.
    """
    if T < 1:
        raise DimensionMismatch(f"T must be >= 1, got {T}")
    e_signals = tuple(e_signals)
    if len(e_signals) != model.p:
        raise DimensionMismatch(
            f"need {model.p} unknown-input signals, got {len(e_signals)}")
    if u_signals is None:
        u_signals = tuple(SignalSpec(kind="constant", amplitude=0.0) for _ in range(model.m))
    u_signals = tuple(u_signals)
    if len(u_signals) != model.m:
        raise DimensionMismatch(
            f"need {model.m} known-input signals, got {len(u_signals)}")

    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = ss.spawn(2 + model.p + model.m)

    n, l = model.n, model.l
    if noise_on and noise is None:
        raise PreconditionViolated("noise_on=True needs a NoiseSpec")
    use_noise = noise_on and noise is not None
    if use_noise:
        Gw = psd_factor(noise.Q)
        Gv = psd_factor(noise.R)
        w = np.random.default_rng(children[0]).standard_normal((T + 1, n)) @ Gw.T
        v = np.random.default_rng(children[1]).standard_normal((T + 1, l)) @ Gv.T
    else:
        w = np.zeros((T + 1, n))
        v = np.zeros((T + 1, l))

    e = np.column_stack([
        signal_values(spec, T, rng=np.random.default_rng(children[2 + c]))
        for c, spec in enumerate(e_signals)
    ]) if model.p else np.zeros((T + 1, 0))
    u = np.column_stack([
        signal_values(spec, T, rng=np.random.default_rng(children[2 + model.p + c]))
        for c, spec in enumerate(u_signals)
    ]) if model.m else np.zeros((T + 1, 0))

    x = np.zeros((T + 1, n))
    if x0 is not None:
        x[0] = np.asarray(x0, dtype=float).reshape(n)
    y = np.zeros((T + 1, l))
    for k in range(T + 1):
        y[k] = model.C @ x[k] + model.D @ u[k] + v[k]
        if k < T:
            x[k + 1] = model.A @ x[k] + model.B @ u[k] + model.H @ e[k] + w[k]

    return Trajectory(T=T, x=readonly(x), y=readonly(y), e=readonly(e),
                      u=readonly(u), w=readonly(w), v=readonly(v), seed=seed)


def compartmental_model(n: int, alpha: float, beta: float,
                        input_compartments, output_compartments) -> SystemModel:
    """Chain of n compartments exchanging mass with flow alpha, loss beta.

    The state map is tridiagonal with every diagonal entry 1-beta-alpha
    and off-diagonal entries alpha. Unknown inputs enter the listed
    compartments (1-based) and outputs read the listed compartments;
    the two lists must be disjoint.
    """
    if not (0.0 < alpha < 1.0):
        raise BadCoefficient(f"flow coefficient must lie in (0, 1), got {alpha}")
    if not (0.0 < beta < 1.0):
        raise BadCoefficient(f"loss coefficient must lie in (0, 1), got {beta}")
    if n < 2:
        raise BadIndices(f"need at least two compartments, got n={n}")
    inp = list(input_compartments)
    out = list(output_compartments)
    for name, idx in (("input", inp), ("output", out)):
        if not idx:
            raise BadIndices(f"{name} compartment list is empty")
        if len(set(idx)) != len(idx):
            raise BadIndices(f"duplicate {name} compartments: {idx}")
        if any(not (1 <= i <= n) for i in idx):
            raise BadIndices(f"{name} compartments out of range 1..{n}: {idx}")
    if set(inp) & set(out):
        raise BadIndices("input and output compartments must be disjoint")

    A = np.zeros((n, n))
    np.fill_diagonal(A, 1.0 - beta - alpha)
    for i in range(n - 1):
        A[i, i + 1] = alpha
        A[i + 1, i] = alpha
    H = np.zeros((n, len(inp)))
    for j, i in enumerate(inp):
        H[i - 1, j] = 1.0
    C = np.zeros((len(out), n))
    for j, i in enumerate(out):
        C[j, i - 1] = 1.0
    return validate_model(A, H, C)


def run_experiment(model: SystemModel, noise: NoiseSpec | None,
                   config: FilterConfig, trajectory: Trajectory):
    """Drive the filter over a trajectory; score against the truth.

    Returns (ErrorStats, outputs) where outputs is the list of
    (k, StepOutput or None) rows including the warm-up window, ready
    for CSV export.
    """
    state = init_filter(model, noise, config)
    r = int(config.r)
    rows = []
    ks, serr, ierr = [], [], []
    for k in range(trajectory.T + 1):
        u_k = trajectory.u[k] if model.m > 0 else None
        state, out = step(state, model, noise, trajectory.y[k], u_k)
        rows.append((k, out))
        if out is None:
            continue
        ks.append(k)
        serr.append(trajectory.x[k - r] - out.state_estimate)
        ierr.append(trajectory.e[k - r - 1] - out.input_estimate)
    serr = np.asarray(serr) if serr else np.zeros((0, model.n))
    ierr = np.asarray(ierr) if ierr else np.zeros((0, model.p))
    stats = ErrorStats(
        ks=np.asarray(ks, dtype=int),
        state_errors=serr,
        input_errors=ierr,
        state_rms=_rms(serr),
        input_rms=_rms(ierr),
        state_max_abs=float(np.max(np.abs(serr))) if serr.size else 0.0,
        input_max_abs=float(np.max(np.abs(ierr))) if ierr.size else 0.0,
        state_bias=serr.mean(axis=0) if serr.size else np.zeros(model.n),
    )
    return stats, rows


@dataclass(frozen=True, eq=False)
class BiasReport:
    """Componentwise mean state error and its standard error across trials.

    Row i of mean/stderr/flagged corresponds to measurement time ks[i];
    flagged marks components whose |mean| exceeds 4 standard errors.
    """

    ks: tuple
    mean: np.ndarray
    stderr: np.ndarray
    flagged: np.ndarray
    trials: int


def monte_carlo_bias(model: SystemModel, noise: NoiseSpec, config: FilterConfig,
                     signals, trials: int, T: int, seed=0, ks=None) -> BiasReport:
    """Estimate the state-error bias over independent noise realizations.

    Each trial draws its own substream from the seed; the truth starts
    at zero and the filter is seeded exactly, so any systematic offset
    in the mean error indicts the gain, not the setup. Use at least a
    few hundred trials for the 4-sigma flag to mean anything.
    """
    if ks is None:
        ks = (max(1, T // 4), max(1, T // 2), T)
    ks = tuple(int(k) for k in ks)
    r = int(config.r)
    if min(ks) < r + 1:
        raise DimensionMismatch(f"bias sample times must be >= r+1 = {r + 1}")

    root = np.random.SeedSequence(seed)
    per_trial = root.spawn(trials)
    errs = np.zeros((trials, len(ks), model.n))
    k_to_row = {k: i for i, k in enumerate(ks)}
    for t in range(trials):
        traj = simulate(model, noise, signals, T, seed=per_trial[t])
        state = init_filter(model, noise, config)
        for k in range(T + 1):
            u_k = traj.u[k] if model.m > 0 else None
            state, out = step(state, model, noise, traj.y[k], u_k)
            if out is not None and k in k_to_row:
                errs[t, k_to_row[k]] = traj.x[k - r] - out.state_estimate

    mean = errs.mean(axis=0)
    stderr = errs.std(axis=0, ddof=1) / np.sqrt(trials)
    flagged = np.abs(mean) > 4.0 * stderr
    return BiasReport(ks=ks, mean=mean, stderr=stderr, flagged=flagged, trials=trials)
