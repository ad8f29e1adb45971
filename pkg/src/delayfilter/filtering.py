"""The delayed recursive filter.

Measurements arrive at times k = 0, 1, 2, ... and are fed to step() in
order. The filter estimates the state r steps in the past: the call
carrying y_k (for k >= r+1) emits the smoothed estimate of x_{k-r}
together with a reconstruction of the unknown input at k-r-1. Calls
during the warm-up window k <= r only buffer known inputs and emit
nothing, because the recursion has no estimate to update yet.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConstraintViolated,
    DimensionMismatch,
    GainSingular,
    InfeasibleDelay,
    NotSymmetric,
    PreconditionViolated,
)
from .gain import (
    CovarianceState,
    covariance_state,
    covariance_update,
    minvar_gain,
    square_gain,
    unbiasedness_residual,
    _residual_tol,
)
from .linalg import frob, is_symmetric, pinv_cut, readonly, spectral_radius
from .markov import exists_unbiased_gain, markov_parameter
from .model import NoiseSpec, SystemModel

FIXED_SQUARE = "FixedSquare"
TIME_VARYING_MINVAR = "TimeVaryingMinVar"
FIXED_USER_SUPPLIED = "FixedUserSupplied"
GAIN_MODES = (FIXED_SQUARE, TIME_VARYING_MINVAR, FIXED_USER_SUPPLIED)

DEADBEAT = "DeadbeatUnbiased"
ASYMPTOTIC = "AsymptoticallyUnbiased"
PERSISTENT = "PersistentError"
DIVERGENT = "Divergent"

# Eigenvalues this small are treated as exact zeros of the error dynamics.
DEADBEAT_TOL = 1e-8
SPECTRAL_TOL = 1e-9
# Gain refresh stops once the covariance fixed point is this tight.
FREEZE_RTOL = 1e-12


@dataclass(frozen=True)
class FilterConfig:
    r: int
    gain_mode: str
    initial_estimate: np.ndarray
    initial_covariance: np.ndarray
    gain: np.ndarray | None = None      # only read in FixedUserSupplied mode


@dataclass(frozen=True)
class _FilterOps:
    """Precomputed constants reused by every step call."""

    r: int
    gain_mode: str
    A_rp1: np.ndarray                   # A^(r+1)
    AjB: tuple                          # A^j B for j = 0..r
    M_pinv: np.ndarray                  # (CA^rH)^-1, pseudoinverse if l > p


@dataclass(frozen=True)
class FilterState:
    k: int
    xhat_delayed: np.ndarray            # estimate of x at k-r-1 given k-1
    P: CovarianceState
    L: np.ndarray
    u_buffer: tuple                     # r+1 most recent known inputs, () if m=0
    gain_frozen: bool
    ops: _FilterOps = field(repr=False)


@dataclass(frozen=True)
class StepOutput:
    k: int                              # measurement time consumed
    state_estimate: np.ndarray          # estimate of x at k-r
    input_estimate: np.ndarray          # reconstruction of e at k-r-1
    innovation: np.ndarray


def _as_vector(x, size: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.shape != (size,):
        raise DimensionMismatch(f"{name} must have length {size}, got {v.shape}")
    return v


def init_filter(model: SystemModel, noise: NoiseSpec | None, config: FilterConfig) -> FilterState:
    """Build the initial state; the first estimate appears at k = r + 1.

    The initial_estimate seeds the delayed state chain and measurements
    y_0 .. y_r are never consumed by the update (there is nothing to
    correct against them), so a wrong seed decays per the error
    dynamics instead of being fixed during warm-up.
    """
    r = config.r
    if not isinstance(r, (int, np.integer)) or isinstance(r, bool):
        raise InfeasibleDelay(f"delay must be an integer, got {r!r}")
    if r < 0 or r > model.n - 1 or not exists_unbiased_gain(model, int(r)):
        raise InfeasibleDelay(f"no unbiased gain exists at delay {r}")
    r = int(r)

    x0 = _as_vector(config.initial_estimate, model.n, "initial_estimate")
    P0 = np.asarray(config.initial_covariance, dtype=float)
    if P0.shape != (model.n, model.n):
        raise DimensionMismatch(f"initial_covariance must be {(model.n, model.n)}")
    if not is_symmetric(P0):
        raise NotSymmetric("initial_covariance is not symmetric")

    if config.gain_mode == FIXED_SQUARE:
        L = square_gain(model, r).L
    elif config.gain_mode == TIME_VARYING_MINVAR:
        if noise is None:
            raise PreconditionViolated("TimeVaryingMinVar needs a noise specification")
        L = minvar_gain(model, noise, r, P0).L
    elif config.gain_mode == FIXED_USER_SUPPLIED:
        if config.gain is None:
            raise PreconditionViolated("FixedUserSupplied needs config.gain")
        L = np.asarray(config.gain, dtype=float)
        if L.shape != (model.n, model.l):
            raise DimensionMismatch(f"gain must be {(model.n, model.l)}, got {L.shape}")
        # a biased gain would silently invalidate every emitted estimate
        residual = unbiasedness_residual(model, r, L)
        tol = _residual_tol(model)
        if residual > tol:
            raise ConstraintViolated(
                f"supplied gain violates the unbiasedness constraint: "
                f"residual {residual:.3e} above {tol:.3e}")
    else:
        raise PreconditionViolated(f"unknown gain mode {config.gain_mode!r}")

    M = markov_parameter(model, r)
    if model.l == model.p:
        if np.linalg.cond(M) > 1e12:
            raise GainSingular(f"CA^{r}H condition number exceeds 1e12")
        M_pinv = np.linalg.inv(M)
    else:
        M_pinv = pinv_cut(M)            # left inverse; full column rank p at a feasible r

    A_rp1 = np.linalg.matrix_power(model.A, r + 1)
    AjB = []
    Aj = np.eye(model.n)
    for _ in range(r + 1):
        AjB.append(readonly(Aj @ model.B))
        Aj = model.A @ Aj

    ops = _FilterOps(r=r, gain_mode=config.gain_mode, A_rp1=readonly(A_rp1),
                     AjB=tuple(AjB), M_pinv=readonly(M_pinv))
    return FilterState(
        k=0,
        xhat_delayed=readonly(x0),
        P=covariance_state(P0),
        L=readonly(L),
        u_buffer=(),
        gain_frozen=config.gain_mode != TIME_VARYING_MINVAR,
        ops=ops,
    )


def step(state: FilterState, model: SystemModel, noise: NoiseSpec | None,
         y_k, u_k=None):
    """Consume the measurement at the state's current time index.

    Returns (next_state, StepOutput) after warm-up and (next_state,
    None) during it. u_k is required exactly when the model has known
    inputs.
    """
    r = state.ops.r
    k = state.k
    y = _as_vector(y_k, model.l, "y_k")
    if model.m > 0:
        if u_k is None:
            raise DimensionMismatch("u_k required: the model has known inputs")
        u = _as_vector(u_k, model.m, "u_k")
    else:
        u = np.zeros(0)

    if k <= r:
        buf = state.u_buffer + (u,) if model.m > 0 else ()
        return replace(state, k=k + 1, u_buffer=buf), None

    buf = state.u_buffer
    # Prediction chain: advance the delayed estimate one step, and
    # project it r+1 steps forward to compare against y_k.
    if model.m > 0:
        xpred_delayed = model.A @ state.xhat_delayed + model.B @ buf[0]
        xpred_now = state.ops.A_rp1 @ state.xhat_delayed
        for j in range(r + 1):
            xpred_now = xpred_now + state.ops.AjB[j] @ buf[r - j]
    else:
        xpred_delayed = model.A @ state.xhat_delayed
        xpred_now = state.ops.A_rp1 @ state.xhat_delayed

    innovation = y - model.C @ xpred_now
    if model.m > 0:
        innovation = innovation - model.D @ u

    L = state.L
    P = state.P
    gain_frozen = state.gain_frozen
    if state.ops.gain_mode == TIME_VARYING_MINVAR and not gain_frozen:
        L = minvar_gain(model, noise, r, P).L
        P_next = covariance_update(model, noise, r, L, P)
        if frob(P_next.P - P.P) <= FREEZE_RTOL * (1.0 + frob(P_next.P)):
            gain_frozen = True
        P = P_next

    xhat_new = xpred_delayed + L @ innovation
    ehat = state.ops.M_pinv @ innovation

    new_buf = buf[1:] + (u,) if model.m > 0 else ()
    next_state = replace(
        state, k=k + 1, xhat_delayed=readonly(xhat_new), P=P,
        L=L if L is state.L else readonly(L),
        u_buffer=new_buf, gain_frozen=gain_frozen,
    )
    out = StepOutput(
        k=k,
        state_estimate=xhat_new,
        input_estimate=ehat,
        innovation=innovation,
    )
    return next_state, out


def error_dynamics_matrix(model: SystemModel, r: int, L) -> np.ndarray:
    """A - L C A^(r+1), the autonomous map of the delayed estimation error."""
    L = np.asarray(L, dtype=float)
    return model.A - L @ model.C @ np.linalg.matrix_power(model.A, r + 1)


def classify_convergence(model: SystemModel, r: int, L) -> str:
    """Verdict from the spectrum of the error dynamics.

    All eigenvalues at numerical zero means the noiseless error dies in
    finitely many steps; spectral radius below one means it decays; a
    radius pinned to one leaves a persistent error; beyond one the
    error grows without bound.
    """
    if unbiasedness_residual(model, r, L) > _residual_tol(model):
        raise ConstraintViolated("verdict is only defined for unbiased gains")
    eigs = np.linalg.eigvals(error_dynamics_matrix(model, r, L))
    moduli = np.abs(eigs)
    if np.all(moduli <= DEADBEAT_TOL):
        return DEADBEAT
    rho = float(np.max(moduli))
    if rho < 1.0 - SPECTRAL_TOL:
        return ASYMPTOTIC
    if rho <= 1.0 + SPECTRAL_TOL:
        return PERSISTENT
    return DIVERGENT


def predicted_error_sequence(model: SystemModel, r: int, L, eps0, T: int) -> np.ndarray:
    """eps_j = (A - L C A^(r+1))^j eps0 for j = 0..T, one row per j.

    In the noiseless case this is exactly the estimation error of the
    running filter, which makes overlay comparisons against simulated
    errors meaningful.
    """
    eps = _as_vector(eps0, model.n, "eps0")
    M = error_dynamics_matrix(model, r, L)
    out = np.empty((T + 1, model.n))
    out[0] = eps
    for j in range(1, T + 1):
        eps = M @ eps
        out[j] = eps
    return out


def gain_spectral_radius(model: SystemModel, r: int, L) -> float:
    """Spectral radius of the error dynamics under L."""
    return spectral_radius(error_dynamics_matrix(model, r, L))
