"""Online filter protocol: warm-up, emission, gain modes, verdicts."""

import numpy as np
import pytest

import delayfilter as df

E1 = df.validate_model([[0.5, 0.0], [1.0, 0.5]], [[1.0], [0.0]], [[0.0, 1.0]])


def _config(r=1, mode=df.FIXED_SQUARE, n=2, x0=None, gain=None):
    return df.FilterConfig(
        r=r, gain_mode=mode,
        initial_estimate=np.zeros(n) if x0 is None else x0,
        initial_covariance=np.eye(n),
        gain=gain,
    )


def test_warm_up_protocol():
    state = df.init_filter(E1, None, _config())
    assert state.k == 0
    state, out = df.step(state, E1, None, [0.0])
    assert out is None
    state, out = df.step(state, E1, None, [0.0])
    assert out is None  # k=1 <= r
    state, out = df.step(state, E1, None, [0.0])
    assert out is not None and out.k == 2  # first emission at r+1


def test_output_shapes():
    state = df.init_filter(E1, None, _config())
    for y in ([0.0], [0.1], [0.3]):
        state, out = df.step(state, E1, None, y)
    assert out.state_estimate.shape == (2,)
    assert out.input_estimate.shape == (1,)
    assert out.innovation.shape == (1,)


def test_deadbeat_reconstruction_with_wrong_start():
    # nilpotent error dynamics: exact after the transient dies in n steps
    rng = np.random.default_rng(8)
    x = rng.standard_normal(2)
    e_seq = rng.standard_normal(30)
    xs, ys = [x.copy()], []
    for k in range(30):
        ys.append(float((E1.C @ x)[0]))
        x = E1.A @ x + E1.H @ [e_seq[k]]
        xs.append(x.copy())
    state = df.init_filter(E1, None, _config(x0=np.array([5.0, -3.0])))
    worst_x = worst_e = 0.0
    for k in range(30):
        state, out = df.step(state, E1, None, [ys[k]])
        if out is None or out.k < 6:
            continue
        worst_x = max(worst_x, float(np.max(np.abs(out.state_estimate - xs[out.k - 1]))))
        worst_e = max(worst_e, abs(out.input_estimate[0] - e_seq[out.k - 2]))
    assert worst_x <= 1e-10
    assert worst_e <= 1e-10


def test_infeasible_delay_rejected_at_init():
    with pytest.raises(df.InfeasibleDelay):
        df.init_filter(E1, None, _config(r=0))


def test_non_integer_delay_rejected():
    with pytest.raises(df.InfeasibleDelay):
        df.init_filter(E1, None, _config(r=1.5))


def test_missing_known_input_rejected():
    model = df.validate_model(E1.A, E1.H, E1.C, B=[[0.3], [0.1]])
    state = df.init_filter(model, None, _config())
    with pytest.raises(df.DimensionMismatch):
        df.step(state, model, None, [0.0])


def test_wrong_measurement_size_rejected():
    state = df.init_filter(E1, None, _config())
    with pytest.raises(df.DimensionMismatch):
        df.step(state, E1, None, [0.0, 1.0])


def test_known_input_buffer_rolls():
    model = df.validate_model(E1.A, E1.H, E1.C, B=[[0.3], [0.1]])
    state = df.init_filter(model, None, _config())
    for k in range(4):
        state, _ = df.step(state, model, None, [0.0], [float(k)])
    # after consuming u_0..u_3 the buffer holds the last r+1 = 2 inputs
    assert len(state.u_buffer) == 2
    assert state.u_buffer[0][0] == 2.0
    assert state.u_buffer[1][0] == 3.0


def test_user_supplied_gain_mode():
    L = df.square_gain(E1, 1).L
    config = _config(mode=df.FIXED_USER_SUPPLIED, gain=L)
    state = df.init_filter(E1, None, config)
    assert np.allclose(state.L, L)
    config_bad = _config(mode=df.FIXED_USER_SUPPLIED, gain=L + 0.2)
    with pytest.raises(df.ConstraintViolated):
        df.init_filter(E1, None, config_bad)


def test_time_varying_gain_freezes():
    model, noise, _ = df.reference_example("nonsquare3")
    config = df.FilterConfig(r=1, gain_mode=df.TIME_VARYING_MINVAR,
                             initial_estimate=np.zeros(model.n),
                             initial_covariance=np.eye(model.n))
    traj = df.simulate(model, noise, df.example_signals(model), 400,
                       seed=2, noise_on=True)
    state = df.init_filter(model, noise, config)
    frozen_at = None
    gains = []
    for k in range(traj.T + 1):
        state, out = df.step(state, model, noise, traj.y[k])
        if state.gain_frozen and frozen_at is None:
            frozen_at = k
            L_frozen = state.L.copy()
        if out is not None:
            gains.append(state.L.copy())
    assert frozen_at is not None
    assert np.array_equal(state.L, L_frozen)
    # frozen gain matches the steady-state fixed point
    res, _, converged = df.steady_state_gain(model, noise, 1)
    assert converged
    assert np.max(np.abs(state.L - res.L)) <= 1e-6


def test_error_dynamics_matrix_formula():
    L = df.square_gain(E1, 1).L
    M = df.error_dynamics_matrix(E1, 1, L)
    expected = E1.A - L @ E1.C @ E1.A @ E1.A
    assert np.allclose(M, expected)
    assert df.gain_spectral_radius(E1, 1, L) == pytest.approx(0.0, abs=1e-8)


def test_predicted_error_sequence_closed_form():
    L = df.square_gain(E1, 1).L
    M = df.error_dynamics_matrix(E1, 1, L)
    eps0 = np.array([1.0, -2.0])
    seq = df.predicted_error_sequence(E1, 1, L, eps0, 5)
    assert seq.shape == (6, 2)
    acc = eps0.copy()
    for j in range(6):
        assert np.allclose(seq[j], acc)
        acc = M @ acc


def test_classify_convergence_verdicts():
    # deadbeat: the unique square gain of the chain system
    L = df.square_gain(E1, 1).L
    assert df.classify_convergence(E1, 1, L) == df.DEADBEAT

    model, _, _ = df.reference_example("minphase3")
    L3 = df.square_gain(model, 1).L
    assert df.classify_convergence(model, 1, L3) == df.ASYMPTOTIC

    model, _, _ = df.reference_example("nonminphase3")
    L3 = df.square_gain(model, 1).L
    assert df.classify_convergence(model, 1, L3) == df.DIVERGENT


def test_classify_convergence_persistent():
    # companion system with an invariant zero exactly at z = 1: the unique
    # no-delay gain leaves a unit-circle eigenvalue in the error dynamics
    model = df.validate_model([[0.0, 1.0], [0.1, 0.2]], [[0.0], [1.0]],
                              [[-1.0, 1.0]])
    report = df.invariant_zeros(model)
    assert report.zeros[0] == pytest.approx(1.0, abs=1e-9)
    L = df.square_gain(model, 0).L
    assert df.classify_convergence(model, 0, L) == df.PERSISTENT


def test_classify_convergence_rejects_biased_gain():
    L = df.square_gain(E1, 1).L
    with pytest.raises(df.ConstraintViolated):
        df.classify_convergence(E1, 1, L + 1.0)
