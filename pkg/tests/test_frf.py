"""Tests for closed-loop data collection and FRF estimation."""

import numpy as np
import pytest

from freepc import (
    RADIUS_FACTOR_99,
    ClosedLoopExperiment,
    FrfEstimate,
    ParseError,
    SingularityError,
    TimeSeries,
    casestudy,
    closed_loop,
    estimate_frf,
    per_period_dft,
    run_experiment,
    sensitivity_check,
    tf_to_ss,
)
from freepc.lti import SisoTransferFunction, freq_response


def _zero_controller():
    return tf_to_ss(SisoTransferFunction((0.0,), (1.0,)))


def _stable_plant():
    # y_{k+1} = 0.5 y_k + u_k; open-loop stable so a zero controller is fine
    return tf_to_ss(SisoTransferFunction((1.0,), (1.0, -0.5)))


def _experiment(periods=4, noise_std=0.0, seed=0, discard=0, plant=None,
                controller=None):
    plant = plant if plant is not None else _stable_plant()
    controller = controller if controller is not None else _zero_controller()
    exc = casestudy.excitation(periods)
    return ClosedLoopExperiment(plant, controller, exc, noise_std=noise_std,
                                rng_seed=seed, discard_periods=discard)


# ---------------------------------------------------------------------------
# experiment mechanics


def test_unstable_loop_rejected():
    # the benchmark plant is open-loop unstable, so a zero controller fails
    with pytest.raises(ValueError, match="internally stable"):
        _experiment(plant=casestudy.plant())


def test_requires_nonnegative_noise():
    with pytest.raises(ValueError, match="noise_std"):
        _experiment(noise_std=-0.1)


def test_zero_controller_passes_reference_through():
    # with C = 0 the loop input is u = d exactly
    exp = _experiment(periods=3)
    d, u, y = run_experiment(exp)
    np.testing.assert_allclose(u.samples, d.samples, atol=1e-12)
    assert len(d) == 3 * 80 and d.n_v == u.n_v == y.n_v == 1


def test_discard_periods_drops_transient():
    # after enough discarded periods every kept period is in steady state,
    # so the per-period DFTs of u agree to tight tolerance
    exp = _experiment(periods=3, discard=8, plant=casestudy.plant(),
                      controller=casestudy.controller())
    d, u, y = run_experiment(exp)
    blocks = per_period_dft(u, 80, casestudy.frequencies())
    ref = blocks[0].values
    for blk in blocks[1:]:
        np.testing.assert_allclose(blk.values, ref, atol=1e-9)


def test_discarded_reference_stays_phase_aligned():
    # dropping k whole periods must not shift the multi-sine phase
    exp_plain = _experiment(periods=2, discard=0)
    exp_disc = _experiment(periods=2, discard=5)
    d0, _, _ = run_experiment(exp_plain)
    d5, _, _ = run_experiment(exp_disc)
    np.testing.assert_allclose(d5.samples, d0.samples, atol=1e-12)


def test_experiment_noise_is_seeded():
    a = run_experiment(_experiment(noise_std=0.1, seed=5))
    b = run_experiment(_experiment(noise_std=0.1, seed=5))
    c = run_experiment(_experiment(noise_std=0.1, seed=6))
    np.testing.assert_array_equal(a[2].samples, b[2].samples)
    assert not np.array_equal(a[2].samples, c[2].samples)


# ---------------------------------------------------------------------------
# FRF estimation: exactness without noise


def test_noiseless_estimate_matches_true_frf():
    exp = _experiment(periods=2, discard=10, plant=casestudy.plant(),
                      controller=casestudy.controller())
    d, u, y = run_experiment(exp)
    w = casestudy.frequencies()
    est = estimate_frf(d, u, y, 80, w)
    g_true = np.array([freq_response(casestudy.plant(), wm)[0, 0] for wm in w])
    np.testing.assert_allclose(est.g_hat, g_true, atol=1e-8)
    assert np.all(est.variance <= 1e-16)
    assert est.periods_used == 2


def test_identical_periods_zero_variance():
    exp = _experiment(periods=5, discard=10)
    d, u, y = run_experiment(exp)
    est = estimate_frf(d, u, y, 80, casestudy.frequencies())
    assert np.all(est.variance <= 1e-20)


def test_estimate_invariant_under_common_scaling():
    # G is a ratio of correlated spectra, so scaling d, u, y together by any
    # constant cancels exactly
    exp = _experiment(periods=3, noise_std=0.05, seed=8, discard=4)
    d, u, y = run_experiment(exp)
    w = casestudy.frequencies()
    est = estimate_frf(d, u, y, 80, w)
    scaled = estimate_frf(TimeSeries(7.3 * d.samples), TimeSeries(7.3 * u.samples),
                          TimeSeries(7.3 * y.samples), 80, w)
    np.testing.assert_allclose(scaled.g_hat, est.g_hat, rtol=1e-12)
    np.testing.assert_allclose(scaled.variance, est.variance, rtol=1e-12)


def test_radius_is_sqrt_variance_times_log100():
    exp = _experiment(periods=4, noise_std=0.1, seed=2)
    d, u, y = run_experiment(exp)
    est = estimate_frf(d, u, y, 80, casestudy.frequencies())
    np.testing.assert_allclose(est.confidence_radius_99,
                               RADIUS_FACTOR_99 * np.sqrt(est.variance))
    assert np.isclose(RADIUS_FACTOR_99, np.sqrt(np.log(100.0)))


# ---------------------------------------------------------------------------
# estimation guards


def test_estimate_requires_two_periods():
    exp = _experiment(periods=1)
    d, u, y = run_experiment(exp)
    with pytest.raises(ValueError, match="2 periods"):
        estimate_frf(d, u, y, 80, casestudy.frequencies())


def test_estimate_requires_divisible_length():
    exp = _experiment(periods=2)
    d, u, y = run_experiment(exp)
    with pytest.raises(ValueError, match="divisible"):
        estimate_frf(d, u, y, 81, casestudy.frequencies())


def test_zero_input_spectrum_names_the_frequency():
    exp = _experiment(periods=2)
    d, _, y = run_experiment(exp)
    u0 = TimeSeries(np.zeros_like(d.samples))
    w = casestudy.frequencies()
    with pytest.raises(SingularityError, match=f"{w[0]:.6g}"):
        estimate_frf(d, u0, y, 80, w)


def test_estimate_rejects_multichannel():
    d = TimeSeries(np.random.default_rng(0).standard_normal((160, 2)))
    with pytest.raises(ValueError, match="single-channel"):
        estimate_frf(d, d, d, 80, [2 * np.pi / 80])


# ---------------------------------------------------------------------------
# statistical behaviour with noise


def test_variance_shrinks_with_more_periods():
    # averaging law: going from 5 to 50 periods should cut the variance of
    # the mean by roughly 10x; ask only for a robust halving of the median
    ratios = []
    for seed in range(20):
        est = {}
        for P in (5, 50):
            exp = _experiment(periods=P, noise_std=0.1, seed=seed, discard=3,
                              plant=casestudy.plant(),
                              controller=casestudy.controller())
            d, u, y = run_experiment(exp)
            est[P] = estimate_frf(d, u, y, 80, casestudy.frequencies())
        ratios.append(est[5].variance.mean() / est[50].variance.mean())
    assert np.median(ratios) >= 2.0


def test_variance_reflects_noise_level():
    w = casestudy.frequencies()
    out = {}
    for std in (0.05, 0.5):
        exp = _experiment(periods=10, noise_std=std, seed=3, discard=3,
                          plant=casestudy.plant(),
                          controller=casestudy.controller())
        d, u, y = run_experiment(exp)
        out[std] = estimate_frf(d, u, y, 80, w).variance.mean()
    assert out[0.5] > 10 * out[0.05]


# ---------------------------------------------------------------------------
# sensitivity oracle


def test_sensitivity_predicts_measured_input_spectrum():
    # steady-state, noise-free: U_p(w) = (1 - C_loop G)^{-1} D_p(w)
    exp = _experiment(periods=2, discard=12, plant=casestudy.plant(),
                      controller=casestudy.controller())
    d, u, _ = run_experiment(exp)
    w = casestudy.frequencies()
    d_spec = per_period_dft(d, 80, w)
    u_spec = per_period_dft(u, 80, w)
    pred = sensitivity_check(casestudy.plant(), casestudy.controller(), d_spec)
    for p in range(2):
        np.testing.assert_allclose(u_spec[p].values, pred[p].values,
                                   atol=1e-8 * np.abs(d_spec[p].values).max())


def test_feedback_shapes_input_spectrum():
    # with the benchmark controller in the loop, u != d (unlike C = 0)
    exp = _experiment(periods=2, discard=12, plant=casestudy.plant(),
                      controller=casestudy.controller())
    d, u, _ = run_experiment(exp)
    assert np.abs(u.samples - d.samples).max() > 0.1


# ---------------------------------------------------------------------------
# FRF CSV round trip


def test_frf_csv_roundtrip(tmp_path):
    exp = _experiment(periods=4, noise_std=0.1, seed=11)
    d, u, y = run_experiment(exp)
    est = estimate_frf(d, u, y, 80, casestudy.frequencies())
    path = tmp_path / "frf.csv"
    est.to_csv(path)
    back = FrfEstimate.from_csv(path, periods_used=4)
    np.testing.assert_array_equal(back.frequencies, est.frequencies)
    np.testing.assert_array_equal(back.g_hat, est.g_hat)
    np.testing.assert_array_equal(back.variance, est.variance)
    np.testing.assert_array_equal(back.confidence_radius_99,
                                  est.confidence_radius_99)
    assert back.periods_used == 4


def test_frf_csv_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("frequency,re_g,im_g,variance,radius_99\n0.1,1,0,bad,0\n")
    with pytest.raises(ParseError) as exc:
        FrfEstimate.from_csv(path)
    assert exc.value.line == 2
    path.write_text("wrong,header\n")
    with pytest.raises(ParseError) as exc:
        FrfEstimate.from_csv(path)
    assert exc.value.line == 1


def test_frf_estimate_validates_fields():
    with pytest.raises(ValueError, match="variance"):
        FrfEstimate(np.array([0.1]), np.array([1 + 0j]), np.array([-1.0]),
                    np.array([0.0]), 2)
