"""Tests for the frequency-domain data equations.

The workhorse checks are the two round trips: every image of the stacked
data matrix is a genuine system trajectory (checked against an initial-state
fit oracle), and every simulated trajectory lies in its column space.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freepc import (
    DataEquations,
    FreqData,
    SpectrumSamples,
    TimeSeries,
    f_matrix,
    freq_data_equations,
    frf_to_freq_data,
    grid_frequencies,
    hankel_data_equations,
    is_pe_freq,
    is_trajectory_consistent,
    simulate,
    w_vector,
)
from helpers import batch_maps, exact_frf, random_system, trajectory_fit_residual


def _freq_eqs(sys, frequencies, L, rng=None):
    """Exact-FRF data equations for a system, one direction per frequency."""
    G = exact_frf(sys, frequencies)
    if sys.n_u == 1:
        data = frf_to_freq_data(frequencies, G)
    else:
        r = rng.standard_normal((len(frequencies), sys.n_u)) \
            + 1j * rng.standard_normal((len(frequencies), sys.n_u))
        data = frf_to_freq_data(frequencies, G, directions=r)
    return freq_data_equations(data, L)


# ---------------------------------------------------------------------------
# building blocks


def test_w_vector_hand_values():
    np.testing.assert_allclose(w_vector(np.pi / 2, 3), [1.0, 1j, -1.0],
                               atol=1e-15)
    with pytest.raises(ValueError):
        w_vector(0.1, 0)


def test_f_matrix_hand_example():
    # one frequency pi/2, scalar value j, depth 2:
    # column = [1, e^{j pi/2}] kron [j] = [j, -1]
    v = SpectrumSamples(np.array([np.pi / 2]), np.array([1j]))
    F = f_matrix(v, 2)
    assert F.shape == (2, 1)
    np.testing.assert_allclose(F[:, 0], [1j, -1.0], atol=1e-15)


def test_f_matrix_kron_ordering_two_channels():
    # with two channels the within-sample block varies fastest
    v = SpectrumSamples(np.array([np.pi / 2]), np.array([[1.0 + 0j, 2.0 + 0j]]))
    F = f_matrix(v, 2)
    np.testing.assert_allclose(F[:, 0], [1.0, 2.0, 1j, 2j], atol=1e-15)


def test_data_equations_row_count_validated():
    with pytest.raises(ValueError, match="row count"):
        DataEquations(np.zeros((5, 3)), depth=2, n_u=1, n_y=2, source="hankel")
    with pytest.raises(ValueError, match="source"):
        DataEquations(np.zeros((6, 3)), depth=2, n_u=1, n_y=2, source="other")


# ---------------------------------------------------------------------------
# persistence of excitation, frequency version


def test_unit_spectrum_sixteen_lines_pe_order_32_not_33():
    # M distinct lines with nonzero scalar values give rank 2M in the
    # conjugate-augmented matrix, so PE holds up to L = 2M and no further
    w = grid_frequencies(80, [1, 4, 6, 9, 11, 14, 16, 19, 21, 24, 26, 29, 31,
                              34, 36, 39])
    v = SpectrumSamples(w, np.ones(16, dtype=complex))
    ok = is_pe_freq(v, 32)
    assert ok.pe and ok.rank == 32 and ok.required == 32
    over = is_pe_freq(v, 33)
    assert not over.pe and over.rank == 32


def test_conjugate_columns_double_the_rank():
    # a single complex line: F alone has rank 1, [F conj(F)] has rank 2
    v = SpectrumSamples(np.array([0.7]), np.array([1.0 + 0j]))
    F = f_matrix(v, 2)
    assert np.linalg.matrix_rank(F) == 1
    assert is_pe_freq(v, 2).rank == 2


def test_zero_frequency_line_is_real_and_caps_at_one():
    # at w = 0 the conjugate column is identical, so one line only buys rank 1
    v = SpectrumSamples(np.array([0.0]), np.array([1.0 + 0j]))
    assert is_pe_freq(v, 1).pe
    assert not is_pe_freq(v, 2).pe


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(1, 6))
def test_pe_freq_rank_never_exceeds_two_m(M, L):
    rng = np.random.default_rng(M * 31 + L)
    w = np.sort(rng.uniform(0.05, np.pi - 0.05, M))
    if len(np.unique(w)) != M:
        return
    v = SpectrumSamples(w, rng.standard_normal(M) + 1j * rng.standard_normal(M))
    chk = is_pe_freq(v, L)
    assert chk.rank <= min(2 * M, L)


# ---------------------------------------------------------------------------
# round trip 1: images of the data equations are system trajectories


@pytest.mark.parametrize("seed", range(8))
def test_freq_image_is_a_trajectory(seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng)
    L = 6
    M = sys.n_u * L + sys.n_x + 3  # enough lines to be safely rich
    w = np.sort(rng.uniform(0.05, np.pi - 0.05, M))
    eqs = _freq_eqs(sys, w, L, rng)
    for _ in range(10):
        g = rng.standard_normal(eqs.width)
        window = eqs.matrix @ g
        u = TimeSeries(window[:sys.n_u * L].reshape(L, sys.n_u))
        y = TimeSeries(window[sys.n_u * L:].reshape(L, sys.n_y))
        res = trajectory_fit_residual(sys, u.samples, y.samples)
        assert res <= 1e-8 * (1.0 + np.abs(window).max())


@pytest.mark.parametrize("seed", range(8))
def test_hankel_image_is_a_trajectory(seed):
    rng = np.random.default_rng(100 + seed)
    sys = random_system(rng)
    L = 6
    N = 8 * L * sys.n_u + sys.n_x
    u_data = TimeSeries(rng.standard_normal((N, sys.n_u)))
    y_data = TimeSeries(simulate(sys, np.zeros(sys.n_x), u_data.samples)[0])
    eqs = hankel_data_equations(u_data, y_data, L)
    for _ in range(10):
        g = rng.standard_normal(eqs.width)
        window = eqs.matrix @ g
        u = window[:sys.n_u * L].reshape(L, sys.n_u)
        y = window[sys.n_u * L:].reshape(L, sys.n_y)
        res = trajectory_fit_residual(sys, u, y)
        assert res <= 1e-8 * (1.0 + np.abs(window).max())


# ---------------------------------------------------------------------------
# round trip 2: simulated trajectories lie in the column space


@pytest.mark.parametrize("seed", range(8))
def test_trajectory_is_consistent_with_freq_equations(seed):
    rng = np.random.default_rng(200 + seed)
    sys = random_system(rng)
    L = 6
    M = sys.n_u * L + sys.n_x + 3
    w = np.sort(rng.uniform(0.05, np.pi - 0.05, M))
    eqs = _freq_eqs(sys, w, L, rng)
    O, Mk = batch_maps(sys, L)
    for _ in range(10):
        x0 = rng.standard_normal(sys.n_x)
        u = rng.standard_normal((L, sys.n_u))
        y = (O @ x0 + Mk @ u.reshape(-1)).reshape(L, sys.n_y)
        ok, res = is_trajectory_consistent(eqs, TimeSeries(u), TimeSeries(y))
        assert ok, f"residual {res}"


def test_nontrajectory_is_rejected():
    rng = np.random.default_rng(77)
    sys = random_system(rng)
    L = 6
    M = sys.n_u * L + sys.n_x + 3
    w = np.sort(rng.uniform(0.05, np.pi - 0.05, M))
    eqs = _freq_eqs(sys, w, L, rng)
    u = rng.standard_normal((L, sys.n_u))
    y = rng.standard_normal((L, sys.n_y))  # not produced by the system
    ok, res = is_trajectory_consistent(eqs, TimeSeries(u), TimeSeries(y))
    assert not ok and res > 1e-6


def test_consistency_checks_dimensions():
    rng = np.random.default_rng(3)
    sys = random_system(rng)
    w = np.sort(rng.uniform(0.05, np.pi - 0.05, 12))
    eqs = _freq_eqs(sys, w, 4, rng)
    bad = TimeSeries(np.zeros((5, sys.n_u)))
    good_y = TimeSeries(np.zeros((4, sys.n_y)))
    with pytest.raises(ValueError, match="depth"):
        is_trajectory_consistent(eqs, bad, good_y)


# ---------------------------------------------------------------------------
# width bookkeeping: the frequency route is record-length independent


def test_freq_width_is_2m_hankel_width_grows():
    rng = np.random.default_rng(8)
    sys = random_system(rng, n_u_max=1, n_y_max=1)
    L = 5
    w = np.sort(rng.uniform(0.1, 3.0, 9))
    eqs_f = _freq_eqs(sys, w, L, rng)
    assert eqs_f.width == 18 and eqs_f.source == "frequency"
    for N in (30, 60):
        u = TimeSeries(rng.standard_normal((N, 1)))
        y = TimeSeries(simulate(sys, np.zeros(sys.n_x), u.samples)[0])
        eqs_h = hankel_data_equations(u, y, L)
        assert eqs_h.width == N - L + 1 and eqs_h.source == "hankel"


def test_hankel_equations_length_mismatch():
    u = TimeSeries(np.zeros((10, 1)))
    y = TimeSeries(np.zeros((11, 1)))
    with pytest.raises(ValueError, match="same length"):
        hankel_data_equations(u, y, 3)


# ---------------------------------------------------------------------------
# FRF -> spectrum data conversion


def test_frf_to_freq_data_siso_defaults_to_unit_direction():
    w = np.array([0.3, 1.1])
    G = np.array([2.0 + 1j, -0.5 + 0.25j])
    data = frf_to_freq_data(w, G)
    np.testing.assert_array_equal(data.input.values, np.ones((2, 1)))
    np.testing.assert_allclose(data.output.values[:, 0], G)


def test_frf_to_freq_data_applies_directions():
    w = np.array([0.3])
    G = np.zeros((1, 2, 2), dtype=complex)
    G[0] = np.array([[1.0, 2.0], [3.0, 4.0]])
    r = np.array([[1.0 + 0j, 1j]])
    data = frf_to_freq_data(w, G, directions=r)
    np.testing.assert_allclose(data.output.values[0], G[0] @ r[0])


def test_frf_to_freq_data_rejects_missing_or_zero_directions():
    w = np.array([0.3])
    G = np.zeros((1, 1, 2), dtype=complex)
    with pytest.raises(ValueError, match="directions"):
        frf_to_freq_data(w, G)
    with pytest.raises(ValueError, match="zero direction"):
        frf_to_freq_data(w, G, directions=np.zeros((1, 2)))


def test_freqdata_requires_shared_frequencies():
    a = SpectrumSamples(np.array([0.1]), np.array([1.0 + 0j]))
    b = SpectrumSamples(np.array([0.2]), np.array([1.0 + 0j]))
    with pytest.raises(ValueError, match="same frequency"):
        FreqData(a, b)


def test_freqdata_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(12)
    w = np.sort(rng.uniform(0.05, 3.0, 4))
    u = SpectrumSamples(w, rng.standard_normal((4, 1)) + 1j * rng.standard_normal((4, 1)))
    y = SpectrumSamples(w, rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2)))
    data = FreqData(u, y)
    path = tmp_path / "fd.csv"
    data.to_csv(path)
    back = FreqData.from_csv(path)
    np.testing.assert_array_equal(back.frequencies, data.frequencies)
    np.testing.assert_array_equal(back.input.values, data.input.values)
    np.testing.assert_array_equal(back.output.values, data.output.values)
