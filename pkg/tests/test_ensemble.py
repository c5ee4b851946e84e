import numpy as np
import pytest

from cmux.ensemble import (
    CoefficientMatrix,
    EnsembleSpec,
    Generator,
    SymmetryMode,
    analyze_samples,
    coherence,
    frequency_bins,
    generate_ensemble,
    is_conjugate_symmetric,
    rank_r_relative_error,
    synthesize_samples,
    truncated_svd,
)
from cmux.errors import DimensionError, GenerationError, UndefinedMetricError
from oracles import bins, brute_coherence, fourier_columns


def test_gaussian_factors_rank_and_shape():
    C = generate_ensemble(EnsembleSpec(8, 31, 2, seed=1))
    assert C.shape == (8, 31)
    s = np.linalg.svd(C.entries, compute_uv=False)
    assert s[1] > 1e-6 * s[0] and s[2] < 1e-12 * s[0]


def test_generation_is_seeded():
    a = generate_ensemble(EnsembleSpec(5, 9, 2, seed=4)).entries
    b = generate_ensemble(EnsembleSpec(5, 9, 2, seed=4)).entries
    c = generate_ensemble(EnsembleSpec(5, 9, 2, seed=5)).entries
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_entries_are_read_only():
    C = generate_ensemble(EnsembleSpec(3, 5, 1, seed=0))
    with pytest.raises(ValueError):
        C.entries[0, 0] = 1


@pytest.mark.parametrize("generator", ["gaussian-factors", "time-concentrated"])
def test_signal_mode_symmetric_rank_and_real_samples(generator):
    spec = EnsembleSpec(6, 15, 2, generator=generator, symmetry_mode="signal", seed=3)
    C = generate_ensemble(spec)
    assert is_conjugate_symmetric(C, 1e-12)
    assert abs(C.entries[:, 0].imag).max() <= 1e-12
    s = np.linalg.svd(C.entries, compute_uv=False)
    assert s[2] <= 1e-10 * s[0]
    X = synthesize_samples(C, 40)
    assert np.max(np.abs(X.imag)) <= 1e-9 * np.max(np.abs(X))


def test_signal_mode_needs_odd_bandwidth():
    with pytest.raises(ValueError):
        EnsembleSpec(4, 10, 1, symmetry_mode="signal")


def test_rank_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(3, 5, 4)
    with pytest.raises(ValueError):
        EnsembleSpec(3, 5, 0)


def test_from_data_without_data_raises():
    with pytest.raises(GenerationError):
        generate_ensemble(EnsembleSpec(2, 5, 1, generator="from-data"))


def test_from_data_passthrough_and_shape_check():
    data = np.arange(12).reshape(3, 4) + 1j
    C = generate_ensemble(EnsembleSpec(3, 4, 2, generator=Generator.FROM_DATA, data=data))
    np.testing.assert_array_equal(C.entries, data)
    with pytest.raises(DimensionError):
        generate_ensemble(EnsembleSpec(3, 5, 2, generator="from-data", data=data))


def test_spec_dict_round_trip():
    spec = EnsembleSpec(4, 9, 2, generator="time-concentrated", symmetry_mode="signal", seed=11, time_grid=20)
    assert EnsembleSpec.from_dict(spec.to_dict()) == spec


def test_frequency_bins_layouts():
    np.testing.assert_array_equal(frequency_bins(5, 12), bins(5, 12))
    np.testing.assert_array_equal(frequency_bins(5, 12, "signal"), [0, 1, 2, 10, 11])
    with pytest.raises(DimensionError):
        frequency_bins(5, 4)


@pytest.mark.parametrize("mode,W", [("matrix", 6), ("signal", 7)])
def test_synthesis_matches_explicit_sum(rng, mode, W):
    C = CoefficientMatrix(rng.standard_normal((3, W)) + 1j * rng.standard_normal((3, W)), mode)
    omega = 17
    X = synthesize_samples(C, omega)
    F = fourier_columns(W, omega, mode == "signal")
    np.testing.assert_allclose(X, C.entries @ F.T, atol=1e-12)
    np.testing.assert_allclose(analyze_samples(X, W, mode), C.entries, atol=1e-12)


def test_truncated_svd_reconstructs(rng):
    A = rng.standard_normal((6, 4)) @ rng.standard_normal((4, 9))
    t = truncated_svd(A, 4)
    np.testing.assert_allclose(t.reconstruct(), A, atol=1e-10)
    assert np.all(np.diff(t.singular_values) <= 0)
    with pytest.raises(DimensionError):
        truncated_svd(A, 7)


def test_rank_r_relative_error(rng):
    A = rng.standard_normal((5, 8))
    s = np.linalg.svd(A, compute_uv=False)
    assert rank_r_relative_error(A, 2) == pytest.approx(np.sqrt((s[2:] ** 2).sum() / (s**2).sum()))
    assert rank_r_relative_error(A, 5) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(UndefinedMetricError):
        rank_r_relative_error(np.zeros((2, 3)), 1)


@pytest.mark.parametrize("mode,W", [("matrix", 12), ("signal", 13)])
def test_coherence_matches_brute_force(mode, W):
    C = generate_ensemble(EnsembleSpec(5, W, 3, symmetry_mode=mode, seed=8))
    for omega in (W, 2 * W + 3):
        assert coherence(C, omega).mu_squared == pytest.approx(brute_coherence(C.entries, omega, mode == "signal"), rel=1e-10)


def test_coherence_extremes():
    W, R, omega = 16, 2, 48
    spikes = np.zeros((4, W), complex)
    spikes[0, 3], spikes[1, 9], spikes[2, 3] = 1.0, 2.0, -1j
    rep = coherence(spikes, omega)
    assert rep.rank_used == 2 and rep.mu_squared == pytest.approx(1.0, abs=1e-12)
    C = generate_ensemble(EnsembleSpec(6, W, R, generator="time-concentrated", seed=2, time_grid=omega))
    rep = coherence(C, omega)
    assert rep.mu_squared == pytest.approx(W / R, rel=1e-12)
    X = synthesize_samples(C, omega)
    assert rep.argmax_sample_index in np.flatnonzero(np.abs(X).sum(0) > 0.5 * np.abs(X).sum(0).max())


def test_coherence_zero_matrix():
    with pytest.raises(UndefinedMetricError):
        coherence(np.zeros((3, 4)), 8)
