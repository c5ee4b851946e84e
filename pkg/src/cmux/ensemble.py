"""Correlated signal ensembles as low-rank matrices of Fourier coefficients.

An ensemble of ``M`` bandlimited periodic signals is represented by an
``M x W`` complex matrix whose row ``m`` holds the Fourier series
coefficients of signal ``m``. Correlation between the signals shows up as
low rank. Time samples at rate ``omega`` are obtained by zero-padded inverse
DFT with unitary normalization::

    x_m[n] = omega**-0.5 * sum_w C[m, w] * exp(+2j*pi*k(w)*n/omega)

where ``k(w)`` is the DFT bin used by coefficient ``w`` (see
:func:`frequency_bins`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from cmux.errors import DimensionError, GenerationError, UndefinedMetricError

__all__ = [
    "Generator",
    "SymmetryMode",
    "EnsembleSpec",
    "CoefficientMatrix",
    "SvdTriple",
    "CoherenceReport",
    "frequency_bins",
    "mirror_index",
    "is_conjugate_symmetric",
    "symmetrize",
    "generate_ensemble",
    "truncated_svd",
    "coherence",
    "synthesize_samples",
    "analyze_samples",
    "rank_r_relative_error",
]


class Generator(str, Enum):
    GAUSSIAN_FACTORS = "gaussian-factors"
    TIME_CONCENTRATED = "time-concentrated"
    FROM_DATA = "from-data"


class SymmetryMode(str, Enum):
    MATRIX = "matrix"
    SIGNAL = "signal"


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of a generated ensemble.

    ``time_grid`` only matters for the time-concentrated generator: the
    signals peak at integer positions of a grid with that many points on
    ``[0, 1)`` (default ``W``). Pick the sampling rate (or a divisor of it)
    to make the peaks land exactly on samples. ``data`` is the matrix passed
    through by the from-data generator.
    """

    num_signals: int
    bandwidth: int
    rank: int
    generator: Generator = Generator.GAUSSIAN_FACTORS
    symmetry_mode: SymmetryMode = SymmetryMode.MATRIX
    seed: int = 0
    time_grid: int | None = None
    data: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "generator", Generator(self.generator))
        object.__setattr__(self, "symmetry_mode", SymmetryMode(self.symmetry_mode))
        M, W, R = self.num_signals, self.bandwidth, self.rank
        if M < 1 or W < 1:
            raise ValueError(f"need M >= 1 and W >= 1, got M={M}, W={W}")
        if not 1 <= R <= min(M, W):
            raise ValueError(f"rank {R} outside [1, min(M, W)={min(M, W)}]")
        if self.symmetry_mode is SymmetryMode.SIGNAL and W % 2 == 0:
            raise ValueError(f"signal mode needs odd W = 2B+1, got W={W}")
        if self.time_grid is not None and self.time_grid < R:
            raise ValueError("time_grid must be at least the rank")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_signals, self.bandwidth)

    def to_dict(self) -> dict:
        return {
            "num_signals": self.num_signals,
            "bandwidth": self.bandwidth,
            "rank": self.rank,
            "generator": self.generator.value,
            "symmetry_mode": self.symmetry_mode.value,
            "seed": self.seed,
            "time_grid": self.time_grid,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        keys = ("num_signals", "bandwidth", "rank", "generator", "symmetry_mode", "seed", "time_grid")
        return cls(**{k: d[k] for k in keys if k in d})


@dataclass(frozen=True)
class CoefficientMatrix:
    """Immutable ``M x W`` complex coefficient matrix."""

    entries: np.ndarray
    symmetry_mode: SymmetryMode = SymmetryMode.MATRIX

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128, copy=True)
        if arr.ndim != 2:
            raise DimensionError(f"coefficient matrix must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "symmetry_mode", SymmetryMode(self.symmetry_mode))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def num_signals(self) -> int:
        return self.entries.shape[0]

    @property
    def bandwidth(self) -> int:
        return self.entries.shape[1]

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))


@dataclass(frozen=True)
class SvdTriple:
    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.conj().T


@dataclass(frozen=True)
class CoherenceReport:
    mu_squared: float
    argmax_sample_index: int
    omega_used: int
    rank_used: int


def _as_array(C) -> np.ndarray:
    if isinstance(C, CoefficientMatrix):
        return C.entries
    return np.asarray(C, dtype=np.complex128)


def _mode_of(C, default=SymmetryMode.MATRIX) -> SymmetryMode:
    return C.symmetry_mode if isinstance(C, CoefficientMatrix) else SymmetryMode(default)


def frequency_bins(bandwidth: int, omega: int, symmetry_mode=SymmetryMode.MATRIX) -> np.ndarray:
    """DFT bins (on an ``omega``-point grid) occupied by the ``W`` coefficients.

    Matrix mode uses bins ``0..W-1``. Signal mode stores negative frequencies
    in columns ``(W+1)/2..W-1``, so those go to bins ``omega-(W-w)``; this
    keeps the time samples of a conjugate-symmetric row real for any
    ``omega >= W``.
    """
    W = bandwidth
    if omega < W:
        raise DimensionError(f"omega={omega} must be at least W={W}")
    bins = np.arange(W)
    if SymmetryMode(symmetry_mode) is SymmetryMode.SIGNAL:
        upper = bins > (W - 1) // 2
        bins[upper] = omega - (W - bins[upper])
    return bins


def mirror_index(bandwidth: int) -> np.ndarray:
    """Column permutation ``w -> (-w) mod W``."""
    return (-np.arange(bandwidth)) % bandwidth


def is_conjugate_symmetric(C, tol: float = 1e-12) -> bool:
    """True when every row obeys ``C[m, w] == conj(C[m, (-w) mod W])``."""
    arr = _as_array(C)
    scale = max(float(np.max(np.abs(arr), initial=0.0)), 1.0)
    return bool(np.max(np.abs(arr - arr[:, mirror_index(arr.shape[1])].conj()), initial=0.0) <= tol * scale)


def symmetrize(arr: np.ndarray) -> np.ndarray:
    """Average each entry with the conjugate of its mirrored counterpart."""
    arr = np.asarray(arr, dtype=np.complex128)
    return 0.5 * (arr + arr[:, mirror_index(arr.shape[1])].conj())


def _signed_frequencies(bandwidth: int, symmetry_mode: SymmetryMode) -> np.ndarray:
    w = np.arange(bandwidth)
    if symmetry_mode is SymmetryMode.SIGNAL:
        return np.where(w > (bandwidth - 1) // 2, w - bandwidth, w)
    return w


def generate_ensemble(spec: EnsembleSpec) -> CoefficientMatrix:
    """Draw a rank-``R`` coefficient matrix according to ``spec``.

    Gaussian factors: product of ``M x R`` and ``R x W`` real standard normal
    matrices. Time-concentrated: Gaussian mixtures of ``R`` unit-norm phase
    ramps, each putting all of a signal's energy at one time sample of the
    ``time_grid``; this maximizes the coherence. From-data: ``spec.data``.

    In signal mode the matrix is symmetrized and truncated back to rank ``R``.

    Raises
    ------
    GenerationError
        If symmetrization leaves fewer than ``R`` significant singular values.
    """
    M, W, R = spec.num_signals, spec.bandwidth, spec.rank
    rng = np.random.default_rng(spec.seed)

    if spec.generator is Generator.GAUSSIAN_FACTORS:
        C = rng.standard_normal((M, R)) @ rng.standard_normal((R, W))
    elif spec.generator is Generator.TIME_CONCENTRATED:
        grid = spec.time_grid if spec.time_grid is not None else W
        times = rng.choice(grid, size=R, replace=False)
        k = _signed_frequencies(W, spec.symmetry_mode)
        ramps = np.exp(-2j * np.pi * np.outer(times, k) / grid) / np.sqrt(W)
        C = rng.standard_normal((M, R)) @ ramps
    else:
        if spec.data is None:
            raise GenerationError("from-data generator needs spec.data")
        C = np.asarray(spec.data, dtype=np.complex128)
        if C.shape != (M, W):
            raise DimensionError(f"data has shape {C.shape}, spec says {(M, W)}")
        return CoefficientMatrix(C, spec.symmetry_mode)

    C = np.asarray(C, dtype=np.complex128)
    if spec.symmetry_mode is SymmetryMode.SIGNAL:
        C = symmetrize(C)
        svd = truncated_svd(C, min(M, W))
        s = svd.singular_values
        if s[0] == 0 or s[R - 1] < 1e-12 * s[0]:
            raise GenerationError(f"rank fell below {R} after symmetrization")
        C = symmetrize(truncated_svd(C, R).reconstruct())
    return CoefficientMatrix(C, spec.symmetry_mode)


def truncated_svd(C, r: int) -> SvdTriple:
    """Top-``r`` singular triplets, singular values in nonincreasing order."""
    arr = _as_array(C)
    if not 1 <= r <= min(arr.shape):
        raise DimensionError(f"r={r} outside [1, {min(arr.shape)}]")
    U, s, Vh = np.linalg.svd(arr, full_matrices=False)
    return SvdTriple(U[:, :r], s[:r], Vh[:r].conj().T)


def coherence(C, omega: int, rel_threshold: float = 1e-10) -> CoherenceReport:
    """Time-dispersion coherence ``(omega/R) * max_n ||V^* f_n||^2``.

    ``V`` spans the row space of ``C`` at its numerical rank (singular values
    above ``rel_threshold * sigma_max``) and ``f_n`` is column ``n`` of the
    first ``W`` rows of the unitary ``omega``-point DFT matrix. All ``omega``
    projections are computed at once with one FFT per column of ``V``.
    """
    arr = _as_array(C)
    W = arr.shape[1]
    bins = frequency_bins(W, omega, _mode_of(C))
    _, s, Vh = np.linalg.svd(arr, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        raise UndefinedMetricError("coherence is undefined for the zero matrix")
    R = int(np.sum(s > rel_threshold * s[0]))
    V = Vh[:R].conj().T
    padded = np.zeros((omega, R), dtype=np.complex128)
    padded[bins] = V
    # |fft(V)[n]| = |V^* f_n| with f_n the synthesis vector of sample n
    proj = np.fft.fft(padded, axis=0) / np.sqrt(omega)
    energy = np.sum(np.abs(proj) ** 2, axis=1)
    n = int(np.argmax(energy))
    return CoherenceReport(float(omega / R * energy[n]), n, omega, R)


def synthesize_samples(C, omega: int) -> np.ndarray:
    """``M x omega`` time samples of the ensemble on ``[0, 1)``."""
    arr = _as_array(C)
    M, W = arr.shape
    bins = frequency_bins(W, omega, _mode_of(C))
    padded = np.zeros((M, omega), dtype=np.complex128)
    padded[:, bins] = arr
    return np.fft.ifft(padded, axis=1) * np.sqrt(omega)


def analyze_samples(X, bandwidth: int, symmetry_mode=SymmetryMode.MATRIX) -> np.ndarray:
    """Inverse of :func:`synthesize_samples`: unitary DFT truncated to ``W`` bins."""
    X = np.atleast_2d(np.asarray(X))
    omega = X.shape[1]
    bins = frequency_bins(bandwidth, omega, symmetry_mode)
    return np.fft.fft(X, axis=1)[:, bins] / np.sqrt(omega)


def rank_r_relative_error(C, r: int) -> float:
    """``||C - C_r||_F / ||C||_F`` for the best rank-``r`` approximation ``C_r``."""
    arr = _as_array(C)
    if not 1 <= r <= min(arr.shape):
        raise DimensionError(f"r={r} outside [1, {min(arr.shape)}]")
    s = np.linalg.svd(arr, compute_uv=False)
    total = float(np.sum(s**2))
    if total == 0.0:
        raise UndefinedMetricError("relative error is undefined for the zero matrix")
    return float(np.sqrt(np.sum(s[r:] ** 2) / total))
