"""M-Mux and FM-Mux measurement operators.

Each operator maps an ``M x W`` coefficient matrix ``C`` to ``omega``
samples. With ``x_m`` the rate-``omega`` samples of signal ``m`` (see
:func:`cmux.ensemble.synthesize_samples`), ``d_m`` its +-1 chipping
sequence and ``H_m`` the circulant filter with unit-modulus spectrum
``h_m``:

* ``mmux``:          ``y = sum_m d_m * x_m``
* ``fmmux``:         ``y = sum_m H_m (d_m * x_m)``
* ``fmmux-swapped``: ``y = sum_m d_m * (filtered x_m)``, the filter acting
  on the ``W`` occupied bins only

Apply and adjoint cost ``O(M omega log omega)``. The adjoint is taken with
respect to ``<X, Y> = tr(X Y^*)`` on matrices and ``y^* z`` on samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from cmux._backend import kernels
from cmux.ensemble import CoefficientMatrix, SymmetryMode, frequency_bins
from cmux.errors import DenseCapError, DimensionError

__all__ = [
    "OperatorKind",
    "ModulationCodes",
    "FilterBank",
    "SampleVector",
    "RipProbeReport",
    "MeasurementOperator",
    "generate_codes",
    "generate_filters",
    "make_operator",
    "apply",
    "adjoint",
    "materialize_dense",
    "operator_norm",
    "norm_bound",
    "rip_probe",
    "add_noise",
    "sigma_for_snr",
    "noise_bound",
    "DENSE_CAP",
]

DENSE_CAP = 2**24

# PRNG stream tags; (seed, stream, channel, index) keys every random draw.
_STREAM_CODES = 1
_STREAM_PHASES = 2
_STREAM_FILTER_SIGNS = 3


class OperatorKind(str, Enum):
    MMUX = "mmux"
    FMMUX = "fmmux"
    FMMUX_SWAPPED = "fmmux-swapped"


@dataclass(frozen=True, eq=False)
class ModulationCodes:
    """``omega x M`` matrix of +-1 chips; column ``m`` drives channel ``m``."""

    signs: np.ndarray
    seed: int

    def __post_init__(self):
        s = np.array(self.signs, dtype=np.float64, copy=True)
        if s.ndim != 2 or not np.all(np.abs(s) == 1.0):
            raise ValueError("codes must be a 2-D array of +-1")
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    @property
    def omega(self) -> int:
        return self.signs.shape[0]

    @property
    def num_channels(self) -> int:
        return self.signs.shape[1]

    @cached_property
    def by_channel(self) -> np.ndarray:
        t = np.ascontiguousarray(self.signs.T)
        t.setflags(write=False)
        return t


@dataclass(frozen=True, eq=False)
class FilterBank:
    """``M x omega`` unit-modulus filter spectra with real impulse responses."""

    spectra: np.ndarray
    seed: int

    def __post_init__(self):
        h = np.array(self.spectra, dtype=np.complex128, copy=True)
        if h.ndim != 2:
            raise ValueError("filter spectra must be 2-D")
        h.setflags(write=False)
        object.__setattr__(self, "spectra", h)

    @property
    def num_channels(self) -> int:
        return self.spectra.shape[0]

    @property
    def omega(self) -> int:
        return self.spectra.shape[1]

    def impulse_responses(self) -> np.ndarray:
        """Time-domain filter taps, ``h_m = F^* h_hat_m / sqrt(omega)``."""
        return np.fft.ifft(self.spectra, axis=1)


@dataclass(frozen=True, eq=False)
class SampleVector:
    values: np.ndarray
    noise_level: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def is_real(self, tol: float = 1e-9) -> bool:
        scale = float(np.linalg.norm(self.values))
        return bool(np.max(np.abs(self.values.imag), initial=0.0) <= tol * scale)


@dataclass(frozen=True)
class RipProbeReport:
    rank_tested: int
    num_trials: int
    ratios: tuple
    empirical_delta: float | None
    universal: bool


def generate_codes(num_channels: int, omega: int, seed: int) -> ModulationCodes:
    """I.i.d. Rademacher chips from the counter-based generator."""
    if num_channels < 1 or omega < 1:
        raise ValueError("need at least one channel and one sample")
    signs_t = kernels.rademacher(seed, _STREAM_CODES, num_channels, omega)
    return ModulationCodes(signs_t.T, seed)


def generate_filters(num_channels: int, omega: int, seed: int) -> FilterBank:
    """Random unit-modulus spectra, conjugate symmetric so the taps are real.

    Bin 0 (and bin ``omega/2`` when ``omega`` is even) is a fair +-1; the
    other bins in the lower half carry uniform random phases and the upper
    half mirrors them.
    """
    if num_channels < 1 or omega < 1:
        raise ValueError("need at least one channel and one sample")
    phases = 2.0 * np.pi * kernels.uniform01(seed, _STREAM_PHASES, num_channels, omega)
    signs = kernels.rademacher(seed, _STREAM_FILTER_SIGNS, num_channels, 2)
    h = np.empty((num_channels, omega), dtype=np.complex128)
    h[:, 0] = signs[:, 0]
    half = (omega - 1) // 2
    if half:
        lower = np.exp(1j * phases[:, 1 : half + 1])
        h[:, 1 : half + 1] = lower
        h[:, omega - half :] = lower[:, ::-1].conj()
    if omega % 2 == 0:
        h[:, omega // 2] = signs[:, 1]
    return FilterBank(h, seed)


class MeasurementOperator:
    """Immutable linear map from ``M x W`` coefficient matrices to samples.

    Parameters
    ----------
    kind : OperatorKind or str
    bandwidth : int
        Number of coefficients ``W`` per signal.
    codes : ModulationCodes
        Defines ``M`` and ``omega``.
    filters : FilterBank, optional
        Required for the FM-Mux kinds.
    layout : SymmetryMode
        Frequency layout of the coefficients; must match the ensembles it is
        applied to (signal mode puts negative frequencies at the top bins).
    """

    def __init__(self, kind, bandwidth, codes, filters=None, layout=SymmetryMode.MATRIX):
        self._kind = OperatorKind(kind)
        self._codes = codes
        self._filters = filters
        self._layout = SymmetryMode(layout)
        omega, M = codes.omega, codes.num_channels
        if bandwidth < 1 or omega < bandwidth:
            raise DimensionError(f"need 1 <= W <= omega, got W={bandwidth}, omega={omega}")
        if self._kind is not OperatorKind.MMUX:
            if filters is None:
                raise ValueError(f"{self._kind.value} needs a filter bank")
            if filters.spectra.shape != (M, omega):
                raise DimensionError(
                    f"filter bank shape {filters.spectra.shape} does not match (M, omega)={(M, omega)}"
                )
        self._W = int(bandwidth)
        self._bins = frequency_bins(self._W, omega, self._layout)
        if self._kind is OperatorKind.FMMUX_SWAPPED:
            self._coef_filter = np.ascontiguousarray(filters.spectra[:, self._bins])
        self._norm_cache = None

    @property
    def kind(self) -> OperatorKind:
        return self._kind

    @property
    def codes(self) -> ModulationCodes:
        return self._codes

    @property
    def filters(self) -> FilterBank | None:
        return self._filters

    @property
    def layout(self) -> SymmetryMode:
        return self._layout

    @property
    def num_channels(self) -> int:
        return self._codes.num_channels

    @property
    def bandwidth(self) -> int:
        return self._W

    @property
    def omega(self) -> int:
        return self._codes.omega

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.num_channels, self._W, self.omega)

    @property
    def input_shape(self) -> tuple[int, int]:
        return (self.num_channels, self._W)

    def __repr__(self):
        M, W, omega = self.dims
        return f"MeasurementOperator({self._kind.value}, M={M}, W={W}, omega={omega})"

    def _interpolate(self, C):
        M, omega = self.num_channels, self.omega
        padded = np.zeros((M, omega), dtype=np.complex128)
        padded[:, self._bins] = C
        return np.fft.ifft(padded, axis=1) * np.sqrt(omega)

    def _analyze(self, Z):
        return np.fft.fft(Z, axis=1)[:, self._bins] / np.sqrt(self.omega)

    def forward(self, C) -> np.ndarray:
        """Samples ``T(C)`` as a complex vector of length ``omega``."""
        C = np.asarray(C)
        if C.shape != self.input_shape:
            raise DimensionError(f"expected coefficients of shape {self.input_shape}, got {C.shape}")
        signs_t = self._codes.by_channel
        if self._kind is OperatorKind.MMUX:
            return kernels.modulate_sum(self._interpolate(C), signs_t)
        if self._kind is OperatorKind.FMMUX_SWAPPED:
            return kernels.modulate_sum(self._interpolate(C * self._coef_filter), signs_t)
        spectra = np.fft.fft(self._interpolate(C) * signs_t, axis=1)
        return np.fft.ifft(np.einsum("mn,mn->n", self._filters.spectra, spectra))

    def adjoint(self, y) -> np.ndarray:
        """``T^*(y)`` as an ``M x W`` complex matrix."""
        y = np.asarray(y, dtype=np.complex128).reshape(-1)
        if y.size != self.omega:
            raise DimensionError(f"expected {self.omega} samples, got {y.size}")
        signs_t = self._codes.by_channel
        if self._kind is OperatorKind.MMUX:
            return self._analyze(kernels.demodulate(y, signs_t))
        if self._kind is OperatorKind.FMMUX_SWAPPED:
            return self._analyze(kernels.demodulate(y, signs_t)) * self._coef_filter.conj()
        filtered = np.fft.ifft(self._filters.spectra.conj() * np.fft.fft(y)[None, :], axis=1)
        return self._analyze(filtered * signs_t)

    def gram(self, C) -> np.ndarray:
        return self.adjoint(self.forward(C))


def make_operator(kind, num_channels, bandwidth, omega, code_seed, filter_seed=None,
                  layout=SymmetryMode.MATRIX) -> MeasurementOperator:
    """Build an operator from seeds alone."""
    kind = OperatorKind(kind)
    codes = generate_codes(num_channels, omega, code_seed)
    filters = None
    if kind is not OperatorKind.MMUX:
        if filter_seed is None:
            raise ValueError(f"{kind.value} needs a filter seed")
        filters = generate_filters(num_channels, omega, filter_seed)
    return MeasurementOperator(kind, bandwidth, codes, filters, layout)


def _entries(C):
    return C.entries if isinstance(C, CoefficientMatrix) else np.asarray(C, dtype=np.complex128)


def apply(op: MeasurementOperator, C) -> SampleVector:
    return SampleVector(op.forward(_entries(C)))


def adjoint(op: MeasurementOperator, y) -> np.ndarray:
    if isinstance(y, SampleVector):
        y = y.values
    return op.adjoint(y)


def materialize_dense(op: MeasurementOperator, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``omega x (M*W)`` matrix acting on ``C.ravel()`` (row-major).

    Column ``m*W + w`` is the image of the unit matrix ``E[m, w]``. Meant
    for oracle tests only.
    """
    M, W, omega = op.dims
    if M * W * omega > cap:
        raise DenseCapError(f"M*W*omega={M * W * omega} exceeds cap {cap}")
    T = np.empty((omega, M * W), dtype=np.complex128)
    E = np.zeros((M, W), dtype=np.complex128)
    for j in range(M * W):
        E.flat[j] = 1.0
        T[:, j] = op.forward(E)
        E.flat[j] = 0.0
    return T


def operator_norm(op: MeasurementOperator, iterations: int = 500, seed: int = 0,
                  tol: float = 1e-6) -> float:
    """Spectral norm ``||T||`` by power iteration on ``T^* T``.

    Stops when the eigenvalue estimate changes by less than ``tol``
    (relative) or after ``iterations`` steps.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal(op.input_shape) + 1j * rng.standard_normal(op.input_shape)
    X /= np.linalg.norm(X)
    lam = 0.0
    for _ in range(iterations):
        Z = op.gram(X)
        new = float(np.linalg.norm(Z))
        if new == 0.0:
            return 0.0
        X = Z / new
        if abs(new - lam) <= tol * new:
            lam = new
            break
        lam = new
    return float(np.sqrt(lam))


def norm_bound(op: MeasurementOperator) -> float:
    """Analytical high-probability bound ``sqrt(M log(M^2 omega W))``."""
    M, W, omega = op.dims
    return float(np.sqrt(M * np.log(M * M * omega * W)))


def rip_probe(op: MeasurementOperator, rank: int, trials: int, seed: int) -> RipProbeReport:
    """Empirical isometry constant over random unit-norm rank-``rank`` inputs.

    Reports ``max |ratio**2 - 1|`` with ``ratio = ||T(C)|| / ||C||_F``. For the
    M-Mux the probe is not a universal statement (it depends on coherence),
    which the report records.
    """
    M, W, _ = op.dims
    if not 1 <= rank <= min(M, W):
        raise ValueError(f"rank {rank} outside [1, {min(M, W)}]")
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        C = rng.standard_normal((M, rank)) @ rng.standard_normal((rank, W))
        C /= np.linalg.norm(C)
        ratios.append(float(np.linalg.norm(op.forward(C))))
    delta = max(abs(r * r - 1.0) for r in ratios) if ratios else None
    return RipProbeReport(rank, trials, tuple(ratios), delta, op.kind is not OperatorKind.MMUX)


def noise_bound(omega: int, sigma: float) -> float:
    """High-probability bound on ``||xi||_2`` for ``xi ~ N(0, sigma^2 I_omega)``."""
    return float(np.sqrt(omega + np.sqrt(omega)) * sigma)


def add_noise(y, sigma: float, seed: int) -> SampleVector:
    """Add real i.i.d. Gaussian noise of standard deviation ``sigma``."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    values = y.values if isinstance(y, SampleVector) else np.asarray(y, dtype=np.complex128)
    if sigma == 0:
        return SampleVector(values, 0.0, 0.0)
    xi = np.random.default_rng(seed).standard_normal(values.size) * sigma
    return SampleVector(values + xi, noise_bound(values.size, sigma), float(sigma))


def sigma_for_snr(clean, snr_db: float) -> float:
    """Noise standard deviation giving ``10 log10(||y||^2 / E||xi||^2) = snr_db``."""
    values = clean.values if isinstance(clean, SampleVector) else np.asarray(clean)
    power = float(np.vdot(values, values).real)
    return float(np.sqrt(power / (values.size * 10.0 ** (snr_db / 10.0))))
