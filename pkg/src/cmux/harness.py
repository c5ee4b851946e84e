"""Monte-Carlo experiments: single trials, phase grids, minimum-rate search,
noise sweeps and ingestion of real multichannel recordings.

Every random draw is keyed by a seed derived from ``(base_seed, keys...)``
through :func:`derive_seed`, so results do not depend on execution order or
on how trials are spread over worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from cmux.ensemble import (
    CoefficientMatrix,
    EnsembleSpec,
    Generator,
    SymmetryMode,
    analyze_samples,
    generate_ensemble,
    rank_r_relative_error,
)
from cmux.errors import CmuxError, ConstraintInfeasibleError, FormatError, SearchExhaustedError
from cmux.operators import OperatorKind, add_noise, make_operator, noise_bound, sigma_for_snr
from cmux.solvers import SolverConfig, auto_lambda, klt_estimate, matrix_lasso

__all__ = [
    "SUCCESS_THRESHOLD",
    "derive_seed",
    "TrialSpec",
    "trial_spec",
    "Metrics",
    "PhaseGrid",
    "MinRateResult",
    "SweepRow",
    "RecordingStudy",
    "relative_error",
    "run_trial",
    "solve_trial",
    "run_trials",
    "phase_transition",
    "min_rate_search",
    "noise_sweep",
    "read_recording_csv",
    "ingest_recording",
    "metrics_csv",
    "sweep_csv",
]

SUCCESS_THRESHOLD = 1e-3
METRIC_COLUMNS = ("M", "W", "R", "omega", "kind", "sigma", "seed", "rel_error", "success", "eta", "gamma")


def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode())
    return int(k) & 0xFFFFFFFF


def derive_seed(base_seed: int, *keys) -> int:
    """64-bit seed hashed from a base seed and integer/string keys."""
    ss = np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1), spawn_key=tuple(_key(k) for k in keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class TrialSpec:
    """One acquisition-and-recovery experiment.

    ``seed`` drives the codes, filters and noise; the ensemble carries its
    own seed. Noise is given either as an absolute ``noise_sigma`` or as
    ``snr_db`` measured against the noiseless samples. A time-concentrated
    ensemble without an explicit ``time_grid`` is concentrated on the
    sampling grid.
    """

    ensemble: EnsembleSpec
    omega: int
    operator_kind: OperatorKind = OperatorKind.MMUX
    noise_sigma: float = 0.0
    snr_db: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    method: str = "lasso"
    seed: int = 0
    success_threshold: float = SUCCESS_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "operator_kind", OperatorKind(self.operator_kind))
        M, W = self.ensemble.shape
        if not W <= self.omega <= M * W:
            raise ValueError(f"omega={self.omega} outside [W, MW] = [{W}, {M * W}]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.method not in ("lasso", "klt"):
            raise ValueError(f"unknown method {self.method!r}")

    def seeds(self) -> tuple[int, int, int]:
        """(code seed, filter seed, noise seed)."""
        return (derive_seed(self.seed, "codes"), derive_seed(self.seed, "filters"),
                derive_seed(self.seed, "noise"))

    def resolved_ensemble(self) -> EnsembleSpec:
        e = self.ensemble
        if e.generator is Generator.TIME_CONCENTRATED and e.time_grid is None:
            e = replace(e, time_grid=self.omega)
        return e


@dataclass(frozen=True)
class Metrics:
    """Outcome of one trial. ``eta`` is the sampling efficiency, not a noise bound."""

    M: int
    W: int
    R: int
    omega: int
    kind: str
    sigma: float
    seed: int
    rel_error: float
    success: bool
    eta: float
    gamma: float
    iterations: int = 0
    converged: bool = True
    trace_monotone: bool = True
    method: str = "lasso"

    @property
    def efficiency(self) -> float:
        return self.eta

    @property
    def compression(self) -> float:
        return self.gamma

    @property
    def oversampling(self) -> float:
        return 1.0 / self.eta

    @property
    def rel_error_db(self) -> float:
        return 20.0 * math.log10(self.rel_error) if self.rel_error > 0 else -math.inf

    def row(self) -> list:
        return [self.M, self.W, self.R, self.omega, self.kind, repr(self.sigma), self.seed,
                repr(self.rel_error), int(self.success), repr(self.eta), repr(self.gamma)]


def efficiency(M: int, W: int, R: int, omega: int) -> float:
    return R * (W + M - R) / omega


def relative_error(estimate, truth) -> float:
    """``||estimate - truth||_F / ||truth||_F``; 0 when both vanish, inf when only truth does."""
    diff = float(np.linalg.norm(np.asarray(estimate) - np.asarray(truth)))
    ref = float(np.linalg.norm(np.asarray(truth)))
    if ref == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / ref


def solve_trial(spec: TrialSpec, op, y, sigma):
    """Recover ``C`` from samples ``y`` with the method and solver named by ``spec``."""
    if spec.method == "klt":
        lam = spec.solver.lam
        if lam == "auto":
            lam = auto_lambda(op, y, noise_sigma=sigma, method="klt", seed=derive_seed(spec.seed, "lambda"))
        if lam == 0.0:
            lam = np.finfo(float).tiny
        return klt_estimate(op, y, lam)
    cfg = spec.solver
    if sigma > 0 and cfg.lam == "auto" and cfg.noise_bound is None:
        cfg = replace(cfg, noise_bound=noise_bound(op.omega, sigma))
    return matrix_lasso(op, y, cfg)


def run_trial(spec: TrialSpec) -> Metrics:
    """Generate, acquire, optionally add noise, recover, score."""
    ens = spec.resolved_ensemble()
    M, W, R = ens.num_signals, ens.bandwidth, ens.rank
    C0 = generate_ensemble(ens)
    code_seed, filter_seed, noise_seed = spec.seeds()
    op = make_operator(spec.operator_kind, M, W, spec.omega, code_seed, filter_seed, ens.symmetry_mode)
    clean = op.forward(C0.entries)
    sigma = spec.noise_sigma
    if spec.snr_db is not None:
        sigma = sigma_for_snr(clean, spec.snr_db)
    y = add_noise(clean, sigma, noise_seed).values
    try:
        report = solve_trial(spec, op, y, sigma)
    except ConstraintInfeasibleError as exc:
        report = exc.report
    if report is None:
        err, its, conv, mono = math.inf, 0, False, True
    else:
        err = relative_error(report.solution.entries, C0.entries)
        its, conv, mono = report.iterations, report.converged, report.trace_is_monotone()
    return Metrics(
        M=M, W=W, R=R, omega=spec.omega, kind=spec.operator_kind.value, sigma=float(sigma),
        seed=spec.seed, rel_error=err, success=bool(err <= spec.success_threshold),
        eta=efficiency(M, W, R, spec.omega), gamma=spec.omega / (M * W),
        iterations=its, converged=conv, trace_monotone=mono, method=spec.method,
    )


def run_trials(specs, workers: int = 1) -> list[Metrics]:
    """Run trials, in worker processes when ``workers > 1``; output order follows input."""
    specs = list(specs)
    if workers <= 1 or len(specs) <= 1:
        return [run_trial(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, specs, chunksize=max(1, len(specs) // (4 * workers))))


def trial_spec(M, W, R, omega, trial, base_seed, kind=OperatorKind.MMUX,
                generator=Generator.GAUSSIAN_FACTORS, symmetry_mode=SymmetryMode.MATRIX,
                solver=None, method="lasso", noise_sigma=0.0, snr_db=None, data=None) -> TrialSpec:
    """Trial ``trial`` of an experiment seeded by ``base_seed``.

    The ensemble seed ignores ``omega`` so that every rate sees the same
    ensemble; the operator seed includes it.
    """
    ens = EnsembleSpec(M, W, R, generator=generator, symmetry_mode=symmetry_mode,
                       seed=derive_seed(base_seed, "ensemble", M, W, R, trial), data=data)
    return TrialSpec(
        ensemble=ens, omega=omega, operator_kind=kind, noise_sigma=noise_sigma, snr_db=snr_db,
        solver=solver or SolverConfig(), method=method,
        seed=derive_seed(base_seed, "operator", M, W, R, omega, trial),
    )


@dataclass
class PhaseGrid:
    """Success rates over ``ranks x omegas`` (rows follow ``ranks``)."""

    omegas: list
    ranks: list
    success_rate: np.ndarray
    trials_per_cell: int
    base_seed: int
    M: int
    W: int
    kind: str
    records: list = field(default_factory=list, repr=False)

    def standard_error(self) -> np.ndarray:
        p = self.success_rate
        return np.sqrt(p * (1 - p) / max(self.trials_per_cell, 1))

    def efficiency_axis(self) -> np.ndarray:
        return np.array([[efficiency(self.M, self.W, R, o) for o in self.omegas] for R in self.ranks])

    def compression_axis(self) -> np.ndarray:
        return np.array(self.omegas, dtype=float) / (self.M * self.W)

    def matrix_csv(self) -> str:
        """Gnuplot-friendly dense matrix: first row omegas, first column ranks."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["R\\omega"] + list(self.omegas))
        for R, row in zip(self.ranks, self.success_rate):
            w.writerow([R] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def ascii(self) -> str:
        shades = " .:-=+*#%@"
        lines = ["R\\omega " + " ".join(f"{o:>6d}" for o in self.omegas)]
        for R, row in zip(self.ranks, self.success_rate):
            cells = " ".join(f"{shades[min(int(v * 9.999), 9)] * 3:>6s}" for v in row)
            lines.append(f"{R:>7d} {cells}")
        return "\n".join(lines)


def phase_transition(M: int, W: int, omegas, ranks, trials: int, base_seed: int = 0,
                     kind=OperatorKind.MMUX, generator=Generator.GAUSSIAN_FACTORS,
                     solver: SolverConfig | None = None, workers: int = 1) -> PhaseGrid:
    """Empirical success probability for each (rank, omega) cell."""
    omegas, ranks = [int(o) for o in omegas], [int(r) for r in ranks]
    if not omegas or not ranks:
        raise ValueError("phase grid axes must be nonempty")
    kind = OperatorKind(kind)
    specs = [
        trial_spec(M, W, R, o, t, base_seed, kind, Generator(generator), solver=solver)
        for R in ranks for o in omegas for t in range(trials)
    ]
    records = run_trials(specs, workers)
    rate = np.zeros((len(ranks), len(omegas)))
    it = iter(records)
    for i in range(len(ranks)):
        for j in range(len(omegas)):
            rate[i, j] = sum(next(it).success for _ in range(trials)) / trials if trials else 0.0
    return PhaseGrid(omegas, ranks, rate, trials, base_seed, M, W, kind.value, records)


@dataclass
class MinRateResult:
    """``evaluations`` maps each tested omega to its success rate (over the
    trials actually run); ``records`` holds every trial in execution order."""

    rank: int
    omega_star: int
    evaluations: dict
    M: int
    W: int
    records: list = field(default_factory=list, repr=False)

    @property
    def compression(self) -> float:
        return self.omega_star / (self.M * self.W)


def min_rate_search(M: int, W: int, R: int, trials: int, target_success: float = 0.99,
                    base_seed: int = 0, kind=OperatorKind.MMUX,
                    generator=Generator.GAUSSIAN_FACTORS, solver: SolverConfig | None = None,
                    start: int | None = None, growth: float = 1.25, resolution: float = 0.02,
                    data=None) -> MinRateResult:
    """Smallest omega whose empirical success rate reaches ``target_success``.

    Geometric steps up from ``start`` (default: the degrees of freedom
    ``R(W+M-R)``) bracket the threshold, then bisection refines it to within
    ``resolution * omega``. Each evaluation stops as soon as the failures
    make the target unreachable. Trial ``t`` uses the same ensemble at every
    omega.

    Raises
    ------
    SearchExhaustedError
        If even ``omega = M*W`` misses the target.
    """
    if not 0 < target_success < 1:
        raise ValueError("target_success must lie in (0, 1)")
    lo_bound, hi_bound = W, M * W
    allowed = math.floor(trials * (1 - target_success) + 1e-9)
    evaluations: dict = {}
    records: list = []

    def passes(omega: int) -> bool:
        if omega in evaluations:
            return evaluations[omega] >= target_success
        fails = 0
        for t in range(trials):
            spec = trial_spec(M, W, R, omega, t, base_seed, OperatorKind(kind), Generator(generator),
                               solver=solver, data=data)
            m = run_trial(spec)
            records.append(m)
            if not m.success:
                fails += 1
                if fails > allowed:
                    evaluations[omega] = (t + 1 - fails) / trials
                    return False
        evaluations[omega] = (trials - fails) / trials
        return True

    omega = int(start) if start is not None else R * (W + M - R)
    omega = min(max(omega, lo_bound), hi_bound)
    if passes(omega):
        if omega == lo_bound or passes(lo_bound):
            return MinRateResult(R, lo_bound, evaluations, M, W, records)
        lo, hi = lo_bound, omega
    else:
        lo = omega
        while True:
            if omega >= hi_bound:
                raise SearchExhaustedError(f"no omega <= MW={hi_bound} reaches success {target_success}")
            omega = min(hi_bound, max(omega + 1, int(math.ceil(omega * growth))))
            if passes(omega):
                hi = omega
                break
            lo = omega
    while hi - lo > max(1, int(resolution * hi)):
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return MinRateResult(R, hi, evaluations, M, W, records)


@dataclass(frozen=True)
class SweepRow:
    snr_db: float | None
    omega: int
    method: str
    mean_rel_error: float
    mean_rel_error_db: float
    trials: int


def noise_sweep(M: int, W: int, R: int, omegas, snrs_db, methods=("lasso",), trials: int = 10,
                base_seed: int = 0, kind=OperatorKind.MMUX, solver: SolverConfig | None = None,
                workers: int = 1, return_records: bool = False):
    """Mean relative error for each (SNR, omega, method) combination.

    ``snrs_db`` may contain ``None`` for noiseless runs. Trials are paired:
    trial ``t`` sees the same ensemble, operator and noise for every method.
    The Lasso uses the bound ``sqrt(omega + sqrt(omega)) * sigma``.
    """
    omegas = [int(o) for o in omegas]
    snrs_db = list(snrs_db)
    if not omegas or not snrs_db or not methods:
        raise ValueError("sweep lists must be nonempty")
    specs = []
    for snr in snrs_db:
        for o in omegas:
            for method in methods:
                for t in range(trials):
                    base = trial_spec(M, W, R, o, t, base_seed, kind, solver=solver, method=method)
                    specs.append(replace(base, snr_db=snr))
    records = run_trials(specs, workers)
    rows = []
    it = iter(records)
    for snr in snrs_db:
        for o in omegas:
            for method in methods:
                errs = [next(it).rel_error for _ in range(trials)]
                mean = float(np.mean(errs))
                rows.append(SweepRow(snr, o, method, mean,
                                     20 * math.log10(mean) if mean > 0 else -math.inf, trials))
    return (rows, records) if return_records else rows


def read_recording_csv(path) -> np.ndarray:
    """Load a recording: one column per channel, one row per time sample.

    A non-numeric first row is treated as a header. Returns ``channels x samples``.
    """
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path}: empty recording")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    width = len(rows[0]) if rows else 0
    data = []
    for i, r in enumerate(rows):
        if len(r) != width:
            raise FormatError(f"{path}: row {i} has {len(r)} channels, expected {width}")
        try:
            data.append([float(c) for c in r])
        except ValueError as exc:
            raise FormatError(f"{path}: row {i}: {exc}") from None
    if not data:
        raise FormatError(f"{path}: no samples")
    return np.asarray(data, dtype=float).T


@dataclass
class RecordingStudy:
    windows: list
    rank_errors: np.ndarray
    ranks: list
    recovery: list = field(default_factory=list)


def ingest_recording(source, window_length: int, channels=None, bandwidth: int | None = None,
                     ranks=None, omegas=(), kind=OperatorKind.MMUX, base_seed: int = 0,
                     max_windows: int | None = None, solver: SolverConfig | None = None) -> RecordingStudy:
    """Turn a recording into coefficient matrices and study their rank.

    The record is cut into consecutive non-overlapping rectangular windows.
    Each channel's window is transformed by the unitary DFT and truncated to
    ``bandwidth`` bins (default: the whole window). ``rank_errors[i, j]`` is
    the best rank-``ranks[j]`` relative error of window ``i``. For every
    ``omega`` in ``omegas`` the first window is acquired with a fresh
    operator and recovered by the constrained nuclear-norm solver; the
    relative errors are listed in ``recovery`` as ``(omega, gamma, rel_error)``.
    """
    data = read_recording_csv(source) if not isinstance(source, np.ndarray) else np.asarray(source, float)
    if channels is not None:
        data = data[list(channels)]
    n_ch, n = data.shape
    if not 1 <= window_length <= n:
        raise ValueError(f"window length {window_length} outside [1, {n}]")
    W = bandwidth or window_length
    count = n // window_length
    if max_windows is not None:
        count = min(count, max_windows)
    windows = [
        CoefficientMatrix(analyze_samples(data[:, i * window_length:(i + 1) * window_length], W))
        for i in range(count)
    ]
    ranks = list(ranks) if ranks is not None else list(range(1, min(n_ch, W) + 1))
    errs = np.array([[rank_r_relative_error(c, r) for r in ranks] for c in windows])
    study = RecordingStudy(windows, errs, ranks)
    for o in omegas:
        C0 = windows[0].entries
        op = make_operator(kind, n_ch, W, int(o), derive_seed(base_seed, "codes", o),
                           derive_seed(base_seed, "filters", o))
        try:
            rep = matrix_lasso(op, op.forward(C0), solver)
            err = relative_error(rep.solution.entries, C0)
        except CmuxError:
            err = math.inf
        study.recovery.append((int(o), o / (n_ch * W), err))
    return study


def metrics_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for m in records:
        w.writerow(m.row())
    return buf.getvalue()


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["snr_db", "omega", "method", "mean_rel_error", "mean_rel_error_db", "trials"])
    for r in rows:
        w.writerow([r.snr_db, r.omega, r.method, repr(r.mean_rel_error), repr(r.mean_rel_error_db), r.trials])
    return buf.getvalue()


def metrics_dict(m: Metrics) -> dict:
    return asdict(m)
