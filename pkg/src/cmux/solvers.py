"""Recovery of the coefficient matrix from multiplexed samples.

Three estimators share the operator-only interface:

* :func:`matrix_lasso` -- nuclear-norm regularized least squares solved by
  accelerated proximal gradient with singular value thresholding, wrapped
  in a lambda continuation that enforces ``||y - T(C)||_2 <= eta``.
* :func:`klt_estimate` -- the one-step estimator
  ``argmin ||C||_F^2 - 2 Re<y, T(C)> + lam ||C||_*``, which is a single SVT
  of ``T^*(y)``.
* :func:`least_squares_known_mixing` -- CGLS when the mixing matrix is known.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from cmux.ensemble import CoefficientMatrix
from cmux.errors import ConstraintInfeasibleError, IllPosedError
from cmux.operators import MeasurementOperator, SampleVector, make_operator, operator_norm

__all__ = [
    "SolverConfig",
    "SolverReport",
    "MixingMatrix",
    "svt",
    "nuclear_norm",
    "klt_objective",
    "klt_estimate",
    "lasso_objective",
    "data_gradient",
    "matrix_lasso",
    "least_squares_known_mixing",
    "auto_lambda",
    "solution_rank",
]

STEP_SAFETY = 1.05
MIN_STAGE_ITERATIONS = 5
_TINY = 1e-300


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    ``lam="auto"`` with ``continuation=True`` runs the constrained program:
    lambda starts at ``||T^*(y)||`` and is multiplied by
    ``continuation_factor`` until the residual drops to ``noise_bound``
    (``1e-9 ||y||`` when ``noise_bound`` is None).
    """

    lam: float | str = "auto"
    noise_bound: float | None = None
    max_iterations: int = 2000
    step_size: float | str = "auto"
    convergence_tol: float = 1e-8
    continuation: bool = True
    rank_cap: int | None = None
    continuation_factor: float = 0.5
    max_continuation_steps: int = 40

    def __post_init__(self):
        if self.lam != "auto" and not (isinstance(self.lam, (int, float)) and self.lam > 0):
            raise ValueError(f"lambda must be positive or 'auto', got {self.lam!r}")
        if self.noise_bound is not None and self.noise_bound < 0:
            raise ValueError("noise bound must be nonnegative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.step_size != "auto" and not (isinstance(self.step_size, (int, float)) and self.step_size > 0):
            raise ValueError("step_size must be positive or 'auto'")
        if not 0 < self.continuation_factor < 1:
            raise ValueError("continuation_factor must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "noise_bound": self.noise_bound,
            "max_iterations": self.max_iterations,
            "step_size": self.step_size,
            "convergence_tol": self.convergence_tol,
            "continuation": self.continuation,
            "rank_cap": self.rank_cap,
            "continuation_factor": self.continuation_factor,
            "max_continuation_steps": self.max_continuation_steps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(**d)


@dataclass
class SolverReport:
    solution: CoefficientMatrix
    iterations: int
    final_residual: float
    final_objective: float
    solution_rank: int
    converged: bool
    objective_trace: list = field(default_factory=list)
    restart_points: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    method: str = "lasso"

    def trace_is_monotone(self, rtol: float = 1e-12) -> bool:
        """Objective nonincreasing between consecutive restart points."""
        bounds = list(self.restart_points) + [len(self.objective_trace)]
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            seg = np.asarray(self.objective_trace[lo:hi])
            if seg.size > 1 and np.any(np.diff(seg) > rtol * np.abs(seg[:-1])):
                return False
        return True

    def to_dict(self, include_trace: bool = False) -> dict:
        d = {
            "method": self.method,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "final_objective": self.final_objective,
            "solution_rank": self.solution_rank,
            "converged": self.converged,
            "lambdas": list(self.lambdas),
            "shape": list(self.solution.shape),
        }
        if include_trace:
            d["objective_trace"] = list(self.objective_trace)
            d["restart_points"] = list(self.restart_points)
        return d

    def to_json(self, include_trace: bool = False) -> str:
        return json.dumps(self.to_dict(include_trace), indent=2)


@dataclass(frozen=True)
class MixingMatrix:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.complex128, copy=True)
        if a.ndim != 2:
            raise ValueError("mixing matrix must be 2-D")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def condition_number(self) -> float:
        s = np.linalg.svd(self.entries, compute_uv=False)
        return float(s[0] / s[-1]) if s[-1] > 0 else math.inf


def _values(y) -> np.ndarray:
    if isinstance(y, SampleVector):
        return y.values
    return np.asarray(y, dtype=np.complex128).reshape(-1)


def _svd(Z, rank_cap=None, tau=0.0):
    if rank_cap is None or rank_cap >= min(Z.shape):
        return np.linalg.svd(Z, full_matrices=False)
    # Randomized partial SVD; widen until the smallest kept value is below tau.
    k = rank_cap
    rng = np.random.default_rng(0)
    while True:
        p = min(k + 5, min(Z.shape))
        Q, _ = np.linalg.qr(Z @ (rng.standard_normal((Z.shape[1], p)) + 0j))
        for _ in range(2):
            Q, _ = np.linalg.qr(Z @ (Z.conj().T @ Q))
        Ub, s, Vh = np.linalg.svd(Q.conj().T @ Z, full_matrices=False)
        if s[-1] <= tau or p == min(Z.shape):
            return Q @ Ub, s, Vh
        if 2 * k >= min(Z.shape):
            return np.linalg.svd(Z, full_matrices=False)
        k *= 2


def _svt(Z, tau, rank_cap=None):
    U, s, Vh = _svd(Z, rank_cap, tau)
    shrunk = s - tau
    keep = shrunk > 0
    shrunk = shrunk[keep]
    return (U[:, keep] * shrunk) @ Vh[keep], shrunk


def svt(Z, tau: float) -> np.ndarray:
    """Singular value soft thresholding, the prox of ``tau * ||.||_*``.

    Singular values equal to ``tau`` are set exactly to zero.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    Z = np.asarray(Z, dtype=np.complex128)
    return _svt(Z, tau)[0]


def nuclear_norm(X) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(X), compute_uv=False)))


def solution_rank(X, rel: float = 1e-8) -> int:
    s = np.linalg.svd(np.asarray(X), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel * s[0]))


def lasso_objective(op, y, C, lam) -> float:
    r = op.forward(C) - _values(y)
    return float(0.5 * np.vdot(r, r).real + lam * nuclear_norm(C))


def data_gradient(op, y, C) -> np.ndarray:
    """Gradient of ``0.5 ||y - T(C)||^2`` under the real inner product ``Re tr(X Y^*)``."""
    return op.adjoint(op.forward(C) - _values(y))


def klt_objective(op, y, C, lam) -> float:
    C = np.asarray(C)
    inner = np.vdot(_values(y), op.forward(C)).real
    return float(np.vdot(C, C).real - 2.0 * inner + lam * nuclear_norm(C))


def _report(op, y, X, method, **kw) -> SolverReport:
    r = op.forward(X) - y
    return SolverReport(
        solution=CoefficientMatrix(X, op.layout),
        final_residual=float(np.linalg.norm(r)),
        solution_rank=solution_rank(X),
        method=method,
        **kw,
    )


def klt_estimate(op: MeasurementOperator, y, lam: float) -> SolverReport:
    """Closed-form estimate: ``svt(T^*(y), lam / 2)``, one SVD, no iterations."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    y = _values(y)
    X = svt(op.adjoint(y), lam / 2.0)
    obj = klt_objective(op, y, X, lam)
    return _report(op, y, X, "klt", iterations=1, final_objective=obj, converged=True,
                   objective_trace=[obj], restart_points=[0], lambdas=[float(lam)])


def _apg(op, y, lam, X, AX, step, tol, max_iter, rank_cap, trace, restarts, target=-1.0):
    """Monotone accelerated proximal gradient for 0.5||y - T(C)||^2 + lam ||C||_*.

    A step that would increase the objective is rejected and the momentum
    restarted, so the recorded objective never increases. Stops when an
    accepted step lowers the objective by less than ``tol`` (relative), or
    as soon as the residual drops to ``target``.
    """
    nuc = float(np.sum(np.linalg.svd(X, compute_uv=False))) if np.any(X) else 0.0
    r = AX - y
    F = 0.5 * np.vdot(r, r).real + lam * nuc
    restarts.append(len(trace))
    trace.append(F)
    V, AV = X, AX
    t = 1.0
    just_restarted = True
    for k in range(1, max_iter + 1):
        G = op.adjoint(AV - y)
        Z, sz = _svt(V - step * G, step * lam, rank_cap)
        AZ = op.forward(Z)
        rz = AZ - y
        FZ = 0.5 * np.vdot(rz, rz).real + lam * float(np.sum(sz))
        if FZ <= F:
            change = (F - FZ) / max(abs(F), _TINY)
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            beta = (t - 1.0) / t_next
            V = Z + beta * (Z - X)
            AV = AZ + beta * (AZ - AX)
            X, AX, F, t = Z, AZ, FZ, t_next
            trace.append(F)
            just_restarted = False
            if k >= MIN_STAGE_ITERATIONS and (change < tol or float(np.linalg.norm(rz)) <= target):
                return X, AX, F, k, True
        else:
            trace.append(F)
            if just_restarted and k >= MIN_STAGE_ITERATIONS:
                # even a plain proximal step cannot decrease F
                return X, AX, F, k, True
            V, AV, t = X, AX, 1.0
            just_restarted = True
    return X, AX, F, max_iter, False


def _step(op, config) -> float:
    if config.step_size != "auto":
        return float(config.step_size)
    norm = op_norm(op)
    return 1.0 / (STEP_SAFETY * norm * norm) if norm > 0 else 1.0


_NORM_CACHE: dict = {}


def op_norm(op: MeasurementOperator) -> float:
    """Spectral norm of ``op``, computed once per operator instance."""
    key = id(op)
    hit = _NORM_CACHE.get(key)
    if hit is not None and hit[0] is op:
        return hit[1]
    value = operator_norm(op)
    if len(_NORM_CACHE) > 64:
        _NORM_CACHE.clear()
    _NORM_CACHE[key] = (op, value)
    return value


def matrix_lasso(op: MeasurementOperator, y, config: SolverConfig | None = None) -> SolverReport:
    """Nuclear-norm recovery.

    With an explicit ``config.lam`` this solves the penalized program
    ``min 0.5 ||y - T(C)||^2 + lam ||C||_*``. With ``lam="auto"`` and
    continuation enabled it approximates ``min ||C||_*`` subject to
    ``||y - T(C)||_2 <= eta`` by a warm-started sequence of penalized
    solves with geometrically decreasing lambda, returning the first
    iterate that meets the bound.

    Raises
    ------
    ConstraintInfeasibleError
        If the bound is not met after ``max_continuation_steps`` stages.
    """
    config = config or SolverConfig()
    y = _values(y)
    step = _step(op, config)
    X = np.zeros(op.input_shape, dtype=np.complex128)
    AX = np.zeros(op.omega, dtype=np.complex128)
    trace, restarts, lambdas = [], [], []
    y_norm = float(np.linalg.norm(y))

    if config.lam != "auto" or not config.continuation:
        lam = float(config.lam) if config.lam != "auto" else auto_lambda(op, y, method="lasso")
        if lam == 0.0:
            return _report(op, y, X, "lasso", iterations=0, final_objective=0.0, converged=True,
                           objective_trace=[0.0], restart_points=[0], lambdas=[0.0])
        lambdas.append(lam)
        X, AX, F, its, ok = _apg(op, y, lam, X, AX, step, config.convergence_tol,
                                 config.max_iterations, config.rank_cap, trace, restarts)
        return _report(op, y, X, "lasso", iterations=its, final_objective=float(F), converged=ok,
                       objective_trace=trace, restart_points=restarts, lambdas=lambdas)

    eta = config.noise_bound if config.noise_bound is not None else 1e-9 * y_norm
    if y_norm <= eta:
        return _report(op, y, X, "lasso", iterations=0, final_objective=0.0, converged=True,
                       objective_trace=[0.0], restart_points=[0], lambdas=[])
    lam = auto_lambda(op, y, method="lasso")
    total = 0
    converged = True
    for stage in range(config.max_continuation_steps):
        lam *= config.continuation_factor
        lambdas.append(lam)
        # At tiny lambda the nuclear term dominates the objective and the
        # relative-change test fires while the residual is still shrinking,
        # so the last stage runs until the bound or the iteration budget.
        last = stage == config.max_continuation_steps - 1
        X, AX, F, its, ok = _apg(op, y, lam, X, AX, step, 0.0 if last else config.convergence_tol,
                                 config.max_iterations, config.rank_cap, trace, restarts, eta)
        total += its
        converged = ok
        if float(np.linalg.norm(AX - y)) <= eta:
            return _report(op, y, X, "lasso", iterations=total, final_objective=float(F),
                           converged=converged, objective_trace=trace, restart_points=restarts,
                           lambdas=lambdas)
    err = ConstraintInfeasibleError(
        f"residual {np.linalg.norm(AX - y):.3e} > eta {eta:.3e} after "
        f"{config.max_continuation_steps} continuation steps"
    )
    err.report = _report(op, y, X, "lasso", iterations=total, final_objective=float(F), converged=False,
                         objective_trace=trace, restart_points=restarts, lambdas=lambdas)
    raise err


def least_squares_known_mixing(op: MeasurementOperator, mixing, y,
                               config: SolverConfig | None = None, tol: float = 1e-10) -> SolverReport:
    """Least squares over ``C = A C_s`` with the mixing matrix ``A`` known.

    Runs CGLS on ``T_A(C_s) = T(A C_s)``; stops when the normal-equation
    residual falls below ``tol`` relative to ``||T_A^*(y)||`` or at
    ``config.max_iterations``.

    Raises
    ------
    IllPosedError
        If ``A`` is numerically rank deficient.
    """
    config = config or SolverConfig()
    A = mixing.entries if isinstance(mixing, MixingMatrix) else np.asarray(mixing, dtype=np.complex128)
    M, W = op.input_shape
    if A.shape[0] != M:
        raise ValueError(f"mixing matrix has {A.shape[0]} rows, operator has {M} channels")
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[-1] <= 1e-12 * s[0] or A.shape[1] > M:
        raise IllPosedError("mixing matrix is not full column rank")
    y = _values(y)

    def fwd(Cs):
        return op.forward(A @ Cs)

    def adj(r):
        return A.conj().T @ op.adjoint(r)

    Cs = np.zeros((A.shape[1], W), dtype=np.complex128)
    r = y.copy()
    g = adj(r)
    p = g.copy()
    gamma = float(np.vdot(g, g).real)
    g0 = math.sqrt(gamma)
    trace = [float(np.vdot(r, r).real)]
    converged = g0 == 0.0
    its = 0
    for its in range(1, config.max_iterations + 1):
        if converged:
            its -= 1
            break
        q = fwd(p)
        qq = float(np.vdot(q, q).real)
        if qq == 0.0:
            break
        alpha = gamma / qq
        Cs += alpha * p
        r -= alpha * q
        g = adj(r)
        gamma_new = float(np.vdot(g, g).real)
        trace.append(float(np.vdot(r, r).real))
        if math.sqrt(gamma_new) <= tol * g0:
            converged = True
            break
        p = g + (gamma_new / gamma) * p
        gamma = gamma_new
    X = A @ Cs
    return _report(op, y, X, "least-squares", iterations=its, final_objective=0.5 * trace[-1],
                   converged=converged, objective_trace=[0.5 * v for v in trace], restart_points=[0])


def auto_lambda(op: MeasurementOperator, y, noise_sigma: float | None = None, method: str = "klt",
                rule: str = "centered", trials: int = 8, seed: int = 0) -> float:
    """Data-driven regularization level.

    ``method="lasso"`` returns ``||T^*(y)||``, the smallest lambda giving the
    zero solution and the start of continuation. For ``method="klt"``:

    * ``rule="centered"`` (default): twice a Monte-Carlo estimate of
      ``||T^*(y) - E T^*(y)||``. Fresh operators of the same kind are drawn,
      and the deviation ``(T_k^* T_k - I)(P) + T_k^*(xi_k)`` is measured on a
      proxy ``P``, namely ``T^*(y)`` rescaled to norm ``||y||``, with
      simulated noise ``xi_k ~ N(0, noise_sigma^2)``.
    * ``rule="noise"``: ``2 ||T^*(xi)||`` for one simulated noise draw.
    * ``rule="uncentered"``: ``2 ||T^*(y)||``.

    Norms are spectral.
    """
    y = _values(y)
    Z = op.adjoint(y)
    if method == "lasso":
        return float(np.linalg.norm(Z, 2))
    if method != "klt":
        raise ValueError(f"unknown method {method!r}")
    if rule == "uncentered":
        return 2.0 * float(np.linalg.norm(Z, 2))
    sigma = float(noise_sigma or 0.0)
    rng = np.random.default_rng(seed)
    if rule == "noise":
        xi = sigma * rng.standard_normal(op.omega)
        return 2.0 * float(np.linalg.norm(op.adjoint(xi), 2))
    if rule != "centered":
        raise ValueError(f"unknown rule {rule!r}")
    z_norm = float(np.linalg.norm(Z))
    P = Z * (float(np.linalg.norm(y)) / z_norm) if z_norm > 0 else Z
    M, W, omega = op.dims
    devs = []
    seeds = rng.integers(0, 2**63 - 1, size=(trials, 2))
    for cs, fs in seeds:
        opk = make_operator(op.kind, M, W, omega, int(cs), int(fs), op.layout)
        xi = sigma * rng.standard_normal(omega)
        devs.append(float(np.linalg.norm(opk.gram(P) - P + opk.adjoint(xi), 2)))
    return 2.0 * float(np.mean(devs))
