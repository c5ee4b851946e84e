"""Command-line entry point.

Every command takes an optional JSON config (``--config``) whose values are
overridden by explicit flags. The schema is the one produced by
:meth:`RunConfig.to_dict`::

    {
      "command": "generate",
      "ensemble": {"num_signals": 8, "bandwidth": 31, "rank": 2,
                   "generator": "gaussian-factors", "symmetry_mode": "matrix",
                   "time_grid": null, "data_path": null},
      "operator": {"kind": "mmux", "omega": 64},
      "seed": 0, "trial": 0,
      "noise": {"sigma": 0.0, "snr_db": null},
      "method": "lasso",
      "solver": {"lambda": "auto", "noise_bound": null, ...},
      "grid": {"omegas": [], "ranks": [], "snrs_db": [], "methods": ["lasso"],
               "trials": 10, "target_success": 0.99},
      "ingest": {"input": null, "window": null, "bandwidth": null,
                 "channels": null, "max_windows": null},
      "output_dir": "cmux-out", "threads": null, "verbosity": 0
    }

A manifest written by any command can be passed back as ``--config``.

Exit codes: 0 success (non-convergence is reported, not fatal), 2 invalid
configuration, 3 I/O or format error, 4 infeasible constrained solve.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import os
import platform
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from cmux import __version__
from cmux._backend import BACKEND
from cmux.ensemble import Generator, SymmetryMode, generate_ensemble
from cmux.errors import ConstraintInfeasibleError, FormatError, SearchExhaustedError
from cmux.harness import (
    derive_seed,
    efficiency,
    ingest_recording,
    metrics_csv,
    min_rate_search,
    noise_sweep,
    phase_transition,
    relative_error,
    solve_trial,
    sweep_csv,
    trial_spec,
)
from cmux.io import file_sha256, read_cmx, read_matrix_csv, write_cmx, write_matrix_csv
from cmux.operators import (
    FilterBank,
    MeasurementOperator,
    ModulationCodes,
    OperatorKind,
    add_noise,
    generate_codes,
    generate_filters,
    make_operator,
    materialize_dense,
    noise_bound,
    sigma_for_snr,
)
from cmux.solvers import SolverConfig

log = logging.getLogger("cmux")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INFEASIBLE = 0, 2, 3, 4
COMMANDS = ("generate", "acquire", "recover", "phase", "sweep", "minrate", "ingest", "selftest")


def _default_sections() -> dict:
    return {
        "ensemble": {"num_signals": 8, "bandwidth": 31, "rank": 2, "generator": "gaussian-factors",
                     "symmetry_mode": "matrix", "time_grid": None, "data_path": None},
        "operator": {"kind": "mmux", "omega": None},
        "noise": {"sigma": 0.0, "snr_db": None},
        "solver": SolverConfig().to_dict(),
        "grid": {"omegas": [], "ranks": [], "snrs_db": [], "methods": ["lasso"], "trials": 10,
                 "target_success": 0.99},
        "ingest": {"input": None, "window": None, "bandwidth": None, "channels": None,
                   "max_windows": None},
    }


@dataclass
class RunConfig:
    """Everything a command needs; serializes to plain JSON."""

    command: str = "generate"
    ensemble: dict = field(default_factory=lambda: _default_sections()["ensemble"])
    operator: dict = field(default_factory=lambda: _default_sections()["operator"])
    seed: int = 0
    trial: int = 0
    noise: dict = field(default_factory=lambda: _default_sections()["noise"])
    method: str = "lasso"
    solver: dict = field(default_factory=lambda: _default_sections()["solver"])
    grid: dict = field(default_factory=lambda: _default_sections()["grid"])
    ingest: dict = field(default_factory=lambda: _default_sections()["ingest"])
    output_dir: str = "cmux-out"
    threads: int | None = None
    verbosity: int = 0

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in self.__dataclass_fields__}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if "config" in d and isinstance(d["config"], dict):  # a manifest
            d = d["config"]
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        defaults = _default_sections()
        for k, v in d.items():
            if k in defaults:
                if not isinstance(v, dict):
                    raise ValueError(f"config section {k!r} must be an object")
                extra = set(v) - set(defaults[k])
                if extra:
                    raise ValueError(f"unknown keys in {k!r}: {sorted(extra)}")
                merged = dict(defaults[k])
                merged.update(v)
                setattr(cfg, k, merged)
            else:
                setattr(cfg, k, copy.deepcopy(v))
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def solver_config(self) -> SolverConfig:
        return SolverConfig.from_dict(self.solver)

    def workers(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        return max(1, int(os.environ.get("CMUX_THREADS", "1") or 1))


# flag -> (config path, type, help); None on the command line means "not given"
_FLAGS = {
    "M": (("ensemble", "num_signals"), int, "number of signals"),
    "W": (("ensemble", "bandwidth"), int, "Fourier coefficients per signal"),
    "R": (("ensemble", "rank"), int, "ensemble rank"),
    "generator": (("ensemble", "generator"), str, "gaussian-factors | time-concentrated | from-data"),
    "symmetry": (("ensemble", "symmetry_mode"), str, "matrix | signal"),
    "time-grid": (("ensemble", "time_grid"), int, "grid size for time-concentrated ensembles"),
    "data": (("ensemble", "data_path"), str, "re/im CSV matrix for the from-data generator"),
    "kind": (("operator", "kind"), str, "mmux | fmmux | fmmux-swapped"),
    "omega": (("operator", "omega"), int, "samples per unit time"),
    "seed": (("seed",), int, "base seed"),
    "trial": (("trial",), int, "trial index under the base seed"),
    "sigma": (("noise", "sigma"), float, "noise standard deviation"),
    "snr": (("noise", "snr_db"), float, "SNR in dB against the noiseless samples"),
    "method": (("method",), str, "lasso | klt"),
    "lam": (("solver", "lambda"), float, "fixed lambda (disables the automatic rule)"),
    "max-iterations": (("solver", "max_iterations"), int, "solver iteration budget"),
    "omegas": (("grid", "omegas"), int, "list of rates"),
    "ranks": (("grid", "ranks"), int, "list of ranks"),
    "snrs": (("grid", "snrs_db"), float, "list of SNRs in dB"),
    "methods": (("grid", "methods"), str, "list of recovery methods"),
    "trials": (("grid", "trials"), int, "trials per cell"),
    "target": (("grid", "target_success"), float, "success target of the rate search"),
    "input": (("ingest", "input"), str, "recording CSV (one column per channel)"),
    "window": (("ingest", "window"), int, "window length in samples"),
    "bandwidth": (("ingest", "bandwidth"), int, "coefficients kept per window"),
    "channels": (("ingest", "channels"), int, "channel indices to keep"),
    "max-windows": (("ingest", "max_windows"), int, "cap on analysed windows"),
}
_LISTS = {"omegas", "ranks", "snrs", "methods", "channels"}

_COMMAND_FLAGS = {
    "generate": ["M", "W", "R", "generator", "symmetry", "time-grid", "data", "kind", "omega", "seed", "trial"],
    "acquire": ["sigma", "snr"],
    "recover": ["method", "lam", "max-iterations"],
    "phase": ["M", "W", "generator", "kind", "seed", "omegas", "ranks", "trials", "lam", "max-iterations"],
    "sweep": ["M", "W", "R", "kind", "seed", "omegas", "snrs", "methods", "trials", "max-iterations"],
    "minrate": ["M", "W", "generator", "kind", "seed", "ranks", "trials", "target", "max-iterations"],
    "ingest": ["input", "window", "bandwidth", "channels", "max-windows", "ranks", "omegas", "kind", "seed"],
    "selftest": [],
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmux", description="Compressive multiplexed acquisition of signal ensembles.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config or manifest")
        sp.add_argument("--out", dest="output_dir", help="output directory")
        sp.add_argument("--threads", type=int, help="worker processes (default: $CMUX_THREADS or 1)")
        sp.add_argument("-v", "--verbose", action="count", default=None)
        for flag in _COMMAND_FLAGS[name]:
            path, typ, hlp = _FLAGS[flag]
            kw = {"nargs": "+"} if flag in _LISTS else {}
            if flag == "snrs":
                typ = _snr_value
            sp.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=typ, help=hlp, **kw)
    return p


def _snr_value(text: str):
    return None if text.lower() in ("none", "inf", "clean") else float(text)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    cfg = RunConfig.from_dict(base)
    cfg.command = args.command
    for flag in _COMMAND_FLAGS[args.command]:
        val = getattr(args, flag.replace("-", "_"))
        if val is None:
            continue
        path = _FLAGS[flag][0]
        if len(path) == 1:
            setattr(cfg, path[0], val)
        else:
            getattr(cfg, path[0])[path[1]] = val
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.threads is not None:
        cfg.threads = args.threads
    if args.verbose is not None:
        cfg.verbosity = args.verbose
    return cfg


# -- helpers ---------------------------------------------------------------

def _spec(cfg: RunConfig, omega: int | None = None):
    e = cfg.ensemble
    omega = omega if omega is not None else cfg.operator["omega"]
    if omega is None:
        raise ValueError("operator.omega is required")
    data = read_matrix_csv(e["data_path"]) if e.get("data_path") else None
    noise = cfg.noise
    spec = trial_spec(
        int(e["num_signals"]), int(e["bandwidth"]), int(e["rank"]), int(omega), int(cfg.trial), int(cfg.seed),
        OperatorKind(cfg.operator["kind"]), Generator(e["generator"]), SymmetryMode(e["symmetry_mode"]),
        solver=cfg.solver_config(), method=cfg.method, noise_sigma=float(noise["sigma"] or 0.0),
        snr_db=noise["snr_db"], data=data,
    )
    if e.get("time_grid"):
        spec = replace(spec, ensemble=replace(spec.ensemble, time_grid=int(e["time_grid"])))
    return spec


def _versions() -> dict:
    return {"cmux": __version__, "numpy": np.__version__, "python": platform.python_version(),
            "backend": BACKEND}


def _write_manifest(out: Path, name: str, cfg: RunConfig, seeds: dict, files: list) -> Path:
    hashes = {f.name: file_sha256(f) for f in files}
    content = hashlib.sha256("".join(f"{k}:{hashes[k]}\n" for k in sorted(hashes)).encode()).hexdigest()
    manifest = {"config": cfg.to_dict(), "seeds": seeds, "files": hashes, "content_hash": content,
                "versions": _versions()}
    path = out / name
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _load_artifacts(out: Path):
    """Read back what ``generate`` wrote and rebuild the operator."""
    manifest = json.loads((out / "manifest.json").read_text())
    cfg = RunConfig.from_dict(manifest["config"])
    spec = _spec(cfg)
    code_seed, filter_seed, _ = spec.seeds()
    _, C0 = read_cmx(out / "ensemble.cmx", expect="ensemble")
    _, codes = read_cmx(out / "codes.cmx", expect="codes")
    _, spectra = read_cmx(out / "filters.cmx", expect="filters")
    M, W = spec.ensemble.shape
    if C0.shape != (M, W) or codes.shape != (spec.omega, M) or spectra.shape != (M, spec.omega):
        raise FormatError(f"{out}: artifact shapes disagree with the manifest")
    kind = spec.operator_kind
    filters = FilterBank(spectra, filter_seed) if kind is not OperatorKind.MMUX else None
    op = MeasurementOperator(kind, W, ModulationCodes(codes.real, code_seed), filters,
                             spec.ensemble.symmetry_mode)
    return cfg, spec, C0, op


def _write_text(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


# -- commands --------------------------------------------------------------

def cmd_generate(cfg: RunConfig) -> int:
    spec = _spec(cfg)
    ens = spec.resolved_ensemble()
    M, W = ens.shape
    code_seed, filter_seed, noise_seed = spec.seeds()
    C0 = generate_ensemble(ens)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [
        write_cmx(out / "ensemble.cmx", C0.entries, "ensemble"),
        write_cmx(out / "codes.cmx", generate_codes(M, spec.omega, code_seed).signs, "codes"),
        write_cmx(out / "filters.cmx", generate_filters(M, spec.omega, filter_seed).spectra, "filters"),
    ]
    write_matrix_csv(out / "ensemble.csv", C0.entries)
    seeds = {"ensemble": ens.seed, "operator": spec.seed, "codes": code_seed, "filters": filter_seed,
             "noise": noise_seed}
    m = _write_manifest(out, "manifest.json", cfg, seeds, files)
    print(f"wrote {len(files)} artifacts and {m}")
    print("content_hash", json.loads(m.read_text())["content_hash"])
    return EXIT_OK


def cmd_acquire(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    _, spec, C0, op = _load_artifacts(out)
    noise = cfg.noise
    clean = op.forward(C0)
    sigma = float(noise["sigma"] or 0.0)
    if noise["snr_db"] is not None:
        sigma = sigma_for_snr(clean, float(noise["snr_db"]))
    _, _, noise_seed = spec.seeds()
    y = add_noise(clean, sigma, noise_seed).values
    files = [write_cmx(out / "samples.cmx", y[None, :], "samples")]
    max_imag = float(np.max(np.abs(y.imag))) if y.size else 0.0
    meta = {"sigma": sigma, "snr_db": noise["snr_db"], "noise_seed": noise_seed,
            "noise_bound": noise_bound(op.omega, sigma), "max_abs_imag": max_imag,
            "real": bool(max_imag <= 1e-9 * max(1.0, float(np.max(np.abs(y))) if y.size else 1.0))}
    files.append(_write_text(out / "samples.json", json.dumps(meta, indent=2, sort_keys=True) + "\n"))
    _write_manifest(out, "acquire_manifest.json", cfg, {"noise": noise_seed}, files)
    print(f"acquired {op.omega} samples, sigma={sigma!r}, real={meta['real']}")
    return EXIT_OK


def cmd_recover(cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    _, spec, C0, op = _load_artifacts(out)
    _, y = read_cmx(out / "samples.cmx", expect="samples")
    y = y.reshape(-1)
    if y.size != op.omega:
        raise FormatError(f"samples hold {y.size} values, operator expects {op.omega}")
    meta = json.loads((out / "samples.json").read_text())
    spec = replace(spec, method=cfg.method, solver=cfg.solver_config())
    code = EXIT_OK
    infeasible = False
    try:
        report = solve_trial(spec, op, y, float(meta["sigma"]))
    except ConstraintInfeasibleError as exc:
        report, infeasible, code = exc.report, True, EXIT_INFEASIBLE
        log.error("%s", exc)
    result = report.to_dict(include_trace=cfg.verbosity > 0) if report is not None else {}
    result["infeasible"] = infeasible
    files = []
    if report is not None:
        files.append(write_cmx(out / "solution.cmx", report.solution.entries, "solution"))
        result["rel_error"] = relative_error(report.solution.entries, C0)
    files.append(_write_text(out / "report.json", json.dumps(result, indent=2, sort_keys=True) + "\n"))
    _write_manifest(out, "recover_manifest.json", cfg, {"operator": spec.seed}, files)
    if report is not None:
        status = "converged" if report.converged else "NOT converged"
        print(f"{spec.method}: {status} after {report.iterations} iterations, "
              f"rel_error={result['rel_error']:.3e}, rank={report.solution_rank}")
    return code


def cmd_phase(cfg: RunConfig) -> int:
    e, g = cfg.ensemble, cfg.grid
    grid = phase_transition(
        int(e["num_signals"]), int(e["bandwidth"]), g["omegas"], g["ranks"], int(g["trials"]),
        base_seed=int(cfg.seed), kind=cfg.operator["kind"], generator=e["generator"],
        solver=cfg.solver_config(), workers=cfg.workers(),
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    se = "\n".join(",".join(repr(float(v)) for v in row) for row in grid.standard_error()) + "\n"
    files = [
        _write_text(out / "phase_trials.csv", metrics_csv(grid.records)),
        _write_text(out / "phase_matrix.csv", grid.matrix_csv()),
        _write_text(out / "phase_stderr.csv", se),
        _write_text(out / "phase.txt", grid.ascii() + "\n"),
    ]
    _write_manifest(out, "phase_manifest.json", cfg, {"base": cfg.seed}, files)
    print(grid.ascii())
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    e, g = cfg.ensemble, cfg.grid
    snrs = g["snrs_db"] or [None]
    rows, records = noise_sweep(
        int(e["num_signals"]), int(e["bandwidth"]), int(e["rank"]), g["omegas"], snrs,
        methods=tuple(g["methods"]), trials=int(g["trials"]), base_seed=int(cfg.seed),
        kind=cfg.operator["kind"], solver=cfg.solver_config(), workers=cfg.workers(), return_records=True,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [_write_text(out / "sweep.csv", sweep_csv(rows)),
             _write_text(out / "sweep_trials.csv", metrics_csv(records))]
    _write_manifest(out, "sweep_manifest.json", cfg, {"base": cfg.seed}, files)
    for r in rows:
        print(f"snr={r.snr_db} omega={r.omega} {r.method}: {r.mean_rel_error_db:.2f} dB")
    return EXIT_OK


def linear_fit(x, y) -> dict:
    """Least-squares line with coefficient of determination."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def cmd_minrate(cfg: RunConfig) -> int:
    e, g = cfg.ensemble, cfg.grid
    M, W = int(e["num_signals"]), int(e["bandwidth"])
    ranks = g["ranks"] or [int(e["rank"])]
    lines = ["R,omega_star,gamma,eta,evaluations"]
    found = []
    for R in ranks:
        try:
            res = min_rate_search(M, W, int(R), int(g["trials"]), float(g["target_success"]),
                                  base_seed=int(cfg.seed), kind=cfg.operator["kind"],
                                  generator=e["generator"], solver=cfg.solver_config())
        except SearchExhaustedError as exc:
            log.warning("R=%d: %s", R, exc)
            lines.append(f"{R},,,,")
            continue
        found.append((R, res.omega_star))
        evals = ";".join(f"{o}:{v!r}" for o, v in sorted(res.evaluations.items()))
        lines.append(f"{R},{res.omega_star},{res.compression!r},{efficiency(M, W, R, res.omega_star)!r},{evals}")
        print(f"R={R}: omega*={res.omega_star} gamma={res.compression:.3f}")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [_write_text(out / "minrate.csv", "\n".join(lines) + "\n")]
    if len(found) >= 2:
        fit = linear_fit(*zip(*found))
        files.append(_write_text(out / "minrate_fit.json", json.dumps(fit, indent=2) + "\n"))
        print(f"fit: omega* = {fit['slope']:.2f} R + {fit['intercept']:.2f}, r2={fit['r2']:.4f}")
    _write_manifest(out, "minrate_manifest.json", cfg, {"base": cfg.seed}, files)
    return EXIT_OK


def cmd_ingest(cfg: RunConfig) -> int:
    ing, g = cfg.ingest, cfg.grid
    if not ing["input"] or not ing["window"]:
        raise ValueError("ingest needs an input file and a window length")
    study = ingest_recording(
        ing["input"], int(ing["window"]), channels=ing["channels"], bandwidth=ing["bandwidth"],
        ranks=g["ranks"] or None, omegas=g["omegas"], kind=cfg.operator["kind"], base_seed=int(cfg.seed),
        max_windows=ing["max_windows"], solver=cfg.solver_config(),
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rank_lines = ["window,R,rel_error"] + [
        f"{i},{R},{study.rank_errors[i, j]!r}" for i in range(len(study.windows)) for j, R in enumerate(study.ranks)
    ]
    rec_lines = ["omega,gamma,rel_error"] + [f"{o},{gm!r},{err!r}" for o, gm, err in study.recovery]
    files = [_write_text(out / "rank_errors.csv", "\n".join(rank_lines) + "\n"),
             _write_text(out / "recovery.csv", "\n".join(rec_lines) + "\n")]
    _write_manifest(out, "ingest_manifest.json", cfg, {"base": cfg.seed}, files)
    print(f"{len(study.windows)} windows; mean rank errors "
          + ", ".join(f"R={R}: {study.rank_errors[:, j].mean():.3e}" for j, R in enumerate(study.ranks)))
    return EXIT_OK


def cmd_selftest(cfg: RunConfig) -> int:
    """Fast operator checks against dense matrices on tiny problems."""
    ok = True
    rng = np.random.default_rng(0)
    for kind in OperatorKind:
        for M, W, omega in ((2, 3, 4), (4, 7, 16), (8, 8, 32)):
            op = make_operator(kind, M, W, omega, derive_seed(0, "codes"), derive_seed(0, "filters"))
            A = materialize_dense(op)
            C = rng.standard_normal((M, W)) + 1j * rng.standard_normal((M, W))
            y = rng.standard_normal(omega) + 1j * rng.standard_normal(omega)
            fwd = np.linalg.norm(op.forward(C) - A @ C.ravel()) / np.linalg.norm(A @ C.ravel())
            adj = np.linalg.norm(op.adjoint(y).ravel() - A.conj().T @ y) / np.linalg.norm(A.conj().T @ y)
            good = fwd <= 1e-10 and adj <= 1e-10
            ok &= good
            print(f"{'PASS' if good else 'FAIL'} {kind.value:14s} M={M} W={W} omega={omega} "
                  f"fwd={fwd:.1e} adj={adj:.1e}")
    print(f"backend: {BACKEND}")
    return EXIT_OK if ok else 1


_HANDLERS = {
    "generate": cmd_generate, "acquire": cmd_acquire, "recover": cmd_recover, "phase": cmd_phase,
    "sweep": cmd_sweep, "minrate": cmd_minrate, "ingest": cmd_ingest, "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if cfg.verbosity > 1 else
                        logging.INFO if cfg.verbosity else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _HANDLERS[args.command](cfg)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConstraintInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, TypeError, KeyError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
