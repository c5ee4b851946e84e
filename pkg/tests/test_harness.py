import csv
import io
import math

import numpy as np
import pytest

from cmux import harness
from cmux.ensemble import CoefficientMatrix, EnsembleSpec, synthesize_samples
from cmux.errors import FormatError, SearchExhaustedError
from cmux.harness import (
    METRIC_COLUMNS,
    TrialSpec,
    derive_seed,
    efficiency,
    ingest_recording,
    metrics_csv,
    min_rate_search,
    noise_sweep,
    phase_transition,
    read_recording_csv,
    relative_error,
    run_trial,
    run_trials,
    sweep_csv,
    trial_spec,
)


def test_derive_seed_deterministic_and_distinct():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    seeds = {derive_seed(1, "a", k) for k in range(1000)} | {derive_seed(2, "a", 0), derive_seed(1, "b", 0)}
    assert len(seeds) == 1002
    assert 0 <= derive_seed(2**70, "x") < 2**64


def test_trial_spec_validation():
    ens = EnsembleSpec(4, 8, 1)
    with pytest.raises(ValueError):
        TrialSpec(ens, omega=7)
    with pytest.raises(ValueError):
        TrialSpec(ens, omega=33)
    with pytest.raises(ValueError):
        TrialSpec(ens, omega=16, noise_sigma=-1.0)
    with pytest.raises(ValueError):
        TrialSpec(ens, omega=16, method="magic")


def test_seed_layout_shares_ensembles_across_rates():
    a, b = trial_spec(4, 8, 1, 16, 0, 5), trial_spec(4, 8, 1, 20, 0, 5)
    assert a.ensemble.seed == b.ensemble.seed and a.seed != b.seed
    assert trial_spec(4, 8, 1, 16, 1, 5).ensemble.seed != a.ensemble.seed


def test_time_concentrated_grid_follows_omega():
    spec = trial_spec(4, 8, 1, 24, 0, 0, generator="time-concentrated")
    assert spec.resolved_ensemble().time_grid == 24


def test_relative_error_edge_cases():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_error(np.ones(3), np.zeros(3)) == math.inf
    assert relative_error(2 * np.ones(4), np.ones(4)) == pytest.approx(1.0)


def test_efficiency_and_metrics():
    assert efficiency(20, 64, 2, 672) == pytest.approx(2 * 82 / 672)
    m = run_trial(trial_spec(6, 10, 1, 60, 0, 0))
    assert m.success and m.rel_error <= 1e-3 and m.trace_monotone
    assert m.eta == pytest.approx(efficiency(6, 10, 1, 60)) and m.gamma == pytest.approx(1.0)
    assert m.rel_error_db < -60


def test_run_trial_is_bit_reproducible():
    spec = trial_spec(5, 9, 1, 30, 3, 11, snr_db=20.0)
    a, b = run_trial(spec), run_trial(spec)
    assert a.row() == b.row() and a.sigma > 0


def test_klt_trial_runs():
    m = run_trial(trial_spec(5, 9, 1, 30, 0, 0, method="klt", snr_db=30.0))
    assert m.iterations == 1 and m.method == "klt" and math.isfinite(m.rel_error)


def test_parallel_matches_serial():
    specs = [trial_spec(4, 8, 1, 20, t, 0) for t in range(4)]
    serial = metrics_csv(run_trials(specs, 1))
    assert metrics_csv(run_trials(specs, 2)) == serial


def test_metrics_csv_columns():
    text = metrics_csv([run_trial(trial_spec(4, 8, 1, 20, 0, 0))])
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == METRIC_COLUMNS and len(rows) == 2


def test_phase_grid_shape_and_boundary():
    grid = phase_transition(6, 10, [12, 60], [1], trials=3, base_seed=1)
    assert grid.success_rate.shape == (1, 2)
    assert grid.success_rate[0, 0] <= grid.success_rate[0, 1] == 1.0
    assert grid.matrix_csv().splitlines()[0] == "R\\omega,12,60"
    assert len(grid.records) == 6 and grid.ascii().count("\n") == 1
    se = grid.standard_error()
    assert np.all(se >= 0) and se[0, 1] == 0.0
    np.testing.assert_allclose(grid.compression_axis(), [0.2, 1.0])
    with pytest.raises(ValueError):
        phase_transition(6, 10, [], [1], trials=1)


def test_min_rate_search_small():
    res = min_rate_search(4, 8, 1, trials=3, base_seed=2)
    assert 8 <= res.omega_star <= 32
    assert res.evaluations[res.omega_star] >= 0.99
    assert res.compression == pytest.approx(res.omega_star / 32)
    with pytest.raises(ValueError):
        min_rate_search(4, 8, 1, trials=3, target_success=1.0)


def test_min_rate_search_brackets_with_fake_trials(monkeypatch):
    # success exactly when omega >= 123: the search must land within its resolution
    class Fake:
        def __init__(self, ok):
            self.success = ok

    monkeypatch.setattr(harness, "run_trial", lambda spec: Fake(spec.omega >= 123))
    res = min_rate_search(10, 40, 2, trials=2, resolution=0.0)
    assert res.omega_star == 123
    monkeypatch.setattr(harness, "run_trial", lambda spec: Fake(False))
    with pytest.raises(SearchExhaustedError):
        min_rate_search(10, 40, 2, trials=2)
    monkeypatch.setattr(harness, "run_trial", lambda spec: Fake(True))
    assert min_rate_search(10, 40, 2, trials=2).omega_star == 40


def test_noise_sweep_pairs_trials():
    rows, records = noise_sweep(5, 9, 1, [30], [10.0, 40.0], methods=("lasso", "klt"), trials=2,
                                return_records=True)
    assert [(r.snr_db, r.method) for r in rows] == [(10.0, "lasso"), (10.0, "klt"), (40.0, "lasso"), (40.0, "klt")]
    assert rows[2].mean_rel_error < rows[0].mean_rel_error
    lasso, klt = records[0:2], records[2:4]
    assert [m.sigma for m in lasso] == [m.sigma for m in klt]
    assert sweep_csv(rows).splitlines()[0].startswith("snr_db,omega,method")


def _write_recording(path, rank=2, channels=6, n=96, header=True):
    rng = np.random.default_rng(0)
    C = rng.standard_normal((channels, rank)) @ rng.standard_normal((rank, 9))
    C = C + 0j
    C[:, 5:] = C[:, 1:5][:, ::-1].conj()  # conjugate-symmetric rows -> real signals
    C[:, 0] = C[:, 0].real
    X = synthesize_samples(CoefficientMatrix(C, "signal"), 32).real
    X = np.concatenate([X] * (n // 32), axis=1)
    with open(path, "w") as f:
        if header:
            f.write(",".join(f"ch{i}" for i in range(channels)) + "\n")
        for row in X.T:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
    return X


def test_read_recording_csv(tmp_path):
    X = _write_recording(tmp_path / "rec.csv")
    np.testing.assert_allclose(read_recording_csv(tmp_path / "rec.csv"), X)
    _write_recording(tmp_path / "nohead.csv", header=False)
    assert read_recording_csv(tmp_path / "nohead.csv").shape == X.shape
    (tmp_path / "ragged.csv").write_text("1,2\n3\n")
    with pytest.raises(FormatError):
        read_recording_csv(tmp_path / "ragged.csv")
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(FormatError):
        read_recording_csv(tmp_path / "empty.csv")


def test_ingest_low_rank_recording(tmp_path):
    _write_recording(tmp_path / "rec.csv", rank=2)
    study = ingest_recording(tmp_path / "rec.csv", 32, ranks=[1, 2, 3], omegas=[160])
    assert len(study.windows) == 3
    assert np.all(study.rank_errors[:, 1] < 1e-10) and np.all(study.rank_errors[:, 0] > 1e-3)
    (omega, gamma, err), = study.recovery
    assert omega == 160 and gamma == pytest.approx(160 / (6 * 32)) and err < 1e-3
    with pytest.raises(ValueError):
        ingest_recording(tmp_path / "rec.csv", 1000)
