"""Experiment harness: seed derivation, CSV persistence, resume, summary."""

import numpy as np
import pytest

from orthotensor import (
    CSV_FIELDS,
    ConfigError,
    ExperimentConfig,
    derive_trial_seed,
    parse_config_file,
    read_rows,
    run_experiment,
    summarize,
)
from orthotensor.bench import ResultRow


def small_config(**kw):
    defaults = dict(
        k=3,
        d=6,
        r=2,
        noise_model="gaussian",
        sigmas=(0.0, 1e-3),
        trials=2,
        base_seed=7,
        methods=("tmhosvd",),
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_seed_derivation_pure_and_sigma_sensitive():
    s1 = derive_trial_seed(7, 3, 6, 2, "gaussian", 0.01, 0)
    s2 = derive_trial_seed(7, 3, 6, 2, "gaussian", 0.01, 0)
    assert s1 == s2
    assert s1 != derive_trial_seed(7, 3, 6, 2, "gaussian", 0.02, 0)
    assert s1 != derive_trial_seed(7, 3, 6, 2, "gaussian", 0.01, 1)
    assert s1 != derive_trial_seed(8, 3, 6, 2, "gaussian", 0.01, 0)
    assert s1 != derive_trial_seed(7, 3, 6, 2, "bernoulli", 0.01, 0)


def test_noiseless_sweep_rows(tmp_path):
    cfg = small_config(sigmas=(0.0,), trials=3)
    rows = run_experiment(cfg)
    assert len(rows) == 3
    assert all(r.avg_loss <= 1e-8 for r in rows)
    assert all(r.converged_count == 2 for r in rows)


def test_row_count_methods_sigmas_trials(tmp_path):
    cfg = small_config(methods=("tmhosvd", "tpm"))
    rows = run_experiment(cfg)
    assert len(rows) == 2 * 2 * 2


def test_csv_written_and_readable(tmp_path):
    path = tmp_path / "results.csv"
    cfg = small_config(csv_path=str(path))
    rows = run_experiment(cfg)
    assert path.exists()
    header = path.read_text().splitlines()[0]
    assert header == ",".join(CSV_FIELDS)
    parsed = read_rows(path)
    assert len(parsed) == len(rows)
    for a, b in zip(parsed, rows):
        assert a.key() == b.key()
        assert a.avg_loss == pytest.approx(b.avg_loss, rel=1e-15)


def test_rerun_byte_identical_modulo_runtime(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(small_config(csv_path=str(p1)))
    run_experiment(small_config(csv_path=str(p2)))

    def strip_runtime(path):
        lines = path.read_text().splitlines()
        idx = CSV_FIELDS.index("runtime_ms")
        return [
            ",".join(v for i, v in enumerate(line.split(",")) if i != idx)
            for line in lines
        ]

    assert strip_runtime(p1) == strip_runtime(p2)


def test_resume_skips_existing_rows(tmp_path):
    path = tmp_path / "results.csv"
    cfg = small_config(csv_path=str(path), trials=2)
    first = run_experiment(cfg)
    assert len(first) == 4
    # rerun on the same file: everything already present
    again = run_experiment(cfg)
    assert len(again) == 0
    assert len(read_rows(path)) == 4
    # extend trial count: only the new trials run
    cfg3 = small_config(csv_path=str(path), trials=3)
    extra = run_experiment(cfg3)
    assert len(extra) == 2
    assert len(read_rows(path)) == 6


def test_threaded_run_matches_serial(tmp_path):
    cfg1 = small_config(trials=3)
    cfg2 = small_config(trials=3, threads=3)
    rows1 = run_experiment(cfg1)
    rows2 = run_experiment(cfg2)
    assert [r.key() for r in rows1] == [r.key() for r in rows2]
    for a, b in zip(rows1, rows2):
        assert a.avg_loss == b.avg_loss
        assert a.seed == b.seed


def test_summarize_single_row():
    row = ResultRow(
        method="tmhosvd",
        k=3,
        d=6,
        r=2,
        noise_model="gaussian",
        sigma=0.0,
        trial=0,
        seed=1,
        avg_loss=0.1,
        max_loss=0.2,
        avg_lambda_loss=0.05,
        residual_frob=0.3,
        rank_hat=None,
        runtime_ms=5.0,
        converged_count=2,
    )
    s = summarize([row])
    cell = s["cells"][0]
    assert cell["mean_avg_loss"] == 0.1
    assert cell["median_avg_loss"] == 0.1
    assert cell["n"] == 1


def test_summarize_mean_median():
    rows = []
    for trial, loss in enumerate((0.1, 0.3)):
        rows.append(
            ResultRow(
                method="tpm",
                k=3,
                d=6,
                r=2,
                noise_model="gaussian",
                sigma=0.0,
                trial=trial,
                seed=trial,
                avg_loss=loss,
                max_loss=loss,
                avg_lambda_loss=loss,
                residual_frob=0.0,
                rank_hat=None,
                runtime_ms=1.0,
                converged_count=2,
            )
        )
    cell = summarize(rows)["cells"][0]
    assert cell["mean_avg_loss"] == pytest.approx(0.2)
    assert cell["median_avg_loss"] == pytest.approx(0.2)


def test_summarize_quantiles_sorted_array_oracle():
    rng = np.random.default_rng(0)
    losses = rng.uniform(0, 1, 50)
    rows = [
        ResultRow(
            method="tmhosvd",
            k=3,
            d=6,
            r=2,
            noise_model="gaussian",
            sigma=0.1,
            trial=i,
            seed=i,
            avg_loss=float(losses[i]),
            max_loss=0.0,
            avg_lambda_loss=0.0,
            residual_frob=0.0,
            rank_hat=None,
            runtime_ms=0.0,
            converged_count=0,
        )
        for i in range(50)
    ]
    cell = summarize(rows)["cells"][0]

    # direct order-statistics oracle with linear interpolation
    def quant(sorted_vals, q):
        pos = q * (len(sorted_vals) - 1)
        lo, hi = int(np.floor(pos)), int(np.ceil(pos))
        frac = pos - lo
        return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac

    sv = np.sort(losses)
    assert cell["q05_avg_loss"] == pytest.approx(quant(sv, 0.05), rel=1e-12)
    assert cell["q95_avg_loss"] == pytest.approx(quant(sv, 0.95), rel=1e-12)


def test_unwritable_csv_path_raises_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    cfg = small_config(csv_path=str(blocker / "results.csv"))
    with pytest.raises(IOError):
        run_experiment(cfg)


def test_method_failure_recorded_as_sentinel_row(monkeypatch):
    import orthotensor.bench as bench_mod

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(bench_mod, "decompose", boom)
    rows = run_experiment(small_config(sigmas=(0.0,), trials=1))
    assert len(rows) == 1
    assert np.isnan(rows[0].avg_loss)
    assert rows[0].converged_count == 0


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(trials=0)
    with pytest.raises(ConfigError):
        small_config(methods=())
    with pytest.raises(ConfigError):
        small_config(methods=("ojd",))
    with pytest.raises(ConfigError):
        small_config(sigmas=(-1.0,))
    with pytest.raises(ConfigError):
        small_config(noise_model="cauchy")


def test_parse_config_file(tmp_path):
    cfg_text = """
[DEFAULT]
trials = 2
base_seed = 3

[cell-a]
k = 3
d = 6
r = 2
sigmas = 0, 0.001
methods = tmhosvd, tpm

[cell-b]
k = 4
d = 5
r = 2
noise_model = bernoulli
sigmas = 0.01
"""
    path = tmp_path / "sweep.cfg"
    path.write_text(cfg_text)
    configs = parse_config_file(path)
    assert len(configs) == 2
    a, b = configs
    assert a.name == "cell-a"
    assert a.k == 3 and a.sigmas == (0.0, 0.001)
    assert a.methods == ("tmhosvd", "tpm")
    assert a.trials == 2 and a.base_seed == 3
    assert b.noise_model == "bernoulli"


def test_parse_config_overrides_and_defaults(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text("[only]\nk = 3\nd = 5\nr = 2\n")
    cfgs = parse_config_file(
        path, overrides={"base_seed": "11"}, defaults={"trials": "4"}
    )
    assert cfgs[0].base_seed == 11
    assert cfgs[0].trials == 4


def test_parse_config_missing_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("[x]\nk = 3\nd = 5\n")
    with pytest.raises(ConfigError):
        parse_config_file(path)


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config_file(tmp_path / "nope.cfg")
