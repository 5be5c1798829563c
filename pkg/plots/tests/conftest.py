"""Shared fixture: a benchmark CSV produced through the producer's CLI.

The plots package consumes only the CSV/JSON artifacts, so the fixture
shells out to the `orthotensor` command rather than importing it.
"""

import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def bench_artifacts(tmp_path_factory):
    if shutil.which("orthotensor") is None:
        pytest.skip("orthotensor CLI not installed")
    root = tmp_path_factory.mktemp("bench")
    cfg = root / "sweep.cfg"
    cfg.write_text(
        "[cell]\n"
        "k = 3\n"
        "d = 5\n"
        "r = 2\n"
        "noise_model = gaussian\n"
        "sigmas = 0.001, 0.005, 0.02\n"
        "trials = 3\n"
        "base_seed = 5\n"
        "methods = tmhosvd, tpm\n"
    )
    out = root / "out"
    subprocess.run(
        ["orthotensor", "bench", "--config", str(cfg), "--out", str(out)],
        check=True,
        capture_output=True,
    )
    return {"csv": out / "results.csv", "summary": out / "summary.json"}
