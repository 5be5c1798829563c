from orthoplots.cli import main


def test_cli_curves(bench_artifacts, tmp_path, capsys):
    rc = main([str(bench_artifacts["csv"]), "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1
    assert out[0].endswith(".svg")


def test_cli_hist_with_sigma(bench_artifacts, tmp_path):
    rc = main(
        [
            str(bench_artifacts["csv"]),
            "--out", str(tmp_path),
            "--kind", "hist",
            "--sigma", "0.005",
        ]
    )
    assert rc == 0
    assert len(list(tmp_path.glob("*.svg"))) == 1


def test_cli_empty_filter_nonzero_exit(bench_artifacts, tmp_path, capsys):
    rc = main([str(bench_artifacts["csv"]), "--out", str(tmp_path), "--k", "9"])
    assert rc == 1
    assert "no rows" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_cli_schema_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,bench\n1,2,3\n")
    rc = main([str(bad), "--out", str(tmp_path)])
    assert rc == 2
    assert "schema error" in capsys.readouterr().err
