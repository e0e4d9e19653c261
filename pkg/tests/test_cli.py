import csv

import pytest

from spectrumcs.cli import main


def test_sweep_row_count(tmp_path):
    out = tmp_path / "o"
    rc = main(["sweep", "--solvers", "omp,modified_omp", "--m", "250", "--snr", "noiseless",
               "--trials", "4", "--seed", "42", "--out", str(out)])
    assert rc == 0
    rows = list(csv.DictReader(open(out / "records.csv")))
    assert len(rows) == 4 * 2
    assert (out / "summary.csv").exists()


def test_sweep_writes_snr_table(tmp_path):
    out = tmp_path / "o"
    assert main(["sweep", "--solvers", "modified_omp", "--m", "250", "--snr", "5,20",
                 "--trials", "2", "--out", str(out)]) == 0
    lines = (out / "mse_vs_snr_250.dat").read_text().splitlines()
    assert lines[0] == "# snr_db modified_omp"
    assert [float(l.split()[0]) for l in lines[1:]] == [5.0, 20.0]


def test_demo_files(tmp_path):
    out = tmp_path / "d"
    rc = main(["demo", "--solvers", "modified_omp", "--m", "250", "--snr", "15", "--seed", "7", "--out", str(out)])
    assert rc == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["measurements.dat", "spectrum_modified_omp.dat", "spectrum_true.dat"]
    true = (out / "spectrum_true.dat").read_text().splitlines()
    assert true[0].startswith("#") and len(true) == 1001


def test_rerun_byte_identical(tmp_path):
    args = ["sweep", "--solvers", "modified_omp,omp", "--m", "250", "--snr", "noiseless,10",
            "--trials", "3", "--seed", "42"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a/records.csv").read_bytes() == (tmp_path / "b/records.csv").read_bytes()


def test_summarize_command(tmp_path):
    out = tmp_path / "o"
    main(["sweep", "--solvers", "omp", "--m", "250", "--trials", "2", "--out", str(out)])
    (out / "summary.csv").unlink()
    assert main(["summarize", "--out", str(out)]) == 0
    assert (out / "summary.csv").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--bogus"],
        ["sweep", "--solvers", "cosamp", "--trials", "1"],
        ["sweep", "--m", "abc"],
        ["sweep", "--snr", "loud"],
        ["sweep", "--trials", "0"],
        ["demo", "--m", "250,500"],
        ["frobnicate"],
        [],
    ],
)
def test_validation_exit_code(argv, tmp_path, capsys):
    assert main(argv + (["--out", str(tmp_path)] if argv and argv[0] in ("sweep", "demo") and "--bogus" not in argv else [])) == 1
    assert capsys.readouterr().err


def test_missing_records(tmp_path):
    assert main(["summarize", "--out", str(tmp_path)]) == 1


def test_runtime_failure_exit_code(tmp_path, monkeypatch):
    import spectrumcs.cli as cli

    def boom(*a, **k):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(cli, "run_monte_carlo", boom)
    assert main(["sweep", "--trials", "1", "--out", str(tmp_path)]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "sweep" in capsys.readouterr().out
