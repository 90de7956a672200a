import subprocess
import sys

import pytest

from memest.cli import main
from memest.moments import read_params
from memest.simulate import CSV_HEADER


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv", [
    ["moments", "--params", "reference"],
    ["moments", "--params", "reference", "--format", "csv"],
    ["report", "--params", "reference"],
    ["report", "--params", "reference", "--format", "csv", "--n", "20"],
    ["discrepancy", "--params", "reference", "--reps", "0"],
    ["optimum", "--params", "reference"],
    ["simulate", "--params", "reference", "--estimator", "t5", "--reps", "500"],
    ["ingest-params"],
])
def test_subcommands_succeed(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.strip()


def test_missing_params_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["moments"])
    assert exc.value.code == 2


def test_bad_params_file(capsys, tmp_path):
    bad = tmp_path / "bad.kv"
    bad.write_text("mu_y=1\n")
    code, _, err = run(capsys, "moments", "--params", str(bad))
    assert code == 1 and "missing keys" in err
    code, _, err = run(capsys, "report", "--params", str(tmp_path / "absent.kv"))
    assert code == 1


def test_bad_data_file(capsys, tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("y_obs,x_obs\n1,2\nzz,3\n")
    code, _, err = run(capsys, "ingest-params", "--data", str(path))
    assert code == 1 and "row 3" in err


def test_simulate_output_is_deterministic(capsys):
    argv = ["simulate", "--params", "reference", "--estimator", "tp", "--q", "0.5", "--m1", "0.5",
            "--reps", "3000", "--seed", "17"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    header, row = first.strip().splitlines()
    assert header == CSV_HEADER
    assert row.startswith("tp(q=0.5,m1=0.5),10,3000,17,")
    _, bare, _ = run(capsys, *argv, "--no-header")
    assert bare.strip() == row


def test_report_csv_has_rows(capsys):
    _, out, _ = run(capsys, "report", "--params", "reference", "--format", "csv")
    names = [line.split(",")[0] for line in out.splitlines() if line and not line.startswith("#")]
    assert names[1:] == ["ybar", "t1", "t2", "t3", "t4", "t5opt", "tpopt"]


def test_ingest_params_round_trip(capsys, tmp_path, ref_params):
    out_path = tmp_path / "p.kv"
    code, _, _ = run(capsys, "ingest-params", "-o", str(out_path))
    assert code == 0
    p = read_params(out_path)
    assert p.rho == pytest.approx(ref_params.rho, abs=1e-9)
    code, out, _ = run(capsys, "moments", "--params", str(out_path))
    assert code == 0 and "131.4" in out


def test_console_script_module_entry():
    proc = subprocess.run([sys.executable, "-m", "memest.cli", "moments", "--params", "reference"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
