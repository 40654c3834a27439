import pytest

from siqnet.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_threshold_report(capsys):
    code, out, _ = run(capsys, "threshold")
    assert code == 0
    assert "tau_bar=0.108717638058" in out.splitlines()


def test_threshold_grid(capsys):
    code, out, _ = run(capsys, "threshold", "--x", "v=0.2:0.8:3", "--y", "sigma_n=0,1")
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == 0 and rows[0] == "x,y,value" and len(rows) == 7


def test_config_then_param_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("lambda = 0\nbeta = 0.5\nseed = 9\n")
    code, out, _ = run(capsys, "threshold", "--config", str(cfg), "--param", "beta=0.25")
    assert "tau_bar=-0.25" in out


def test_simulate_to_directory(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--param", "n=300", "--horizon", "5",
                       "--seed", "3", "--out", str(tmp_path))
    text = (tmp_path / "simulate.csv").read_text().splitlines()
    assert code == 0
    assert text[0].startswith("# n=300") and "seed=3" in text[1]
    assert text[2] == "t,S_n,I_n,Q_n,S_v,I_v,Q_v"


def test_simulate_replicates_deterministic(capsys):
    args = ("simulate", "--param", "n=300", "--horizon", "5", "--replicates", "3")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_meanfield_both_systems(capsys):
    code, out, _ = run(capsys, "meanfield", "--preset", "fig1", "--horizon", "2")
    assert code == 0 and out.splitlines()[-1].startswith("2,")
    code, out, _ = run(capsys, "meanfield", "--preset", "fig1", "--param", "n=100",
                       "--system", "micro", "--horizon", "1")
    assert code == 0


def test_estimate_output(capsys):
    code, out, _ = run(capsys, "estimate", "--param", "n=400", "--replicates", "2",
                       "--initial-infected", "8", "--backbone", "er:0.05")
    assert code == 0
    assert "tau,eradication_probability,std_dev" in out
    assert out.splitlines()[-1].startswith("tau_hat=")


def test_sweep_command(capsys):
    code, out, _ = run(capsys, "sweep", "--x", "theta=0,0.5", "--metric", "threshold_analytic")
    assert code == 0 and out.splitlines()[-1].startswith("0.5,,")


def test_reproduce_command(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce", "fig2", "--scale", "0.05", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "fig2a.csv").exists()


def test_errors_reported(capsys):
    code, _, err = run(capsys, "threshold", "--param", "v=2")
    assert code == 2 and "v=2.0" in err
    with pytest.raises(SystemExit):
        main(["nonsense"])
