import textwrap

import pytest

from advreg.cli import main, parse_args

CFG = """\
function: f2
smoothness: {beta: 0.5, L: 1.0}
d: 1
perturbation: {kind: lp_ball, p: inf, q: 0.0625}
n_grid: [128, 256, 512]
replicates: 2
sigma: 0.2
resolution: 129
q_grid: [0.0, 0.03125, 0.0625]
seed: 3
"""

ANISO = """\
function: f3
smoothness: {beta: [1.0, 0.3333333333333333], L: [1.0, 1.0]}
perturbation: {kind: box, a: [0.0625, 0.0]}
resolution: 33
q_grid: [0.03125, 0.0625, 0.125]
"""


def write(tmp_path, text, name="c.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def test_parse_ideal_loss():
    args = parse_args(["ideal-loss", "--config", "c.cfg", "--out", "r.csv"])
    assert args.command == "ideal-loss" and args.config == "c.cfg" and args.out == "r.csv"


def test_missing_subcommand(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_required_flag():
    assert main(["risk", "--config", "c.yaml"]) == 2


def test_unknown_key_names_it(tmp_path, capsys):
    cfg = write(tmp_path, CFG + "estimator: {method: local_poly, bandwith: 0.1}\n")
    assert main(["risk", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 3
    assert "bandwith" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["function: f9\n", "n_grid: [512, 256]\n", "[not, a, mapping]\n",
                                  "perturbation: {kind: blob}\n"])
def test_bad_configs(tmp_path, text):
    assert main(["risk", "--config", write(tmp_path, text), "--out", str(tmp_path / "o.csv")]) == 3


def test_missing_config_file(tmp_path):
    assert main(["risk", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path / "o.csv")]) == 3


def test_unwritable_output(tmp_path):
    cfg = write(tmp_path, CFG)
    assert main(["ideal-loss", "--config", cfg, "--out", str(tmp_path / "no" / "o.csv")]) == 1


def test_selftest():
    assert main(["selftest"]) == 0


def test_risk_exact_prints_ideal_loss(tmp_path, capsys):
    cfg = write(tmp_path, CFG.replace("replicates: 2", "replicates: 1").replace("sigma: 0.2", "sigma: 0.0")
                + "estimator: {method: exact}\n")
    assert main(["risk", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 0
    out = capsys.readouterr().out
    assert "ideal_loss=0.17677669529663" in out
    assert "risk=0.17677669529663" in out


def test_ideal_loss_row(tmp_path):
    out = tmp_path / "i.csv"
    assert main(["ideal-loss", "--config", write(tmp_path, CFG), "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header == "value,x1,delta1,grid_spacing"
    assert float(row.split(",")[0]) == pytest.approx(0.1767766952966369)


COMMANDS = [("eval-loss", CFG), ("ideal-loss", CFG), ("fit", CFG), ("risk", CFG),
            ("rate-fit", CFG), ("phase-sweep", CFG), ("aniso-compare", ANISO)]


@pytest.mark.parametrize("command, text", COMMANDS)
def test_commands_deterministic(tmp_path, command, text):
    cfg = write(tmp_path, text)
    outs = []
    for i, jobs in enumerate(["1", "1", "2"]):
        out = tmp_path / f"{i}.csv"
        assert main([command, "--config", cfg, "--out", str(out), "--jobs", jobs]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, CFG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["risk", "--config", cfg, "--out", str(a)])
    main(["risk", "--config", cfg, "--out", str(b), "--seed", "99"])
    assert a.read_bytes() != b.read_bytes()


def test_rate_fit_needs_three_sizes(tmp_path):
    cfg = write(tmp_path, CFG.replace("n_grid: [128, 256, 512]", "n_grid: [128, 256]"))
    assert main(["rate-fit", "--config", cfg, "--out", str(tmp_path / "o.csv")]) == 3
