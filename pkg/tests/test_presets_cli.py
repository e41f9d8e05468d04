from __future__ import annotations

import csv
import io
import math

import numpy as np
import pytest

from qent import acceptance
from qent.cli import main
from qent.csvio import fmt
from qent.errors import DomainError, UnknownPreset
from qent.presets import (
    FIG2,
    REFERENCE_SODIUM,
    PRESET_IDS,
    SweepSpec,
    point_metrics,
    run_preset,
    run_sweep,
    sodium_report,
)
from qent.wavefunction import GridConfig


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


# presets


@pytest.mark.parametrize("pid", PRESET_IDS)
def test_presets_produce_tables(pid):
    tables = run_preset(pid)
    assert tables
    for t in tables:
        assert t.rows and all(len(r) == len(t.columns) for r in t.rows)


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        run_preset("9z")


def test_fig3b_ordering():
    (t,) = run_preset("3b")
    k = np.array([r[1:] for r in t.rows], dtype=float)
    # detuning closer to omega_12/2 means smaller delta, larger K
    assert np.all(k[:, 0] < k[:, 1]) and np.all(k[:, 1] < k[:, 2])
    # stronger coupling lowers K
    assert np.all(np.diff(k, axis=0) < 0)


def test_fig3a_diverges_at_two_photon_resonance():
    (t,) = run_preset("3a")
    rows = np.array(t.rows, dtype=float)
    assert np.all(np.diff(rows[:, 1]) < 0)  # delta shrinks along the axis
    for col in (2, 3, 4):
        assert np.all(np.diff(rows[:, col]) > 0)
    # K ~ delta^-2 near resonance
    ratio = rows[-1, 2] / rows[-2, 2]
    assert ratio == pytest.approx((rows[-2, 1] / rows[-1, 1]) ** 2, rel=0.05)


def test_fig4b_colder_slower():
    (t,) = run_preset("4b")
    r = np.array(t.rows, dtype=float)[1:, 1:]
    assert np.all(r[:, 0] < r[:, 1]) and np.all(r[:, 1] < r[:, 2])


def test_sodium_numbers():
    rep = sodium_report()
    assert 3e-12 <= rep.D <= 3e-11
    for key, val in (("R", rep.R_analytic), ("K", rep.K_analytic), ("R_max", rep.R_max)):
        ref = REFERENCE_SODIUM[key]
        assert ref / 3 <= val <= 3 * ref
    assert rep.R_analytic == pytest.approx(rep.eta / (1.6 * abs(rep.re_lambda1)), rel=1e-12)
    assert 1e3 <= rep.dt_dis <= 1e6


# sweeps


def test_sweep_delta_squared_law():
    spec = SweepSpec("delta_rel", (4e-3, 2e-3, 1e-3), outputs=("re_lambda1", "theta"))
    rows = run_sweep(spec)
    th = [r["theta"] for r in rows]
    assert max(th) / min(th) - 1 < 0.01
    for r in rows:
        assert r["re_lambda1"] == pytest.approx(r["theta"] * r["delta_rel"] ** 2, rel=1e-12)


def test_sweep_single_point_equals_point_metrics():
    outs = ("re_lambda1", "theta", "K_analytic", "R_analytic", "dt_ent")
    (row,) = run_sweep(SweepSpec("omega", (2.0,), outputs=outs))
    direct = point_metrics(FIG2.replace(omega=2.0), outs)
    for o in outs:
        assert row[o] == direct[o]
    assert row["error"] == ""


def test_sweep_order_preserved_with_threads(monkeypatch):
    vals = tuple(np.linspace(0.5, 5.0, 12))
    spec = SweepSpec("omega", vals, outputs=("theta",))
    monkeypatch.setenv("QENT_THREADS", "1")
    serial = run_sweep(spec)
    monkeypatch.setenv("QENT_THREADS", "4")
    threaded = run_sweep(spec)
    assert [r["omega"] for r in threaded] == list(vals)
    assert serial == threaded


def test_sweep_error_column():
    rows = run_sweep(SweepSpec("delta_rel", (0.01, 0.0), outputs=("K_analytic",)))
    assert rows[0]["error"] == "" and math.isfinite(rows[0]["K_analytic"])
    assert rows[1]["error"].startswith("InfiniteEntanglement")
    assert math.isnan(rows[1]["K_analytic"])


def test_sweep_validation():
    with pytest.raises(DomainError):
        SweepSpec("nonsense", (1.0,))
    with pytest.raises(DomainError):
        SweepSpec("omega", ())
    with pytest.raises(DomainError):
        SweepSpec("omega", (1.0,), outputs=("bogus",))


def test_sweep_with_grid_metrics():
    (row,) = run_sweep(SweepSpec("delta_rel", (0.1,), outputs=("K_svd", "R_numeric")))
    assert row["error"] == ""
    assert row["K_svd"] > 1 and row["R_numeric"] > 1


# CSV formatting


def test_number_format():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(1.0e-20 / 3) == "3.33333333333e-21"
    assert fmt(2) == "2"
    assert fmt(True) == "true"
    assert fmt(1 - 2j) == "1-2j"
    assert fmt(math.nan) == "nan"


# command line


def test_cli_eigen(capsys):
    assert main(["eigen"]) == 0
    head, rows = read_csv(capsys.readouterr().out)
    assert head == ["j", "re_lambda", "im_lambda", "re_p", "im_p", "alpha", "beta", "zeta", "theta", "dt_ent"]
    assert [r[0] for r in rows] == ["1", "2", "3"]
    re = [float(r[1]) for r in rows]
    assert re[0] == min(re)
    complex(rows[0][5])  # a+bj parses


def test_cli_flags_after_subcommand(capsys):
    assert main(["eigen", "--set", "delta_rel=0.02"]) == 0
    a = capsys.readouterr().out
    assert main(["--set", "delta_rel=0.02", "eigen"]) == 0
    assert capsys.readouterr().out == a


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("# test scenario\nomega = 1.0\ndelta_big = 10\ndelta_rel = 0.02\neta = 1e-3\n")
    assert main(["--config", str(cfg), "eigen"]) == 0
    a = capsys.readouterr().out
    assert main(["eigen", "--set", "delta_rel=0.02"]) == 0
    assert capsys.readouterr().out == a


def test_cli_metrics(capsys):
    assert main(["metrics", "--set", "delta_rel=0.1"]) == 0
    head, rows = read_csv(capsys.readouterr().out)
    assert head[0] == "K_svd" and len(rows) == 1
    rec = dict(zip(head, map(float, rows[0])))
    assert rec["R_numeric"] == pytest.approx(rec["R_analytic"], rel=0.1)


def test_cli_dynamics(capsys):
    args = ["dynamics", "--set", "delta_big=2", "--set", "delta_rel=0.5", "--n-record", "5"]
    assert main(args) == 0
    head, rows = read_csv(capsys.readouterr().out)
    assert head == ["t", "mass_internal", "mass_emitted", "l2_error_vs_analytic"]
    assert rows[0][:3] == ["0", "1", "0"]
    assert float(rows[-1][3]) < 1e-2


def test_cli_disentangle(capsys):
    assert main(["disentangle", "--n-times", "4"]) == 0
    head, rows = read_csv(capsys.readouterr().out)
    assert head == ["t", "r_closed", "r_mc", "r_mc_err", "dq_single"]
    assert rows[0][1] == "3000" and rows[0][2] == "nan"
    assert main(["disentangle", "--n-times", "4", "--n-traj", "2000", "--seed", "3"]) == 0
    _, rows = read_csv(capsys.readouterr().out)
    assert rows[1][2] != "nan"


def test_cli_sweep(capsys):
    assert main(["sweep", "--axis", "delta_rel", "--values", "0.01,0", "--outputs", "K_analytic"]) == 0
    head, rows = read_csv(capsys.readouterr().out)
    assert head == ["delta_rel", "K_analytic", "error"]
    assert rows[1][1] == "nan" and rows[1][2].startswith("InfiniteEntanglement")


def test_cli_preset_to_file(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["preset", "sodium", "--out", str(out)]) == 0
    head, rows = read_csv(out.read_text())
    assert head == ["quantity", "value"] and rows[0][0] == "D"


def test_cli_domain_exit(capsys):
    assert main(["eigen", "--set", "bogus=1"]) == 2
    assert main(["fig", "9z"]) == 2
    assert main(["eigen", "--set", "omega=-1"]) == 2
    assert "domain error" in capsys.readouterr().err


def test_cli_convergence_exit(capsys):
    assert main(["metrics", "--grid", "32,32,5,50"]) == 3
    assert "GridTooCoarse" in capsys.readouterr().err


def test_cli_io_exit(tmp_path, capsys):
    assert main(["eigen", "--out", str(tmp_path / "missing" / "x.csv")]) == 4
    assert main(["--config", str(tmp_path / "nope.cfg"), "eigen"]) == 4


def test_coarse_grid_is_named_failure():
    res = acceptance.criterion_4(GridConfig(32, 32, 5.0, 50.0))
    assert not res.passed
    assert res.measured.startswith("GridTooCoarse")
