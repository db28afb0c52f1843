import math

import numpy as np
import pytest

import adjstep


@pytest.fixture()
def burgers_config(tmp_path):
    cfg = tmp_path / "burgers.cfg"
    cfg.write_text("model = burgers1d\nlevel = 1\n")
    return cfg


def test_pipeline_round_trip(tmp_path, burgers_config):
    run = tmp_path / "coarse"
    fwd = adjstep.forward(str(burgers_config), str(run))
    assert fwd["steps"] > 0
    assert fwd["implicit_steps"] == fwd["steps"]
    assert math.isfinite(fwd["functional"])

    est = adjstep.adjoint(str(run))
    assert est["eta"] == pytest.approx(est["eta_k"] + est["eta_h"])
    assert len(est["intervals"]) == fwd["steps"]

    summary = adjstep.plan(str(run), mode="mixed", fine_level=2)
    assert summary["steps"] == summary["implicit_steps"] + summary["explicit_steps"]
    plan = adjstep.read_plan(str(run / "plan.txt"))
    assert sum(plan["dt"]) == pytest.approx(plan["final_time"], rel=1e-12)

    fine = adjstep.forward(str(burgers_config), str(tmp_path / "fine"), level=2, plan=str(run / "plan.txt"))
    assert fine["steps"] == summary["steps"]
    ref = adjstep.forward(str(burgers_config), str(tmp_path / "ref"), level=2, cfl=0.5, mode="explicit",
                          keep_fields=False)
    rows = adjstep.report([str(tmp_path / "ref"), str(tmp_path / "fine")], reference=0)
    assert rows[0]["deviation"] == 0.0
    assert rows[1]["steps"] == fine["steps"]


def test_trajectory_contents(tmp_path, burgers_config):
    run = tmp_path / "r"
    adjstep.forward(str(burgers_config), str(run), cfl=0.5, mode="explicit")
    tr = adjstep.read_trajectory(str(run / "trajectory.bin"))
    assert tr["scenario"] == "burgers1d"
    assert tr["level"] == 1
    assert tr["t"][0] == 0.0
    assert set(tr["modes"][1:]) == {"explicit"}
    u0 = np.asarray(tr["fields"][0])
    assert u0.shape == (80,)
    assert u0[0] == 1.0 and u0[-1] == -1.0


def test_burgers_estimate_identities():
    est = adjstep.burgers_estimate(1, cfl=0.5, mode="explicit")
    assert est["reconstructed_residual"] == pytest.approx(est["eta_h"] + est["eta_k_consistent"], rel=1e-10)
    assert est["eta_h_bar"] >= abs(est["eta_h"])
    assert abs(est["orthogonality"]) < 1e-12


def test_mesh_export(burgers_config):
    m = adjstep.mesh(str(burgers_config), level=0)
    assert m["centroids"].shape == (40, 2)
    assert m["volumes"].sum() == pytest.approx(2.0, rel=1e-14)


def test_errors_map_to_exceptions(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("level = 1\n")
    with pytest.raises(adjstep.ConfigError, match="model"):
        adjstep.forward(str(bad), str(tmp_path / "x"))
    with pytest.raises(adjstep.ArtifactError):
        adjstep.adjoint(str(tmp_path / "missing"))
    with pytest.raises(adjstep.ConfigError, match="sideways"):
        adjstep.burgers_estimate(1, cfl=0.5, mode="sideways")
    with pytest.raises(ValueError):
        adjstep.plan(str(tmp_path / "missing"), mode="sideways")
    assert issubclass(adjstep.ConfigError, adjstep.AdjstepError)


def test_format_double_round_trips():
    for v in (0.1, 1.0 / 3.0, 6.02214076e23):
        assert float(adjstep.format_double(v)) == v
