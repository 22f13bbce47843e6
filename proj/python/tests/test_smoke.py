import json
import math
import os
from pathlib import Path

import pytest

import iegs

DATA = Path(os.environ.get("IEGS_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def unit(uid, bus, pmin, pmax, h, rmax, energy):
    return {"id": uid, "kind": "non-gfu", "bus": bus, "p_min": pmin, "p_max": pmax,
            "ramp_up": pmax, "ramp_down": pmax, "min_up": 1, "min_down": 1, "inertia": h,
            "reserve_max": rmax, "initial": {"on": True},
            "cost": {"energy": energy, "no_load": 100.0, "startup": 500.0, "shutdown": 0.0, "pfr": 2.0}}


def toy(T=2, load=120.0, loss=5.0):
    return {
        "schema_version": 1, "name": "toy", "horizon": T,
        "generators": [unit("G1", "B1", 20, 100, 5.0, 20, 20.0), unit("G2", "B2", 10, 80, 4.0, 15, 30.0)],
        "wind_farms": [{"id": "W1", "bus": "B2", "capacity": 50.0, "vi_inertia": 6.0, "reserve_max": 10.0,
                        "cost": {"vi": 50.0, "pfr": 1.0}, "forecast": [30.0] * T}],
        "power_network": {
            "buses": [{"id": "B1"}, {"id": "B2"}], "reference_bus": "B1",
            "lines": [{"id": "L1", "from": "B1", "to": "B2", "reactance": 0.1, "capacity": 200.0}],
            "loads": [{"id": "D1", "bus": "B2", "demand": [load] * T}]},
        "gas_network": {"nodes": [], "pipelines": [], "sources": [], "loads": []},
        "frequency": {"D": 0.01, "f0": 50.0, "df_db": 0.015, "t_db": 0.1, "Td": 10.0, "rocof_max": 0.5,
                      "f_min": 49.2, "df_qss_max": 0.2, "dP_loss": [loss] * T},
        "uncertainty": {"epsilon": 0.05, "samples": {"variance_mode": "std_fraction", "dispersion": 0.1,
                                                     "in_sample": 200, "out_of_sample": 200,
                                                     "moment_samples": 20, "seed": 7}},
    }


@pytest.fixture(scope="module")
def toy_instance():
    return iegs.parse_instance(json.dumps(toy()))


def test_bundled_instance_loads():
    inst = iegs.load_instance(str(DATA / "iegs5_7.json"))
    assert inst.horizon == 24
    assert inst.generators == ["G1", "G2", "G3"]
    assert len(inst.wind_farms) == 2
    assert json.loads(inst.to_json())["name"] == "iegs5_7"


def test_bad_input_raises_library_errors():
    with pytest.raises(iegs.ParseError):
        iegs.parse_instance("{ not json")
    bad = toy()
    bad["generators"][0]["p_min"] = 500.0
    with pytest.raises(iegs.Error):
        iegs.parse_instance(json.dumps(bad))


def test_safety_factors():
    assert iegs.cantelli_factor(0.05) == pytest.approx(math.sqrt(19), rel=1e-12)
    assert iegs.vp_factor(0.05) == pytest.approx(math.sqrt((4 / 9 - 0.05) / 0.05), rel=1e-12)
    assert iegs.moment_soc_min_r(0.05) == pytest.approx(4.36435780, rel=1e-8)


def test_kappa_and_nadir(toy_instance):
    p = toy_instance.frequency
    k = iegs.solve_kappa(p, 15.0, 300.0)
    assert k == pytest.approx(566.8167830186784, rel=1e-8)
    assert abs(iegs.kappa_residual(k, p, 15.0, 300.0)) < 1e-6


def test_swing_matches_closed_form():
    p = iegs.FrequencyParams()
    p.damping, p.nominal, p.deadband, p.dead_time = 0.01, 50.0, 0.015, 0.01
    p.delivery_time, p.f_min = 10.0, 49.2
    H, load, dP = 20.0, 300.0, 15.0
    R = iegs.solve_kappa(p, dP, load) / H
    sim = iegs.simulate_swing(H, R, load, dP, p, dt=1e-3, horizon=30.0)
    assert sim["nadir"] == pytest.approx(iegs.nadir_closed_form(R, H, p, dP, load), abs=1e-3)
    assert sim["nadir"] == pytest.approx(0.8, abs=1e-3)
    assert sim["initial_rocof"] == pytest.approx(dP / (2 * H), rel=1e-6)


def test_solve_and_evaluate_toy(toy_instance):
    sol = iegs.solve(toy_instance, "dr-m")
    assert sol["exit_condition"] == "converged"
    report = iegs.evaluate(toy_instance, sol)
    assert report["variant"] == "dr-m"
    assert report["frequency_failing_hours"] == 0
    assert 0.0 <= report["ejvp_percent"] <= 5.0


def test_unimodal_epsilon_rejected(toy_instance):
    with pytest.raises(iegs.Error, match="1/6"):
        iegs.solve(toy_instance, "dr-u", epsilon=0.2)


def test_export_conic(toy_instance, tmp_path):
    path = tmp_path / "toy.conic"
    nvars, nrows, ncones = iegs.export_conic(toy_instance, "dr-m", str(path))
    text = path.read_text()
    assert text.startswith("CONIC 1")
    assert nvars > 0 and nrows > 0 and ncones > 0
