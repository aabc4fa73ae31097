import json
import re

import numpy as np
import pytest

from viacoax import touchstone
from viacoax.cascade import FrequencyResponse
from viacoax.cli import main
from viacoax.tdr import time_shifted

REFERENCE = {
    "barrel_radius_mil": 3.5,
    "stitch_ring_radius_mil": 15,
    "stitch_count": 7,
    "epsilon_r": 3.62,
    "layers": [{"name": f"L{i}", "thickness_mil": 5, "antipad_radius_mil": 15} for i in range(1, 7)],
}
SWEEP = ["--sweep", "0.01:110:2200"]


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


def value(text, key):
    m = re.search(rf"^{key}\s+(\S+)$", text, re.M)
    assert m, f"{key} not in output"
    return m.group(1)


@pytest.fixture
def geom(tmp_path):
    return write_json(tmp_path / "g.json", REFERENCE)


def test_analyze_reference_geometry(tmp_path, geom, capsys):
    out = tmp_path / "out"
    assert main(["analyze", "--config", str(geom), "--out", str(out), *SWEEP]) == 0
    text = capsys.readouterr().out
    row = re.search(r"^L1\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)$", text, re.M).groups()
    assert float(row[1]) == pytest.approx(45.9, abs=0.05)
    assert float(row[2]) == pytest.approx(106.7, abs=0.05)
    assert 100 <= float(row[3]) <= 115
    doc = touchstone.read(out / "sparams.s2p")
    assert doc.ports == 2 and len(doc.f) == 2200
    adv = json.loads((out / "advisory.json").read_text())
    assert adv["layers"][0]["te11_exact"]["method"] == "exact_bessel_root"


def test_analyze_empty_layers(tmp_path, capsys):
    p = write_json(tmp_path / "g.json", {**REFERENCE, "layers": []})
    assert main(["analyze", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "layers" in capsys.readouterr().err


def test_analyze_invalid_geometry_exit_2(tmp_path, capsys):
    p = write_json(tmp_path / "g.json", {**REFERENCE, "barrel_radius_mil": 15})
    assert main(["analyze", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "barrel_radius < stitch_ring_radius violated" in capsys.readouterr().err


def test_missing_config_is_io_error(tmp_path):
    assert main(["analyze", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 3


def test_analyze_matched_bandwidth_is_fstop(tmp_path, geom, capsys):
    assert main(["analyze", "--config", str(geom), "--out", str(tmp_path), "--zref", "45.8611703", *SWEEP]) == 0
    assert float(value(capsys.readouterr().out, "effective_bandwidth_ghz")) == 110


def test_analyze_is_byte_deterministic(tmp_path, geom):
    for d in ("a", "b"):
        assert main(["analyze", "--config", str(geom), "--out", str(tmp_path / d), "--no-meta", *SWEEP]) == 0
    for name in ("sparams.s2p", "advisory.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert not (tmp_path / "a" / "sparams.s2p").read_text().startswith("!")


def test_design_50_ohm(tmp_path, geom, capsys):
    s = write_json(tmp_path / "s.json", {"target_z0": 50, "f_max_ghz": 67, "free": ["outer_radius"]})
    assert main(["design", str(s), "--config", str(geom), "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert float(value(text, "stitch_ring_radius_mil")) == pytest.approx(17.1, abs=0.05)
    assert value(text, "verdict") == "pass"
    report = json.loads((tmp_path / "design.json").read_text())
    assert report["verdict"] == "pass"


def test_design_infeasible_exit_4(tmp_path, capsys):
    s = write_json(
        tmp_path / "s.json",
        {
            "target_z0": 120,
            "f_max_ghz": 67,
            "free": ["barrel_radius", "outer_radius"],
            "min_barrel_radius_mil": 2,
            "max_outer_radius_mil": 15,
            "geometry": REFERENCE,
        },
    )
    assert main(["design", str(s)]) == 4
    assert "min_barrel_radius" in capsys.readouterr().err


def test_design_no_free_parameter_exit_2(tmp_path, geom):
    s = write_json(tmp_path / "s.json", {"target_z0": 50, "f_max_ghz": 67, "free": []})
    assert main(["design", str(s), "--config", str(geom)]) == 2


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "time_s,rho,z_ohm"
    return np.array([[float(x) for x in l.split(",")] for l in lines[1:]])


def test_tdr_matched_model(tmp_path, geom, capsys):
    args = ["tdr", str(geom), "--zref", "45.8611703", "--out", str(tmp_path), *SWEEP]
    assert main(args) == 0
    data = read_csv(tmp_path / "tdr.csv")
    assert np.max(np.abs(data[:, 2] - 45.8611703)) < 0.01
    assert "window" in capsys.readouterr().out


def test_tdr_constant_gamma_touchstone(tmp_path):
    f = np.linspace(0, 50e9, 501)
    p = tmp_path / "load.s1p"
    touchstone.save(p, FrequencyResponse(f, np.full(501, 0.2 + 0j), 50), "MA")
    assert main(["tdr", str(p), "--out", str(tmp_path)]) == 0
    data = read_csv(tmp_path / "tdr.csv")
    assert data[-1, 2] == pytest.approx(75, abs=0.1)


def compare_metrics(tmp_path, geom, ref, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(geom), str(ref), "--out", str(out)]) == 0
    capsys.readouterr()
    return json.loads((out / "compare.json").read_text())


def model_response(tmp_path, geom, fmt="RI"):
    assert main(["analyze", "--config", str(geom), "--out", str(tmp_path / "m"), "--format", fmt, *SWEEP]) == 0
    return tmp_path / "m" / "sparams.s2p"


def test_compare_self(tmp_path, geom, capsys):
    m = compare_metrics(tmp_path, geom, model_response(tmp_path, geom), capsys)
    assert m["max_abs_ds11"] < 1e-9
    assert m["max_dz_ohm"] < 1e-6 and m["offset_ps"] == 0
    assert (tmp_path / "cmp" / "sparams_overlay.csv").exists()
    assert (tmp_path / "cmp" / "tdr_overlay.csv").exists()


def test_compare_format_converted(tmp_path, geom, capsys):
    m = compare_metrics(tmp_path, geom, model_response(tmp_path, geom, "ma"), capsys)
    assert m["max_abs_ds11"] < 1e-6 and m["max_abs_ds21"] < 1e-6


def test_compare_shifted_copy(tmp_path, geom, capsys):
    ref = touchstone.read(model_response(tmp_path, geom)).to_response()
    shifted = tmp_path / "shifted.s2p"
    touchstone.save(shifted, time_shifted(ref, 20e-12))
    m = compare_metrics(tmp_path, geom, shifted, capsys)
    assert m["offset_ps"] == pytest.approx(20, abs=0.6)


def test_bad_sweep_flag(geom):
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--config", str(geom), "--sweep", "1:2"])
    assert info.value.code == 2
