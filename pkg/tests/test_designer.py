import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference_geometry
from viacoax.cascade import Sweep
from viacoax.coaxmodel import coax_impedance
from viacoax.designer import (
    DesignInfeasible,
    DesignSpec,
    barrel_sweep,
    design_via,
    evaluate,
    modulate_inner_antipad,
    spec_from_dict,
    tdr_polarity,
)
from viacoax.geometry import GeometryError, Length, mil_to_m

ER = 3.62
QUICK = Sweep(10e6, 110e9, 1100)
INNER = ["L2", "L3", "L4", "L5"]


def spec(**kw):
    base = dict(target_z0=50.0, f_max=67e9, free=frozenset({"outer_radius"}), sweep=QUICK)
    base.update(kw)
    return DesignSpec(**base)


def test_inverse_round_trip_outer():
    z = coax_impedance(mil_to_m(3.5), mil_to_m(15), ER)
    r = design_via(spec(target_z0=z), reference_geometry())
    assert Length(r.geometry.stitch_ring_radius).mils == pytest.approx(15, abs=1e-6)


def test_target_50_ohm():
    r = design_via(spec(), reference_geometry())
    b = r.geometry.stitch_ring_radius.mils
    assert b == pytest.approx(17.1, abs=0.05)
    assert all(l.antipad_radius.mils == pytest.approx(b) for l in r.geometry.layers)
    assert r.verdict == "pass"
    assert coax_impedance(r.geometry.barrel_radius, r.geometry.stitch_ring_radius, ER) == pytest.approx(50, rel=1e-6)


def test_barrel_free_42_5_ohm():
    r = design_via(spec(target_z0=42.5, free=frozenset({"a"})), reference_geometry())
    assert r.geometry.barrel_radius.mils == pytest.approx(3.89, abs=0.02)
    te_approx = r.layers[0].te11_approx.fc
    assert te_approx / 1e9 == pytest.approx(104.6, abs=1)
    assert r.verdict == "pass"
    assert r.mode_margin > 1.5


def test_clamp_to_floor_emits_diagnostic():
    # 46.5 ohm needs a ~3.41 mil barrel; a 3.45 mil floor clamps it within tolerance
    r = design_via(spec(target_z0=46.5, free=frozenset({"a"}), min_barrel_radius=mil_to_m(3.45)), reference_geometry())
    assert r.geometry.barrel_radius.mils == pytest.approx(3.45)
    assert any(d.code == "clamped" for d in r.diagnostics)


def test_infeasible_names_constraint():
    s = spec(
        target_z0=120,
        free=frozenset({"a", "b"}),
        min_barrel_radius=mil_to_m(2),
        max_outer_radius=mil_to_m(15),
    )
    with pytest.raises(DesignInfeasible) as info:
        design_via(s, reference_geometry())
    assert "min_barrel_radius" in info.value.constraints
    assert "63.4966" in str(info.value)
    assert "max_outer_radius" in info.value.constraints


def test_outer_cap_only():
    with pytest.raises(DesignInfeasible, match="max_outer_radius"):
        design_via(spec(target_z0=70, max_outer_radius=mil_to_m(15)), reference_geometry())


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(free=frozenset())
    with pytest.raises(ValueError):
        spec(free=frozenset({"width"}))
    with pytest.raises(ValueError):
        spec(target_z0=0)


@settings(max_examples=20, deadline=None)
@given(st.floats(30, 70), st.sampled_from([{"a"}, {"b"}, {"a", "b"}]))
def test_design_hits_target(z, free):
    r = design_via(spec(target_z0=z, free=frozenset(free)), reference_geometry())
    g = r.geometry
    assert coax_impedance(g.barrel_radius, g.stitch_ring_radius, ER) == pytest.approx(z, rel=1e-6)


def test_verdict_consistency():
    r = evaluate(reference_geometry(), f_max=67e9, z_ref=45.86, sweep=QUICK)
    assert r.passed == (r.min_te11_fc > 67e9 and r.effective_bandwidth >= 67e9)
    hot = evaluate(reference_geometry(), f_max=115e9, z_ref=45.86, sweep=QUICK)
    assert not hot.passed and hot.mode_margin < 1


def test_modulation_fig8():
    g = reference_geometry()
    new, rep = modulate_inner_antipad(g, mil_to_m(11), INNER, z_ref=45.86, sweep=QUICK)
    assert [l.antipad_radius.mils for l in new.layers] == pytest.approx([15, 11, 11, 11, 11, 15])
    assert len(rep.changes) == 4
    for c in rep.changes:
        assert c.te11_ratio == pytest.approx(18.5 / 14.5, abs=0.005)
        assert c.z0_after == pytest.approx(36.1, abs=0.1)
        assert c.z0_before == pytest.approx(45.9, abs=0.05)
    assert {d.code for d in rep.diagnostics} == {"added_mismatch"}
    assert rep.before.response is not None and rep.after.response is not None


def test_modulation_noop():
    g = reference_geometry()
    new, rep = modulate_inner_antipad(g, mil_to_m(15), INNER, sweep=QUICK)
    assert new == g
    assert rep.before.to_dict() == rep.after.to_dict()
    assert rep.diagnostics == ()


def test_modulation_errors():
    with pytest.raises(GeometryError):
        modulate_inner_antipad(reference_geometry(), mil_to_m(3.5), INNER)
    with pytest.raises(GeometryError, match="L9"):
        modulate_inner_antipad(reference_geometry(), mil_to_m(11), ["L9"])


@settings(max_examples=15, deadline=None)
@given(st.floats(5.0, 14.9))
def test_modulation_raises_cutoffs(r):
    _, rep = modulate_inner_antipad(reference_geometry(), mil_to_m(r), INNER, sweep=Sweep(0, 110e9, 11))
    for c in rep.changes:
        assert c.te11_after > c.te11_before
        assert c.tm01_after > c.tm01_before


def test_barrel_sweep_reference_diameters():
    rows = barrel_sweep(reference_geometry(), [mil_to_m(d) for d in (4, 7, 10)], z_ref=45.86, sweep=QUICK)
    assert [r.z0 for r in rows] == pytest.approx([63.5, 45.9, 34.6], abs=0.1)
    assert [r.polarity for r in rows] == ["peak", "flat", "dip"]
    for r, published in zip(rows, (62, 42.5, 36)):
        assert abs(r.z0 - published) <= 4
    assert rows[0].te11_fc > rows[1].te11_fc > rows[2].te11_fc
    z = [r.z0 for r in rows]
    assert z[0] > z[1] > z[2]


def test_barrel_sweep_out_of_range():
    with pytest.raises(GeometryError):
        barrel_sweep(reference_geometry(), [mil_to_m(30)])


def test_polarity_band():
    assert tdr_polarity(50.4, 50) == "flat"
    assert tdr_polarity(50.6, 50) == "peak"
    assert tdr_polarity(49.4, 50) == "dip"


def test_spec_from_dict():
    s, geom = spec_from_dict({"target_z0": 50, "f_max_ghz": 67, "free": ["b"], "max_outer_radius_mil": 20})
    assert s.f_max == 67e9 and s.free == {"outer_radius"} and geom is None
    assert s.max_outer_radius == pytest.approx(20 * 25.4e-6)
    with pytest.raises(ValueError, match="'bogus'"):
        spec_from_dict({"target_z0": 50, "f_max_ghz": 67, "free": ["b"], "bogus": 1})
    with pytest.raises(ValueError, match="free"):
        spec_from_dict({"target_z0": 50, "f_max_ghz": 67, "free": []})
