import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reference_geometry
from viacoax.cascade import (
    FrequencyResponse,
    Sweep,
    TransferMatrix,
    cascade_s_params,
    cascade_sections,
    effective_bandwidth,
    segment_matrix,
)
from viacoax.coaxmodel import CoaxSection, coax_impedance
from viacoax.constants import C0
from viacoax.geometry import GeometryError, Layer, Material, ViaGeometry, mil_to_m
from viacoax.modesolver import Method

ER = 3.62
MAT = Material(ER)
A = mil_to_m(3.5).meters


def section(z0, length, mat=MAT):
    return CoaxSection.with_impedance(z0, A, mat, length)


def test_segment_dc_is_identity():
    m = segment_matrix(section(45.0, 1e-3), 0.0)
    assert (m.A, m.B, m.C, m.D) == (1, 0, 0, 1)


def test_segment_quarter_wave():
    f0 = 30e9
    length = C0 / (4 * f0 * math.sqrt(ER))
    sec = section(45.0, length)
    m = segment_matrix(sec, f0)
    assert abs(m.A) < 1e-12 and abs(m.D) < 1e-12
    assert m.B == pytest.approx(1j * sec.z0, abs=1e-9)
    assert m.C == pytest.approx(1j / sec.z0, abs=1e-12)


@given(st.floats(0, 200e9), st.floats(1e-5, 1e-2), st.floats(10, 120), st.floats(0, 0.05))
def test_segment_determinant_and_lossless_structure(f, length, z0, tand):
    m = segment_matrix(section(z0, length, Material(ER, tand)), f)
    assert m.det == pytest.approx(1, abs=1e-9)
    if tand == 0:
        assert abs(m.A.imag) < 1e-12 and abs(m.D.imag) < 1e-12
        assert abs(m.B.real) < 1e-9 * z0 and abs(m.C.real) < 1e-9 / z0


def test_matched_cascade():
    g = reference_geometry()
    zr = coax_impedance(mil_to_m(3.5), mil_to_m(15), ER)
    res = cascade_s_params(g, Sweep(), zr)
    assert np.max(np.abs(res.response.s11)) < 1e-12
    assert effective_bandwidth(res.response) == Sweep().f_stop


def test_quarter_wave_transformer():
    f0 = 40e9
    length = C0 / (4 * f0 * math.sqrt(ER))
    sec = section(45.86, length)
    s = cascade_sections([sec], [f0], 50.0)
    zin = sec.z0**2 / 50.0
    assert zin == pytest.approx(42.06, abs=0.01)
    assert s[0, 0, 0] == pytest.approx((zin - 50) / (zin + 50), abs=1e-9)


def test_segment_splitting():
    f = Sweep().frequencies
    one = cascade_sections([section(38.0, 2e-3)], f, 50)
    two = cascade_sections([section(38.0, 1e-3)] * 2, f, 50)
    assert np.max(np.abs(one - two)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(20, 90), st.floats(1e-5, 3e-3)), min_size=1, max_size=5), st.integers(2, 5))
def test_segment_splitting_random(segs, parts):
    f = np.linspace(0, 110e9, 301)
    whole = [section(z, l) for z, l in segs]
    split = [section(z, l / parts) for z, l in segs for _ in range(parts)]
    assert np.max(np.abs(cascade_sections(whole, f, 50) - cascade_sections(split, f, 50))) < 1e-12


def test_lossless_unitarity_and_reciprocity_full_sweep():
    g = ViaGeometry(
        mil_to_m(3.5),
        mil_to_m(15),
        7,
        tuple(Layer(f"L{i}", mil_to_m(7), mil_to_m(15 if i in (0, 5) else 11)) for i in range(6)),
        MAT,
    )
    t = time.perf_counter()
    res = cascade_s_params(g, Sweep(), 50.0)
    elapsed = time.perf_counter() - t
    s = res.response.s
    assert len(res.response.f) == 11000
    power = np.abs(s[:, 0, 0]) ** 2 + np.abs(s[:, 1, 0]) ** 2
    assert np.max(np.abs(power - 1)) < 1e-9
    assert np.max(np.abs(s[:, 1, 0] - s[:, 0, 1])) < 1e-12
    assert elapsed < 5.0


def test_passivity_with_loss():
    g = reference_geometry(loss_tangent=0.02, antipad_mil=12)
    s = cascade_s_params(g, Sweep(0, 110e9, 2001), 50.0).response.s
    power = np.abs(s[:, 0, 0]) ** 2 + np.abs(s[:, 1, 0]) ** 2
    assert np.all(power <= 1 + 1e-9)
    assert power[-1] < 1 - 1e-4


def test_invalid_geometry_and_sweep():
    with pytest.raises(GeometryError):
        cascade_s_params(reference_geometry(antipad_mil=20), Sweep(0, 1e9, 3))
    with pytest.raises(ValueError):
        Sweep(0, 1e9, 1)
    with pytest.raises(ValueError):
        Sweep(2e9, 1e9, 10)


def test_feed_section_leads():
    g = reference_geometry(n_layers=2)
    feed = section(50.0, 5e-3)
    base = cascade_s_params(g, Sweep(0, 50e9, 101), 50.0)
    fed = cascade_s_params(g, Sweep(0, 50e9, 101), 50.0, feed=feed)
    # a matched lead only rotates the reflection phase
    assert np.allclose(np.abs(fed.response.s11), np.abs(base.response.s11), atol=1e-12)
    assert not np.allclose(fed.response.s11, base.response.s11)


def test_effective_bandwidth_examples():
    f = np.linspace(0, 100e9, 101)
    db = -40 + 40 * f / 100e9
    resp = FrequencyResponse(f, 10 ** (db / 20) + 0j, 50)
    assert effective_bandwidth(resp, -10) == pytest.approx(75e9, rel=1e-12)
    flat = FrequencyResponse(f, np.zeros(101, complex), 50)
    assert effective_bandwidth(flat) == 100e9
    loud = FrequencyResponse(f, np.full(101, 0.9 + 0j), 50)
    assert effective_bandwidth(loud) == 0.0


def test_frequency_response_checks():
    with pytest.raises(ValueError):
        FrequencyResponse([0, 1, 3], np.zeros(3), 50)
    with pytest.raises(ValueError):
        FrequencyResponse([0, 2, 1], np.zeros(3), 50)
    with pytest.raises(ValueError):
        FrequencyResponse([0, 1], np.zeros((2, 3, 3)), 50)
    r = FrequencyResponse([0, 1], np.zeros(2), 50)
    assert r.ports == 1
    with pytest.raises(ValueError):
        r.s21


def test_mode_advisory_fig8_ratio():
    g = ViaGeometry(
        mil_to_m(3.5),
        mil_to_m(15),
        7,
        (
            Layer("top", mil_to_m(5), mil_to_m(15)),
            Layer("in1", mil_to_m(5), mil_to_m(11)),
            Layer("in2", mil_to_m(5), mil_to_m(11)),
            Layer("bot", mil_to_m(5), mil_to_m(15)),
        ),
        MAT,
    )
    adv = cascade_s_params(g, Sweep(0, 300e9, 601), 50).advisory
    top, inner = adv.segments[0], adv.segments[1]
    assert inner.te11_approx.fc / top.te11_approx.fc == pytest.approx(18.5 / 14.5, abs=0.01)
    assert inner.te11.method is Method.EXACT
    assert inner.te11.fc > top.te11.fc
    for seg in adv.segments:
        for db, fc in ((seg.atten_db_te11, seg.te11.fc), (seg.atten_db_tm01, seg.tm01.fc)):
            assert np.all(db >= 0)
            assert np.all(db[adv.f >= fc] == 0)
            assert np.all(db[adv.f < fc] > 0)
    # alpha * length * 8.686 at DC
    assert top.atten_db_te11[0] == pytest.approx(top.te11.kc * mil_to_m(5).meters * 8.685889638, rel=1e-9)


def test_layer_antipad_clamped_to_ring():
    g = reference_geometry(n_layers=1)
    assert g.outer_radius(g.layers[0]) == mil_to_m(15).meters


def test_transfer_matrix_to_s_matches_formula():
    m = TransferMatrix(0.3 + 0.1j, 12 + 4j, 0.01j, 1.2 - 0.2j)
    zr = 50
    s = m.to_s(zr)
    den = m.A * zr + m.B + m.C * zr**2 + m.D * zr
    assert s[0, 0] == pytest.approx((m.A * zr + m.B - m.C * zr**2 - m.D * zr) / den)
    assert s[1, 0] == pytest.approx(2 * zr / den)
    assert s[0, 1] == pytest.approx(2 * zr * m.det / den)
