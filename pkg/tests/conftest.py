import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from viacoax.geometry import Layer, Length, Material, ViaGeometry, mil_to_m  # noqa: E402

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def reference_geometry(n_layers=6, antipad_mil=15.0, stitch_count=7, thickness_mil=5.0, loss_tangent=0.0):
    """a = 3.5 mil barrel, b = 15 mil ring, er = 3.62, uniform anti-pads."""
    return ViaGeometry(
        barrel_radius=mil_to_m(3.5),
        stitch_ring_radius=mil_to_m(15),
        stitch_count=stitch_count,
        layers=tuple(
            Layer(f"L{i + 1}", mil_to_m(thickness_mil), mil_to_m(antipad_mil)) for i in range(n_layers)
        ),
        material=Material(3.62, loss_tangent),
    )


@pytest.fixture
def reference_geom():
    return reference_geometry()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
