import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import nanofock

TWO_PI = 2.0 * math.pi
SOURCE = Path(os.environ.get("NANOFOCK_SOURCE_DIR", Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="module")
def operating_point():
    g = TWO_PI * 21e3
    return nanofock.quoted(
        omega_m=TWO_PI * 5.23e6,
        lambda_=TWO_PI * 209e3,
        kappa=TWO_PI * 52.3e3,
        quality_factor=5e6,
        temperature=0.020,
        lasers=[("+delta_1", g), ("-delta_2", g), ("-delta_3", g)],
        probe=(0.0, TWO_PI * 2e3),
    )


def test_version():
    assert nanofock.__version__.count(".") == 2


def test_reduced_populations(operating_point):
    p = nanofock.reduced_populations(operating_point, 10)
    assert sum(p) == pytest.approx(1.0, abs=1e-12)
    assert p[1] == pytest.approx(0.91, abs=0.05)
    assert nanofock.wigner_origin(p) <= -0.45


def test_full_matches_reduced(operating_point):
    full = nanofock.full_populations(operating_point, 6, 2)
    reduced = nanofock.reduced_populations(operating_point, 6)
    assert max(abs(a - b) for a, b in zip(full, reduced)) < 0.05


def test_wigner_grid():
    w = nanofock.wigner([1.0])
    assert w["origin"] == pytest.approx(2.0 / math.pi)
    assert w["integral"] == pytest.approx(1.0, abs=1e-3)
    values = np.asarray(w["values"])
    assert values.shape == (len(w["x"]), len(w["p"]))


def test_spectrum_round_trip(operating_point):
    p = [0.05, 0.9, 0.05]
    s = nanofock.spectrum(p, operating_point)
    assert s["resolvable"]
    assert len(s["peaks"]) == 2
    recovered = nanofock.spectrum_round_trip(p, operating_point)
    assert np.allclose(recovered, p, atol=0.02)


def test_validate(operating_point):
    report = nanofock.validate(operating_point)
    assert {c["name"] for c in report["checks"]} >= {"rwa", "strong_nonlinearity"}


def test_derive_and_run(tmp_path):
    d = nanofock.derive(SOURCE / "configs" / "fig2.json")
    assert d.omega_m / TWO_PI == pytest.approx(5.23e6, rel=0.05)
    code, _, _ = nanofock.run("device", SOURCE / "configs" / "fig2.json", out=tmp_path)
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok"


def test_errors_are_python_exceptions(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"device": {}}')
    with pytest.raises(ValueError):
        nanofock.derive(bad)
    with pytest.raises(ValueError):
        nanofock.quoted(omega_m=-1.0, lambda_=0.0, kappa=1.0, quality_factor=1.0, temperature=0.0, lasers=[])
