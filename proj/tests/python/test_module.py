import numpy as np
import pytest

oscid = pytest.importorskip("oscid")


def test_profiles():
    assert oscid.profile_names() == ["lfo_udc", "ac_in"]
    spec = oscid.profile("lfo_udc")
    assert spec["modes"][0]["frequency_hz"] == 8.6
    record = oscid.generate(spec)
    assert record["dt"] == pytest.approx(4e-4)
    assert len(record["channels"]["udc"]) == 5000


def test_dmd_recovers_a_damped_mode():
    t = np.arange(2000) / 1000.0
    x = np.exp(-1.5 * t) * np.cos(2 * np.pi * 12 * t)
    h = oscid.delay_embed(x, 50)
    assert h.shape == (50, 1951)
    assert h[3, 10] == x[13]
    result = oscid.dmd(h[:, :-1], h[:, 1:], 1e-3, rank=2)
    modes = oscid.describe_modes(result, h.shape[1] - 1)
    assert modes[0]["frequency_hz"] == pytest.approx(12.0, rel=1e-6)
    assert modes[0]["growth_rate"] == pytest.approx(-1.5, rel=1e-6)
    assert modes[0]["damping"] == "decaying"
    recon = result.reconstruct(h.shape[1] - 1)
    assert np.allclose(recon, h[:, :-1], atol=1e-8)


def test_plan_is_exact():
    p = oscid.plan(4000, 4e-4, mu=16, g="4")
    assert p["levels"] == 8
    assert [lvl["max_capturable_hz"] for lvl in p["per_level"]] == [str(5 * 2**l) for l in range(8)]
    with pytest.raises(oscid.Error, match="infeasible_plan"):
        oscid.plan(4000, 4e-4, mu=5000)


def test_mrdmd_levels_add_up():
    spec = oscid.profile("lfo_udc")
    spec["noise_std"] = 0.0
    record = oscid.generate(spec)
    h = oscid.delay_embed(record["channels"]["udc"], 1000)[:, :-1]
    out = oscid.mrdmd(h, record["dt"], mu=16, delay_stride=1)
    assert len(out["levels"]) == 8
    assert np.allclose(sum(out["levels"]), out["total"], atol=1e-9)
    slow = [m for m in out["modes"] if m["slow"] and m["frequency_hz"] > 1]
    assert slow[0]["level"] == 4
    assert slow[0]["frequency_hz"] == pytest.approx(8.6, abs=0.2)


def test_analyze_writes_artifacts(tmp_path):
    status = oscid.analyze("mrdmd", tmp_path, profile="lfo_udc", gap_start=2000, gap_length=250)
    assert status == 0
    assert (tmp_path / "report.json").exists()
    with pytest.raises(oscid.Error, match="invalid_argument"):
        oscid.analyze("mrdmd", tmp_path, profile="lfo_udc", rank=0)
