"""CLI and file-format behaviour: round trips, determinism, exit codes."""

import json

import numpy as np
import pytest

from carnot2 import (
    CubicSegment,
    FreeGroupPoint,
    PlanarCurve,
    SampledCurve,
    Step2Structure,
    estimate_derivatives,
    horizontal_lift,
    pair_antisym,
)
from carnot2.cli import main
from carnot2.io import (
    SchemaError,
    curve_to_dict,
    dump_file,
    load_file,
    object_from_dict,
    samples_to_dict,
    stitched_to_dict,
    structure_from_dict,
    structure_to_dict,
)
from carnot2.lusin import GoodSetConfig, approximate


def circle_samples_dict(n=256):
    ts = np.linspace(0.0, 2 * np.pi, n + 1)
    # oriented so the lifted vertical coordinate gains +pi
    records = [
        {"t": float(t), "x": [float(np.sin(t)), float(np.cos(t) - 1.0)]}
        for t in ts
    ]
    return {"format": "curve/1", "kind": "samples", "r": 2, "samples": records}


def v_path_samples_dict(n=801):
    ts = np.linspace(0.0, 1.0, n)
    xs = np.stack([ts, 0.5 * np.abs(ts - 0.5)], axis=1)
    dxs = np.stack([np.ones(n), np.where(ts <= 0.5, -0.5, 0.5)], axis=1)
    ys = np.where(ts <= 0.5, 0.5 * ts / 4.0,
                  0.5 * 0.5 / 4.0 - 0.5 * (ts - 0.5) / 4.0)[:, None]
    dys = 0.5 * pair_antisym(xs, dxs)
    s = SampledCurve(ts, xs, ys, dxs, dys)
    return samples_to_dict(s)


def test_samples_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(60)
    ts = np.sort(rng.uniform(0, 1, 20))
    s = estimate_derivatives(
        SampledCurve(ts, rng.standard_normal((20, 3)), rng.standard_normal((20, 3)))
    )
    path = tmp_path / "samples.json"
    dump_file(str(path), samples_to_dict(s))
    back = object_from_dict(load_file(str(path)))
    assert np.array_equal(back.times, s.times)
    assert np.array_equal(back.xs, s.xs)
    assert np.array_equal(back.ys, s.ys)
    assert np.array_equal(back.dxs, s.dxs)
    assert np.array_equal(back.dys, s.dys)


def test_symbolic_curve_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(61)
    seg = CubicSegment(rng.standard_normal((4, 2)), 0.7)
    curve = horizontal_lift(PlanarCurve((seg,), t0=0.2),
                            FreeGroupPoint(seg.point(0.0), rng.standard_normal(1)))
    path = tmp_path / "curve.json"
    dump_file(str(path), curve_to_dict(curve))
    back = object_from_dict(load_file(str(path)))
    assert np.array_equal(back.vertical_knots, curve.vertical_knots)
    ts = np.linspace(0.2, 0.9, 5)
    np.testing.assert_array_equal(back.value(ts).flat, curve.value(ts).flat)


def test_deterministic_serialization(tmp_path):
    d = v_path_samples_dict(51)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    dump_file(str(p1), d)
    dump_file(str(p2), d)
    assert p1.read_bytes() == p2.read_bytes()


def test_structure_round_trip(tmp_path):
    st = Step2Structure.from_brackets(3, 2, [(2, 1, 1, 1.0), (3, 1, 2, -0.5)])
    back = structure_from_dict(structure_to_dict(st))
    assert np.array_equal(back.bracket, st.bracket)


def test_approximation_round_trip(tmp_path):
    d = v_path_samples_dict()
    s = object_from_dict(d)
    gamma, _ = approximate(s, GoodSetConfig(eta=0.1, delta=0.02, epsilon=0.2))
    path = tmp_path / "gamma.json"
    dump_file(str(path), stitched_to_dict(gamma))
    back = object_from_dict(load_file(str(path)))
    assert len(back.pieces) == len(gamma.pieces)
    for bp, gp in zip(back.sampled_fragments, gamma.sampled_fragments):
        assert np.array_equal(bp.xs, gp.xs)
        assert np.array_equal(bp.dys, gp.dys)
    for bc, gc in zip(back.curve_fragments, gamma.curve_fragments):
        assert np.array_equal(bc.curve.vertical_knots, gc.curve.vertical_knots)


def test_cli_lift_circle(tmp_path, capsys):
    inp = tmp_path / "circle.json"
    out = tmp_path / "lifted.json"
    dump_file(str(inp), circle_samples_dict())
    code = main(["lift", str(inp), "-o", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "end verticals" in printed
    curve = object_from_dict(load_file(str(out)))
    # polygonal circle area approaches pi
    assert curve.end_point.y[0] == pytest.approx(np.pi, rel=1e-3)


def test_cli_lift_constant_zero_verticals(tmp_path):
    records = [{"t": float(t), "x": [1.0, 2.0]} for t in (0.0, 0.5, 1.0)]
    inp = tmp_path / "const.json"
    out = tmp_path / "out.json"
    dump_file(str(inp), {"format": "curve/1", "kind": "samples", "r": 2,
                         "samples": records})
    code = main(["lift", str(inp), "-o", str(out), "--csv", str(tmp_path / "c.csv")])
    assert code == 0
    curve = object_from_dict(load_file(str(out)))
    assert np.max(np.abs(curve.vertical_knots)) == 0.0
    assert (tmp_path / "c.csv").exists()


def test_cli_lift_malformed_times(tmp_path):
    records = [
        {"t": 0.0, "x": [0.0, 0.0]},
        {"t": 0.5, "x": [1.0, 0.0]},
        {"t": 0.4, "x": [2.0, 0.0]},
    ]
    inp = tmp_path / "bad.json"
    dump_file(str(inp), {"format": "curve/1", "kind": "samples", "r": 2,
                         "samples": records})
    code = main(["lift", str(inp), "-o", str(tmp_path / "out.json")])
    assert code == 2


def test_cli_approximate_v_path(tmp_path, capsys):
    inp = tmp_path / "v.json"
    out = tmp_path / "gamma.json"
    rep = tmp_path / "report.json"
    dump_file(str(inp), v_path_samples_dict(2001))
    code = main([
        "approximate", str(inp), "-o", str(out), "--report", str(rep),
        "--epsilon", "0.1", "--eta", "0.1", "--delta", "0.02",
    ])
    assert code == 0
    report = load_file(str(rep))
    assert report["format"] == "report/1"
    assert report["disagreement_measure"] <= 0.1
    assert report["ok"] is True
    assert report["config"]["epsilon"] == 0.1


def test_cli_approximate_already_smooth(tmp_path):
    ts = np.linspace(0, 1, 101)
    xs = np.stack([ts, np.zeros(101)], axis=1)
    s = estimate_derivatives(SampledCurve(ts, xs, np.zeros((101, 1))))
    inp = tmp_path / "line.json"
    out = tmp_path / "gamma.json"
    dump_file(str(inp), samples_to_dict(s))
    code = main(["approximate", str(inp), "-o", str(out), "--epsilon", "0.05"])
    assert code == 0
    gamma = load_file(str(out))
    kinds = [p["kind"] for p in gamma["pieces"]]
    assert kinds == ["samples"]


def test_cli_approximate_epsilon_too_small(tmp_path):
    inp = tmp_path / "v.json"
    dump_file(str(inp), v_path_samples_dict(801))
    code = main([
        "approximate", str(inp), "-o", str(tmp_path / "g.json"),
        "--epsilon", "1e-6", "--eta", "0.1", "--delta", "0.02",
    ])
    assert code == 4


def test_cli_approximate_planar_only_rejected(tmp_path):
    inp = tmp_path / "planar.json"
    dump_file(str(inp), circle_samples_dict(16))
    code = main(["approximate", str(inp), "-o", str(tmp_path / "g.json"),
                 "--epsilon", "0.1"])
    assert code == 2


def test_cli_interp_straight_boundary(tmp_path, capsys):
    boundary = {
        "format": "boundary/1",
        "a": 0.0,
        "b": 1.0,
        "ga": {"x": [0.0, 0.0], "y": [0.0]},
        "gb": {"x": [1.0, 0.0], "y": [0.0]},
        "dga": {"x": [1.0, 0.0], "y": [0.0]},
        "dgb": {"x": [1.0, 0.0], "y": [0.0]},
    }
    inp = tmp_path / "bd.json"
    out = tmp_path / "psi.json"
    dump_file(str(inp), boundary)
    code = main(["interp", "--boundary", str(inp), "-o", str(out)])
    assert code == 0
    curve = object_from_dict(load_file(str(out)))
    ts = np.linspace(0, 1, 5)
    np.testing.assert_allclose(curve.value(ts).x[:, 1], 0.0, atol=1e-12)
    np.testing.assert_allclose(curve.value(ts).x[:, 0], ts, atol=1e-12)


def test_cli_interp_random_feasible(tmp_path):
    boundary = {
        "format": "boundary/1",
        "a": 0.2,
        "b": 0.6,
        "ga": {"x": [0.1, -0.2], "y": [0.05]},
        "gb": {"x": [0.5, -0.1], "y": [0.02]},
        "dga": {"x": [1.0, 0.3], "y": [0.5 * (-0.2 * 1.0 - 0.1 * 0.3)]},
        "dgb": {"x": [0.9, 0.1], "y": [0.5 * (-0.1 * 0.9 - 0.5 * 0.1)]},
    }
    inp = tmp_path / "bd.json"
    out = tmp_path / "psi.json"
    dump_file(str(inp), boundary)
    code = main(["interp", "--boundary", str(inp), "-o", str(out)])
    assert code == 0
    curve = object_from_dict(load_file(str(out)))
    np.testing.assert_allclose(curve.value(0.2).flat, [0.1, -0.2, 0.05], atol=1e-9)
    np.testing.assert_allclose(curve.value(0.6).flat, [0.5, -0.1, 0.02], atol=1e-9)


def test_cli_interp_nonhorizontal_rejected(tmp_path):
    boundary = {
        "format": "boundary/1",
        "a": 0.0,
        "b": 1.0,
        "ga": {"x": [0.0, 0.0], "y": [0.0]},
        "gb": {"x": [1.0, 0.0], "y": [0.0]},
        "dga": {"x": [1.0, 0.0], "y": [7.0]},
        "dgb": {"x": [1.0, 0.0], "y": [0.0]},
    }
    inp = tmp_path / "bd.json"
    dump_file(str(inp), boundary)
    code = main(["interp", "--boundary", str(inp), "-o", str(tmp_path / "o.json")])
    assert code == 2


def test_cli_pushforward_identity_copies(tmp_path):
    inp = tmp_path / "v.json"
    out = tmp_path / "pushed.json"
    dump_file(str(inp), v_path_samples_dict(51))
    code = main(["pushforward", str(inp), "-o", str(out)])
    assert code == 0
    src = load_file(str(inp))
    dst = load_file(str(out))
    for rec_in, rec_out in zip(src["samples"], dst["samples"]):
        assert rec_in["x"] == rec_out["x"]
        assert rec_in["y"] == rec_out["y"]


def test_cli_pushforward_symbolic_with_structure(tmp_path):
    rng = np.random.default_rng(62)
    seg = CubicSegment(rng.standard_normal((4, 3)), 0.5)
    curve = horizontal_lift(PlanarCurve((seg,)),
                            FreeGroupPoint(seg.point(0.0), np.zeros(3)))
    inp = tmp_path / "curve.json"
    out = tmp_path / "pushed.json"
    st = Step2Structure.from_brackets(3, 1, [(2, 1, 1, 1.0)])
    st_path = tmp_path / "structure.json"
    dump_file(str(inp), curve_to_dict(curve))
    dump_file(str(st_path), structure_to_dict(st))
    code = main(["pushforward", str(inp), "-o", str(out),
                 "--structure", str(st_path)])
    assert code == 0
    pushed = object_from_dict(load_file(str(out)))
    assert pushed.structure.m == 1


def test_cli_verify_round_trip(tmp_path):
    inp = tmp_path / "v.json"
    out = tmp_path / "gamma.json"
    dump_file(str(inp), v_path_samples_dict(2001))
    assert main(["approximate", str(inp), "-o", str(out), "--epsilon", "0.1",
                 "--eta", "0.1", "--delta", "0.02"]) == 0
    code = main(["verify", str(out), "--against", str(inp),
                 "--epsilon", "0.1", "--eta", "0.1", "--delta", "0.02"])
    assert code == 0


def test_cli_verify_detects_tampering(tmp_path):
    inp = tmp_path / "v.json"
    out = tmp_path / "gamma.json"
    dump_file(str(inp), v_path_samples_dict(801))
    assert main(["approximate", str(inp), "-o", str(out), "--epsilon", "0.2",
                 "--eta", "0.1", "--delta", "0.02"]) == 0
    data = load_file(str(out))
    for piece in data["pieces"]:
        if piece["kind"] == "curve":
            piece["vertical_knots"][-1][0] += 1e-3
            break
    tampered = tmp_path / "tampered.json"
    dump_file(str(tampered), data)
    code = main(["verify", str(tampered), "--against", str(inp),
                 "--epsilon", "0.2", "--eta", "0.1", "--delta", "0.02"])
    assert code == 4


def test_cli_verify_plain_curve(tmp_path):
    rng = np.random.default_rng(63)
    seg = CubicSegment(rng.standard_normal((4, 2)), 1.0)
    curve = horizontal_lift(PlanarCurve((seg,)),
                            FreeGroupPoint(seg.point(0.0), np.zeros(1)))
    path = tmp_path / "curve.json"
    dump_file(str(path), curve_to_dict(curve))
    assert main(["verify", str(path)]) == 0


def test_cli_env_tolerance(tmp_path, monkeypatch):
    monkeypatch.setenv("CARNOT2_TOL", "1e-3")
    rng = np.random.default_rng(64)
    seg = CubicSegment(rng.standard_normal((4, 2)), 1.0)
    curve = horizontal_lift(PlanarCurve((seg,)),
                            FreeGroupPoint(seg.point(0.0), np.zeros(1)))
    # tamper lightly: passes at 1e-3 but not at 1e-8
    from carnot2 import HorizontalCurve

    knots = curve.vertical_knots.copy()
    knots[-1] += 1e-6
    bad = HorizontalCurve(curve.base, curve.start, knots)
    path = tmp_path / "curve.json"
    dump_file(str(path), curve_to_dict(bad))
    assert main(["verify", str(path)]) == 0
    monkeypatch.delenv("CARNOT2_TOL")
    assert main(["verify", str(path)]) == 4


def test_cli_missing_file():
    assert main(["verify", "/nonexistent/file.json"]) == 2


def test_schema_errors():
    with pytest.raises(SchemaError):
        object_from_dict({"format": "wat/9"})
    with pytest.raises(SchemaError):
        object_from_dict({"format": "curve/1", "kind": "samples", "r": 2,
                          "samples": []})
