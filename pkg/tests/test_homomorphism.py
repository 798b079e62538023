"""Graded homomorphisms, pushforwards, and target-group smoothing."""

import numpy as np
import pytest

from carnot2 import (
    CubicSegment,
    FreeGroupPoint,
    LinearSegment,
    PlanarCurve,
    SampledCurve,
    Step2Structure,
    TangentVector,
    general_horizontality_residual,
    general_product,
    horizontal_lift,
    pair_index,
    product,
    vertical_dim,
)
from carnot2.frame import NonHorizontalError
from carnot2.homomorphism import (
    GeneralHorizontalCurve,
    TargetSampledCurve,
    approximate_in_target,
    build_homomorphism,
    check_general_curve,
    general_horizontal_lift,
    pushforward_curve,
    pushforward_point,
    pushforward_tangent,
)
from carnot2.lusin import GoodSetConfig, approximate
from carnot2.segments import CircleLoopSegment


def heisenberg_type_r3():
    """Target with r = 3, m = 1: [Y_2, Y_1] = Z_1, all other brackets zero."""
    return Step2Structure.from_brackets(3, 1, [(2, 1, 1, 1.0)])


def kill_32_structure():
    """Target with r = 3, m = 2: keeps (2,1) and (3,1), kills [Y_3, Y_2]."""
    return Step2Structure.from_brackets(3, 2, [(2, 1, 1, 1.0), (3, 1, 2, 1.0)])


def random_point(rng, r):
    return FreeGroupPoint(rng.uniform(-1, 1, r), rng.uniform(-1, 1, vertical_dim(r)))


def test_identity_homomorphism_is_identity_map():
    f = build_homomorphism(3, Step2Structure.free(3))
    assert f.is_identity
    rng = np.random.default_rng(50)
    p = random_point(rng, 3)
    out = pushforward_point(f, p)
    np.testing.assert_array_equal(out.a, p.x)
    np.testing.assert_array_equal(out.b, p.y)


def test_heisenberg_generator_map_r2():
    f = build_homomorphism(2, Step2Structure.free(2))
    np.testing.assert_array_equal(f.t_matrix, np.eye(1))


def test_kill_coordinate_kernel():
    target = kill_32_structure()
    f = build_homomorphism(3, target)
    # the vertical generator (3, 2) maps to zero: exp of it lands at identity
    y = np.zeros(3)
    y[pair_index(3, 2)] = 1.0
    p = FreeGroupPoint(np.zeros(3), y)
    out = pushforward_point(f, p)
    assert np.max(np.abs(out.flat)) == 0.0
    # the other vertical generators survive
    np.testing.assert_array_equal(f.t_matrix[:, pair_index(2, 1)], [1.0, 0.0])
    np.testing.assert_array_equal(f.t_matrix[:, pair_index(3, 1)], [0.0, 1.0])


def test_homomorphism_property_random():
    rng = np.random.default_rng(51)
    targets = [
        Step2Structure.free(3),
        heisenberg_type_r3(),
        kill_32_structure(),
    ]
    for target in targets:
        for _ in range(5):
            h = rng.uniform(-1, 1, (3, 3))
            f = build_homomorphism(3, target, h)
            for _ in range(20):
                p, q = random_point(rng, 3), random_point(rng, 3)
                lhs = pushforward_point(f, product(p, q))
                rhs = general_product(pushforward_point(f, p), pushforward_point(f, q))
                assert np.max(np.abs(lhs.flat - rhs.flat)) <= 1e-12


def test_pushforward_preserves_horizontality():
    rng = np.random.default_rng(52)
    target = heisenberg_type_r3()
    f = build_homomorphism(3, target)
    from carnot2 import horizontal_field

    for _ in range(20):
        p = random_point(rng, 3)
        u = rng.uniform(-1, 1, 3)
        vy = np.zeros(3)
        for k in range(1, 4):
            vy += u[k - 1] * horizontal_field(k, p).y
        v = TangentVector(u, vy)
        da, db = pushforward_tangent(f, v)
        fp = pushforward_point(f, p)
        assert general_horizontality_residual(target, fp.a, da, db) <= 1e-14


def test_rectangular_h_shapes():
    target = Step2Structure.free(2)
    h = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, -0.25]])
    f = build_homomorphism(3, target, h)
    assert f.h_matrix.shape == (2, 3)
    assert f.t_matrix.shape == (1, 3)
    rng = np.random.default_rng(53)
    p, q = random_point(rng, 3), random_point(rng, 3)
    lhs = pushforward_point(f, product(p, q))
    rhs = general_product(pushforward_point(f, p), pushforward_point(f, q))
    assert np.max(np.abs(lhs.flat - rhs.flat)) <= 1e-13


def test_pushforward_curve_identity():
    seg = CubicSegment(np.random.default_rng(54).uniform(-1, 1, (4, 2)), 1.0)
    curve = horizontal_lift(PlanarCurve((seg,)),
                            FreeGroupPoint(seg.point(0.0), np.zeros(1)))
    f = build_homomorphism(2, Step2Structure.free(2))
    pushed = pushforward_curve(f, curve)
    ts = np.linspace(0, 1, 7)
    np.testing.assert_allclose(pushed.value(ts).flat, curve.value(ts).flat, atol=1e-14)


def test_pushforward_circle_area_to_heisenberg():
    # free G_2 circle lift pushed through the generator map keeps area pi
    seg = CircleLoopSegment.build(np.zeros(2), i=2, radius=1.0, end_slope=1.0,
                                  duration=2 * np.pi)
    curve = horizontal_lift(PlanarCurve((seg,)), FreeGroupPoint.identity(2))
    f = build_homomorphism(2, Step2Structure.free(2))
    pushed = pushforward_curve(f, curve)
    assert pushed.end_point.b[0] == pytest.approx(np.pi, abs=1e-15)


def test_pushforward_commutes_with_target_lift():
    # pushing a lifted curve equals lifting the pushed base in the target
    rng = np.random.default_rng(55)
    target = kill_32_structure()
    for _ in range(10):
        h = rng.uniform(-1, 1, (3, 3))
        f = build_homomorphism(3, target, h)
        coeffs = rng.uniform(-1, 1, (4, 3))
        base = PlanarCurve((CubicSegment(coeffs, 0.7),))
        curve = horizontal_lift(base, FreeGroupPoint(coeffs[0], rng.uniform(-1, 1, 3)))
        pushed = pushforward_curve(f, curve)
        target_base = base.transformed(h, np.zeros(3))
        direct = general_horizontal_lift(target, target_base,
                                         pushforward_point(f, curve.start))
        ts = np.linspace(0, 0.7, 9)
        np.testing.assert_allclose(pushed.value(ts).flat, direct.value(ts).flat,
                                   atol=1e-9)
        assert check_general_curve(pushed) <= 1e-9


def test_kill_coordinate_curve_has_constant_vertical():
    # a free curve moving only in the (3, 2) plane pushes to a curve with
    # constant verticals when the target kills that bracket
    target = kill_32_structure()
    f = build_homomorphism(3, target)
    from carnot2.segments import PetalLoopSegment

    seg = PetalLoopSegment(np.zeros(3), i=3, j=2, speed=0.0, amplitude=0.05,
                           swapped=False, duration=1.0)
    curve = horizontal_lift(PlanarCurve((seg,)), FreeGroupPoint.identity(3))
    assert abs(curve.end_point.y[pair_index(3, 2)]) > 1e-4  # moves in the source
    pushed = pushforward_curve(f, curve)
    ts = np.linspace(0, 1, 9)
    vals = pushed.value(ts)
    np.testing.assert_allclose(vals.b, 0.0, atol=1e-12)


def test_general_lift_free_structure_matches_free_lift():
    rng = np.random.default_rng(56)
    coeffs = rng.uniform(-1, 1, (4, 3))
    base = PlanarCurve((CubicSegment(coeffs, 0.5),))
    start_y = rng.uniform(-1, 1, 3)
    free = horizontal_lift(base, FreeGroupPoint(coeffs[0], start_y))
    st = Step2Structure.free(3)
    from carnot2 import GeneralGroupPoint

    gen = general_horizontal_lift(st, base, GeneralGroupPoint(st, coeffs[0], start_y))
    ts = np.linspace(0, 0.5, 6)
    np.testing.assert_allclose(gen.value(ts).b, free.value(ts).y, atol=1e-14)


def v_path_target_samples(structure, n=1001):
    """Sampled Heisenberg-type curve with a derivative corner."""
    ts = np.linspace(0.0, 1.0, n)
    a2 = 0.5 * np.abs(ts - 0.5)
    a = np.zeros((n, structure.r))
    a[:, 0] = ts
    a[:, 1] = a2
    da = np.zeros((n, structure.r))
    da[:, 0] = 1.0
    da[:, 1] = np.where(ts <= 0.5, -0.5, 0.5)
    db = 0.5 * np.einsum("kij,ti,tj->tk", structure.bracket, a, da)
    dt = ts[1] - ts[0]
    b = np.zeros((n, structure.m))
    b[1:] = np.cumsum(0.5 * (db[1:] + db[:-1]) * dt, axis=0)
    return TargetSampledCurve(structure, ts, a, b, da, db)


def test_approximate_in_target_identity_matches_free_pipeline():
    st = Step2Structure.free(2)
    f = build_homomorphism(2, st)
    s = v_path_target_samples(st)
    cfg = GoodSetConfig(eta=0.1, delta=0.02, epsilon=0.15)
    out = approximate_in_target(s, f, cfg)
    # same selection and gaps as running the free pipeline directly
    free = SampledCurve(s.times, s.a, s.b, s.da, s.db)
    _, report = approximate(free, cfg)
    assert len(out.report.gaps) == len(report.gaps)
    assert out.report.disagreement_measure == pytest.approx(
        report.disagreement_measure
    )
    assert out.k_agreement <= 1e-12


def test_approximate_in_target_heisenberg_corner():
    st = heisenberg_type_r3()
    f = build_homomorphism(3, st)
    s = v_path_target_samples(st)
    cfg = GoodSetConfig(eta=0.1, delta=0.02, epsilon=0.15)
    out = approximate_in_target(s, f, cfg)
    assert out.report.disagreement_measure <= 0.15
    assert out.k_agreement <= 1e-8
    assert out.target_horizontality <= 1e-8
    assert out.report.max_derivative_jump <= 1e-8
    # gap curves connect the retained samples in the target group
    for frag in out.curve_fragments:
        b_time = frag.end_time
        idx = int(np.searchsorted(s.times, b_time))
        assert s.times[idx] == pytest.approx(b_time, abs=1e-12)
        np.testing.assert_allclose(frag.end_point.a, s.a[idx], atol=1e-8)
        np.testing.assert_allclose(frag.end_point.b, s.b[idx], atol=1e-8)


def test_approximate_in_target_translated_start():
    # inputs not starting at the identity are translated and restored
    st = heisenberg_type_r3()
    f = build_homomorphism(3, st)
    s0 = v_path_target_samples(st)
    shift_a = np.array([0.5, -0.25, 1.0])
    shift_b = np.array([2.0])
    corr = 0.5 * np.einsum("kij,i,tj->tk", st.bracket, shift_a, s0.a)
    s = TargetSampledCurve(
        st, s0.times, shift_a + s0.a, shift_b + s0.b + corr,
        s0.da, s0.db + 0.5 * np.einsum("kij,i,tj->tk", st.bracket, shift_a, s0.da),
    )
    cfg = GoodSetConfig(eta=0.1, delta=0.02, epsilon=0.15)
    out = approximate_in_target(s, f, cfg)
    assert out.k_agreement <= 1e-8
    assert out.target_horizontality <= 1e-8


def test_approximate_in_target_requires_surjective_h():
    st = Step2Structure.free(2)
    f = build_homomorphism(2, st, np.array([[1.0, 0.0], [0.0, 0.0]]))
    s = v_path_target_samples(st)
    with pytest.raises(ValueError):
        approximate_in_target(s, f, GoodSetConfig(eta=0.1, delta=0.02, epsilon=0.1))


def test_approximate_in_target_rejects_nonhorizontal():
    st = Step2Structure.free(2)
    f = build_homomorphism(2, st)
    s0 = v_path_target_samples(st)
    bad = TargetSampledCurve(st, s0.times, s0.a, s0.b + 1.0, s0.da, s0.db + 1.0)
    with pytest.raises(NonHorizontalError):
        approximate_in_target(bad, f, GoodSetConfig(eta=0.1, delta=0.02, epsilon=0.1))
