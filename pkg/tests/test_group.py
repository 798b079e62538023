import numpy as np
import pytest

from carnot2 import (
    FreeGroupPoint,
    Step2Structure,
    GeneralGroupPoint,
    TangentVector,
    dL,
    general_horizontality_residual,
    general_identity,
    general_product,
    horizontal_field,
    horizontality_residual,
    inverse,
    is_horizontal,
    left_translate,
    pair_index,
    product,
    vertical_dim,
    vertical_pairs,
)


def random_point(rng, r, scale=1.0):
    return FreeGroupPoint(
        scale * rng.uniform(-1, 1, r), scale * rng.uniform(-1, 1, vertical_dim(r))
    )


def random_vector(rng, r, scale=1.0):
    return TangentVector(
        scale * rng.uniform(-1, 1, r), scale * rng.uniform(-1, 1, vertical_dim(r))
    )


def test_pair_order_and_index():
    assert vertical_pairs(4) == ((2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3))
    for r in range(2, 7):
        for pos, (i, j) in enumerate(vertical_pairs(r)):
            assert pair_index(i, j) == pos


def test_product_hand_example():
    # (1,0;0) * (0,1;0): vertical picks up (p_2 q_1 - q_2 p_1)/2 = -1/2
    p = FreeGroupPoint([1.0, 0.0], [0.0])
    q = FreeGroupPoint([0.0, 1.0], [0.0])
    pq = product(p, q)
    np.testing.assert_allclose(pq.x, [1.0, 1.0])
    np.testing.assert_allclose(pq.y, [-0.5])


def test_product_matches_field_flow():
    # flowing from p along the second frame field: vertical rate is -p_1/2
    p = FreeGroupPoint([1.0, 0.0], [0.0])
    t = 0.3
    q = FreeGroupPoint([0.0, t], [0.0])
    np.testing.assert_allclose(product(p, q).y, [-t / 2])


def test_identity_and_inverse():
    rng = np.random.default_rng(0)
    for r in (2, 3, 5):
        e = FreeGroupPoint.identity(r)
        for _ in range(20):
            p = random_point(rng, r)
            np.testing.assert_array_equal(product(p, e).flat, p.flat)
            np.testing.assert_array_equal(product(e, p).flat, p.flat)
            back = product(p, inverse(p))
            assert np.max(np.abs(back.flat)) <= 1e-14
            back = product(inverse(p), p)
            assert np.max(np.abs(back.flat)) <= 1e-14


def test_associativity_and_antihomomorphic_inverse():
    rng = np.random.default_rng(1)
    for r in (2, 3, 4, 6):
        for _ in range(50):
            p, q, s = (random_point(rng, r) for _ in range(3))
            lhs = product(product(p, q), s)
            rhs = product(p, product(q, s))
            assert np.max(np.abs(lhs.flat - rhs.flat)) <= 1e-12
            a = inverse(product(p, q))
            b = product(inverse(q), inverse(p))
            np.testing.assert_array_equal(a.flat, b.flat)


def test_rank_mismatch():
    p = FreeGroupPoint.identity(2)
    q = FreeGroupPoint.identity(3)
    with pytest.raises(ValueError):
        product(p, q)


def test_left_translate_is_product():
    rng = np.random.default_rng(2)
    g, p = random_point(rng, 3), random_point(rng, 3)
    np.testing.assert_array_equal(left_translate(g, p).flat, product(g, p).flat)


def test_dL_identity_and_horizontality():
    rng = np.random.default_rng(3)
    for r in (2, 4):
        e = FreeGroupPoint.identity(r)
        for _ in range(25):
            p = random_point(rng, r)
            g = random_point(rng, r)
            v = random_vector(rng, r)
            np.testing.assert_array_equal(dL(e, p, v).flat, v.flat)
            # horizontal vectors map to horizontal vectors at the translated point
            u = rng.uniform(-1, 1, r)
            hv = TangentVector(u, sum_fields(u, p))
            w = dL(g, p, hv)
            assert horizontality_residual(w, product(g, p)) <= 1e-12


def sum_fields(u, p):
    """Vertical part of sum_k u_k X_k(p)."""
    vy = np.zeros(vertical_dim(p.r))
    for k in range(1, p.r + 1):
        vy += u[k - 1] * horizontal_field(k, p).y
    return vy


def test_dL_finite_difference():
    # d/dt L_g(p * exp(t v)) at 0 equals dL_g at p applied to the coordinate
    # velocity of t -> p * exp(t v), which is dL_p(v) at the identity.
    rng = np.random.default_rng(4)
    r = 3
    p = random_point(rng, r)
    g = random_point(rng, r)
    v = random_vector(rng, r)
    e = FreeGroupPoint.identity(r)
    t = 1e-6
    step = FreeGroupPoint(t * v.x, t * v.y)
    moved = product(g, product(p, step))
    base = product(g, p)
    fd = (moved.flat - base.flat) / t
    w = dL(g, p, dL(p, e, v))
    np.testing.assert_allclose(fd, w.flat, atol=1e-6)
    # translations compose, so the same vector comes from L_{g p} at the identity
    np.testing.assert_allclose(w.flat, dL(product(g, p), e, v).flat, atol=1e-14)


def test_horizontal_field_at_origin_and_example():
    for r in (2, 3, 5):
        e = FreeGroupPoint.identity(r)
        for k in range(1, r + 1):
            v = horizontal_field(k, e)
            ex = np.zeros(r)
            ex[k - 1] = 1.0
            np.testing.assert_array_equal(v.x, ex)
            np.testing.assert_array_equal(v.y, np.zeros(vertical_dim(r)))
    # X_1 at (0, 1): the (2,1) component is +x_2/2 (consistent with the
    # horizontality equation, checked below)
    p = FreeGroupPoint([0.0, 1.0], [0.0])
    v = horizontal_field(1, p)
    np.testing.assert_allclose(v.y, [0.5])
    assert horizontality_residual(v, p) == 0.0


def test_horizontal_fields_are_horizontal():
    rng = np.random.default_rng(5)
    for r in (2, 3, 4, 6):
        for _ in range(20):
            p = random_point(rng, r)
            k = int(rng.integers(1, r + 1))
            ok, res = is_horizontal(horizontal_field(k, p), p, 1e-12)
            assert ok and res <= 1e-15


def test_is_horizontal_span_and_vertical():
    rng = np.random.default_rng(6)
    r = 4
    for _ in range(20):
        p = random_point(rng, r)
        u = rng.uniform(-2, 2, r)
        v = TangentVector(u, sum_fields(u, p))
        ok, res = is_horizontal(v, p, 1e-12)
        assert ok and res <= 1e-14
    # pure vertical e_21 at the identity: residual exactly 1
    e = FreeGroupPoint.identity(3)
    vy = np.zeros(3)
    vy[pair_index(2, 1)] = 1.0
    bad = TangentVector(np.zeros(3), vy)
    ok, res = is_horizontal(bad, e, 1e-10)
    assert not ok and res == 1.0
    # at the origin horizontality means all verticals vanish
    good = TangentVector(np.array([1.0, 2.0, 3.0]), np.zeros(3))
    assert is_horizontal(good, e, 1e-12).ok


def test_batched_operations():
    rng = np.random.default_rng(7)
    r = 3
    m = vertical_dim(r)
    p = FreeGroupPoint(rng.uniform(-1, 1, (10, r)), rng.uniform(-1, 1, (10, m)))
    q = FreeGroupPoint(rng.uniform(-1, 1, (10, r)), rng.uniform(-1, 1, (10, m)))
    batch = product(p, q)
    for i in range(10):
        single = product(
            FreeGroupPoint(p.x[i], p.y[i]), FreeGroupPoint(q.x[i], q.y[i])
        )
        np.testing.assert_array_equal(batch.x[i], single.x)
        np.testing.assert_array_equal(batch.y[i], single.y)


# ---------------------------------------------------------------------------
# general structures
# ---------------------------------------------------------------------------


def test_free_structure_matches_free_product():
    rng = np.random.default_rng(8)
    for r in (2, 3, 5):
        st = Step2Structure.free(r)
        for _ in range(30):
            p = random_point(rng, r)
            q = random_point(rng, r)
            gp = GeneralGroupPoint(st, p.x, p.y)
            gq = GeneralGroupPoint(st, q.x, q.y)
            got = general_product(gp, gq)
            want = product(p, q)
            assert np.max(np.abs(got.a - want.x)) <= 1e-15
            assert np.max(np.abs(got.b - want.y)) <= 1e-15


def test_general_identity_and_associativity():
    rng = np.random.default_rng(9)
    st = Step2Structure.from_brackets(3, 2, [(2, 1, 1, 1.0), (3, 1, 2, 1.0), (3, 2, 2, -0.5)])
    e = general_identity(st)
    for _ in range(30):
        pts = [
            GeneralGroupPoint(st, rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 2))
            for _ in range(3)
        ]
        p, q, s = pts
        np.testing.assert_array_equal(general_product(p, e).flat, p.flat)
        lhs = general_product(general_product(p, q), s)
        rhs = general_product(p, general_product(q, s))
        assert np.max(np.abs(lhs.flat - rhs.flat)) <= 1e-12


def test_structure_antisymmetry_enforced():
    c = np.zeros((1, 2, 2))
    c[0, 1, 0] = 1.0  # missing the mirrored entry
    with pytest.raises(ValueError):
        Step2Structure(c)


def test_general_horizontality_residual():
    st = Step2Structure.free(2)
    pa = np.array([1.0, 0.0])
    va = np.array([0.0, 1.0])
    # v_b must equal c(pa, va)/2 = -1/2 on the single vertical coordinate
    assert general_horizontality_residual(st, pa, va, np.array([-0.5])) == 0.0
    assert general_horizontality_residual(st, pa, va, np.array([0.0])) == 0.5
