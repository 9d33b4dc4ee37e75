import itertools

import numpy as np
import pytest

from polydisc.defects import (
    build_defects,
    commutator_defect,
    defect_series_residual,
    delta_map,
    embed_joint_defect,
    full_truncated_defect,
    joint_commutator,
    joint_defect,
    series_cutoff,
    truncated_defect,
)
from polydisc.errors import BadIndex, NotAvailable, ShapeMismatch
from polydisc.linalg import Subspace, containment_residual, loewner_leq, spec_norm
from polydisc.sampling import random_commuting_tuple, random_nilpotent_pair, random_nodes
from polydisc.tuples import (
    classical_defect_sq,
    szego_tuple_from_nodes,
    validate,
)

from .test_tuples import bishift, trunc_shift


def test_delta_map_basics():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_allclose(delta_map(np.eye(2), a), a, atol=0)
    np.testing.assert_allclose(delta_map(np.zeros((2, 2)), a), np.zeros((2, 2)), atol=0)
    np.testing.assert_allclose(delta_map(np.array([[2.0]]), np.array([[1.0]])), [[4.0]], atol=0)
    with pytest.raises(ShapeMismatch):
        delta_map(np.eye(2), np.eye(3))


def test_truncated_defect_empty_set_is_classical():
    rng = np.random.default_rng(20)
    t = validate(random_commuting_tuple(rng, 2, 4))
    np.testing.assert_allclose(
        truncated_defect(t, 0, set()), classical_defect_sq(t[0]), atol=1e-14
    )


def test_truncated_defect_shift_examples():
    n = 4
    t = validate([np.zeros((n + 1, n + 1)), trunc_shift(n + 1)])
    e0 = np.zeros((n + 1, n + 1))
    e0[0, 0] = 1.0
    en = np.zeros((n + 1, n + 1))
    en[n, n] = 1.0
    np.testing.assert_allclose(truncated_defect(t, 0, {1}), e0, atol=1e-14)
    np.testing.assert_allclose(truncated_defect(t, 1, {0}), en, atol=1e-14)


def test_truncated_defect_bad_indices():
    t = validate([np.diag([0.5]), np.diag([0.3])])
    with pytest.raises(BadIndex):
        truncated_defect(t, 0, {0})
    with pytest.raises(BadIndex):
        truncated_defect(t, 5, set())
    with pytest.raises(BadIndex):
        truncated_defect(t, 0, {7})


def test_truncated_defect_order_independent():
    rng = np.random.default_rng(21)
    for _ in range(10):
        t = validate(random_commuting_tuple(rng, 3, 4))
        expected = truncated_defect(t, 0, {1, 2})
        manual = classical_defect_sq(t[0])
        for k in (2, 1):  # reversed application order
            manual = manual - delta_map(t[k], manual)
        assert spec_norm(expected - manual) <= 1e-12


def test_joint_commutator_doubly_commuting_vanishes():
    t = validate(bishift(3))
    np.testing.assert_allclose(joint_commutator(t, 0, 1), 0 * t[0], atol=1e-14)


def test_joint_commutator_jordan_pair():
    j = np.array([[0.0, 1.0], [0.0, 0.0]])
    t = validate([j, j])
    np.testing.assert_allclose(joint_commutator(t, 0, 1), np.diag([1.0, -1.0]), atol=0)


def test_joint_commutator_extra_zero_operator():
    x = np.diag([0.5, 0.25])
    t = validate([np.zeros((2, 2)), np.zeros((2, 2)), x])
    np.testing.assert_allclose(joint_commutator(t, 0, 1), np.zeros((2, 2)), atol=1e-14)


def test_joint_commutator_pair_formula_and_adjoint():
    rng = np.random.default_rng(22)
    t = validate(random_commuting_tuple(rng, 2, 5))
    expected = t[1] @ t[0].conj().T - t[0].conj().T @ t[1]
    np.testing.assert_array_equal(joint_commutator(t, 0, 1), expected)
    np.testing.assert_allclose(
        joint_commutator(t, 1, 0), joint_commutator(t, 0, 1).conj().T, atol=1e-14
    )
    with pytest.raises(BadIndex):
        joint_commutator(t, 1, 1)


def test_joint_defect_shift_pair():
    n = 4
    t = validate([np.zeros((n + 1, n + 1)), trunc_shift(n + 1)])
    jd = joint_defect(t)
    e0 = np.zeros((n + 1, n + 1))
    e0[0, 0] = 1.0
    en = np.zeros((n + 1, n + 1))
    en[n, n] = 1.0
    expected = np.zeros((2 * (n + 1), 2 * (n + 1)))
    expected[: n + 1, : n + 1] = e0
    expected[n + 1 :, n + 1 :] = en
    np.testing.assert_allclose(jd.matrix, expected, atol=1e-14)
    assert jd.min_eig >= -1e-12
    assert jd.root is not None and jd.space is not None
    assert jd.space.dim == 2


def test_joint_defect_scalar():
    a = 0.6
    jd = joint_defect(validate([np.array([[a]])]))
    np.testing.assert_allclose(jd.matrix, [[1 - a**2]], atol=1e-15)
    assert jd.space is not None and jd.space.dim == 1


def test_joint_defect_indefinite_case():
    # diagonal blocks diag(1,0), off-diagonal diag(1,-1): eigenvalues {2,1,0,-1}
    j = np.array([[0.0, 1.0], [0.0, 0.0]])
    jd = joint_defect(validate([j, j]))
    assert jd.min_eig == pytest.approx(-1.0)
    assert jd.root is None and jd.space is None


def test_commutator_defect_scalar_and_shift_pair():
    a = 0.6
    mat, min_eig = commutator_defect(validate([np.array([[a]])]))
    np.testing.assert_allclose(mat, [[1 - a**2]], atol=1e-15)
    assert min_eig == pytest.approx(1 - a**2)
    n = 3
    t = validate([np.zeros((n + 1, n + 1)), trunc_shift(n + 1)])
    mat, min_eig = commutator_defect(t)
    en = np.zeros((n + 1, n + 1))
    en[n, n] = 1.0
    expected = np.zeros((2 * (n + 1), 2 * (n + 1)))
    expected[: n + 1, : n + 1] = np.eye(n + 1)
    expected[n + 1 :, n + 1 :] = en
    np.testing.assert_allclose(mat, expected, atol=1e-14)
    assert min_eig >= -1e-12


def test_commutator_defect_psd_for_kernel_tuples():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(2, 6))
        t = szego_tuple_from_nodes(random_nodes(rng, m, n))
        _, min_eig = commutator_defect(t)
        assert min_eig >= -1e-10


def test_hereditary_inequalities_kernel_tuples():
    rng = np.random.default_rng(24)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(2, 6))
        t = szego_tuple_from_nodes(random_nodes(rng, m, n))
        for i, j in itertools.permutations(range(n), 2):
            di_sq = classical_defect_sq(t[i])
            di_star_sq = classical_defect_sq(t[i].conj().T)
            assert loewner_leq(delta_map(t[j], di_sq), di_sq).holds
            assert loewner_leq(delta_map(t[j], di_star_sq), di_star_sq).holds
            from polydisc.linalg import range_basis

            space = range_basis(di_sq, t.tol)
            if space.dim:
                assert containment_residual(t[j] @ space.basis, space) <= 1e-8
            space_star = range_basis(di_star_sq, t.tol)
            if space_star.dim:
                assert containment_residual(t[j] @ space_star.basis, space_star) <= 1e-8


def test_series_residual_nilpotent_terminates():
    eye = np.eye(2)
    j = np.array([[0.0, 1.0], [0.0, 0.0]])
    t = validate([np.kron(j, eye), np.kron(eye, j)])
    assert defect_series_residual(t, 0, {1}, k=2) <= 1e-14
    assert defect_series_residual(t, 1, set(), k=2) <= 1e-14


def test_series_residual_scalar_degenerate():
    t = validate([np.array([[0.5]])])
    assert defect_series_residual(t, 0, set(), k=3) == pytest.approx(0.0, abs=1e-15)


def test_series_residual_kernel_tuple_geometric():
    rng = np.random.default_rng(25)
    t = szego_tuple_from_nodes(random_nodes(rng, 4, 2, modulus_max=0.6, min_sep=0.2))
    assert defect_series_residual(t, 0, {1}, k=40) <= 1e-10
    assert defect_series_residual(t, 0, set(), k=40) <= 1e-10


def test_series_cutoff_rule():
    t = validate([np.array([[0.5]])])
    k = series_cutoff(t)
    assert 1 <= k <= 200
    assert 0.5 ** (2 * k) <= 1e-10
    nil = validate([np.array([[0.0, 1.0], [0.0, 0.0]])])
    assert series_cutoff(nil) == 2


def test_series_residual_random_pure_tuples():
    rng = np.random.default_rng(26)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        t = validate(random_commuting_tuple(rng, n, 4, norm_max=0.7))
        j = int(rng.integers(0, n))
        others = [k for k in range(n) if k != j]
        p = set(others[: int(rng.integers(0, len(others) + 1))])
        assert defect_series_residual(t, j, p) <= 1e-10


def test_build_defects_package_shape():
    rng = np.random.default_rng(27)
    t = validate(random_commuting_tuple(rng, 2, 3))
    pkg = build_defects(t)
    assert len(pkg.classical) == 2
    assert len(pkg.truncated) == 2 * 2  # per j: P = {} and P = {other}
    assert set(pkg.joint_commutators) == {(0, 1), (1, 0)}
    assert pkg.joint.matrix.shape == (6, 6)
    assert pkg.commutator_defect_sq.shape == (6, 6)
    np.testing.assert_allclose(
        pkg.truncated[(0, frozenset())], classical_defect_sq(t[0]), atol=1e-14
    )
    np.testing.assert_allclose(
        pkg.truncated[(0, frozenset({1}))], full_truncated_defect(t, 0), atol=1e-14
    )


def test_build_defects_mask_applied():
    n = 3
    t = validate(bishift(n))
    low = np.diag([1.0] * n + [0.0])
    mask = np.kron(low, low)
    pkg = build_defects(t, mask=mask)
    # classical defect of the bishift lives at top degree; the mask kills it
    assert spec_norm(pkg.truncated[(0, frozenset())]) <= 1e-14
    assert spec_norm(pkg.joint.matrix) <= 1e-14
    raw = build_defects(t)
    assert spec_norm(raw.truncated[(0, frozenset())]) == pytest.approx(1.0)


def test_embed_joint_defect_scalar_identity():
    pkg = build_defects(validate([np.array([[0.6]])]))
    space, residual = embed_joint_defect(pkg)
    assert residual == 0.0
    assert space.dim == 1 and space.ambient_dim == 1


def test_embed_joint_defect_shift_pair():
    n = 4
    t = validate([np.zeros((n + 1, n + 1)), trunc_shift(n + 1)])
    space, residual = embed_joint_defect(build_defects(t))
    assert residual <= 1e-12
    assert space.dim == 2
    expected = np.zeros((n + 1, 2))
    expected[0, 0] = 1.0
    expected[n, 1] = 1.0
    assert containment_residual(expected, space) <= 1e-10


def test_embed_joint_defect_bishift_truncated_roots_orthogonal():
    # The bishift is not Beurling (classical defects overlap with norm 1),
    # but its fully truncated defects sit in opposite corners, so the
    # embedding orthogonality residual is still zero for N >= 1.
    t = validate(bishift(3))
    space, residual = embed_joint_defect(build_defects(t))
    assert residual <= 1e-12
    assert space.dim == 2


def test_embed_joint_defect_unavailable():
    j = np.array([[0.0, 1.0], [0.0, 0.0]])
    pkg = build_defects(validate([j, j]))
    with pytest.raises(NotAvailable):
        embed_joint_defect(pkg)


def test_joint_defect_nilpotent_pair_psd_and_series():
    rng = np.random.default_rng(28)
    for _ in range(5):
        t = validate(random_nilpotent_pair(rng, 4))
        assert defect_series_residual(t, 0, {1}, k=4) <= 1e-12
        jd = joint_defect(t)
        assert jd.herm_residual <= 1e-12
