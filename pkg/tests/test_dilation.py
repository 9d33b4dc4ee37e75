import numpy as np
import pytest

from polydisc.dilation import (
    build_dilation,
    image_invariance_defect,
    intertwining_defect,
    isometry_defect,
    minimality_defect,
    model_equivalence_defect,
    select_degree,
)
from polydisc.errors import NotPure, NotSzego
from polydisc.sampling import random_nodes
from polydisc.tuples import CTuple, szego_tuple_from_nodes, validate

from .test_tuples import trunc_shift


def scalar_tuple(a):
    return validate([np.array([[a]], dtype=complex)])


def test_select_degree_rules():
    t = scalar_tuple(0.5)
    n_deg = select_degree(t)
    # rho^(N+1) * sqrt(1) * 1 <= 1e-10 and N minimal for that
    assert 0.5 ** (n_deg + 1) <= 1e-10 < 0.5**n_deg
    assert select_degree(scalar_tuple(0.99)) == 64  # cap
    nil = validate([np.array([[0.0, 1.0], [0.0, 0.0]])])
    assert select_degree(nil) == 2  # nilpotent: dim


def test_build_dilation_scalar_coefficients():
    a = 0.6
    d = build_dilation(scalar_tuple(a), degree=8)
    root = np.sqrt(1 - a**2)
    for k in range(9):
        np.testing.assert_allclose(d.coeff_map[(k,)], [[root * a**k]], atol=1e-14)
        np.testing.assert_allclose(d.pi[k, 0], root * a**k, atol=1e-14)
    assert d.tail_bound < 0.05
    assert d.image_basis.dim == 1


def test_build_dilation_zero_shift_pair():
    m = 3
    t = validate([np.zeros((m + 1, m + 1)), trunc_shift(m + 1)])
    d = build_dilation(t)
    assert d.degree == m + 1  # auto rule for nilpotent tuples
    e0 = np.zeros(m + 1)
    e0[0] = 1.0
    for k, block in d.coeff_map.items():
        if k[0] == 0 and k[1] <= m:
            ek = np.zeros(m + 1)
            ek[k[1]] = 1.0
            np.testing.assert_allclose(block, np.outer(e0, ek), atol=1e-13)
        else:
            np.testing.assert_allclose(block, 0, atol=1e-13)
    assert d.tail_bound == 0.0


def test_build_dilation_gates():
    with pytest.raises(NotPure):
        build_dilation(validate([np.eye(1)]))
    j = np.array([[0.0, 0.9], [0.0, 0.0]])
    with pytest.raises(NotSzego):
        build_dilation(validate([j, j.copy()]))


def test_isometry_defect_scalar_exact():
    a = 0.7
    n_deg = 6
    d = build_dilation(scalar_tuple(a), degree=n_deg)
    assert isometry_defect(d) == pytest.approx(a ** (2 * (n_deg + 1)), rel=1e-10)
    assert isometry_defect(d) <= d.tail_bound + 1e-10


def test_nilpotent_pair_all_defects_tiny():
    # doubly commuting nilpotent pairs: scaled bishifts are always Szego,
    # unlike generic commuting nilpotent pairs (the Jordan pair fails)
    rng = np.random.default_rng(11)
    for _ in range(5):
        c1, c2 = 0.2 + 0.7 * rng.random(2)
        s = trunc_shift(3)
        eye = np.eye(3)
        t = validate([c1 * np.kron(s, eye), c2 * np.kron(eye, s)])
        d = build_dilation(t)
        assert d.tail_bound == 0.0
        assert isometry_defect(d) <= 1e-13
        assert intertwining_defect(d) <= 1e-13
        assert model_equivalence_defect(d) <= 1e-12
        assert minimality_defect(d) <= 1e-8


def test_trivial_zero_tuple():
    t = validate([np.zeros((1, 1)), np.zeros((1, 1))])
    d = build_dilation(t)
    assert isometry_defect(d) <= 1e-15
    assert intertwining_defect(d) <= 1e-15
    assert model_equivalence_defect(d) <= 1e-15


def test_scalar_minimality_and_model_equivalence():
    d = build_dilation(scalar_tuple(0.6), degree=20)
    assert minimality_defect(d) <= 1e-8
    assert model_equivalence_defect(d) <= d.tail_bound + 1e-10


def test_zero_shift_pair_minimality():
    t = validate([np.zeros((4, 4)), trunc_shift(4)])
    d = build_dilation(t)
    assert minimality_defect(d) <= 1e-8


def test_kernel_tuple_battery():
    rng = np.random.default_rng(23)
    for n in (1, 2):
        for _ in range(3):
            pts = random_nodes(rng, 3, n, modulus_max=0.2, min_sep=0.08)
            t = szego_tuple_from_nodes(pts)
            d = build_dilation(t)
            budget = d.tail_bound + 1e-10
            assert isometry_defect(d) <= budget
            assert intertwining_defect(d) <= budget
            assert minimality_defect(d) <= budget
            assert model_equivalence_defect(d) <= budget
            assert image_invariance_defect(d) <= 1e-8


def test_image_is_quotient_module():
    d = build_dilation(scalar_tuple(0.5))
    assert image_invariance_defect(d) <= 1e-10
