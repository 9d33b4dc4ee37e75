import itertools

import numpy as np
import pytest

from polydisc.errors import (
    BadIndex,
    DimensionOverflow,
    IncompatibleDims,
    NotUnitary,
    ParseError,
    PolydiscError,
    SymbolNotInner,
)
from polydisc.hardy import (
    InnerSymbol,
    ahern_clark_growth,
    blaschke_symbol,
    blockdiag_symbol,
    build_space,
    check_inner,
    eval_symbol,
    inner_residual_symbol,
    is_constant,
    is_graded,
    masked_span,
    model_tuple,
    mono_shift,
    monomial_symbol,
    product_symbol,
    quotient_mask,
    quotient_model,
    reach_vector,
    restriction_matrix,
    shift_matrix,
    structural_checks,
    symbol_from_json,
    symbol_matrix,
    symbol_to_json,
    unitary_symbol,
    wandering_subspace,
    window_mask,
)
from polydisc.linalg import Subspace, containment_residual, projector_residual, range_basis, spec_norm
from polydisc.tuples import classical_defect_sq


def test_build_space_dims_and_order():
    s = build_space(1, 3, 1)
    assert s.dim == 4
    assert s.exponents == ((0,), (1,), (2,), (3,))
    assert build_space(2, 2, 1).dim == 9
    assert build_space(2, 2, 3).dim == 27
    s2 = build_space(2, 2, 1)
    degrees = [sum(k) for k in s2.exponents]
    assert degrees == sorted(degrees)  # graded ordering
    assert s2.exponents[0] == (0, 0)
    # lexicographic within a degree
    assert s2.exponents.index((0, 1)) < s2.exponents.index((1, 0))


def test_build_space_overflow_and_bad_args():
    with pytest.raises(DimensionOverflow):
        build_space(2, 2, 1, cap=8)
    with pytest.raises(ValueError):
        build_space(0, 2, 1)


def test_shift_matrix_one_variable():
    s = build_space(1, 2, 1)
    m = shift_matrix(s, 0)
    e = np.eye(3)
    np.testing.assert_allclose(m @ e[:, 0], e[:, 1], atol=0)
    np.testing.assert_allclose(m @ e[:, 2], np.zeros(3), atol=0)
    with pytest.raises(BadIndex):
        shift_matrix(s, 1)


def test_shifts_doubly_commute_on_window():
    s = build_space(2, 3, 1)
    m1, m2 = shift_matrix(s, 0), shift_matrix(s, 1)
    np.testing.assert_allclose(m1 @ m2, m2 @ m1, atol=0)
    w = window_mask(s, 2).projection
    cross = m1.conj().T @ m2 - m2 @ m1.conj().T
    assert spec_norm(w @ cross @ w) <= 1e-14


def test_shift_adjoint_defect_is_top_projector():
    s = build_space(2, 3, 1)
    for i in range(2):
        m = shift_matrix(s, i)
        defect = np.eye(s.dim) - m.conj().T @ m
        expected = np.zeros(s.dim)
        for k in s.exponents:
            if k[i] == s.N:
                expected[s.position(k, 0)] = 1.0
        np.testing.assert_allclose(defect, np.diag(expected), atol=1e-14)


def test_window_mask_projector():
    s = build_space(2, 3, 2)
    w = window_mask(s, (2, 1))
    p = w.projection
    np.testing.assert_allclose(p @ p, p, atol=0)
    np.testing.assert_allclose(p, p.conj().T, atol=0)
    assert w.dim == 3 * 2 * 2  # k1 <= 2, k2 <= 1, both coeff slots
    assert window_mask(s, (-1, 3)).dim == 0
    with pytest.raises(BadIndex):
        window_mask(s, (1, 2, 3))


def test_restriction_matrix_isometry():
    small = build_space(2, 2, 2)
    big = build_space(2, 4, 2)
    r = restriction_matrix(big, small)
    np.testing.assert_allclose(r.conj().T @ r, np.eye(small.dim), atol=0)
    with pytest.raises(IncompatibleDims):
        restriction_matrix(small, big)


def test_symbol_constructors_and_predicates():
    mono = monomial_symbol(2, (1, 0))
    bla = blaschke_symbol(1, 0, [0.5])
    uni = unitary_symbol(2, np.eye(2))
    assert is_graded(mono) and not is_graded(bla) and is_graded(uni)
    assert is_constant(uni) and not is_constant(mono)
    assert reach_vector(mono) == (1.0, 0.0)
    assert reach_vector(bla)[0] == np.inf
    assert reach_vector(monomial_symbol(2, (2, 1))) == (2.0, 1.0)
    prod = product_symbol([mono, monomial_symbol(2, (0, 1))])
    assert reach_vector(prod) == (1.0, 1.0)
    diag = blockdiag_symbol([monomial_symbol(2, (1, 1)), unitary_symbol(2, np.eye(1))])
    assert reach_vector(diag) == (1.0, 1.0)
    assert diag.input_dim == 2 and diag.output_dim == 2
    with pytest.raises(BadIndex):
        monomial_symbol(2, (1,))
    with pytest.raises(ValueError):
        blaschke_symbol(1, 0, [1.5])
    with pytest.raises(NotUnitary):
        unitary_symbol(1, [[0.5]])
    with pytest.raises(IncompatibleDims):
        product_symbol([diag, blockdiag_symbol([monomial_symbol(2, (1, 0))])])


def test_eval_symbol_values():
    w = np.array([0.3 + 0.1j, -0.2j])
    mono = monomial_symbol(2, (2, 1))
    np.testing.assert_allclose(eval_symbol(mono, w), [[w[0] ** 2 * w[1]]], atol=1e-15)
    a = 0.5 + 0.2j
    bla = blaschke_symbol(2, 1, [a])
    expected = (w[1] - a) / (1 - np.conj(a) * w[1])
    np.testing.assert_allclose(eval_symbol(bla, w), [[expected]], atol=1e-15)
    u = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    np.testing.assert_allclose(eval_symbol(unitary_symbol(2, u), w), u, atol=0)
    diag = blockdiag_symbol([mono, unitary_symbol(2, np.eye(1))])
    val = eval_symbol(diag, w)
    assert val.shape == (2, 2)
    np.testing.assert_allclose(val, np.diag([w[0] ** 2 * w[1], 1.0]), atol=1e-15)
    prod = product_symbol([mono, bla])
    np.testing.assert_allclose(
        eval_symbol(prod, w), eval_symbol(mono, w) * eval_symbol(bla, w), atol=1e-15
    )


def fft_taylor_coeffs(sym, n_coeffs, radius=0.8, samples=512):
    """Independent 1-d Taylor coefficients via scaled FFT on a circle."""
    theta = 2 * np.pi * np.arange(samples) / samples
    vals = np.array([eval_symbol(sym, [radius * np.exp(1j * t)])[0, 0] for t in theta])
    raw = np.fft.fft(vals) / samples
    return raw[:n_coeffs] / radius ** np.arange(n_coeffs)


def test_blaschke_taylor_against_fft():
    a = 0.5 - 0.3j
    sym = blaschke_symbol(1, 0, [a])
    space = build_space(1, 12, 1)
    mat, _, tail = symbol_matrix(space, sym)
    # first column of the matrix holds the Taylor coefficients of b
    got = mat[:, 0]
    oracle = fft_taylor_coeffs(sym, 13)
    np.testing.assert_allclose(got, oracle, atol=1e-12)
    assert tail >= abs(oracle[12]) * 0.1  # certified bound is not fake


def test_two_factor_blaschke_taylor():
    sym = blaschke_symbol(1, 0, [0.4, -0.3 + 0.2j])
    space = build_space(1, 15, 1)
    mat, _, tail = symbol_matrix(space, sym)
    oracle = fft_taylor_coeffs(sym, 16)
    np.testing.assert_allclose(mat[:, 0], oracle, atol=1e-12)
    assert 0 < tail < 1.0


def test_symbol_matrix_monomial_is_shift():
    s = build_space(2, 4, 1)
    mat, reach, tail = symbol_matrix(s, monomial_symbol(2, (1, 0)))
    np.testing.assert_allclose(mat, shift_matrix(s, 0), atol=0)
    assert reach == (1.0, 0.0) and tail == 0.0


def test_symbol_matrix_unitary_is_kron():
    s = build_space(2, 2, 2)
    u = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    mat, reach, tail = symbol_matrix(s, unitary_symbol(2, u))
    np.testing.assert_allclose(mat, np.kron(np.eye(s.mono_count), u), atol=0)
    assert reach == (0.0, 0.0) and tail == 0.0


def test_symbol_matrix_dim_mismatch():
    s = build_space(2, 2, 3)
    with pytest.raises(IncompatibleDims):
        symbol_matrix(s, monomial_symbol(2, (1, 0)))


def test_inner_residual_and_gate():
    assert inner_residual_symbol(monomial_symbol(2, (1, 1)), 8)[0] <= 1e-14
    assert inner_residual_symbol(blaschke_symbol(1, 0, [0.5, 0.3j]), 16)[0] <= 1e-13
    check_inner(monomial_symbol(1, (2,)), 8)
    bogus = InnerSymbol("unitary", 1, 1, 1, matrix=np.array([[0.5 + 0j]]))
    with pytest.raises(SymbolNotInner) as exc:
        check_inner(bogus, 8)
    assert exc.value.residual == pytest.approx(0.75)


def test_symbol_json_round_trip():
    sym = blockdiag_symbol(
        [
            product_symbol([monomial_symbol(2, (1, 0)), blaschke_symbol(2, 1, [0.3 + 0.1j])]),
            unitary_symbol(2, np.array([[0.0, 1.0], [1.0, 0.0]])),
        ]
    )
    back = symbol_from_json(symbol_to_json(sym))
    w = np.array([0.2 - 0.1j, 0.4j])
    np.testing.assert_allclose(eval_symbol(back, w), eval_symbol(sym, w), atol=0)


def test_symbol_json_errors():
    with pytest.raises(ParseError):
        symbol_from_json({"kind": "mystery", "n": 1})
    with pytest.raises(ParseError):
        symbol_from_json({"kind": "monomial", "n": 2})
    with pytest.raises(ParseError):
        symbol_from_json([])


def test_quotient_model_z1():
    n_deg = 5
    s = build_space(2, n_deg, 1)
    m = quotient_model(s, monomial_symbol(2, (1, 0)))
    assert m.quotient_dim == n_deg + 1
    # quotient = span of pure z2 powers
    expected = np.zeros((s.dim, n_deg + 1), dtype=complex)
    for b in range(n_deg + 1):
        expected[s.position((0, b), 0), b] = 1.0
    assert projector_residual(m.quotient_basis, Subspace(s.dim, expected)) <= 1e-12
    c1, c2 = m.model_ops
    assert spec_norm(c1) <= 1e-12
    assert np.allclose(np.linalg.matrix_power(c2, n_deg + 1), 0, atol=1e-12)
    assert spec_norm(c2) == pytest.approx(1.0, abs=1e-12)
    assert m.exact_window.max_degree == (n_deg - 1, n_deg - 1)


def test_quotient_model_constant_unitary():
    s = build_space(2, 3, 2)
    m = quotient_model(s, unitary_symbol(2, np.eye(2)))
    assert m.quotient_dim == 0
    report = structural_checks(m)
    assert report.passed and report.residuals == {}


def test_quotient_model_z1z2_dimension():
    n_deg = 4
    s = build_space(2, n_deg, 1)
    m = quotient_model(s, monomial_symbol(2, (1, 1)))
    assert m.quotient_dim == 2 * n_deg + 1
    mono_in_ideal = [k for k in s.exponents if k[0] >= 1 and k[1] >= 1]
    assert m.submodule_basis.dim == len(mono_in_ideal)


def test_model_tuple_and_mask_graded():
    s = build_space(2, 4, 1)
    m = quotient_model(s, monomial_symbol(2, (1, 1)))
    t = model_tuple(m)
    assert t.n == 2 and t.dim == m.quotient_dim
    mask = quotient_mask(m, 0)
    np.testing.assert_allclose(mask @ mask, mask, atol=1e-12)
    smaller = quotient_mask(m, 1)
    assert np.trace(smaller).real < np.trace(mask).real


def test_quotient_mask_rejects_nongraded():
    # deep enough truncation that the numerical quotient captures the
    # Blaschke kernel vector, which is not a coordinate subspace; a deep
    # shrink then exposes its tail mass and the transported window stops
    # being a projector
    s = build_space(1, 20, 1)
    m = quotient_model(s, blaschke_symbol(1, 0, [0.3]))
    assert m.quotient_dim == 1
    with pytest.raises(PolydiscError):
        quotient_mask(m, 12)


def test_wandering_subspace_examples():
    n_deg = 5
    s = build_space(2, n_deg, 1)
    m = quotient_model(s, monomial_symbol(2, (1, 0)))
    w = wandering_subspace(m, [0, 1])
    zvec = np.zeros((s.dim, 1), dtype=complex)
    zvec[s.position((1, 0), 0), 0] = 1.0
    masked = masked_span(w.basis, window_mask(s, n_deg - 2).projection)
    assert masked.dim == 1
    assert containment_residual(zvec, masked) <= 1e-10

    mu = quotient_model(s_small := build_space(2, 3, 2), unitary_symbol(2, np.eye(2)))
    w_const = wandering_subspace(mu, [0, 1])
    assert w_const.dim == 2  # the constants of the coefficient space
    consts = np.zeros((s_small.dim, 2), dtype=complex)
    consts[s_small.position((0, 0), 0), 0] = 1.0
    consts[s_small.position((0, 0), 1), 1] = 1.0
    assert projector_residual(w_const, Subspace(s_small.dim, consts)) <= 1e-10

    mzz = quotient_model(s, monomial_symbol(2, (1, 1)))
    w1 = wandering_subspace(mzz, [0])
    window = window_mask(s, n_deg - 2).projection
    got = masked_span(w1.basis, window)
    expected_cols = []
    for b in range(1, n_deg - 1):
        v = np.zeros(s.dim, dtype=complex)
        v[s.position((1, b), 0)] = 1.0
        expected_cols.append(v)
    expected = masked_span(np.array(expected_cols).T, window)
    assert projector_residual(got, expected) <= 1e-10
    with pytest.raises(BadIndex):
        wandering_subspace(m, [])


@pytest.mark.parametrize(
    "sym_name",
    ["z1", "z1z2", "z1sq_z2", "diag_z1z2_1"],
)
@pytest.mark.parametrize("n_deg", [4, 6])
def test_structural_checks_graded_models(sym_name, n_deg):
    symbols = {
        "z1": monomial_symbol(2, (1, 0)),
        "z1z2": monomial_symbol(2, (1, 1)),
        "z1sq_z2": monomial_symbol(2, (2, 1)),
        "diag_z1z2_1": blockdiag_symbol(
            [monomial_symbol(2, (1, 1)), unitary_symbol(2, np.eye(1))]
        ),
    }
    sym = symbols[sym_name]
    s = build_space(2, n_deg, sym.output_dim)
    m = quotient_model(s, sym)
    report = structural_checks(m)
    worst_name, worst_val = report.worst()
    assert report.passed, f"{sym_name} N={n_deg}: {worst_name}={worst_val:.3e}"
    assert report.dims["wandering_effective"] == report.dims["joint_defect"]
    if sym_name != "diag_z1z2_1":
        assert report.dims["wandering"] == report.dims["joint_defect"]


def test_structural_checks_residuals_tight_for_z1():
    s = build_space(2, 6, 1)
    report = structural_checks(quotient_model(s, monomial_symbol(2, (1, 0))))
    assert all(v <= 1e-10 for v in report.residuals.values())
    assert report.dims["wandering"] == 1
    assert report.dims["joint_defect"] == 1


def test_equivalence_battery_fails_on_full_bishift():
    # The full truncated bishift is the quotient of a two-generator ideal,
    # which is not a Beurling quotient; without the window all three
    # equivalent Beurling conditions fail, provided multiplication is
    # honest (computed in a bigger truncation, not silently truncated).
    n_deg = 3
    small = build_space(2, n_deg, 1)
    big = build_space(2, n_deg + 1, 1)
    r = restriction_matrix(big, small)
    t1 = shift_matrix(small, 0)
    t2 = shift_matrix(small, 1)
    d1 = classical_defect_sq(t1)
    d2 = classical_defect_sq(t2)
    # (2) defect squares do not annihilate each other
    assert spec_norm(d1 @ d2) == pytest.approx(1.0)
    # (3) T1 is not an isometry on the defect space of T2
    space2 = range_basis(d2)
    gram = (t1 @ space2.basis).conj().T @ (t1 @ space2.basis)
    assert spec_norm(gram - np.eye(space2.dim)) == pytest.approx(1.0)
    # (4) honest multiplication by z1 pushes the defect space out of itself
    lifted = shift_matrix(big, 0) @ r @ space2.basis
    target = Subspace(big.dim, r @ space2.basis)
    assert containment_residual(lifted, target) > 0.5


def test_masked_identity_checker_across_truncations():
    # window self-consistency: the same windowed operator computed at N
    # and at N+1 agrees exactly after restriction
    n_deg = 4
    sym = monomial_symbol(2, (1, 1))
    small_space = build_space(2, n_deg, 1)
    big_space = build_space(2, n_deg + 1, 1)
    m_small = quotient_model(small_space, sym)
    m_big = quotient_model(big_space, sym)
    r = restriction_matrix(big_space, small_space)
    window = window_mask(small_space, n_deg - 2).projection

    def ambient_defect(model, i):
        t = model_tuple(model)
        q = model.quotient_basis.basis
        from polydisc.defects import full_truncated_defect

        return q @ full_truncated_defect(t, i) @ q.conj().T

    for i in range(2):
        a_small = ambient_defect(m_small, i)
        a_big = r.conj().T @ ambient_defect(m_big, i) @ r
        assert spec_norm(window @ (a_small - a_big) @ window) <= 1e-13


def test_ahern_clark_growth():
    assert ahern_clark_growth(monomial_symbol(2, (1, 0)), range(1, 7)) == [2, 3, 4, 5, 6, 7]
    assert ahern_clark_growth(monomial_symbol(2, (1, 1)), range(1, 6)) == [3, 5, 7, 9, 11]
    diag = blockdiag_symbol([monomial_symbol(2, (1, 1)), unitary_symbol(2, np.eye(1))])
    assert ahern_clark_growth(diag, range(1, 5)) == [3, 5, 7, 9]
    with pytest.raises(ValueError):
        ahern_clark_growth(unitary_symbol(2, np.eye(2)), range(1, 4))
    with pytest.raises(ValueError):
        ahern_clark_growth(monomial_symbol(1, (1,)), range(1, 4))


def test_mono_shift_drops_top():
    s = build_space(2, 2, 1)
    z11 = mono_shift(s, (1, 1))
    ranks = {k: i for i, k in enumerate(s.exponents)}
    v = np.zeros(s.mono_count)
    v[ranks[(2, 1)]] = 1.0
    np.testing.assert_allclose(z11 @ v, np.zeros(s.mono_count), atol=0)
    v2 = np.zeros(s.mono_count)
    v2[ranks[(1, 0)]] = 1.0
    out = z11 @ v2
    assert out[ranks[(2, 1)]] == 1.0 and np.sum(np.abs(out)) == 1.0
