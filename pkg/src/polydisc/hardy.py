"""Truncated vector-valued Hardy spaces over the polydisc.

The truncation caps every variable at degree N, so the space is a tensor
power of one-variable truncations and the shifts are exact tensor-leg
nilpotent shifts.  Inner symbols come from a small compositional grammar
(monomials, one-variable Blaschke products, constant unitaries, block
diagonals, products); graded symbols (no Blaschke factor) change degrees
by an exact bounded amount, which yields a window of low degrees on which
the truncated objects agree exactly with their infinite-dimensional
counterparts.  Everything the structural checks assert is evaluated
through that window.

Basis ordering is graded lexicographic in the exponents, then coefficient
index, so operators factor as kron(monomial-level matrix, coefficient
matrix) and every report is bit-stable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .defects import full_truncated_defect, joint_commutator, joint_defect
from .errors import (
    BadIndex,
    DimensionOverflow,
    IncompatibleDims,
    NotUnitary,
    ParseError,
    PolydiscError,
    SymbolNotInner,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    as_complex,
    containment_residual,
    intersect_subspaces,
    null_space,
    projector_residual,
    range_basis,
    spec_norm,
)
from .tuples import CTuple, classical_defect_sq, validate

DIMENSION_CAP = 10**6


@dataclass(frozen=True)
class HardySpace:
    """Truncated Hardy space: all z^k e_r with every k_i <= N.

    Basis position of (k, r) is rank(k) * coeff_dim + r, with monomial
    ranks in graded lexicographic order.
    """

    n: int
    N: int
    coeff_dim: int
    exponents: tuple[tuple[int, ...], ...]

    @property
    def mono_count(self) -> int:
        return len(self.exponents)

    @property
    def dim(self) -> int:
        return self.mono_count * self.coeff_dim

    def rank(self, k) -> int:
        return _rank_map(self.exponents)[tuple(k)]

    def position(self, k, r: int) -> int:
        return self.rank(k) * self.coeff_dim + r


_RANK_CACHE: dict[tuple[tuple[int, ...], ...], dict[tuple[int, ...], int]] = {}


def _rank_map(exponents):
    cached = _RANK_CACHE.get(exponents)
    if cached is None:
        cached = {k: i for i, k in enumerate(exponents)}
        _RANK_CACHE[exponents] = cached
    return cached


def build_space(n: int, N: int, coeff_dim: int, cap: int = DIMENSION_CAP) -> HardySpace:
    """Enumerate the truncated monomial basis in graded lexicographic order."""
    if n < 1 or N < 1 or coeff_dim < 1:
        raise ValueError("need n >= 1, N >= 1, coeff_dim >= 1")
    dim = (N + 1) ** n * coeff_dim
    if dim > cap:
        raise DimensionOverflow(f"space dimension {dim} exceeds cap {cap}")
    exps = sorted(itertools.product(range(N + 1), repeat=n), key=lambda k: (sum(k), k))
    return HardySpace(n, N, coeff_dim, tuple(exps))


def mono_shift(space: HardySpace, beta) -> np.ndarray:
    """Monomial-level multiplication by z^beta (top degrees drop off)."""
    beta = tuple(int(b) for b in beta)
    m = space.mono_count
    out = np.zeros((m, m), dtype=np.complex128)
    ranks = _rank_map(space.exponents)
    for k in space.exponents:
        target = tuple(ki + bi for ki, bi in zip(k, beta))
        if all(t <= space.N for t in target):
            out[ranks[target], ranks[k]] = 1.0
    return out


def shift_matrix(space: HardySpace, i: int) -> np.ndarray:
    """Matrix of multiplication by z_i on the truncated space."""
    if not 0 <= i < space.n:
        raise BadIndex(f"variable index {i} out of range for n={space.n}")
    beta = tuple(1 if j == i else 0 for j in range(space.n))
    return np.kron(mono_shift(space, beta), np.eye(space.coeff_dim))


@dataclass(frozen=True)
class WindowMask:
    """Projection onto monomials with k_i <= max_degree[i] for every i."""

    max_degree: tuple[int, ...]
    projection: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(float(np.trace(self.projection).real)))


def window_mask(space: HardySpace, max_degree) -> WindowMask:
    """Build the window projector; negative caps give the zero projector."""
    if np.isscalar(max_degree):
        caps = tuple(int(max_degree) for _ in range(space.n))
    else:
        caps = tuple(int(c) for c in max_degree)
        if len(caps) != space.n:
            raise BadIndex(f"expected {space.n} degree caps, got {len(caps)}")
    diag = np.zeros(space.mono_count)
    for idx, k in enumerate(space.exponents):
        if all(ki <= ci for ki, ci in zip(k, caps)):
            diag[idx] = 1.0
    proj = np.kron(np.diag(diag), np.eye(space.coeff_dim))
    return WindowMask(caps, proj.astype(np.complex128))


def restriction_matrix(big: HardySpace, small: HardySpace) -> np.ndarray:
    """Isometric inclusion of a lower-degree truncation into a higher one."""
    if big.n != small.n or big.coeff_dim != small.coeff_dim or small.N > big.N:
        raise IncompatibleDims("spaces are not nested")
    out = np.zeros((big.dim, small.dim), dtype=np.complex128)
    for k in small.exponents:
        for r in range(small.coeff_dim):
            out[big.position(k, r), small.position(k, r)] = 1.0
    return out


# ---------------------------------------------------------------------------
# Inner-symbol grammar


@dataclass(frozen=True)
class InnerSymbol:
    """A node of the compositional symbol grammar.

    kind is one of "monomial", "blaschke1", "unitary", "blockdiag",
    "product", or "charfn" (an in-memory wrapper around a computed
    characteristic function; not serializable).  Coefficient dimensions
    map an input space E to an output space E*.
    """

    kind: str
    n: int
    input_dim: int
    output_dim: int
    exponent: tuple[int, ...] | None = None
    variable: int | None = None
    zeros: tuple[complex, ...] | None = None
    matrix: np.ndarray | None = None
    children: tuple["InnerSymbol", ...] | None = None
    charfn: object | None = None


def monomial_symbol(n: int, exponent) -> InnerSymbol:
    exponent = tuple(int(e) for e in exponent)
    if len(exponent) != n or any(e < 0 for e in exponent):
        raise BadIndex(f"exponent {exponent} invalid for n={n}")
    return InnerSymbol("monomial", n, 1, 1, exponent=exponent)


def blaschke_symbol(n: int, variable: int, zeros) -> InnerSymbol:
    if not 0 <= variable < n:
        raise BadIndex(f"variable {variable} out of range for n={n}")
    zeros = tuple(complex(z) for z in zeros)
    if any(abs(z) >= 1 for z in zeros):
        raise ValueError("Blaschke zeros must lie strictly inside the disc")
    return InnerSymbol("blaschke1", n, 1, 1, variable=variable, zeros=zeros)


def unitary_symbol(n: int, matrix) -> InnerSymbol:
    matrix = np.atleast_2d(as_complex(matrix))
    d = matrix.shape[0]
    if matrix.shape != (d, d) or spec_norm(matrix @ matrix.conj().T - np.eye(d)) > 1e-10:
        raise NotUnitary(f"constant block of shape {matrix.shape} is not unitary")
    return InnerSymbol("unitary", n, d, d, matrix=matrix)


def blockdiag_symbol(children) -> InnerSymbol:
    children = tuple(children)
    if not children:
        raise ValueError("blockdiag needs at least one child")
    n = children[0].n
    if any(c.n != n for c in children):
        raise IncompatibleDims("blockdiag children must share the variable count")
    return InnerSymbol(
        "blockdiag",
        n,
        sum(c.input_dim for c in children),
        sum(c.output_dim for c in children),
        children=children,
    )


def product_symbol(children) -> InnerSymbol:
    children = tuple(children)
    if not children:
        raise ValueError("product needs at least one child")
    n = children[0].n
    if any(c.n != n for c in children):
        raise IncompatibleDims("product children must share the variable count")
    for left, right in zip(children, children[1:]):
        if left.input_dim != right.output_dim:
            raise IncompatibleDims(
                f"product chain mismatch: {left.input_dim} vs {right.output_dim}"
            )
    return InnerSymbol(
        "product", n, children[-1].input_dim, children[0].output_dim, children=children
    )


def charfn_symbol(f) -> InnerSymbol:
    """Wrap a built characteristic function as a symbol (in-memory only)."""
    return InnerSymbol("charfn", f.n, f.input_dim, f.output_dim, charfn=f)


def eval_symbol(sym: InnerSymbol, w) -> np.ndarray:
    """Pointwise value of the symbol, an output_dim x input_dim matrix."""
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    if w.shape[0] != sym.n:
        raise IncompatibleDims(f"point has {w.shape[0]} coordinates, symbol has n={sym.n}")
    if sym.kind == "monomial":
        return np.array([[np.prod(w**np.array(sym.exponent))]], dtype=np.complex128)
    if sym.kind == "blaschke1":
        z = w[sym.variable]
        val = 1.0 + 0.0j
        for a in sym.zeros:
            val *= (z - a) / (1.0 - np.conj(a) * z)
        return np.array([[val]])
    if sym.kind == "unitary":
        return sym.matrix.copy()
    if sym.kind == "blockdiag":
        blocks = [eval_symbol(c, w) for c in sym.children]
        out = np.zeros((sym.output_dim, sym.input_dim), dtype=np.complex128)
        ro = ci = 0
        for c, b in zip(sym.children, blocks):
            out[ro : ro + c.output_dim, ci : ci + c.input_dim] = b
            ro += c.output_dim
            ci += c.input_dim
        return out
    if sym.kind == "product":
        out = eval_symbol(sym.children[0], w)
        for c in sym.children[1:]:
            out = out @ eval_symbol(c, w)
        return out
    if sym.kind == "charfn":
        return sym.charfn.eval(w)
    raise ParseError(f"unknown symbol kind {sym.kind!r}")


def reach_vector(sym: InnerSymbol) -> tuple[float, ...]:
    """Per-variable degree increase; math.inf marks unbounded (Blaschke)."""
    if sym.kind == "monomial":
        return tuple(float(e) for e in sym.exponent)
    if sym.kind == "blaschke1":
        out = [0.0] * sym.n
        if any(abs(a) > 0 for a in sym.zeros):
            out[sym.variable] = math.inf
        else:
            out[sym.variable] = float(len(sym.zeros))
        return tuple(out)
    if sym.kind == "unitary":
        return tuple(0.0 for _ in range(sym.n))
    if sym.kind == "blockdiag":
        vecs = [reach_vector(c) for c in sym.children]
        return tuple(max(v[i] for v in vecs) for i in range(sym.n))
    if sym.kind == "product":
        vecs = [reach_vector(c) for c in sym.children]
        return tuple(sum(v[i] for v in vecs) for i in range(sym.n))
    if sym.kind == "charfn":
        return tuple(math.inf for _ in range(sym.n))
    raise ParseError(f"unknown symbol kind {sym.kind!r}")


def is_graded(sym: InnerSymbol) -> bool:
    return all(math.isfinite(r) for r in reach_vector(sym))


def is_constant(sym: InnerSymbol) -> bool:
    return all(r == 0 for r in reach_vector(sym))


def _blaschke_series(zeros, N: int) -> tuple[np.ndarray, float, float]:
    """1-d Taylor coefficients of a finite Blaschke product up to degree N.

    Returns (coefficients, l1_bound, tail_bound): each factor (z-a)/(1-conj(a)z)
    has coefficients -a, then (1-|a|^2) conj(a)^{k-1}; products are built by
    truncated convolution.  The l1 coefficient norm of a factor is 1+2|a| and
    its l1 tail beyond N is (1+|a|)|a|^N, which combine into a certified
    bound on the discarded coefficients of the product.
    """
    coeffs = np.zeros(N + 1, dtype=np.complex128)
    coeffs[0] = 1.0
    l1s, tails = [], []
    for a in zeros:
        fac = np.zeros(N + 1, dtype=np.complex128)
        fac[0] = -a
        for k in range(1, N + 1):
            fac[k] = (1.0 - abs(a) ** 2) * np.conj(a) ** (k - 1)
        coeffs = np.convolve(coeffs, fac)[: N + 1]
        l1s.append(1.0 + 2.0 * abs(a))
        tails.append((1.0 + abs(a)) * abs(a) ** N)
    total_l1 = float(np.prod(l1s)) if l1s else 1.0
    tail = 0.0
    for j, tj in enumerate(tails):
        rest = float(np.prod([l for i, l in enumerate(l1s) if i != j])) if len(l1s) > 1 else 1.0
        tail += tj * rest
    return coeffs, total_l1, float(tail)


def symbol_taylor(sym: InnerSymbol, n: int, N: int) -> tuple[dict, float, float]:
    """Matrix Taylor coefficients {beta: block} up to per-variable degree N.

    Returns (coefficients, l1_bound, tail_bound) where l1_bound dominates
    the sum of coefficient block norms and tail_bound the norm of the
    discarded part.
    """
    if sym.n != n:
        raise IncompatibleDims(f"symbol has n={sym.n}, space has n={n}")
    zero = tuple(0 for _ in range(n))
    if sym.kind == "monomial":
        return {sym.exponent: np.eye(1, dtype=np.complex128)}, 1.0, 0.0
    if sym.kind == "unitary":
        return {zero: sym.matrix.copy()}, 1.0, 0.0
    if sym.kind == "blaschke1":
        series, l1, tail = _blaschke_series(sym.zeros, N)
        coeffs = {}
        for k in range(N + 1):
            if series[k] != 0:
                beta = tuple(k if j == sym.variable else 0 for j in range(n))
                coeffs[beta] = np.array([[series[k]]])
        return coeffs, l1, tail
    if sym.kind == "blockdiag":
        parts = [symbol_taylor(c, n, N) for c in sym.children]
        betas = set().union(*(p[0].keys() for p in parts))
        coeffs = {}
        for beta in betas:
            block = np.zeros((sym.output_dim, sym.input_dim), dtype=np.complex128)
            ro = ci = 0
            for c, (cd, _, _) in zip(sym.children, parts):
                if beta in cd:
                    block[ro : ro + c.output_dim, ci : ci + c.input_dim] = cd[beta]
                ro += c.output_dim
                ci += c.input_dim
            coeffs[beta] = block
        l1 = max(p[1] for p in parts)
        tail = max(p[2] for p in parts)
        return coeffs, l1, tail
    if sym.kind == "product":
        parts = [symbol_taylor(c, n, N) for c in sym.children]
        coeffs, l1, tail = parts[0]
        for cd, cl1, ctail in parts[1:]:
            merged: dict = {}
            for b1, m1 in coeffs.items():
                for b2, m2 in cd.items():
                    beta = tuple(x + y for x, y in zip(b1, b2))
                    if any(b > N for b in beta):
                        continue
                    if beta in merged:
                        merged[beta] = merged[beta] + m1 @ m2
                    else:
                        merged[beta] = m1 @ m2
            coeffs = merged
            tail = tail * cl1 + l1 * ctail
            l1 = l1 * cl1
        return coeffs, l1, tail
    if sym.kind == "charfn":
        return sym.charfn.taylor_coeffs(N)
    raise ParseError(f"unknown symbol kind {sym.kind!r}")


def symbol_matrix(space: HardySpace, sym: InnerSymbol) -> tuple[np.ndarray, tuple[float, ...], float]:
    """Multiplication operator H^2_E -> H^2_{E*} between truncations.

    The domain space shares n and N with ``space`` but has coeff_dim =
    input_dim; ``space`` itself must have coeff_dim = output_dim.
    Returns (matrix, reach vector, certified coefficient tail bound).
    """
    if space.coeff_dim != sym.output_dim:
        raise IncompatibleDims(
            f"space coeff_dim {space.coeff_dim} != symbol output_dim {sym.output_dim}"
        )
    coeffs, _, tail = symbol_taylor(sym, space.n, space.N)
    out = np.zeros((space.mono_count * sym.output_dim, space.mono_count * sym.input_dim), dtype=np.complex128)
    for beta, block in coeffs.items():
        out += np.kron(mono_shift(space, beta), block)
    return out, reach_vector(sym), tail


def inner_residual_symbol(sym: InnerSymbol, grid_per_axis: int = 32) -> tuple[float, tuple]:
    """Worst deviation of Theta(z)^H Theta(z) from I over a torus grid."""
    angles = 2.0 * np.pi * np.arange(grid_per_axis) / grid_per_axis
    eye = np.eye(sym.input_dim)
    worst, worst_pt = 0.0, tuple(1.0 for _ in range(sym.n))
    for combo in itertools.product(angles, repeat=sym.n):
        z = np.exp(1j * np.array(combo))
        val = eval_symbol(sym, z)
        res = spec_norm(val.conj().T @ val - eye)
        if res > worst:
            worst, worst_pt = res, tuple(z)
    return worst, worst_pt


def check_inner(sym: InnerSymbol, grid_per_axis: int = 32, tol: float = 1e-8) -> float:
    worst, pt = inner_residual_symbol(sym, grid_per_axis)
    if worst > tol:
        raise SymbolNotInner(
            f"torus-grid inner residual {worst:.3e} exceeds {tol:.1e}", pt, worst
        )
    return worst


def symbol_to_json(sym: InnerSymbol) -> dict:
    if sym.kind == "monomial":
        return {"kind": "monomial", "n": sym.n, "exponent": list(sym.exponent)}
    if sym.kind == "blaschke1":
        return {
            "kind": "blaschke1",
            "n": sym.n,
            "variable": sym.variable,
            "zeros": [[z.real, z.imag] for z in sym.zeros],
        }
    if sym.kind == "unitary":
        return {
            "kind": "unitary",
            "n": sym.n,
            "matrix": [[[v.real, v.imag] for v in row] for row in sym.matrix],
        }
    if sym.kind in ("blockdiag", "product"):
        return {"kind": sym.kind, "n": sym.n, "children": [symbol_to_json(c) for c in sym.children]}
    raise ParseError(f"symbol kind {sym.kind!r} is not serializable")


def symbol_from_json(obj) -> InnerSymbol:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError("symbol node must be an object with a 'kind' field")
    kind = obj["kind"]
    try:
        n = int(obj["n"])
        if kind == "monomial":
            return monomial_symbol(n, obj["exponent"])
        if kind == "blaschke1":
            zeros = [complex(re, im) for re, im in obj["zeros"]]
            return blaschke_symbol(n, int(obj["variable"]), zeros)
        if kind == "unitary":
            arr = np.asarray(obj["matrix"], dtype=float)
            return unitary_symbol(n, arr[..., 0] + 1j * arr[..., 1])
        if kind == "blockdiag":
            return blockdiag_symbol([symbol_from_json(c) for c in obj["children"]])
        if kind == "product":
            return product_symbol([symbol_from_json(c) for c in obj["children"]])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed {kind!r} symbol node: {exc}") from exc
    raise ParseError(f"unknown symbol kind {kind!r}")


# ---------------------------------------------------------------------------
# Quotient models


@dataclass(frozen=True)
class QuotientModel:
    """Truncated Beurling quotient: Q = (Theta H^2_E)^perp inside H^2_{E*}."""

    space: HardySpace
    symbol: InnerSymbol
    symbol_mat: np.ndarray
    submodule_basis: Subspace
    quotient_basis: Subspace
    model_ops: tuple[np.ndarray, ...]
    exact_window: WindowMask
    reach: tuple[float, ...]
    tail_bound: float

    @property
    def quotient_dim(self) -> int:
        return self.quotient_basis.dim


def quotient_model(
    space: HardySpace,
    sym: InnerSymbol,
    tol: Tolerances = DEFAULT_TOL,
    grid_per_axis: int = 32,
    window_margin: int = 1,
) -> QuotientModel:
    """Build the quotient model of an inner symbol at one truncation.

    The exact window caps variable i at N - max(reach_i, margin): the
    truncated shift corrupts the top degree in every variable, and a
    symbol of reach r pushes corruption r degrees lower.  Blaschke-bearing
    symbols get the margin-only window plus a nonzero tail bound.
    """
    check_inner(sym, grid_per_axis)
    mat, reach, tail = symbol_matrix(space, sym)
    sub = range_basis(mat, tol)
    quot = null_space(mat.conj().T, tol)
    ops = tuple(
        quot.basis.conj().T @ shift_matrix(space, i) @ quot.basis for i in range(space.n)
    )
    caps = []
    for r in reach:
        eff = window_margin if not math.isfinite(r) else max(int(r), window_margin)
        caps.append(space.N - eff)
    window = window_mask(space, caps)
    return QuotientModel(space, sym, mat, sub, quot, ops, window, reach, tail)


def model_tuple(model: QuotientModel, tol: Tolerances = DEFAULT_TOL) -> CTuple:
    """The model operators as a validated commuting tuple.

    Exact for graded symbols (the submodule is a monomial ideal, so the
    compressions commute on the nose); Blaschke truncation tails can break
    commutation, in which case the validation error propagates.
    """
    return validate(model.model_ops, tol)


def quotient_mask(model: QuotientModel, shrink: int = 0) -> np.ndarray:
    """Window projector transported to quotient coordinates.

    Shrinks each per-variable cap by ``shrink`` first.  For graded symbols
    the transported matrix is an exact orthogonal projection (window and
    quotient are both monomial-coordinate subspaces); this is asserted.
    """
    caps = tuple(c - shrink for c in model.exact_window.max_degree)
    amb = window_mask(model.space, caps).projection
    q = model.quotient_basis.basis
    mask = q.conj().T @ amb @ q
    if spec_norm(mask @ mask - mask) > 1e-10:
        raise PolydiscError(
            "window does not project cleanly to quotient coordinates "
            "(non-graded symbol); use tail bounds instead"
        )
    return mask


def wandering_subspace(model: QuotientModel, p, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """W_P: the part of the submodule orthogonal to z_i S for all i in P."""
    pset = sorted(set(int(i) for i in p))
    if not pset:
        raise BadIndex("wandering subspace needs a nonempty index set")
    if any(not 0 <= i < model.space.n for i in pset):
        raise BadIndex(f"index set {pset} out of range for n={model.space.n}")
    s_basis = model.submodule_basis.basis
    pieces = [model.submodule_basis]
    for i in pset:
        shifted = shift_matrix(model.space, i) @ s_basis
        pieces.append(null_space(shifted.conj().T, tol))
    return intersect_subspaces(pieces, tol)


def masked_span(vectors, mask: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Range basis of masked columns (the windowed span of the vectors).

    The rank cut is floored at scale 1 so that columns whose windowed part
    is pure roundoff do not promote the span.
    """
    return range_basis(mask @ np.atleast_2d(as_complex(vectors)), tol, floor=1.0)


@dataclass(frozen=True)
class StructuralReport:
    """Windowed residuals of the model identities, with dimension readings."""

    residuals: dict[str, float]
    dims: dict[str, int]
    threshold: float

    @property
    def passed(self) -> bool:
        dims_ok = self.dims.get("wandering_effective", -1) == self.dims.get("joint_defect", -1)
        return dims_ok and all(v <= self.threshold for v in self.residuals.values())

    def worst(self) -> tuple[str, float]:
        name = max(self.residuals, key=lambda k: self.residuals[k])
        return name, self.residuals[name]


def structural_checks(
    model: QuotientModel,
    tol: Tolerances = DEFAULT_TOL,
    threshold: float = 1e-8,
    expect_minimal: bool | None = None,
) -> StructuralReport:
    """Run the full windowed identity battery on one graded model.

    Every residual is evaluated through the model's exact window, shrunk
    further by the degree reach of the operators inside each identity.
    ``expect_minimal`` tells the minimality check whether the symbol has a
    constant unitary block (overlap 1) or not (overlap 0); by default it
    is inferred from the grammar.
    """
    space = model.space
    n = space.n
    if model.quotient_dim == 0:
        return StructuralReport({}, {"quotient": 0}, threshold)
    t = model_tuple(model, tol)
    q = model.quotient_basis.basis
    s_proj = model.submodule_basis.projector()
    q_proj = model.quotient_basis.projector()
    eye_amb = np.eye(space.dim)
    shifts = [shift_matrix(space, i) for i in range(n)]
    mask1 = quotient_mask(model, 1)
    mask2 = quotient_mask(model, 2)
    amb_mask0 = window_mask(space, model.exact_window.max_degree).projection
    amb_mask1 = window_mask(space, tuple(c - 1 for c in model.exact_window.max_degree)).projection

    residuals: dict[str, float] = {}
    dims: dict[str, int] = {"quotient": model.quotient_dim}

    # Invariance of the two halves under the (adjoint) shifts.
    residuals["submodule_invariant"] = max(
        spec_norm(amb_mask1 @ (eye_amb - s_proj) @ shifts[i] @ s_proj @ amb_mask0)
        for i in range(n)
    )
    residuals["quotient_coinvariant"] = max(
        spec_norm(amb_mask1 @ (eye_amb - q_proj) @ shifts[i].conj().T @ q_proj @ amb_mask0)
        for i in range(n)
    )

    # The compressions commute on the window.
    residuals["model_ops_commute"] = max(
        (
            spec_norm(mask2 @ (t[i] @ t[j] - t[j] @ t[i]) @ mask2)
            for i, j in itertools.combinations(range(n), 2)
        ),
        default=0.0,
    )

    # Defect formula: I - C_i^* C_i equals the cross-projection product.
    residuals["defect_formula"] = max(
        spec_norm(
            mask1
            @ (classical_defect_sq(t[i]) - q.conj().T @ shifts[i].conj().T @ s_proj @ shifts[i] @ q)
            @ mask1
        )
        for i in range(n)
    )

    # Commutator formula: [C_j, C_i^*] through the submodule projector.
    residuals["commutator_formula"] = max(
        (
            spec_norm(
                mask1
                @ (
                    (t[j] @ t[i].conj().T - t[i].conj().T @ t[j])
                    - q.conj().T @ shifts[i].conj().T @ s_proj @ shifts[j] @ q
                )
                @ mask1
            )
            for i, j in itertools.permutations(range(n), 2)
        ),
        default=0.0,
    )

    # Beurling equivalence battery on the defect operators of the model.
    defect_sqs = [mask1 @ classical_defect_sq(t[i]) @ mask1 for i in range(n)]
    defect_spaces = [range_basis(d, tol, floor=1.0) for d in defect_sqs]
    residuals["defects_annihilate"] = max(
        (
            spec_norm(mask2 @ defect_sqs[i] @ defect_sqs[j] @ mask2)
            for i, j in itertools.permutations(range(n), 2)
        ),
        default=0.0,
    )
    iso = 0.0
    invar = 0.0
    for i, j in itertools.permutations(range(n), 2):
        basis = mask2 @ defect_spaces[j].basis
        norms = np.linalg.norm(basis, axis=0)
        keep = norms > 1e-8
        if not np.any(keep):
            continue
        basis = basis[:, keep] / norms[keep]
        gram = basis.conj().T @ (t[i].conj().T @ t[i]) @ basis
        iso = max(iso, spec_norm(gram - basis.conj().T @ basis))
        invar = max(invar, containment_residual(mask1 @ t[i] @ basis, defect_spaces[j]))
    residuals["defect_isometry"] = iso
    residuals["defect_invariance"] = invar

    # delta_ij columns stay inside the truncated defect space D_{i,C}.
    rng_incl = 0.0
    for i, j in itertools.permutations(range(n), 2):
        delta = mask1 @ joint_commutator(t, i, j) @ mask1
        target = range_basis(mask1 @ full_truncated_defect(t, i) @ mask1, tol, floor=1.0)
        if target.dim:
            rng_incl = max(rng_incl, containment_residual(delta, target))
        else:
            rng_incl = max(rng_incl, spec_norm(delta))
    residuals["commutator_range_inclusion"] = rng_incl

    # Truncated defect space formula: D_{j,C} = clos(M_{z_j}^* Theta E).
    theta_cols = model.symbol_mat[:, : model.symbol.input_dim]  # degree-0 inputs
    fs_formula = 0.0
    for j in range(n):
        pulled = q.conj().T @ shifts[j].conj().T @ theta_cols
        lhs = masked_span(mask1 @ pulled, mask1, tol)
        rhs = range_basis(mask1 @ full_truncated_defect(t, j) @ mask1, tol, floor=1.0)
        fs_formula = max(fs_formula, projector_residual(lhs, rhs))
    residuals["truncated_defect_space_formula"] = fs_formula

    # Wandering subspace machinery.  Truncation artifacts in the submodule
    # live strictly above the exact window (a symbol column is corrupted
    # only when its degree overflows the box), so wandering readings mask
    # at the full window, not the shrunk one; shrinking further would
    # erase generators whose degree equals the symbol reach.
    full_set = list(range(n))
    w_full = wandering_subspace(model, full_set, tol)
    w_masked = masked_span(w_full.basis, amb_mask0, tol)
    dims["wandering"] = w_masked.dim

    theta_span = masked_span(theta_cols, amb_mask0, tol)
    residuals["wandering_equals_theta"] = projector_residual(w_masked, theta_span)

    wl_invar = 0.0
    wl_split = 0.0
    for psize in range(1, n):
        for pset in itertools.combinations(range(n), psize):
            wp = wandering_subspace(model, pset, tol)
            for j in range(n):
                if j in pset:
                    continue
                shifted = amb_mask1 @ shifts[j] @ wp.basis
                wl_invar = max(
                    wl_invar,
                    containment_residual(shifted, masked_span(wp.basis, amb_mask0, tol)),
                )
                bigger = wandering_subspace(model, pset + (j,), tol)
                inside = masked_span(wp.basis, amb_mask1, tol)
                z_wp = masked_span(shift_matrix(space, j) @ wp.basis, amb_mask1, tol)
                complement_cols = (np.eye(space.dim) - z_wp.projector()) @ inside.basis
                split = masked_span(complement_cols, amb_mask1, tol)
                wl_split = max(
                    wl_split,
                    projector_residual(split, masked_span(bigger.basis, amb_mask1, tol)),
                )
    residuals["wandering_shift_invariance"] = wl_invar
    residuals["wandering_splitting"] = wl_split

    # Projecting M_{z_j} Q onto W or onto the partial wandering space W_{j^c}
    # must agree: the two projectors coincide on that image.
    wj_res = 0.0
    if n >= 2:
        for j in range(n):
            rest = tuple(i for i in range(n) if i != j)
            wjc = masked_span(wandering_subspace(model, rest, tol).basis, amb_mask0, tol)
            diff = (w_masked.projector() - wjc.projector()) @ amb_mask0 @ shifts[j] @ q
            wj_res = max(wj_res, spec_norm(diff))
    residuals["wandering_projection_agreement"] = wj_res

    # Effective wandering subspace: the part reached from the quotient.
    reached = np.hstack([w_masked.projector() @ amb_mask0 @ shifts[j] @ q for j in range(n)])
    w_eff = range_basis(reached, tol, floor=1.0)
    dims["wandering_effective"] = w_eff.dim

    # Joint defect vs the Gram matrix of X_j = P_W M_{z_j}|_Q.
    jd = joint_defect(t, mask=mask1)
    dims["joint_defect"] = range_basis(jd.matrix, tol, floor=1.0).dim
    x_cols = [w_masked.basis.conj().T @ amb_mask0 @ shifts[j] @ q for j in range(n)]
    qd = model.quotient_dim
    gram = np.zeros((n * qd, n * qd), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            gram[i * qd : (i + 1) * qd, j * qd : (j + 1) * qd] = x_cols[i].conj().T @ x_cols[j]
    big_mask = np.kron(np.eye(n), mask1)
    residuals["joint_defect_gram_identity"] = spec_norm(big_mask @ (jd.matrix - gram) @ big_mask)

    # Minimality: overlap of the submodule with constant vectors of E*.
    const_cols = np.zeros((space.dim, space.coeff_dim), dtype=np.complex128)
    zero_exp = tuple(0 for _ in range(n))
    for r in range(space.coeff_dim):
        const_cols[space.position(zero_exp, r), r] = 1.0
    overlap = spec_norm(model.submodule_basis.basis.conj().T @ const_cols)
    if expect_minimal is None:
        expect_minimal = not _has_constant_block(model.symbol)
    expected = 0.0 if expect_minimal else 1.0
    residuals["minimality_overlap_error"] = abs(overlap - expected)
    if expect_minimal:
        # For minimal symbols the wandering space is exactly what the
        # quotient reaches, so W_eff = W as subspaces.
        residuals["wandering_effective_equals_wandering"] = projector_residual(w_eff, w_masked)

    return StructuralReport(residuals, dims, threshold)


def _has_constant_block(sym: InnerSymbol) -> bool:
    """Grammar-level guess at whether the symbol traps constants in S.

    Exact for the shapes the battery builds (monomials, block diagonals
    with unitary slots).  Mixed products can fool it; callers with such
    symbols should pass expect_minimal explicitly.
    """
    if sym.kind == "unitary":
        return True
    if sym.kind == "monomial":
        return all(e == 0 for e in sym.exponent)
    if sym.kind == "blaschke1":
        return len(sym.zeros) == 0
    if sym.kind == "blockdiag":
        return any(_has_constant_block(c) for c in sym.children)
    if sym.kind == "product":
        return all(_has_constant_block(c) for c in sym.children)
    return False


def ahern_clark_growth(sym: InnerSymbol, n_range) -> list[int]:
    """Quotient dimensions across truncation degrees, asserted increasing.

    The strict growth of dim Q with N is the desk-scale shadow of the
    infinite-dimensionality of quotient modules in several variables;
    constant symbols (trivial quotient) and one variable are excluded.
    """
    if sym.n < 2:
        raise ValueError("dimension growth needs at least two variables")
    if is_constant(sym):
        raise ValueError("constant symbols have trivial quotients; excluded")
    dims = []
    for n_deg in n_range:
        space = build_space(sym.n, int(n_deg), sym.output_dim)
        mat, _, _ = symbol_matrix(space, sym)
        quot = null_space(mat.conj().T)
        dims.append(quot.dim)
    for a, b in zip(dims, dims[1:]):
        if b <= a:
            raise PolydiscError(f"quotient dimension failed to grow: {dims}")
    return dims
