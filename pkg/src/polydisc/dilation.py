"""Canonical dilation of a pure Szego tuple into a truncated Hardy space.

The dilation sends h to the coefficient family (D_{T*} T^{*k} h) indexed by
monomials, realizing T as the compression of the truncated shift tuple to
the image.  All verification operations report defects that are certified
to lie below the stored truncation tail bound plus tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotPure, PolydiscError
from .hardy import HardySpace, build_space, shift_matrix
from .linalg import DEFAULT_TOL, Subspace, Tolerances, range_basis, spec_norm
from .tuples import CTuple, defect_first_kind, is_pure

DEGREE_CAP = 64


def select_degree(t: CTuple, tol: Tolerances = DEFAULT_TOL) -> int:
    """Smallest N with rho_max^(N+1) * sqrt(n) * dim <= tol_structural.

    Capped at DEGREE_CAP.  Tuples with spectral radius below 1e-6 are
    treated as nilpotent and get N = dim, the largest possible nilpotency
    index, where the coefficient series terminates exactly.
    """
    from .tuples import spectral_radii

    rho = max(spectral_radii(t))
    if rho < 1e-6:
        return t.dim
    target = tol.tol_structural / (math.sqrt(t.n) * t.dim)
    if target >= 1.0:
        return 1
    need = math.ceil(math.log(target) / math.log(rho)) - 1
    return max(1, min(int(need), DEGREE_CAP))


@dataclass(frozen=True)
class DilationData:
    """Coefficient realization of the dilation at one truncation degree.

    coeff_map holds the full d x d blocks D_{T*} T^{*k}; pi is the same
    data with rows compressed to coeff_basis coordinates, stacked in the
    monomial order of ``space``.
    """

    tuple: CTuple
    space: HardySpace
    degree: int
    coeff_basis: Subspace
    coeff_map: dict[tuple[int, ...], np.ndarray]
    pi: np.ndarray
    image_basis: Subspace
    tail_bound: float


def _power_norms(mat: np.ndarray, top: int) -> list[float]:
    """Spectral norms of mat^0 .. mat^top."""
    norms = []
    p = np.eye(mat.shape[0], dtype=np.complex128)
    for _ in range(top + 1):
        norms.append(spec_norm(p))
        p = p @ mat
    return norms


def coefficient_tail_sum(t: CTuple, n_deg: int) -> float:
    """Power-norm mass outside the truncation box.

    Sum over multi-indices k with some k_i > n_deg of prod_i ||T_i^{k_i}||.
    Per-variable tails use submultiplicativity: with u = ||T^{N+1}|| and S
    the sum of ||T^k|| over 0..N, every k > N splits as b(N+1)+r, so the
    tail is at most S * u / (1-u); infinite when u >= 1 (nothing certified).
    """
    box_sums, full_sums = [], []
    for i in range(t.n):
        norms = _power_norms(t[i], n_deg + 1)
        box = float(sum(norms[: n_deg + 1]))
        u = norms[n_deg + 1]
        if u >= 1.0:
            return math.inf
        box_sums.append(box)
        full_sums.append(box + box * u / (1.0 - u))
    return max(float(np.prod(full_sums) - np.prod(box_sums)), 0.0)


def _tail_bound(t: CTuple, n_deg: int, defect_norm: float) -> float:
    """Certified bound on the dilation rows below the truncation box:
    ||D_{T*}|| times the power-norm mass outside."""
    return defect_norm * coefficient_tail_sum(t, n_deg)


def build_dilation(t: CTuple, degree: int | None = None) -> DilationData:
    """Assemble the dilation of a pure Szego tuple at truncation degree N.

    N defaults to the select_degree rule.  Coefficient rows are expressed
    in the orthonormal basis of the first-kind defect space, so the Hardy
    space has coefficient dimension rank(D_{T*}) rather than dim.
    """
    pure, radii = is_pure(t)
    if not pure:
        raise NotPure(f"dilation needs a pure tuple; spectral radii {radii}")
    root, basis = defect_first_kind(t)
    if basis.dim == 0:
        raise PolydiscError("first-kind defect vanishes; no dilation space")
    n_deg = select_degree(t, t.tol) if degree is None else int(degree)
    if n_deg < 1:
        raise ValueError(f"truncation degree must be >= 1, got {n_deg}")
    space = build_space(t.n, n_deg, basis.dim)

    adjoints = [m.conj().T for m in t]
    powers: dict[tuple[int, ...], np.ndarray] = {}
    coeff_map: dict[tuple[int, ...], np.ndarray] = {}
    reduced = basis.basis.conj().T
    pi = np.zeros((space.dim, t.dim), dtype=np.complex128)
    for k in space.exponents:
        if not any(k):
            powers[k] = np.eye(t.dim, dtype=np.complex128)
        else:
            i = next(j for j, kj in enumerate(k) if kj)
            prev = tuple(kj - (1 if j == i else 0) for j, kj in enumerate(k))
            powers[k] = adjoints[i] @ powers[prev]
        coeff_map[k] = root @ powers[k]
        r = space.position(k, 0)
        pi[r : r + basis.dim] = reduced @ coeff_map[k]

    image = range_basis(pi, t.tol, floor=1.0)
    tail = _tail_bound(t, n_deg, spec_norm(root))
    return DilationData(t, space, n_deg, basis, coeff_map, pi, image, tail)


def isometry_defect(d: DilationData) -> float:
    """|| pi^H pi - I || on the original space."""
    return spec_norm(d.pi.conj().T @ d.pi - np.eye(d.tuple.dim))


def _row_mask(d: DilationData, variable: int | None = None) -> np.ndarray:
    """Boolean row selector excluding top per-variable degree.

    With a variable given, only that variable's top degree is excluded;
    otherwise the top degree of every variable is.
    """
    keep = np.zeros(d.space.dim, dtype=bool)
    for k in d.space.exponents:
        if variable is None:
            ok = all(kj <= d.degree - 1 for kj in k)
        else:
            ok = k[variable] <= d.degree - 1
        if ok:
            r = d.space.position(k, 0)
            keep[r : r + d.space.coeff_dim] = True
    return keep


def intertwining_defect(d: DilationData) -> float:
    """max_i || pi T_i^* - M_i^H pi || below the top degree of variable i.

    The identity transports the coefficient ladder one step; it is exact
    in every row whose index does not overflow the box, so the defect is
    pure roundoff regardless of the tail.
    """
    worst = 0.0
    for i in range(d.tuple.n):
        m = shift_matrix(d.space, i)
        resid = d.pi @ d.tuple[i].conj().T - m.conj().T @ d.pi
        resid = resid[_row_mask(d, i)]
        worst = max(worst, spec_norm(resid))
    return worst


def minimality_defect(d: DilationData) -> float:
    """Distance of window monomial vectors from span of shifted columns.

    The spanned set is { masked z^k (pi h) : k in box, h basis vector };
    the reported value is the worst distance of a windowed coordinate
    vector from that span.
    """
    space, p, dim = d.space, d.space.coeff_dim, d.tuple.dim
    ranks = {k: idx for idx, k in enumerate(space.exponents)}
    mono = space.mono_count
    blocks = d.pi.reshape(mono, p, dim)
    cols = np.zeros((space.dim, mono * dim), dtype=np.complex128)
    for b, k in enumerate(space.exponents):
        for a, e in enumerate(space.exponents):
            target = tuple(x + y for x, y in zip(e, k))
            r = ranks.get(target)
            if r is not None:
                cols[r * p : (r + 1) * p, b * dim : (b + 1) * dim] = blocks[a]
    window = _row_mask(d)
    cols[~window] = 0.0
    span = range_basis(cols, d.tuple.tol, floor=1.0)
    # distance of each windowed coordinate vector via the actual residual
    # vector; 1 - ||row||^2 would lose half the digits to cancellation
    targets = np.eye(space.dim, dtype=np.complex128)[:, window]
    resid = targets - span.basis @ span.basis.conj().T[:, window]
    distances = np.linalg.norm(resid, axis=0)
    return float(distances.max(initial=0.0))


def model_equivalence_defect(d: DilationData) -> float:
    """max_i || pi^H M_i pi - T_i ||: compressions of shifts recover T."""
    worst = 0.0
    for i in range(d.tuple.n):
        m = shift_matrix(d.space, i)
        worst = max(worst, spec_norm(d.pi.conj().T @ m @ d.pi - d.tuple[i]))
    return worst


def image_invariance_defect(d: DilationData) -> float:
    """How far M_i^H moves the image off itself, below the top degree.

    The image is a quotient module, so this should match the intertwining
    defect scale.
    """
    from .linalg import containment_residual

    worst = 0.0
    for i in range(d.tuple.n):
        m = shift_matrix(d.space, i)
        moved = (m.conj().T @ d.image_basis.basis)
        moved[~_row_mask(d, i)] = 0.0
        clipped = d.image_basis.basis.copy()
        clipped[~_row_mask(d, i)] = 0.0
        target = range_basis(clipped, d.tuple.tol, floor=1.0)
        worst = max(worst, containment_residual(moved, target))
    return worst
