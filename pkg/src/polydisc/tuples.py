"""Commuting tuples of contraction matrices and their classification.

A tuple T = (T_1, ..., T_n) of commuting d x d contractions is the basic
object of the toolkit.  This module validates tuples, sorts them into the
classes that drive everything downstream (pure, Szego, Beurling), computes
the first-kind defect operator, and generates test tuples by compressing
the coordinate multiplication operators to a span of kernel functions at
chosen polydisc nodes.

Index convention: operators are numbered 0..n-1 throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    NearSingularGram,
    NotCommuting,
    NotContraction,
    NotPSD,
    NotSzego,
    ParseError,
    ShapeMismatch,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    as_complex,
    herm_eig,
    hermitian_part,
    psd_sqrt,
    range_basis,
    spec_norm,
)


@dataclass(frozen=True)
class CTuple:
    """A validated tuple of n commuting contractions on C^dim."""

    n: int
    dim: int
    matrices: tuple[np.ndarray, ...]
    tol: Tolerances = DEFAULT_TOL

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]


@dataclass(frozen=True)
class BeurlingVerdict:
    holds: bool
    worst_pair: tuple[int, int] | None
    residual: float
    szego_ok: bool  # False downgrades the verdict to exploratory


@dataclass(frozen=True)
class Classification:
    is_commuting: bool
    commuting_residual: float
    is_contractive: bool
    norms: tuple[float, ...]
    is_pure: bool
    spectral_radii: tuple[float, ...]
    is_szego: bool
    szego_min_eig: float
    is_beurling: bool
    beurling_residual: float


def commutation_residual(matrices) -> tuple[float, tuple[int, int] | None]:
    """Worst pairwise commutator norm and the pair attaining it."""
    worst, pair = 0.0, None
    for i, j in itertools.combinations(range(len(matrices)), 2):
        res = spec_norm(matrices[i] @ matrices[j] - matrices[j] @ matrices[i])
        if res > worst:
            worst, pair = res, (i, j)
    return worst, pair


def validate(matrices, tol: Tolerances = DEFAULT_TOL) -> CTuple:
    """Check shapes, commutativity, and contractivity; freeze the tuple.

    Raises ShapeMismatch for ragged input, NotCommuting with the worst
    pair, or NotContraction with the first offending index.
    """
    mats = [np.atleast_2d(as_complex(m)) for m in matrices]
    if not mats:
        raise ShapeMismatch("a tuple needs at least one matrix")
    dim = mats[0].shape[0]
    for m in mats:
        if m.ndim != 2 or m.shape != (dim, dim):
            raise ShapeMismatch(f"expected all matrices {dim}x{dim}, got {m.shape}")
    worst, pair = commutation_residual(mats)
    scale = max(max(spec_norm(m) for m in mats), 1.0)
    if pair is not None and worst > tol.tol_structural * scale:
        raise NotCommuting(pair[0], pair[1], worst)
    for i, m in enumerate(mats):
        norm = spec_norm(m)
        if norm > 1.0 + tol.tol_structural:
            raise NotContraction(i, norm)
    frozen = []
    for m in mats:
        c = m.copy()
        c.flags.writeable = False
        frozen.append(c)
    return CTuple(len(frozen), dim, tuple(frozen), tol)


def spectral_radii(t: CTuple) -> tuple[float, ...]:
    return tuple(float(np.max(np.abs(np.linalg.eigvals(m)))) for m in t.matrices)


def is_pure(t: CTuple) -> tuple[bool, tuple[float, ...]]:
    """Pure (class C_{.0}) iff every spectral radius is <= 1 - tol_pure."""
    radii = spectral_radii(t)
    return all(r <= 1.0 - t.tol.tol_pure for r in radii), radii


def _power(mats, k):
    """T^k = T_1^{k_1} ... T_n^{k_n} for a 0/1 multi-index k."""
    dim = mats[0].shape[0]
    out = np.eye(dim, dtype=np.complex128)
    for m, ki in zip(mats, k):
        if ki:
            out = out @ m
    return out


def szego_inverse(t: CTuple) -> np.ndarray:
    """Signed sum over k in {0,1}^n of (-1)^|k| T^k T^{*k}, hermitized."""
    acc = np.zeros((t.dim, t.dim), dtype=np.complex128)
    for k in itertools.product((0, 1), repeat=t.n):
        p = _power(t.matrices, k)
        acc += (-1) ** sum(k) * p @ p.conj().T
    return hermitian_part(acc)[0]


def szego_inverse_iterated(t: CTuple) -> np.ndarray:
    """Same operator as the one-step composition of maps A -> A - T_i A T_i^*."""
    acc = np.eye(t.dim, dtype=np.complex128)
    for m in t.matrices:
        acc = acc - m @ acc @ m.conj().T
    return hermitian_part(acc)[0]


def szego_min_eig(t: CTuple) -> float:
    vals, _ = herm_eig(szego_inverse(t), t.tol)
    return float(vals[-1])


def is_szego(t: CTuple) -> tuple[bool, float]:
    """Szego iff pure and the Szego inverse is PSD within tolerance."""
    pure, _ = is_pure(t)
    min_eig = szego_min_eig(t)
    scale = max(spec_norm(szego_inverse(t)), 1.0)
    return pure and min_eig >= -t.tol.tol_structural * scale, min_eig


def defect_first_kind(t: CTuple) -> tuple[np.ndarray, Subspace]:
    """First-kind defect: PSD root of the Szego inverse, with its range.

    The range basis is read off the Szego inverse itself, not the root:
    taking square roots lifts eigenvalue noise from machine scale to its
    square root, which would inflate the numerical rank.
    """
    s = szego_inverse(t)
    try:
        root = psd_sqrt(s, t.tol)
    except NotPSD as exc:
        raise NotSzego(str(exc), exc.min_eig) from exc
    return root, range_basis(s, t.tol, floor=1.0)


def classical_defect_sq(x) -> np.ndarray:
    """I - X^H X (pass X^H to get the adjoint version I - X X^H)."""
    x = np.atleast_2d(as_complex(x))
    return hermitian_part(np.eye(x.shape[0]) - x.conj().T @ x)[0]


def classical_defect(x, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, Subspace]:
    """Classical defect root (I - X^H X)^{1/2} and its range."""
    x = np.atleast_2d(as_complex(x))
    norm = spec_norm(x)
    if norm > 1.0 + tol.tol_structural:
        raise NotContraction(0, norm)
    sq = classical_defect_sq(x)
    root = psd_sqrt(sq, tol)
    return root, range_basis(sq, tol, floor=1.0)


def is_beurling(t: CTuple, mask=None) -> BeurlingVerdict:
    """Do the defect roots of distinct operators annihilate each other?

    The residual is max over i != j of the norm of P D_{T_i} D_{T_j} P,
    where P is the optional mask projector (identity when absent).  A
    non-Szego tuple still gets a residual but the verdict is downgraded
    via szego_ok=False.
    """
    szego_ok, _ = is_szego(t)
    roots = [classical_defect(m, t.tol)[0] for m in t.matrices]
    p = None if mask is None else np.atleast_2d(as_complex(mask))
    worst, pair = 0.0, None
    for i, j in itertools.permutations(range(t.n), 2):
        prod = roots[i] @ roots[j]
        if p is not None:
            prod = p @ prod @ p
        res = spec_norm(prod)
        if res > worst:
            worst, pair = res, (i, j)
    holds = worst <= t.tol.tol_structural
    return BeurlingVerdict(holds and szego_ok, pair, worst, szego_ok)


def classify(t: CTuple, mask=None) -> Classification:
    """Full classification report for one tuple."""
    res, _ = commutation_residual(t.matrices)
    norms = tuple(float(spec_norm(m)) for m in t.matrices)
    pure, radii = is_pure(t)
    szego, min_eig = is_szego(t)
    verdict = is_beurling(t, mask)
    return Classification(
        is_commuting=res <= t.tol.tol_structural * max(max(norms), 1.0),
        commuting_residual=float(res),
        is_contractive=all(nm <= 1.0 + t.tol.tol_structural for nm in norms),
        norms=norms,
        is_pure=pure,
        spectral_radii=radii,
        is_szego=szego,
        szego_min_eig=float(min_eig),
        is_beurling=verdict.holds,
        beurling_residual=float(verdict.residual),
    )


def szego_kernel_gram(points: np.ndarray) -> np.ndarray:
    """Gram matrix G[k,l] = prod_i 1 / (1 - w_{k,i} conj(w_{l,i}))."""
    points = np.atleast_2d(as_complex(points))
    m = points.shape[0]
    g = np.ones((m, m), dtype=np.complex128)
    for i in range(points.shape[1]):
        col = points[:, i]
        g *= 1.0 / (1.0 - np.outer(col, col.conj()))
    return g


def szego_tuple_from_nodes(points, tol: Tolerances = DEFAULT_TOL) -> CTuple:
    """Compression tuple on the span of Szego kernel functions at nodes.

    ``points`` is an (m, n) array of polydisc nodes.  The adjoint of the
    i-th operator acts diagonally by conjugate node coordinates in the
    kernel basis; a Cholesky factor of the Gram matrix transports this to
    an orthonormal basis.  The result is always a pure Szego tuple with
    spectral radii max_l |w_{l,i}|.
    """
    points = np.atleast_2d(as_complex(points))
    m, n = points.shape
    if np.max(np.abs(points)) >= 1.0:
        raise NearSingularGram("node coordinates must have modulus < 1")
    g = szego_kernel_gram(points)
    cond = float(np.linalg.cond(g))
    if not np.isfinite(cond) or cond > 1e12:
        raise NearSingularGram(f"Gram matrix condition number {cond:.3e} exceeds 1e12")
    chol = np.linalg.cholesky(g)  # g = chol @ chol^H
    chol_h = chol.conj().T
    mats = []
    for i in range(n):
        adjoint = chol_h @ np.diag(points[:, i].conj()) @ np.linalg.inv(chol_h)
        mats.append(adjoint.conj().T)
    return validate(mats, tol)


def tuple_to_json(t: CTuple) -> dict:
    """Serializable form: matrices as nested lists of [re, im] entries."""
    return {
        "n": t.n,
        "dim": t.dim,
        "matrices": [
            [[[float(v.real), float(v.imag)] for v in row] for row in m]
            for m in t.matrices
        ],
    }


def _matrix_from_json(entries, dim, what) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (dim, dim, 2):
        raise ParseError(f"{what}: expected {dim}x{dim} entries of [re, im], got shape {arr.shape}")
    return (arr[..., 0] + 1j * arr[..., 1]).astype(np.complex128)


def tuple_from_json(obj, tol: Tolerances = DEFAULT_TOL) -> tuple[CTuple, np.ndarray | None]:
    """Parse the tuple file format; returns (tuple, optional window projector).

    Schema: {"n": int, "dim": int, "matrices": [...]} with each matrix a
    dim x dim array of [re, im] pairs.  An optional "window" field holds a
    projector in the same entry format, used by masked CLI checks.
    """
    if not isinstance(obj, dict):
        raise ParseError("tuple file must be a JSON object")
    for key in ("n", "dim", "matrices"):
        if key not in obj:
            raise ParseError(f"tuple file missing field {key!r}")
    n, dim = obj["n"], obj["dim"]
    if not (isinstance(n, int) and isinstance(dim, int) and n >= 1 and dim >= 1):
        raise ParseError("fields 'n' and 'dim' must be positive integers")
    if len(obj["matrices"]) != n:
        raise ParseError(f"expected {n} matrices, got {len(obj['matrices'])}")
    mats = [_matrix_from_json(m, dim, f"matrix {i}") for i, m in enumerate(obj["matrices"])]
    window = None
    if "window" in obj:
        window = _matrix_from_json(obj["window"], dim, "window")
    return validate(mats, tol), window
