"""Higher defect operators for commuting contraction tuples.

Beyond the classical defect I - T^*T, a tuple carries truncated defects
(the classical defect pushed through products of the maps A -> A - T_k A
T_k^*), joint commutators, and two block operators on C^{nd}: the joint
defect and the commutator defect.  These are the objects whose positivity
and ordering separate Beurling tuples from merely Szego ones, and whose
series expansions encode purity.

Masking: truncated and block defect objects built from I - T^*T pick up
boundary artifacts on truncated model spaces.  Functions here compute raw
operators; ``build_defects`` (and the ``mask`` arguments on the block
assemblies) compress them with a window projector so the artifact rows
and columns drop out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import ceil, log

import numpy as np

from .errors import BadIndex, NotAvailable, NotPSD, NotSzego, ShapeMismatch
from .linalg import (
    Subspace,
    as_complex,
    hermitian_part,
    herm_eig,
    psd_sqrt,
    range_basis,
    spec_norm,
)
from .tuples import CTuple, classical_defect, classical_defect_sq, defect_first_kind, is_pure


def delta_map(x, a) -> np.ndarray:
    """The completely positive map A -> X A X^H."""
    x = np.atleast_2d(as_complex(x))
    a = np.atleast_2d(as_complex(a))
    if x.shape[1] != a.shape[0] or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"cannot form X A X^H with shapes {x.shape}, {a.shape}")
    return x @ a @ x.conj().T


def _check_indices(t: CTuple, j: int, p) -> frozenset[int]:
    if not 0 <= j < t.n:
        raise BadIndex(f"operator index {j} out of range for n={t.n}")
    pset = frozenset(p)
    for k in pset:
        if not 0 <= k < t.n:
            raise BadIndex(f"subset index {k} out of range for n={t.n}")
    if j in pset:
        raise BadIndex(f"index {j} cannot appear in its own truncation set")
    return pset


def truncated_defect(t: CTuple, j: int, p) -> np.ndarray:
    """D^2_{j,T,P}: the classical defect of T_j pushed through P.

    Applies A -> A - T_k A T_k^* for k in P in ascending order (the maps
    commute for commuting tuples, so the order is a convention).  P empty
    gives back I - T_j^* T_j.
    """
    pset = _check_indices(t, j, p)
    acc = classical_defect_sq(t[j])
    for k in sorted(pset):
        acc = acc - delta_map(t[k], acc)
    return hermitian_part(acc)[0]


def full_truncated_defect(t: CTuple, j: int) -> np.ndarray:
    """D^2_{j,T}: the truncated defect with P = everything except j."""
    return truncated_defect(t, j, set(range(t.n)) - {j})


def joint_commutator(t: CTuple, i: int, j: int) -> np.ndarray:
    """delta_ij(T): [T_j, T_i^*] pushed through all k outside {i, j}.

    For n = 2 this is exactly the commutator T_2 T_1^* - T_1^* T_2 (up to
    index order); delta_ji is exactly the adjoint of delta_ij.
    """
    if i == j:
        raise BadIndex("joint commutator needs two distinct indices")
    _check_indices(t, i, set())
    _check_indices(t, j, set())
    acc = t[j] @ t[i].conj().T - t[i].conj().T @ t[j]
    for k in range(t.n):
        if k not in (i, j):
            acc = acc - delta_map(t[k], acc)
    return acc


def _apply_mask(mask, a: np.ndarray) -> np.ndarray:
    if mask is None:
        return a
    p = np.atleast_2d(as_complex(mask))
    return p @ a @ p


@dataclass(frozen=True)
class JointDefect:
    """The nd x nd joint defect, with root and range when it is PSD."""

    matrix: np.ndarray
    root: np.ndarray | None
    space: Subspace | None
    min_eig: float
    herm_residual: float


def _assemble_blocks(diag_blocks, off_block) -> tuple[np.ndarray, float]:
    n = len(diag_blocks)
    d = diag_blocks[0].shape[0]
    big = np.zeros((n * d, n * d), dtype=np.complex128)
    for i in range(n):
        big[i * d : (i + 1) * d, i * d : (i + 1) * d] = diag_blocks[i]
        for j in range(n):
            if i != j:
                big[i * d : (i + 1) * d, j * d : (j + 1) * d] = off_block(i, j)
    herm, resid = hermitian_part(big)
    return herm, resid


def joint_defect(t: CTuple, mask=None) -> JointDefect:
    """Assemble the joint defect: D^2_{i,T} on the diagonal, delta_ij off it.

    Always assembled; the PSD root and range basis are attached only when
    the minimum eigenvalue clears the clamp (expected to fail for
    non-Beurling tuples).  A mask projector compresses every block first.
    """
    diag = [_apply_mask(mask, full_truncated_defect(t, i)) for i in range(t.n)]
    deltas = {
        (i, j): _apply_mask(mask, joint_commutator(t, i, j))
        for i, j in itertools.permutations(range(t.n), 2)
    }
    herm, resid = _assemble_blocks(diag, lambda i, j: deltas[(i, j)])
    vals, _ = herm_eig(herm, t.tol)
    min_eig = float(vals[-1])
    try:
        root = psd_sqrt(herm, t.tol)
        space = range_basis(herm, t.tol, floor=1.0)
    except NotPSD:
        root, space = None, None
    return JointDefect(herm, root, space, min_eig, resid)


def commutator_defect(t: CTuple, mask=None) -> tuple[np.ndarray, float]:
    """The commutator defect: classical defects on the diagonal, plain
    commutators [T_j, T_i^*] off it.  Returns (matrix, min eigenvalue)."""
    diag = [_apply_mask(mask, classical_defect_sq(t[i])) for i in range(t.n)]

    def off(i, j):
        return _apply_mask(mask, t[j] @ t[i].conj().T - t[i].conj().T @ t[j])

    herm, _ = _assemble_blocks(diag, off)
    vals, _ = herm_eig(herm, t.tol)
    return herm, float(vals[-1])


def series_cutoff(t: CTuple, tol: float | None = None, cap: int = 200) -> int:
    """Series length making the geometric tail fall below tol.

    Uses ceil(log tol / (2 log rho_max)); nilpotent-ish tuples (rho below
    1e-6) terminate exactly once the cutoff reaches the dimension.
    """
    tol = t.tol.tol_structural if tol is None else tol
    _, radii = is_pure(t)
    rho = max(radii)
    if rho < 1e-6:
        return min(cap, t.dim)
    if rho >= 1.0:
        return cap
    return max(1, min(cap, ceil(log(tol) / (2.0 * log(rho)))))


def _geometric_sum(x: np.ndarray, a: np.ndarray, k: int) -> np.ndarray:
    """sum_{m=0}^{k} X^m A X^{*m} by the backward recursion B -> A + X B X^H."""
    acc = a
    for _ in range(k):
        acc = a + x @ acc @ x.conj().T
    return acc


def defect_series_residual(t: CTuple, j: int, p, k: int | None = None) -> float:
    """Residual of both series expansions of the truncated defects.

    Part one reconstructs I - T_j^* T_j by summing powers over P applied
    to D^2_{j,T,P}; part two reconstructs D^2_{j,T,P} by summing powers
    over the complementary set applied to D^2_{j,T}.  Returns the larger
    of the two spectral-norm residuals at cutoff k (auto when omitted).
    """
    pset = _check_indices(t, j, p)
    k = series_cutoff(t) if k is None else k
    if k < 1:
        raise ValueError("series cutoff must be at least 1")

    part1 = truncated_defect(t, j, pset)
    for idx in sorted(pset):
        part1 = _geometric_sum(t[idx], part1, k)
    res1 = spec_norm(classical_defect_sq(t[j]) - part1)

    comp = frozenset(range(t.n)) - pset - {j}
    part2 = full_truncated_defect(t, j)
    for idx in sorted(comp):
        part2 = _geometric_sum(t[idx], part2, k)
    res2 = spec_norm(truncated_defect(t, j, pset) - part2)
    return max(res1, res2)


@dataclass(frozen=True)
class DefectPackage:
    """Every defect object of one tuple, with one shared window mask."""

    tuple: CTuple
    mask: np.ndarray | None
    classical: tuple[tuple[np.ndarray, Subspace], ...]
    first_kind: tuple[np.ndarray, Subspace] | None  # None when not Szego
    truncated: dict[tuple[int, frozenset[int]], np.ndarray]
    joint_commutators: dict[tuple[int, int], np.ndarray]
    joint: JointDefect
    commutator_defect_sq: np.ndarray
    commutator_min_eig: float


def build_defects(t: CTuple, mask=None) -> DefectPackage:
    """Compute the full defect package.

    Classical and first-kind defects are stored raw (adjoint-side objects
    are artifact-free on truncated models); truncated defects, joint
    commutators, and both block operators are masked when a window
    projector is supplied.  A non-Szego tuple gets first_kind=None rather
    than an error, so the rest of the package stays explorable.
    """
    classical = tuple(classical_defect(m, t.tol) for m in t.matrices)
    try:
        first = defect_first_kind(t)
    except NotSzego:
        first = None
    truncated = {}
    for j in range(t.n):
        others = [k for k in range(t.n) if k != j]
        for r in range(len(others) + 1):
            for combo in itertools.combinations(others, r):
                pset = frozenset(combo)
                truncated[(j, pset)] = _apply_mask(mask, truncated_defect(t, j, pset))
    deltas = {
        (i, j): _apply_mask(mask, joint_commutator(t, i, j))
        for i, j in itertools.permutations(range(t.n), 2)
    }
    joint = joint_defect(t, mask)
    comm_sq, comm_min = commutator_defect(t, mask)
    return DefectPackage(
        tuple=t,
        mask=None if mask is None else np.atleast_2d(as_complex(mask)),
        classical=classical,
        first_kind=first,
        truncated=truncated,
        joint_commutators=deltas,
        joint=joint,
        commutator_defect_sq=comm_sq,
        commutator_min_eig=comm_min,
    )


def embed_joint_defect(pkg: DefectPackage) -> tuple[Subspace, float]:
    """Flatten the joint defect space into C^d by summing block components.

    Valid as an isometry exactly when the truncated defect spaces are
    pairwise orthogonal; the reported residual is the worst product norm
    ||D_{i,T} D_{j,T}|| (mask applied upstream), so callers can judge.
    """
    if pkg.joint.space is None:
        raise NotAvailable("joint defect is not PSD; no defect space to embed")
    t = pkg.tuple
    d = t.dim
    basis = pkg.joint.space.basis
    flattened = np.zeros((d, basis.shape[1]), dtype=np.complex128)
    for j in range(t.n):
        flattened += basis[j * d : (j + 1) * d, :]
    roots = []
    for i in range(t.n):
        block = pkg.truncated[(i, frozenset(range(t.n)) - {i})]
        try:
            roots.append(psd_sqrt(block, t.tol))
        except NotPSD as exc:
            raise NotAvailable(f"truncated defect {i} is not PSD: {exc}") from exc
    worst = 0.0
    for i, j in itertools.combinations(range(t.n), 2):
        worst = max(worst, spec_norm(roots[i] @ roots[j]))
    return range_basis(flattened, t.tol, floor=1.0), worst
