"""Dense complex linear algebra with one shared tolerance policy.

Everything downstream (defect operators, model spaces, characteristic
functions) reduces to four primitives implemented here: Hermitian
eigendecomposition with a fixed ordering, positive-semidefinite square
roots with an explicit clamp window, deterministic range bases, and
Loewner-order comparisons.  All norms are spectral (operator 2-norm)
unless noted.  Matrices are dense complex128 ndarrays; operations are
pure functions and never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotPSD, NotSquare, ShapeMismatch


@dataclass(frozen=True)
class Tolerances:
    """Shared tolerance policy.

    tol_structural: identity / symmetry residual scale.
    tol_rank: relative singular-value cutoff for range bases.
    tol_psd_clamp: relative window in which small negative eigenvalues of a
        nominally PSD matrix are clamped to zero; anything lower is an error.
    tol_pure: margin for the spectral-radius purity test.
    """

    tol_structural: float = 1e-10
    tol_rank: float = 1e-9
    tol_psd_clamp: float = 1e-10
    tol_pure: float = 1e-8

    def __post_init__(self):
        for name in ("tol_structural", "tol_rank", "tol_psd_clamp", "tol_pure"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^ambient given by orthonormal basis columns."""

    ambient_dim: int
    basis: np.ndarray  # shape (ambient_dim, dim), orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


@dataclass(frozen=True)
class LoewnerVerdict:
    holds: bool
    witness_min_eig: float


def as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128)


def spec_norm(a) -> float:
    """Spectral norm (largest singular value); 0.0 for empty matrices."""
    a = np.atleast_2d(as_complex(a))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_part(a) -> tuple[np.ndarray, float]:
    """Split off the Hermitian part; return it with the anti-Hermitian norm."""
    a = as_complex(a)
    h = 0.5 * (a + a.conj().T)
    return h, spec_norm(a - h)


def _require_square(a: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")


def herm_eig(a, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with A = V diag(lam) V^H.  Raises
    NotSquare / NotHermitian if A fails the symmetry check at scale
    tol_structural * ||A||.
    """
    a = as_complex(a)
    _require_square(a)
    scale = max(spec_norm(a), 1.0)
    herm, anti = hermitian_part(a)
    if anti > tol.tol_structural * scale:
        raise NotHermitian(f"anti-Hermitian residual {anti:.3e} at scale {scale:.3e}")
    vals, vecs = np.linalg.eigh(herm)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def psd_sqrt(a, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root with eigenvalue clamping.

    Eigenvalues in [-tol_psd_clamp * ||A||, 0) are clamped to zero; anything
    below that window raises NotPSD with the offending eigenvalue.
    """
    vals, vecs = herm_eig(a, tol)
    if vals.size == 0:
        return np.zeros_like(as_complex(a))
    scale = max(float(vals[0]), -float(vals[-1]), 0.0)
    clamp = tol.tol_psd_clamp * max(scale, 1e-300)
    min_eig = float(vals[-1])
    if min_eig < -clamp:
        raise NotPSD(f"min eigenvalue {min_eig:.3e} below clamp {-clamp:.3e}", min_eig)
    root = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    return 0.5 * (root + root.conj().T)


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Make the first significant coordinate of each column real positive.

    The pivot is the first coordinate with modulus above 1e-10 times the
    column max, which keeps the choice stable under tiny perturbations.
    """
    v = as_complex(v).copy()
    for c in range(v.shape[1]):
        col = v[:, c]
        mags = np.abs(col)
        top = mags.max(initial=0.0)
        if top == 0.0:
            continue
        pivot = int(np.argmax(mags > 1e-10 * top))
        phase = col[pivot] / abs(col[pivot])
        v[:, c] = col * np.conj(phase)
    return v


def range_basis(a, tol: Tolerances = DEFAULT_TOL, floor: float = 0.0) -> Subspace:
    """Deterministic orthonormal basis of the numerical column space.

    Columns are left singular vectors ordered by descending singular value
    (for Hermitian PSD input this is descending eigenvalue order), keeping
    sigma > tol_rank * max(sigma_max, floor), with phases fixed by
    phase_fix.  The purely relative cut (floor 0) is scale free, but it
    promotes matrices that are numerically zero yet not bit zero to rank
    one or more; callers that know the natural scale of the input, such as
    defect operators of contractions, should pass floor=1.0.
    """
    a = np.atleast_2d(as_complex(a))
    m = a.shape[0]
    if a.size == 0 or not np.any(a):
        return Subspace(m, np.zeros((m, 0), dtype=np.complex128))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > tol.tol_rank * max(s[0], floor)))
    return Subspace(m, phase_fix(u[:, :rank]))


def null_space(a, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the numerical null space of A."""
    a = np.atleast_2d(as_complex(a))
    n = a.shape[1]
    if a.size == 0 or not np.any(a):
        return Subspace(n, np.eye(n, dtype=np.complex128))
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    cutoff = tol.tol_rank * s[0]
    rank = int(np.sum(s > cutoff))
    return Subspace(n, phase_fix(vh[rank:].conj().T))


def loewner_leq(a, b, tol: Tolerances = DEFAULT_TOL) -> LoewnerVerdict:
    """Test A <= B in the Loewner order.

    Holds iff the minimum eigenvalue of B - A is >= -tol_structural *
    max(||A||, ||B||, 1); the witness eigenvalue is returned either way.
    """
    a = as_complex(a)
    b = as_complex(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes {a.shape} and {b.shape} differ")
    vals, _ = herm_eig(b - a, tol)
    witness = float(vals[-1]) if vals.size else 0.0
    scale = max(spec_norm(a), spec_norm(b), 1.0)
    return LoewnerVerdict(witness >= -tol.tol_structural * scale, witness)


def projector_residual(u: Subspace, v: Subspace) -> float:
    """Distance ||P_U - P_V|| between two subspaces of the same ambient."""
    if u.ambient_dim != v.ambient_dim:
        raise ShapeMismatch("subspaces live in different ambient dimensions")
    return spec_norm(u.projector() - v.projector())


def containment_residual(vectors, space: Subspace) -> float:
    """Largest distance of the given (unit-scaled) columns from a subspace.

    Columns with norm below 1e-14 are skipped; remaining columns are
    normalized so the residual is an angle-like quantity in [0, 1].
    """
    vectors = np.atleast_2d(as_complex(vectors))
    if vectors.shape[1] == 0:
        return 0.0
    p = space.projector()
    worst = 0.0
    for c in range(vectors.shape[1]):
        col = vectors[:, c]
        norm = np.linalg.norm(col)
        if norm < 1e-14:
            continue
        worst = max(worst, float(np.linalg.norm(col - p @ col) / norm))
    return worst


def intersect_subspaces(spaces: list[Subspace], tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Intersection of subspaces via the zero eigenspace of sum of complements.

    A vector lies in every space iff it is annihilated by every (I - P_i);
    the intersection is the numerical null eigenspace of sum_i (I - P_i).
    """
    if not spaces:
        raise ValueError("need at least one subspace")
    ambient = spaces[0].ambient_dim
    acc = np.zeros((ambient, ambient), dtype=np.complex128)
    for s in spaces:
        if s.ambient_dim != ambient:
            raise ShapeMismatch("ambient dimensions differ")
        acc += np.eye(ambient) - s.projector()
    vals, vecs = herm_eig(acc, tol)
    keep = vals < tol.tol_rank * max(float(vals[0]) if vals.size else 0.0, 1.0)
    return Subspace(ambient, phase_fix(vecs[:, keep]))


def ortho_complement_within(space: Subspace, sub: Subspace, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement of ``sub`` inside ``space`` (both in the ambient)."""
    if space.ambient_dim != sub.ambient_dim:
        raise ShapeMismatch("ambient dimensions differ")
    diff = space.projector() - sub.projector()
    vals, vecs = herm_eig(diff, tol)
    keep = vals > 1.0 - 1e-8
    return Subspace(space.ambient_dim, phase_fix(vecs[:, keep]))
