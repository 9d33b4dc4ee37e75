"""Characteristic functions of Beurling tuples.

Evaluation of the defining formula by linear solves, the one-variable and
pair closed forms, inner-ness residuals on torus grids, the dilation-form
coefficient identity, and coincidence testing under unitary conjugation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .defects import DefectPackage, build_defects
from .errors import (
    BadIndex,
    IncompatibleDims,
    NotBeurling,
    NotPure,
    NotUnitary,
    ShapeMismatch,
    SingularResolvent,
)
from .dilation import DilationData, coefficient_tail_sum
from .hardy import blockdiag_symbol, charfn_symbol, shift_matrix, unitary_symbol
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    as_complex,
    psd_sqrt,
    range_basis,
    spec_norm,
)
from .tuples import CTuple, defect_first_kind, is_pure, validate

RESOLVENT_COND_LIMIT = 1e12


def _resolvent_lhs(t: CTuple, w: np.ndarray) -> list[np.ndarray]:
    """The factors I - w_k T_k^*, gated on conditioning."""
    eye = np.eye(t.dim, dtype=np.complex128)
    out = []
    for k in range(t.n):
        f = eye - w[k] * t[k].conj().T
        cond = float(np.linalg.cond(f))
        if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
            raise SingularResolvent(k, cond)
        out.append(f)
    return out


def _point(t: CTuple, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.complex128).ravel()
    if w.size != t.n:
        raise ShapeMismatch(f"point has {w.size} coordinates, tuple has n={t.n}")
    return w


def _eval_core(t: CTuple, root: np.ndarray, w: np.ndarray, h_cols: np.ndarray) -> np.ndarray:
    """D_{T*} prod_k (I-w_k T_k^*)^{-1} sum_j (w_j - T_j) prod_{i!=j} (I-w_i T_i^*)
    applied to each column of h_cols (shape nd x m)."""
    d = t.dim
    factors = _resolvent_lhs(t, w)
    total = np.zeros((d, h_cols.shape[1]), dtype=np.complex128)
    for j in range(t.n):
        u = h_cols[j * d : (j + 1) * d]
        for i in range(t.n):
            if i != j:
                u = factors[i] @ u
        total += w[j] * u - t[j] @ u
    for k in range(t.n):
        total = np.linalg.solve(factors[k], total)
    return root @ total


def eval_raw(t: CTuple, w, h_tilde) -> np.ndarray:
    """The characteristic-function formula applied to one h in C^{nd}.

    Returns Theta_T(w) D_T h as a vector in C^d, computed by linear solves
    (one per variable).  Needs the tuple to be Szego so that the first-kind
    defect root exists; Beurling is not required.
    """
    w = _point(t, w)
    h = as_complex(h_tilde).reshape(-1, 1)
    if h.shape[0] != t.n * t.dim:
        raise ShapeMismatch(f"h~ has length {h.shape[0]}, expected {t.n * t.dim}")
    root, _ = defect_first_kind(t)
    return _eval_core(t, root, w, h)[:, 0]


def eval_onevar(t: CTuple, w) -> np.ndarray:
    """One-variable closed form [-T + w D_{T*}(I-wT*)^{-1} D_T] on the defect
    spaces, as a matrix from the D_T basis to the D_{T*} basis."""
    if t.n != 1:
        raise BadIndex(f"one-variable form needs n=1, got n={t.n}")
    pure, radii = is_pure(t)
    if not pure:
        raise NotPure(f"spectral radius {max(radii)} too close to 1")
    w = _point(t, w)[0]
    mat = t[0]
    eye = np.eye(t.dim, dtype=np.complex128)
    sq = eye - mat.conj().T @ mat
    sq_star = eye - mat @ mat.conj().T
    root = psd_sqrt(sq, t.tol)
    root_star = psd_sqrt(sq_star, t.tol)
    basis = range_basis(sq, t.tol, floor=1.0)
    basis_star = range_basis(sq_star, t.tol, floor=1.0)
    f = eye - w * mat.conj().T
    cond = float(np.linalg.cond(f))
    if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
        raise SingularResolvent(0, cond)
    core = -mat + w * root_star @ np.linalg.solve(f, root)
    return basis_star.basis.conj().T @ core @ basis.basis


def _blaschke_apply(t: CTuple, outer: int, inner: int, z_outer, z_inner, h: np.ndarray) -> np.ndarray:
    """(I - z_outer T_outer^*)^{-1} b_{T_inner}(z_inner) (I - z_outer T_outer^*) h."""
    eye = np.eye(t.dim, dtype=np.complex128)
    f_out = eye - z_outer * t[outer].conj().T
    cond = float(np.linalg.cond(f_out))
    if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
        raise SingularResolvent(outer, cond)
    f_in = eye - z_inner * t[inner].conj().T
    cond = float(np.linalg.cond(f_in))
    if not np.isfinite(cond) or cond > RESOLVENT_COND_LIMIT:
        raise SingularResolvent(inner, cond)
    v = f_out @ h
    v = z_inner * v - t[inner] @ v
    v = np.linalg.solve(f_in, v)
    return np.linalg.solve(f_out, v)


def eval_pair_blaschke(t: CTuple, z, h_tilde) -> np.ndarray:
    """Pair form: D_{T*}( b_{(T1,T2)}(z1,z2) h2 + b_{(T2,T1)}(z2,z1) h1 ).

    Agrees with eval_raw identically (the resolvent factors commute); the
    closed form makes the operator Blaschke structure explicit.
    """
    if t.n != 2:
        raise BadIndex(f"pair form needs n=2, got n={t.n}")
    z = _point(t, z)
    h = as_complex(h_tilde).ravel()
    if h.size != 2 * t.dim:
        raise ShapeMismatch(f"h~ has length {h.size}, expected {2 * t.dim}")
    h1, h2 = h[: t.dim], h[t.dim :]
    root, _ = defect_first_kind(t)
    part2 = _blaschke_apply(t, 0, 1, z[0], z[1], h2)
    part1 = _blaschke_apply(t, 1, 0, z[1], z[0], h1)
    return root @ (part2 + part1)


@dataclass(frozen=True)
class CharFn:
    """Matrix-valued characteristic function in fixed defect-space bases.

    input_basis spans the joint defect space inside C^{nd}; output_basis
    spans the first-kind defect space inside C^d.  preimages holds h~
    columns with D_T h~ = input basis vector, fixed by the eigensystem of
    the joint defect.  mask is carried over from the defect package
    (windowed models) and is informational here.
    """

    tuple: CTuple
    defects: DefectPackage
    input_basis: Subspace
    output_basis: Subspace
    preimages: np.ndarray
    mask: np.ndarray | None

    @property
    def n(self) -> int:
        return self.tuple.n

    @property
    def input_dim(self) -> int:
        return self.input_basis.dim

    @property
    def output_dim(self) -> int:
        return self.output_basis.dim

    def eval(self, w) -> np.ndarray:
        w = _point(self.tuple, w)
        root = self.defects.first_kind[0]
        out = _eval_core(self.tuple, root, w, self.preimages)
        return self.output_basis.basis.conj().T @ out

    def taylor_coeffs(self, n_deg: int) -> tuple[dict, float, float]:
        """Matrix Taylor coefficients up to per-variable degree n_deg.

        Exact polynomial algebra: per-variable adjoint-power series of the
        resolvents convolved with the finite polynomial part.  Returns
        (coefficients, l1_bound, tail_bound) in the hardy symbol-table
        convention; the tail bound is certified from power norms.
        """
        t = self.tuple
        root = self.defects.first_kind[0]
        blocks = _formula_coefficient_blocks(t, root, n_deg)
        out = self.output_basis.basis.conj().T
        coeffs = {}
        l1 = 0.0
        for beta, big in blocks.items():
            mat = out @ big @ self.preimages
            if spec_norm(mat) > 0:
                coeffs[beta] = mat
                l1 += spec_norm(mat)
        poly_l1 = 2.0 ** t.n  # sum of norms of the finite polynomial part
        tail = (
            spec_norm(root)
            * spec_norm(self.preimages)
            * t.n
            * poly_l1
            * coefficient_tail_sum(t, n_deg)
        )
        return coeffs, l1, tail


def _formula_coefficient_blocks(t: CTuple, root: np.ndarray, n_deg: int) -> dict:
    """Taylor blocks of w -> Theta_T(w) D_T as maps C^{nd} -> C^d.

    The formula is a product of the full resolvent series and the finite
    polynomial sum_j (w_j - T_j) prod_{i != j} (I - w_i T_i^*) acting on
    slot j; coefficients come from truncated convolution, exact for every
    multi-index inside the box.
    """
    d, n = t.dim, t.n
    adjoints = [m.conj().T for m in t]
    box = list(itertools.product(range(n_deg + 1), repeat=n))
    powers: dict[tuple, np.ndarray] = {}
    for k in box:
        if not any(k):
            powers[k] = np.eye(d, dtype=np.complex128)
            continue
        i = next(j for j, kj in enumerate(k) if kj)
        prev = tuple(kj - (1 if j == i else 0) for j, kj in enumerate(k))
        powers[k] = adjoints[i] @ powers[prev]

    # finite part E_j: coefficient at delta (0/1 exponents) and delta + e_j
    finite: list[dict[tuple, np.ndarray]] = []
    for j in range(n):
        entry: dict[tuple, np.ndarray] = {}
        others = [i for i in range(n) if i != j]
        for bits in itertools.product((0, 1), repeat=len(others)):
            delta = [0] * n
            mat = np.eye(d, dtype=np.complex128)
            for i, b in zip(others, bits):
                if b:
                    delta[i] = 1
                    mat = mat @ adjoints[i]
            sign = (-1.0) ** sum(bits)
            base = tuple(delta)
            entry[base] = entry.get(base, 0) + sign * (-t[j] @ mat)
            up = tuple(x + (1 if i == j else 0) for i, x in enumerate(delta))
            if max(up) <= n_deg:
                entry[up] = entry.get(up, 0) + sign * mat
        finite.append(entry)

    blocks: dict[tuple, np.ndarray] = {}
    for beta in box:
        big = np.zeros((d, n * d), dtype=np.complex128)
        for j, entry in enumerate(finite):
            acc = np.zeros((d, d), dtype=np.complex128)
            for alpha, mat in entry.items():
                gamma = tuple(b - a for b, a in zip(beta, alpha))
                if min(gamma) >= 0:
                    acc += powers[gamma] @ mat
            big[:, j * d : (j + 1) * d] = root @ acc
        blocks[beta] = big
    return blocks


def build_charfn(t: CTuple, defects: DefectPackage | None = None) -> CharFn:
    """Fix defect bases and preimages so that Theta_T evaluates as a matrix.

    Refuses tuples whose joint defect has no PSD root (NotBeurling): the
    characteristic function is reserved for (windowed) Beurling tuples,
    while eval_raw stays available for any Szego tuple.
    """
    if defects is None:
        defects = build_defects(t)
    jd = defects.joint
    if jd.root is None or jd.space is None:
        raise NotBeurling(
            f"joint defect is not PSD (min eigenvalue {jd.min_eig:.3e})",
            min_eig=jd.min_eig,
        )
    if defects.first_kind is None:
        raise NotBeurling("first-kind defect unavailable (tuple is not Szego)")
    basis = jd.space
    lam = np.real(np.sum(basis.basis.conj() * (jd.matrix @ basis.basis), axis=0))
    preimages = basis.basis / np.sqrt(lam)
    return CharFn(t, defects, basis, defects.first_kind[1], preimages, defects.mask)


def torus_grid(n: int, per_axis: int) -> list[np.ndarray]:
    """Deterministic product grid on the unit torus."""
    if per_axis < 1:
        raise BadIndex(f"per_axis must be >= 1, got {per_axis}")
    angles = np.exp(2j * np.pi * np.arange(per_axis) / per_axis)
    return [np.array(p) for p in itertools.product(angles, repeat=n)]


def inner_residual(f: CharFn, grid) -> float:
    """max over the grid of || eval(z)^H eval(z) - I ||."""
    pts = list(grid)
    if not pts:
        raise BadIndex("inner residual needs a nonempty grid")
    eye = np.eye(f.input_dim)
    worst = 0.0
    for z in pts:
        m = f.eval(z)
        worst = max(worst, spec_norm(m.conj().T @ m - eye))
    return worst


def dilation_form_residual(t: CTuple, d: DilationData, f: CharFn) -> float:
    """Coefficient mismatch between the closed form and the dilation side.

    Left side: Taylor blocks of w -> Theta_T(w) D_T from the resolvent
    series.  Right side: sum_i prod_{j != i} Delta_{M_j, T_j} applied to
    M_i Pi - Pi T_i, read off the dilation, where Delta(X) = X - M_j X T_j^*.
    Both act on h~ in C^{nd}; the max absolute entry mismatch over window
    rows (every variable below top degree) is reported.
    """
    if d.tuple is not t and any(
        not np.array_equal(a, b) for a, b in zip(d.tuple.matrices, t.matrices)
    ):
        raise IncompatibleDims("dilation was built for a different tuple")
    if (
        f.output_basis.dim != d.coeff_basis.dim
        or spec_norm(f.output_basis.basis - d.coeff_basis.basis) > 1e-10
    ):
        raise IncompatibleDims("charfn output basis differs from dilation coefficients")
    space = d.space
    n, dim, p = t.n, t.dim, space.coeff_dim
    root = f.defects.first_kind[0]
    reduce = d.coeff_basis.basis.conj().T

    blocks = _formula_coefficient_blocks(t, root, d.degree)
    lhs = np.zeros((space.dim, n * dim), dtype=np.complex128)
    for beta, big in blocks.items():
        r = space.position(beta, 0)
        lhs[r : r + p] = reduce @ big

    shifts = [shift_matrix(space, i) for i in range(n)]
    rhs = np.zeros_like(lhs)
    for i in range(n):
        x = shifts[i] @ d.pi - d.pi @ t[i]
        for j in range(n):
            if j != i:
                x = x - shifts[j] @ x @ t[j].conj().T
        rhs[:, i * dim : (i + 1) * dim] = x

    keep = np.zeros(space.dim, dtype=bool)
    for k in space.exponents:
        if all(kj <= d.degree - 1 for kj in k):
            r = space.position(k, 0)
            keep[r : r + p] = True
    diff = lhs[keep] - rhs[keep]
    return float(np.max(np.abs(diff), initial=0.0))


@dataclass(frozen=True)
class Coincidence:
    """Unitaries witnessing Theta_T = tau_star Theta_S tau^* and the residual.

    tau maps the joint defect space of S to that of T; tau_star maps the
    first-kind defect space of S to that of T (matrices in the fixed bases).
    """

    tau: np.ndarray
    tau_star: np.ndarray
    residual: float


def default_points(n: int, count: int = 20, seed: int = 97) -> list[np.ndarray]:
    """Deterministic interior sample points for coincidence residuals."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        r = 0.2 + 0.65 * rng.random(n)
        ang = np.exp(2j * np.pi * rng.random(n))
        pts.append(r * ang)
    return pts


def coincidence_from_unitary(
    t: CTuple,
    sigma,
    mask=None,
    points=None,
) -> tuple[CTuple, Coincidence]:
    """Conjugate the tuple by a unitary and certify the coincidence.

    S = sigma T sigma^*; tau_star(D_{T*} h) = D_{S*} sigma h and
    tau(D_T h~) = D_S Sigma h~ with Sigma = sigma on every slot.  The
    residual is the max over sample points of the coincidence identity in
    the stored orientation.  A window mask transports by conjugation.
    """
    sigma = as_complex(sigma)
    if sigma.shape != (t.dim, t.dim):
        raise ShapeMismatch(f"unitary shape {sigma.shape} vs dim {t.dim}")
    if spec_norm(sigma @ sigma.conj().T - np.eye(t.dim)) > 1e-10:
        raise NotUnitary("conjugating matrix is not unitary within 1e-10")
    s = validate([sigma @ m @ sigma.conj().T for m in t], t.tol)
    mask_s = None if mask is None else sigma @ mask @ sigma.conj().T
    f_t = build_charfn(t, build_defects(t, mask))
    f_s = build_charfn(s, build_defects(s, mask_s))

    big_sigma = np.kron(np.eye(t.n), sigma)
    tau = f_t.input_basis.basis.conj().T @ big_sigma.conj().T @ f_s.input_basis.basis
    tau_star = (
        f_t.output_basis.basis.conj().T @ sigma.conj().T @ f_s.output_basis.basis
    )
    for name, u in (("tau", tau), ("tau_star", tau_star)):
        if spec_norm(u @ u.conj().T - np.eye(u.shape[0])) > 1e-10:
            raise NotUnitary(f"{name} failed to come out unitary")

    pts = default_points(t.n) if points is None else list(points)
    worst = 0.0
    for w in pts:
        lhs = f_t.eval(w)
        rhs = tau_star @ f_s.eval(w) @ tau.conj().T
        worst = max(worst, spec_norm(lhs - rhs))
    return s, Coincidence(tau, tau_star, worst)


def alignment_probe(f1: CharFn, f2: CharFn, rng, tries: int = 50, points=None) -> float:
    """Best coincidence residual over random unitary basis alignments.

    A falsification probe: for genuinely distinct tuples the value stays
    large no matter the alignment; it cannot prove coincidence, only make
    non-coincidence plausible.
    """
    from .sampling import random_unitary

    if f1.input_dim != f2.input_dim or f1.output_dim != f2.output_dim:
        return float("inf")
    pts = default_points(f1.n) if points is None else list(points)
    evals1 = [f1.eval(w) for w in pts]
    evals2 = [f2.eval(w) for w in pts]
    best = float("inf")
    for _ in range(tries):
        tau = random_unitary(rng, f1.input_dim)
        tau_star = random_unitary(rng, f1.output_dim)
        worst = max(
            spec_norm(a - tau_star @ b @ tau.conj().T) for a, b in zip(evals1, evals2)
        )
        best = min(best, worst)
    return best


def inner_block_compose(f: CharFn, extra_dim: int):
    """Theta_T padded with an identity block, as a hardy-module symbol."""
    if extra_dim < 0:
        raise BadIndex(f"extra_dim must be >= 0, got {extra_dim}")
    core = charfn_symbol(f)
    if extra_dim == 0:
        return core
    return blockdiag_symbol([core, unitary_symbol(f.n, np.eye(extra_dim))])
