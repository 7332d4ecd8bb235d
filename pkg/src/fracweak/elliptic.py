"""Finite-difference Dirichlet realization of -div(a grad u) + q u on [0, L]^d.

Discrete inner products carry the cell volume ``h**d`` so that norms approximate
L^2(Omega); operator 2-norms are unaffected by that scaling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ShapeError, SolverError, ValidationError

DENSE_EIG_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class SpatialProblem:
    dim: int
    shape: tuple
    h: tuple
    coords: tuple
    a_field: np.ndarray
    q_field: np.ndarray
    rho_field: np.ndarray
    A: sp.csr_matrix

    @property
    def n(self):
        return int(np.prod(self.shape))

    @property
    def cell(self):
        return float(np.prod(self.h))

    def inner(self, f, g, weight=None):
        w = 1.0 if weight is None else weight
        return self.cell * np.sum(w * f * g, axis=-1)

    def norm(self, f):
        return np.sqrt(self.cell * np.sum(np.abs(f) ** 2, axis=-1))

    def points(self):
        """Interior node coordinates, shape ``(n, dim)`` in C order."""
        mesh = np.meshgrid(*self.coords, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def field(self, values):
        """Sample a scalar, callable or array into a flat interior field."""
        return _sample(values, self.coords, self.shape)


def _sample(values, coords, shape):
    if callable(values):
        mesh = np.meshgrid(*coords, indexing="ij")
        out = np.asarray(values(*mesh), dtype=float)
        return np.broadcast_to(out, shape).ravel().copy()
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full(int(np.prod(shape)), float(arr))
    if arr.size != int(np.prod(shape)):
        raise ShapeError(f"field with {arr.size} values for a grid of shape {shape}")
    return arr.reshape(shape).ravel().copy()


def _full_grid_a(a_field, coords, h, lengths, shape):
    """Coefficient a on interior plus boundary nodes, shape ``shape + 2``."""
    if callable(a_field):
        full = [np.concatenate([[0.0], c, [L]]) for c, L in zip(coords, lengths)]
        mesh = np.meshgrid(*full, indexing="ij")
        return np.broadcast_to(np.asarray(a_field(*mesh), dtype=float),
                               tuple(s + 2 for s in shape)).copy()
    inner = _sample(a_field, coords, shape).reshape(shape)
    return np.pad(inner, 1, mode="edge")


def _harmonic(x, y):
    return 2.0 * x * y / (x + y)


def _laplacian_1d_faces(a_line, h):
    faces = _harmonic(a_line[:-1], a_line[1:])
    main = (faces[:-1] + faces[1:]) / h**2
    off = -faces[1:-1] / h**2
    return main, off


def assemble_operator(dim, grid_shape, a_field=1.0, q_field=0.0, rho_field=1.0, lengths=None):
    """Assemble the Dirichlet operator on a tensor grid of interior nodes.

    Parameters
    ----------
    dim : int
        1 or 2.
    grid_shape : int or tuple
        Interior node count per axis; spacing is ``L / (n + 1)``.
    a_field, q_field, rho_field : scalar, array or callable
        Diffusion coefficient, potential and weight.  Callables receive the
        coordinate arrays; ``a`` is averaged harmonically at cell faces.
    lengths : sequence of float, optional
        Side lengths, default 1.
    """
    if dim not in (1, 2):
        raise ValidationError(f"dim must be 1 or 2, got {dim}")
    shape = (grid_shape,) * dim if np.ndim(grid_shape) == 0 else tuple(int(s) for s in grid_shape)
    if len(shape) != dim or min(shape) < 1:
        raise ShapeError(f"grid shape {shape} does not match dim={dim}")
    lengths = (1.0,) * dim if lengths is None else tuple(float(L) for L in lengths)
    h = tuple(L / (n + 1) for L, n in zip(lengths, shape))
    coords = tuple(hh * np.arange(1, n + 1) for hh, n in zip(h, shape))

    a_arr = np.asarray(a_field) if not callable(a_field) else None
    if a_arr is not None and a_arr.ndim >= 2 and a_arr.shape[-2:] == (dim, dim) and dim == 1:
        a_field = a_arr[..., 0, 0]
    a_full = _full_grid_a(a_field, coords, h, lengths, shape)
    q = _sample(q_field, coords, shape)
    rho = _sample(rho_field, coords, shape)
    a_inner = a_full[(slice(1, -1),) * dim].ravel()

    problems = []
    for name, bad in (("a", np.flatnonzero(~(a_full.ravel() > 0))),
                      ("q", np.flatnonzero(~(q >= 0))),
                      ("rho", np.flatnonzero(~((rho > 0) & np.isfinite(rho))))):
        if bad.size:
            problems.append(f"{name} invalid at nodes {bad[:10].tolist()}")
    if problems:
        raise ValidationError("; ".join(problems))

    n = int(np.prod(shape))
    rows, cols, vals = [], [], []
    idx = np.arange(n).reshape(shape)
    for axis in range(dim):
        # lines along `axis`, one per combination of the remaining indices
        moved_a = np.moveaxis(a_full, axis, -1)
        moved_idx = np.moveaxis(idx, axis, -1)
        other = [slice(1, -1)] * (dim - 1)
        lines_a = moved_a[tuple(other)].reshape(-1, shape[axis] + 2)
        lines_idx = moved_idx.reshape(-1, shape[axis])
        for a_line, ids in zip(lines_a, lines_idx):
            main, off = _laplacian_1d_faces(a_line, h[axis])
            rows += [ids, ids[:-1], ids[1:]]
            cols += [ids, ids[1:], ids[:-1]]
            vals += [main, off, off]
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(q)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    A = (A + A.T) * 0.5  # exact symmetry: both triangles carry identical values
    A.sort_indices()
    for arr in (a_inner, q, rho):
        arr.setflags(write=False)
    return SpatialProblem(dim, shape, h, coords, a_inner, q, rho, A.tocsr())


def _csc_pattern(prob):
    """CSC copy of A_h and the positions of its diagonal, cached on the problem."""
    cached = prob.__dict__.get("_csc_pattern")
    if cached is None:
        base = prob.A.tocsc()
        base.sort_indices()
        diag = np.empty(prob.n, dtype=np.int64)
        for j in range(prob.n):
            lo, hi = base.indptr[j], base.indptr[j + 1]
            k = lo + np.searchsorted(base.indices[lo:hi], j)
            if k >= hi or base.indices[k] != j:
                raise SolverError("operator has a structurally missing diagonal entry")
            diag[j] = k
        cached = (base, diag)
        object.__setattr__(prob, "_csc_pattern", cached)
    return cached


class ShiftedFactor:
    """Sparse LU of ``A_h + diag(shift)``, reusable for many right-hand sides."""

    def __init__(self, prob: SpatialProblem, shift, p=None):
        shift = np.broadcast_to(np.asarray(shift, dtype=complex), (prob.n,))
        self.p = p
        base, diag = _csc_pattern(prob)
        self.matrix = sp.csc_matrix((base.data.astype(complex), base.indices, base.indptr),
                                    shape=base.shape)
        self.matrix.data[diag] += shift
        try:
            self._lu = spla.splu(self.matrix)
        except RuntimeError as exc:
            raise SolverError(f"factorization failed: {exc}", p) from exc

    def solve(self, b, check=True):
        b = np.asarray(b, dtype=complex)
        x = self._lu.solve(b)
        if check:
            r = self.matrix @ x - b
            nb = np.linalg.norm(b)
            if not np.all(np.isfinite(x)) or np.linalg.norm(r) > 1e-10 * max(nb, 1e-300):
                raise SolverError("shifted system is singular or ill-conditioned", self.p)
        return x


def shifted_solve(prob: SpatialProblem, shift_field, b, p=None):
    """Solve ``(A_h + diag(shift_field)) w = b`` with a sparse complex LU."""
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != prob.n:
        raise ShapeError(f"right-hand side has {b.shape[0]} rows, problem has {prob.n}")
    return ShiftedFactor(prob, shift_field, p).solve(b)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # shape (n, k), columns rho-orthonormal
    rho: np.ndarray
    cell: float

    @property
    def k(self):
        return self.eigenvalues.size

    def coefficients(self, f, weight=None):
        """<f, phi_n>_rho for each mode; ``weight`` multiplies f first."""
        f = np.asarray(f)
        w = self.rho if weight is None else self.rho * weight
        return self.cell * (self.vectors.T @ (w[:, None] * f.T if f.ndim > 1 else w * f))

    def synthesize(self, coeffs):
        return (self.vectors @ np.asarray(coeffs)).T


def eigensolve(prob: SpatialProblem, k):
    """First ``k`` eigenpairs of ``A_h phi = lambda diag(rho) phi``, ascending.

    Eigenvectors are normalized so that ``h^d sum rho phi_m phi_n = delta_mn``.
    """
    if not 1 <= k <= prob.n:
        raise ValidationError(f"k must lie in [1, {prob.n}], got {k}")
    rho = prob.rho_field
    if prob.n <= DENSE_EIG_LIMIT:
        lam, vec = sla.eigh(prob.A.toarray(), np.diag(rho), subset_by_index=[0, k - 1])
    else:
        lam, vec = spla.eigsh(prob.A.tocsc(), k=k, M=sp.diags(rho).tocsc(), sigma=0.0,
                              which="LM")
        order = np.argsort(lam)
        lam, vec = lam[order], vec[:, order]
        vec = vec / np.sqrt(np.sum(rho[:, None] * vec**2, axis=0))
    # fix signs so that the largest entry of each vector is positive
    signs = np.sign(vec[np.argmax(np.abs(vec), axis=0), np.arange(vec.shape[1])])
    vec = vec * signs / np.sqrt(prob.cell)
    return EigenBasis(lam, vec, rho, prob.cell)
