"""Dense operators, Hilbert-Schmidt geometry and superoperators.

Conventions used throughout the package:

* operators are plain ``numpy`` complex matrices,
* vectorization is column-stacking, ``vec(X)[a + b*n] = X[a, b]``,
* a superoperator ``X -> sum_i K_i X K_i^dag`` has matrix
  ``sum_i conj(K_i) otimes K_i`` acting on column-stacked vectors,
* adjoints of superoperators are taken w.r.t. the Hilbert-Schmidt
  inner product ``<A, B> = tr(A^dag B)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9

__all__ = [
    "DEFAULT_TOL",
    "vec",
    "unvec",
    "hs_inner",
    "hs_norm",
    "is_hermitian",
    "eigh_clustered",
    "orthonormalize",
    "OperatorSubspace",
    "Superoperator",
    "superop_from_kraus",
    "ChannelReport",
    "channel_checks",
]


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix."""
    return np.asarray(X, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`. Square by default, else pass ``rows``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if rows is None:
        rows = round(np.sqrt(v.size))
        if rows * rows != v.size:
            raise ValueError(f"cannot unvec length {v.size} into a square matrix")
    return v.reshape((rows, v.size // rows), order="F")


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(A^dag B)."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def hs_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A))


def is_hermitian(A: np.ndarray, tol: float = 1e-12) -> bool:
    A = np.asarray(A)
    scale = max(hs_norm(A), 1.0)
    return hs_norm(A - A.conj().T) <= tol * scale


def eigh_clustered(H: np.ndarray, gap: float):
    """Eigendecompose a Hermitian matrix, grouping eigenvalues closer than ``gap``.

    Returns a list of ``(mean_eigenvalue, vectors)`` pairs where ``vectors``
    has one orthonormal column per member of the cluster.  Eigenvectors of a
    cluster are re-orthonormalized by QR so degenerate eigenspaces stay clean.
    """
    w, V = np.linalg.eigh(H)
    clusters = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > gap:
            block = V[:, start:i]
            q, _ = np.linalg.qr(block)
            clusters.append((float(np.mean(w[start:i])), q))
            start = i
    return clusters


@dataclass(frozen=True)
class OperatorSubspace:
    """An operator subspace given by an HS-orthonormal basis."""

    ambient_dim: int
    basis: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def stacked(self) -> np.ndarray:
        """(dim, n^2) matrix whose rows are the vectorized basis elements."""
        n = self.ambient_dim
        if not self.basis:
            return np.zeros((0, n * n), dtype=complex)
        return np.array([vec(B) for B in self.basis])

    def coords(self, X: np.ndarray) -> np.ndarray:
        """HS coordinates of X in the basis."""
        return np.array([hs_inner(B, X) for B in self.basis])

    def project(self, X: np.ndarray) -> np.ndarray:
        """Orthogonal projection of X onto the subspace."""
        out = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        for c, B in zip(self.coords(X), self.basis):
            out += c * B
        return out

    def residual(self, X: np.ndarray) -> float:
        """Distance of X from the subspace."""
        return hs_norm(X - self.project(X))

    def contains(self, X: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        return self.residual(X) <= tol * max(hs_norm(X), 1.0)

    def orthocomplement(self) -> "OperatorSubspace":
        """HS-orthogonal complement within the ambient operator space."""
        n = self.ambient_dim
        M = self.stacked()
        if M.shape[0] == 0:
            eye_ops = []
            full = np.eye(n * n, dtype=complex)
            eye_ops = [unvec(full[:, j], n) for j in range(n * n)]
            return OperatorSubspace(n, tuple(eye_ops))
        # rows of M span the subspace; null space of M is the complement
        _, _, Vh = np.linalg.svd(M, full_matrices=True)
        null = Vh[M.shape[0]:].conj()
        return OperatorSubspace(n, tuple(unvec(row, n) for row in null))

    def projector_matrix(self) -> np.ndarray:
        """(n^2, n^2) matrix of the HS-orthogonal projector onto the span.

        P vec(X) = sum_i vec(B_i) <vec(B_i), vec(X)>.
        """
        M = self.stacked()
        return M.T @ M.conj()


def _hermitian_real_coords(ops: list[np.ndarray]) -> np.ndarray:
    # Hermitian matrices form a real vector space with Euclidean geometry
    # matching HS; stack re/im parts so a real SVD yields Hermitian output.
    return np.array([np.concatenate([vec(X).real, vec(X).imag]) for X in ops])


def orthonormalize(
    ops: list[np.ndarray] | tuple[np.ndarray, ...],
    tol: float = DEFAULT_TOL,
) -> OperatorSubspace:
    """HS-orthonormal basis of the complex span of ``ops``.

    Rank is cut at singular values below ``tol`` times the largest one.
    If every input is Hermitian, the returned basis elements are Hermitian
    as well (the complex span of a Hermitian family closed under adjoints
    always admits such a basis).
    """
    ops = [np.asarray(X, dtype=complex) for X in ops]
    if not ops:
        raise ValueError("need at least one operator")
    n = ops[0].shape[0]
    for X in ops:
        if X.shape != (n, n):
            raise ValueError("operators must share a common square shape")

    hermitian = all(is_hermitian(X) for X in ops)
    if hermitian:
        M = _hermitian_real_coords(ops)
        U, s, Vh = np.linalg.svd(M.T, full_matrices=False)
        rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
        half = n * n
        basis = []
        for j in range(rank):
            col = U[:, j]
            X = unvec(col[:half] + 1j * col[half:], n)
            basis.append((X + X.conj().T) / 2)
        return OperatorSubspace(n, tuple(basis))

    M = np.array([vec(X) for X in ops]).T  # columns are vec'd inputs
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return OperatorSubspace(n, tuple(unvec(U[:, j], n) for j in range(rank)))


@dataclass(frozen=True)
class Superoperator:
    """Linear map on operators, held as a matrix on column-stacked vectors.

    ``matrix`` has shape (out_dim^2, in_dim^2).  When the map came from a
    Kraus family the operators are retained in ``kraus``.
    """

    matrix: np.ndarray
    kraus: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if round(np.sqrt(m.shape[0])) ** 2 != m.shape[0] or round(np.sqrt(m.shape[1])) ** 2 != m.shape[1]:
            raise ValueError(f"matrix shape {m.shape} is not (out^2, in^2)")
        if self.kraus is not None:
            object.__setattr__(
                self, "kraus", tuple(np.asarray(K, dtype=complex) for K in self.kraus)
            )

    @property
    def in_dim(self) -> int:
        return round(np.sqrt(self.matrix.shape[1]))

    @property
    def out_dim(self) -> int:
        return round(np.sqrt(self.matrix.shape[0]))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if X.shape != (self.in_dim, self.in_dim):
            raise ValueError(f"expected {self.in_dim}x{self.in_dim} operator, got {X.shape}")
        return unvec(self.matrix @ vec(X), self.out_dim)

    @classmethod
    def identity(cls, n: int) -> "Superoperator":
        return cls(np.eye(n * n, dtype=complex), kraus=(np.eye(n, dtype=complex),))

    @classmethod
    def from_conjugation(cls, A: np.ndarray) -> "Superoperator":
        """The map X -> A X A^dag."""
        return superop_from_kraus([A])

    def adjoint(self) -> "Superoperator":
        """HS adjoint; for a Kraus map this is X -> sum_i K_i^dag X K_i."""
        kr = None
        if self.kraus is not None:
            kr = tuple(K.conj().T for K in self.kraus)
        return Superoperator(self.matrix.conj().T, kraus=kr)

    def compose(self, other: "Superoperator") -> "Superoperator":
        """self after other (matrix product order)."""
        if other.out_dim != self.in_dim:
            raise ValueError("dimension mismatch in composition")
        kr = None
        if self.kraus is not None and other.kraus is not None:
            kr = tuple(A @ B for A in self.kraus for B in other.kraus)
        return Superoperator(self.matrix @ other.matrix, kraus=kr)

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return self.compose(other)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        kr = None
        if self.kraus is not None and other.kraus is not None:
            kr = self.kraus + other.kraus
        return Superoperator(self.matrix + other.matrix, kraus=kr)

    def __mul__(self, c: complex) -> "Superoperator":
        return Superoperator(c * self.matrix)

    __rmul__ = __mul__

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ij |i><j| otimes S(|i><j|), shape (n_in*n_out)^2."""
        no, ni = self.out_dim, self.in_dim
        S4 = self.matrix.reshape(no, no, ni, ni)  # [b, a, j, i]
        return np.einsum("baji->iajb", S4).reshape(ni * no, ni * no)

    def kraus_consistency(self) -> float:
        """Residual between the matrix and the stored Kraus factorization."""
        if self.kraus is None:
            raise ValueError("no Kraus factorization stored")
        M = sum(np.kron(K.conj(), K) for K in self.kraus)
        return float(np.linalg.norm(self.matrix - M))


def superop_from_kraus(kraus) -> Superoperator:
    """Superoperator of X -> sum_i K_i X K_i^dag."""
    kraus = [np.asarray(K, dtype=complex) for K in kraus]
    if not kraus:
        raise ValueError("need at least one Kraus operator")
    shape = kraus[0].shape
    for K in kraus:
        if K.shape != shape:
            raise ValueError("Kraus operators must share a common shape")
    M = sum(np.kron(K.conj(), K) for K in kraus)
    return Superoperator(M, kraus=tuple(kraus))


@dataclass(frozen=True)
class ChannelReport:
    cp: bool
    tp: bool
    unital: bool
    min_choi_eig: float
    choi_herm_residual: float
    tp_residual: float
    unital_residual: float


def channel_checks(S: Superoperator, tol: float = DEFAULT_TOL) -> ChannelReport:
    """Certify complete positivity, trace preservation and unitality.

    CP requires a Hermitian Choi matrix with spectrum above ``-tol``;
    TP checks the dual map on the identity, unitality the map itself.
    """
    if S.in_dim != S.out_dim:
        raise ValueError("channel_checks requires square endpoint dimensions")
    n = S.in_dim
    C = S.choi()
    herm_res = float(np.linalg.norm(C - C.conj().T))
    scale = max(float(np.linalg.norm(C)), 1.0)
    Ch = (C + C.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(Ch)[0])
    eye = np.eye(n, dtype=complex)
    tp_res = float(np.linalg.norm(S.adjoint()(eye) - eye))
    un_res = float(np.linalg.norm(S(eye) - eye))
    return ChannelReport(
        cp=(herm_res <= tol * scale and min_eig >= -tol * scale),
        tp=(tp_res <= tol * np.sqrt(n)),
        unital=(un_res <= tol * np.sqrt(n)),
        min_choi_eig=min_eig,
        choi_herm_residual=herm_res,
        tp_residual=tp_res,
        unital_residual=un_res,
    )
