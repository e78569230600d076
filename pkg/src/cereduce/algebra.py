"""Matrix *-algebras: closure, commutant, block decomposition, projection.

A unital *-algebra of n x n matrices is unitarily equivalent to a direct
sum of blocks B(C^{d_S}) otimes 1_{d_F}.  The decomposition is computed
numerically from generic elements of the center and the commutant; the
unitary it produces is validated against the block structure of every
algebra basis element before being returned.

From the decomposition one obtains the unique Hilbert-Schmidt-orthogonal
conditional expectation onto the algebra, factorized into a CPTP
compression (partial trace per block) and a CPTP injection (tensoring
with normalized block identities).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    DEFAULT_TOL,
    OperatorSubspace,
    Superoperator,
    eigh_clustered,
    hs_norm,
    orthonormalize,
    superop_from_kraus,
)

__all__ = [
    "StarAlgebra",
    "DegenerateAlgebraError",
    "algebra_closure",
    "commutant",
    "center",
    "WedderburnDecomposition",
    "wedderburn",
    "CEFactorization",
    "conditional_expectation",
]


class DegenerateAlgebraError(RuntimeError):
    """Random algebra elements failed to separate the block structure."""


def _hermitian_parts(X: np.ndarray) -> list[np.ndarray]:
    return [(X + X.conj().T) / 2, (X - X.conj().T) / 2j]


@dataclass(frozen=True)
class StarAlgebra:
    """Operator span closed under products and adjoints."""

    space: OperatorSubspace
    unital: bool

    @property
    def ambient_dim(self) -> int:
        return self.space.ambient_dim

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> tuple[np.ndarray, ...]:
        return self.space.basis

    def closure_residual(self) -> float:
        """Worst projection residual of basis products and adjoints."""
        res = 0.0
        for Bi in self.basis:
            res = max(res, self.space.residual(Bi.conj().T))
            for Bj in self.basis:
                res = max(res, self.space.residual(Bi @ Bj))
        return res


def algebra_closure(
    subspace: OperatorSubspace | list[np.ndarray],
    tol: float = DEFAULT_TOL,
) -> StarAlgebra:
    """Smallest *-algebra containing the given span.

    Alternates adding pairwise products and adjoints with
    re-orthonormalization until the dimension stabilizes.  Products are
    split into Hermitian parts so a Hermitian generating set yields a
    Hermitian basis.
    """
    ops = list(subspace.basis) if isinstance(subspace, OperatorSubspace) else list(subspace)
    space = orthonormalize(ops, tol)
    n = space.ambient_dim
    for _ in range(n * n):
        candidates = list(space.basis)
        for Bi in space.basis:
            candidates.extend(_hermitian_parts(Bi.conj().T))
            for Bj in space.basis:
                candidates.extend(_hermitian_parts(Bi @ Bj))
        new_space = orthonormalize(candidates, tol)
        if new_space.dim == space.dim:
            space = new_space
            break
        space = new_space
    eye = np.eye(n, dtype=complex)
    return StarAlgebra(space=space, unital=space.contains(eye, max(tol, 1e-8)))


def commutant(alg: StarAlgebra, tol: float = DEFAULT_TOL) -> StarAlgebra:
    """All operators commuting with every element of the algebra.

    Computed as the null space of the positive semidefinite Gram form
    sum_i L_i^dag L_i of the commutator maps L_i(X) = [B_i, X], assembled
    from Kronecker products so no large matrix factorization is needed.
    """
    n = alg.ambient_dim
    eye = np.eye(n, dtype=complex)
    G = np.zeros((n * n, n * n), dtype=complex)
    for B in alg.basis:
        Bc = B.conj()
        G += np.kron(eye, B.conj().T @ B)
        G -= np.kron(B.T, B.conj().T)
        G -= np.kron(Bc, B)
        G += np.kron(Bc @ B.T, eye)
    w, V = np.linalg.eigh(G)
    w_max = max(float(w[-1]), 1.0)
    null_cols = [V[:, j] for j in range(len(w)) if w[j] <= tol * w_max]
    ops = []
    for v in null_cols:
        X = v.reshape((n, n), order="F")
        ops.extend(_hermitian_parts(X))
    space = orthonormalize(ops, tol)
    return StarAlgebra(space=space, unital=True)


def center(alg: StarAlgebra, tol: float = DEFAULT_TOL) -> OperatorSubspace:
    """The center: elements of the algebra commuting with the whole algebra."""
    n = alg.ambient_dim
    m = alg.dim
    rows = []
    for Bj in alg.basis:
        block = np.zeros((n * n, m), dtype=complex)
        for i, Bi in enumerate(alg.basis):
            block[:, i] = (Bi @ Bj - Bj @ Bi).reshape(-1, order="F")
        rows.append(block)
    M = np.vstack(rows)
    _, s, Vh = np.linalg.svd(M, full_matrices=False)
    s_max = max(float(s[0]), 1.0) if s.size else 1.0
    coeffs = [Vh[j].conj() for j in range(len(Vh)) if j >= len(s) or s[j] <= tol * s_max]
    ops = []
    for c in coeffs:
        X = sum(ci * Bi for ci, Bi in zip(c, alg.basis))
        ops.extend(_hermitian_parts(X))
    return orthonormalize(ops, tol)


@dataclass(frozen=True)
class WedderburnDecomposition:
    """Unitary basis change exposing the block structure of an algebra.

    Columns of ``U`` are grouped per block; within a block of shape
    (d_S, d_F), column ``s * d_F + f`` carries the s-th inner and f-th
    multiplicity index, so conjugated algebra elements look like
    ``X_S otimes 1_F`` on each block.
    """

    U: np.ndarray
    blocks: tuple[tuple[int, int], ...]

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    @property
    def reduced_total_dim(self) -> int:
        """Size of the compressed Hilbert space, sum of d_S."""
        return sum(dS for dS, _ in self.blocks)

    @property
    def reduced_operator_dim(self) -> int:
        """Linear dimension of the reduced operator algebra, sum of d_S^2."""
        return sum(dS * dS for dS, _ in self.blocks)

    def hilbert_offsets(self) -> list[int]:
        offs = [0]
        for dS, dF in self.blocks:
            offs.append(offs[-1] + dS * dF)
        return offs

    def reduced_offsets(self) -> list[int]:
        offs = [0]
        for dS, _ in self.blocks:
            offs.append(offs[-1] + dS)
        return offs

    def block_isometry(self, k: int) -> np.ndarray:
        """Columns of U spanning the k-th block, shape (n, d_S*d_F)."""
        offs = self.hilbert_offsets()
        return self.U[:, offs[k]:offs[k + 1]]

    def structure_residual(self, B: np.ndarray) -> float:
        """Distance of U^dag B U from the block form (+) X_S otimes 1_F."""
        T = self.U.conj().T @ B @ self.U
        offs = self.hilbert_offsets()
        model = np.zeros_like(T)
        for k, (dS, dF) in enumerate(self.blocks):
            sub = T[offs[k]:offs[k + 1], offs[k]:offs[k + 1]]
            sub4 = sub.reshape(dS, dF, dS, dF)
            XS = np.einsum("sftf->st", sub4) / dF
            model[offs[k]:offs[k + 1], offs[k]:offs[k + 1]] = np.kron(XS, np.eye(dF))
        return float(np.linalg.norm(T - model))


def _random_hermitian_in(space_basis, rng) -> np.ndarray:
    coeffs = rng.standard_normal(len(space_basis))
    X = sum(c * B for c, B in zip(coeffs, space_basis))
    return (X + X.conj().T) / 2


def wedderburn(
    alg: StarAlgebra,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_redraws: int = 8,
) -> WedderburnDecomposition:
    """Block decomposition of a unital *-algebra from generic elements.

    A random Hermitian element of the center separates the minimal central
    blocks; within each block a random Hermitian element of the commutant
    separates the multiplicity slices, and a further generic commutant
    element aligns the slices into consistent tensor factors.  The result
    is accepted only if every algebra basis element actually acquires the
    block structure; otherwise a fresh seed is drawn.
    """
    if not alg.unital:
        raise ValueError("Wedderburn decomposition requires a unital algebra")
    n = alg.ambient_dim
    Z = center(alg, tol)
    comm = commutant(alg, tol)
    struct_tol = max(np.sqrt(tol), 1e-8)

    last_err = "no attempt made"
    for attempt in range(max_redraws):
        rng = np.random.default_rng([seed, attempt])
        try:
            dec = _wedderburn_attempt(alg, Z, comm, tol, rng)
        except DegenerateAlgebraError as exc:
            last_err = str(exc)
            continue
        res = max(dec.structure_residual(B) for B in alg.basis)
        if res <= struct_tol:
            return dec
        last_err = f"structure residual {res:.3e} exceeds {struct_tol:.1e}"
    raise DegenerateAlgebraError(
        f"failed to separate blocks after {max_redraws} redraws: {last_err}"
    )


def _wedderburn_attempt(alg, Z, comm, tol, rng) -> WedderburnDecomposition:
    n = alg.ambient_dim
    gap_tol = np.sqrt(tol)

    # central blocks from a generic Hermitian center element
    Zel = _random_hermitian_in(Z.basis, rng)
    spread = max(float(np.linalg.eigvalsh(Zel)[-1] - np.linalg.eigvalsh(Zel)[0]), 1e-3)
    clusters = eigh_clustered(Zel, gap_tol * spread)

    blocks = []
    for _, Q in clusters:
        nm = Q.shape[1]
        # multiplicity slices from a generic Hermitian commutant element
        Y = _random_hermitian_in([Q.conj().T @ X @ Q for X in comm.basis], rng)
        yspread = max(float(np.linalg.eigvalsh(Y)[-1] - np.linalg.eigvalsh(Y)[0]), 1e-3)
        sub = eigh_clustered(Y, gap_tol * yspread)
        sizes = {V.shape[1] for _, V in sub}
        if len(sizes) != 1:
            raise DegenerateAlgebraError(
                f"eigenvalue clusters of a commutant element have unequal sizes {sorted(sizes)}"
            )
        dS = sizes.pop()
        dF = len(sub)
        if dS * dF != nm:
            raise DegenerateAlgebraError("cluster sizes inconsistent with the block dimension")

        # align slices through a generic commutant element
        V0 = sub[0][1]
        X = sum(rng.standard_normal() * (Q.conj().T @ C @ Q) for C in comm.basis)
        aligned = [V0]
        for f in range(1, dF):
            Vf = sub[f][1]
            Sf = Vf @ (Vf.conj().T @ X @ V0)
            P, s, Qh = np.linalg.svd(Sf, full_matrices=False)
            if s[-1] <= np.sqrt(tol) * max(s[0], 1e-12):
                raise DegenerateAlgebraError("alignment element nearly singular on a slice")
            aligned.append(P @ Qh)
        cols = np.zeros((nm, nm), dtype=complex)
        for s_idx in range(dS):
            for f in range(dF):
                cols[:, s_idx * dF + f] = aligned[f][:, s_idx]
        blocks.append((dS, dF, Q @ cols))

    blocks.sort(key=lambda b: (-b[0], -b[1]))
    U = np.hstack([b[2] for b in blocks])
    if U.shape != (n, n):
        raise DegenerateAlgebraError("central blocks do not exhaust the space")
    return WedderburnDecomposition(U=U, blocks=tuple((b[0], b[1]) for b in blocks))


@dataclass(frozen=True)
class CEFactorization:
    """CPTP factorization J o R of the conditional expectation onto an algebra.

    The reduced space is the block-diagonal subalgebra of B(C^D) with
    D = sum of d_S; R compresses by per-block partial trace over the
    multiplicity factor, J injects by tensoring with normalized block
    identities.
    """

    decomposition: WedderburnDecomposition
    R: Superoperator
    J: Superoperator
    E: Superoperator

    @property
    def reduced_hilbert_dim(self) -> int:
        return self.decomposition.reduced_total_dim

    @property
    def reduced_dim(self) -> int:
        return self.decomposition.reduced_operator_dim

    def blockdiag_projector(self) -> np.ndarray:
        """(D^2, D^2) projector keeping only the diagonal blocks."""
        D = self.reduced_hilbert_dim
        offs = self.decomposition.reduced_offsets()
        mask = np.zeros((D, D))
        for k in range(len(self.decomposition.blocks)):
            mask[offs[k]:offs[k + 1], offs[k]:offs[k + 1]] = 1.0
        return np.diag(mask.reshape(-1, order="F"))


def conditional_expectation(dec: WedderburnDecomposition) -> CEFactorization:
    """Build R, J and E = J o R as explicit superoperators with Kraus forms."""
    n = dec.dim
    D = dec.reduced_total_dim
    roffs = dec.reduced_offsets()

    r_kraus = []
    j_kraus = []
    for k, (dS, dF) in enumerate(dec.blocks):
        Uk = dec.block_isometry(k)          # (n, dS*dF)
        emb = np.zeros((D, dS), dtype=complex)
        emb[roffs[k]:roffs[k + 1], :] = np.eye(dS)
        for f in range(dF):
            sel = np.zeros((dS, dS * dF), dtype=complex)   # I_S otimes <f|
            for s in range(dS):
                sel[s, s * dF + f] = 1.0
            A = emb @ sel @ Uk.conj().T
            r_kraus.append(A)
            j_kraus.append(Uk @ sel.conj().T @ emb.conj().T / np.sqrt(dF))
    R = superop_from_kraus(r_kraus)
    J = superop_from_kraus(j_kraus)
    return CEFactorization(decomposition=dec, R=R, J=J, E=J @ R)
