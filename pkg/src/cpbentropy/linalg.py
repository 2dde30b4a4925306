"""Dense Hermitian kernels: eigendecomposition, partial trace, spectral entropies.

All functions are pure. Most of them also accept stacks of matrices with
shape ``(..., n, n)`` so trajectories can be processed in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EigenSolverError

JOINT4 = "joint4"
QUBIT_A = "qubitA"
QUBIT_B = "qubitB"

# eigenvalues below this are treated as exact zeros before taking logs
EIG_CLAMP = 1e-12


def lattice_basis(n_max: int) -> str:
    return f"lattice({n_max})"


@dataclass(frozen=True)
class EigenSystem:
    """Ascending real eigenvalues and the unitary whose columns are eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        U = self.vectors
        return (U * self.values) @ U.conj().T


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A density matrix tagged with the basis it is written in.

    Construction does not validate; call :meth:`check` (or use
    :func:`check_density_matrix`) where the invariants matter.
    """

    matrix: np.ndarray
    basis: str = JOINT4

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self, atol: float = 1e-10) -> "DensityMatrix":
        check_density_matrix(self.matrix, atol=atol)
        return self


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, DensityMatrix):
        return a.matrix
    return np.asarray(a)


def check_density_matrix(rho, atol: float = 1e-10) -> None:
    """Raise :class:`ContractError` unless ``rho`` is Hermitian, unit-trace and PSD."""
    m = _as_matrix(rho)
    scale = 1.0 + np.abs(m).max()
    if np.abs(m - m.conj().T).max() > 1e-12 * scale:
        raise ContractError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > atol:
        raise ContractError(f"density matrix trace {tr.real:.3e} differs from 1")
    lo = np.linalg.eigvalsh(hermitize(m))[0]
    if lo < -atol:
        raise ContractError(f"density matrix has negative eigenvalue {lo:.3e}")


def hermitize(m) -> np.ndarray:
    """Return the Hermitian part ``(M + M^dagger) / 2``."""
    m = _as_matrix(m)
    if m.shape[-1] != m.shape[-2]:
        raise ContractError(f"hermitize needs a square matrix, got {m.shape}")
    return 0.5 * (m + np.swapaxes(m, -1, -2).conj())


def eig_hermitian(h) -> EigenSystem:
    """Diagonalise a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector is rotated so that its
    largest-magnitude component is real and positive, which makes the output
    independent of LAPACK's arbitrary phase choices.
    """
    h = _as_matrix(h)
    n = h.shape[0]
    try:
        values, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge for a {n}x{n} matrix") from exc
    vectors = np.array(vectors, dtype=complex)
    pivot = np.argmax(np.abs(vectors), axis=0)
    phase = vectors[pivot, np.arange(n)]
    vectors /= phase / np.abs(phase)
    return EigenSystem(values=np.asarray(values, dtype=float), vectors=vectors)


def _ptrace4(m: np.ndarray, keep: str) -> np.ndarray:
    r = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    if keep == "A":
        return np.einsum("...ijkj->...ik", r)
    return np.einsum("...ijil->...jl", r)


def partial_trace(rho, keep: str = "A"):
    """Reduce a two-qubit state to one qubit.

    ``keep="A"`` traces out the second qubit, ``keep="B"`` the first. The
    joint basis is ordered |g1g2>, |g1e2>, |e1g2>, |e1e2> (qubit 1 is the
    most significant index), and the reduced basis is |g>, |e>.
    """
    if keep not in ("A", "B"):
        raise ContractError(f"keep must be 'A' or 'B', got {keep!r}")
    if isinstance(rho, DensityMatrix):
        if rho.basis != JOINT4:
            raise ContractError(f"partial_trace needs a joint4 state, got basis {rho.basis!r}")
        return DensityMatrix(_ptrace4(rho.matrix, keep), QUBIT_A if keep == "A" else QUBIT_B)
    m = np.asarray(rho)
    if m.shape[-2:] != (4, 4):
        raise ContractError(f"partial_trace needs 4x4 joint states, got shape {m.shape}")
    return _ptrace4(m, keep)


def entropy_from_eigenvalues(values) -> np.ndarray:
    """-sum(p log2 p) along the last axis, with tiny eigenvalues counted as 0."""
    p = np.asarray(values, dtype=float)
    p = np.where(p < EIG_CLAMP, 0.0, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, -p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    s = terms.sum(axis=-1)
    return np.clip(s, 0.0, np.log2(p.shape[-1]))


def von_neumann_entropy(rho):
    """Von Neumann entropy in bits. Works on a single matrix or a stack."""
    m = _as_matrix(rho)
    s = entropy_from_eigenvalues(np.linalg.eigvalsh(hermitize(m)))
    return float(s) if np.ndim(s) == 0 else s


def purity(rho):
    """tr(rho^2); for Hermitian rho this is the squared Frobenius norm."""
    m = _as_matrix(rho)
    p = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    return float(p) if np.ndim(p) == 0 else p
