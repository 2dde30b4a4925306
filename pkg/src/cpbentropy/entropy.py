"""Reduced states, entropies and the quantum mutual entropy of two qubits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .linalg import _as_matrix, entropy_from_eigenvalues, hermitize, partial_trace

# reduced-state coherences above this make diagonal-only entropies inexact
COHERENCE_FLAG = 1e-9

RECORD_FIELDS = ("S_A", "S_B", "S_AB", "I", "purity", "energy",
                 "p_gg", "p_ge", "p_eg", "p_ee")


@dataclass(frozen=True)
class CorrelationRecord:
    t: float
    S_A: float
    S_B: float
    S_AB: float
    I: float
    purity: float
    energy: float
    populations: tuple  # (p_gg, p_ge, p_eg, p_ee)

    def violations(self) -> dict:
        """How far each record invariant is from failing (<= 0 means satisfied)."""
        return {
            "mutual_nonneg": -self.I,
            "subadditivity": self.I - 2 * min(self.S_A, self.S_B),
            "araki_lieb": abs(self.S_A - self.S_B) - self.S_AB,
            "population_sum": abs(sum(self.populations) - 1.0),
        }


def _clamp_mutual(i):
    return np.where((i < 0) & (i > -1e-10), 0.0, i)


def _joint4(rho) -> np.ndarray:
    m = _as_matrix(rho)
    if m.shape[-2:] != (4, 4):
        raise ContractError(f"expected 4x4 joint states, got shape {m.shape}")
    return hermitize(m)


def reduced_entropies(rho):
    """Spectral entropies (S_A, S_B) of the two single-qubit reduced states."""
    m = _joint4(rho)
    s_a = entropy_from_eigenvalues(np.linalg.eigvalsh(partial_trace(m, "A")))
    s_b = entropy_from_eigenvalues(np.linalg.eigvalsh(partial_trace(m, "B")))
    if np.ndim(s_a) == 0:
        return float(s_a), float(s_b)
    return s_a, s_b


def reduced_coherence(rho):
    """Largest off-diagonal modulus across both reduced states.

    When this exceeds :data:`COHERENCE_FLAG`, entropies computed from the
    reduced diagonals alone differ from the spectral ones.
    """
    m = _joint4(rho)
    a = np.abs(partial_trace(m, "A")[..., 0, 1])
    b = np.abs(partial_trace(m, "B")[..., 0, 1])
    out = np.maximum(a, b)
    return float(out) if np.ndim(out) == 0 else out


def mutual_entropy(rho):
    """I = S(rho_A) + S(rho_B) - S(rho_AB), in bits."""
    m = _joint4(rho)
    s_ab = entropy_from_eigenvalues(np.linalg.eigvalsh(m))
    s_a, s_b = reduced_entropies(m)
    i = _clamp_mutual(s_a + s_b - s_ab)
    return float(i) if np.ndim(i) == 0 else i


def closed_form_joint_eigenvalues(rho, atol: float = 1e-9) -> tuple:
    """Joint eigenvalues of a state that is block diagonal over {ee}, {gg}, {ge, eg}.

    Valid only when rho couples nothing to |e1e2> or |g1g2> and the only
    coherence is inside the {|g1e2>, |e1g2>} block. Returns
    (lambda_ee, lambda_gg, lambda_+, lambda_-).
    """
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ContractError(f"expected a 4x4 joint state, got shape {m.shape}")
    outside = [m[i, j] for i in range(4) for j in range(4)
               if i != j and {i, j} != {1, 2}]
    worst = max(abs(x) for x in outside)
    if worst > atol:
        raise ContractError(
            f"state is not block diagonal (off-block element {worst:.2e}); "
            "use eig_hermitian for general states")
    a = m[2, 2].real
    b = m[1, 1].real
    c = abs(m[2, 1])
    root = np.sqrt((a - b) ** 2 + 4 * c ** 2)
    return (float(m[3, 3].real), float(m[0, 0].real),
            float(0.5 * (a + b + root)), float(0.5 * (a + b - root)))


def observe_many(h, rhos, times) -> dict:
    """Column-wise observables for a stack of joint states.

    Returns a dict keyed by ``"t"`` and :data:`RECORD_FIELDS`, each an array
    with one entry per state.
    """
    h = _as_matrix(h)
    m = _joint4(rhos).reshape(-1, 4, 4)
    s_ab = entropy_from_eigenvalues(np.linalg.eigvalsh(m))
    s_a = entropy_from_eigenvalues(np.linalg.eigvalsh(partial_trace(m, "A")))
    s_b = entropy_from_eigenvalues(np.linalg.eigvalsh(partial_trace(m, "B")))
    pops = np.real(np.diagonal(m, axis1=-2, axis2=-1))
    return {
        "t": np.broadcast_to(np.asarray(times, dtype=float), (m.shape[0],)).copy(),
        "S_A": s_a,
        "S_B": s_b,
        "S_AB": s_ab,
        "I": _clamp_mutual(s_a + s_b - s_ab),
        "purity": np.sum(np.abs(m) ** 2, axis=(-2, -1)),
        "energy": np.real(np.einsum("ij,nji->n", h, m)),
        "p_gg": pops[:, 0],
        "p_ge": pops[:, 1],
        "p_eg": pops[:, 2],
        "p_ee": pops[:, 3],
    }


def observe(h, rho, t: float) -> CorrelationRecord:
    cols = observe_many(h, _as_matrix(rho)[None], [t])
    return CorrelationRecord(
        t=float(t),
        S_A=float(cols["S_A"][0]),
        S_B=float(cols["S_B"][0]),
        S_AB=float(cols["S_AB"][0]),
        I=float(cols["I"][0]),
        purity=float(cols["purity"][0]),
        energy=float(cols["energy"][0]),
        populations=tuple(float(cols[k][0]) for k in ("p_gg", "p_ge", "p_eg", "p_ee")),
    )
