"""Density-matrix propagation under intrinsic (Milburn) phase decoherence.

The master equation

    d rho/dt = -i [H, rho] - (gamma/2) [H, [H, rho]]

is linear and diagonal in the energy eigenbasis: the element rho_kl picks
up exp(-i w t - (gamma/2) w^2 t) with w = E_k - E_l. :func:`evolve` uses
that closed form; :func:`evolve_rk4` integrates the commutator form
directly and serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, GridSizeError
from .linalg import JOINT4, QUBIT_A, DensityMatrix, EigenSystem, _as_matrix, eig_hermitian

MAX_RK4_STEPS = 10 ** 7


def _basis_of(rho) -> str:
    if isinstance(rho, DensityMatrix):
        return rho.basis
    n = np.shape(rho)[-1]
    return {4: JOINT4, 2: QUBIT_A}.get(n, f"dim({n})")


def make_initial_state(xi: float) -> DensityMatrix:
    """cos^2(xi/2) |e1e2><e1e2| + sin^2(xi/2) |g1g2><g1g2|."""
    if not 0.0 <= xi <= math.pi:
        raise ContractError(f"mixing angle xi must lie in [0, pi], got {xi}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[3, 3] = math.cos(xi / 2) ** 2
    rho[0, 0] = math.sin(xi / 2) ** 2
    return DensityMatrix(rho, JOINT4)


@dataclass(frozen=True)
class Propagator:
    """Exact propagator for a fixed Hamiltonian and decoherence rate.

    ``decay_sign`` exists only so tests can corrupt the dissipator on
    purpose; leave it at 1.
    """

    eigensystem: EigenSystem
    gamma: float
    decay_sign: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ContractError(f"gamma must be non-negative, got {self.gamma}")

    @classmethod
    def from_hamiltonian(cls, h, gamma: float) -> "Propagator":
        return cls(eig_hermitian(h), float(gamma))

    @property
    def gaps(self) -> np.ndarray:
        """Matrix of Bohr frequencies E_k - E_l."""
        e = self.eigensystem.values
        return e[:, None] - e[None, :]

    def to_eigenbasis(self, rho: np.ndarray) -> np.ndarray:
        u = self.eigensystem.vectors
        return u.conj().T @ rho @ u

    def from_eigenbasis(self, rho: np.ndarray) -> np.ndarray:
        u = self.eigensystem.vectors
        return u @ rho @ u.conj().T

    def filter(self, times) -> np.ndarray:
        """Elementwise eigenbasis multipliers, shape ``times.shape + (n, n)``."""
        t = np.asarray(times, dtype=float)[..., None, None]
        w = self.gaps
        rate = self.decay_sign * 0.5 * self.gamma * w ** 2
        return np.exp(-1j * w * t - rate * t)

    def evolve_many(self, rho0, times) -> np.ndarray:
        """States at every requested time, shape ``(len(times), n, n)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0):
            raise ContractError("evolution times must be non-negative")
        rho0 = _as_matrix(rho0).astype(complex)
        out = self.from_eigenbasis(self.to_eigenbasis(rho0) * self.filter(times))
        out[times == 0] = rho0
        return out


def evolve(prop: Propagator, rho0, t: float) -> DensityMatrix:
    """State at time ``t`` starting from ``rho0`` at time 0."""
    if t < 0:
        raise ContractError(f"evolution time must be non-negative, got {t}")
    return DensityMatrix(prop.evolve_many(rho0, [t])[0], _basis_of(rho0))


def dephased_limit(prop: Propagator, rho0) -> DensityMatrix:
    """Long-time limit: drop every eigenbasis coherence between distinct energies."""
    if not prop.gamma > 0:
        raise ContractError("the dephased limit only exists for gamma > 0")
    e = prop.eigensystem.values
    spread = e[-1] - e[0]
    keep = np.abs(prop.gaps) <= 1e-9 * spread
    rho = _as_matrix(rho0).astype(complex)
    return DensityMatrix(prop.from_eigenbasis(prop.to_eigenbasis(rho) * keep), _basis_of(rho0))


def smallest_gap(prop: Propagator) -> float:
    """Smallest nonzero |E_k - E_l| under the same threshold as :func:`dephased_limit`."""
    e = prop.eigensystem.values
    w = np.abs(prop.gaps)
    w = w[w > 1e-9 * (e[-1] - e[0])]
    return float(w.min()) if w.size else math.inf


def _rhs(h: np.ndarray, gamma, rho: np.ndarray) -> np.ndarray:
    c = h @ rho - rho @ h
    cc = h @ c - c @ h
    return -1j * c - (0.5 * gamma) * cc


def _rk4_advance(h, gamma, rho, span: float, step: float) -> np.ndarray:
    n = max(1, math.ceil(span / step - 1e-9))
    last = span - (n - 1) * step
    for k in range(n):
        dt = step if k < n - 1 else last
        k1 = _rhs(h, gamma, rho)
        k2 = _rhs(h, gamma, rho + (0.5 * dt) * k1)
        k3 = _rhs(h, gamma, rho + (0.5 * dt) * k2)
        k4 = _rhs(h, gamma, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def rk4_trajectory(h, gamma, rho0, times, step: float) -> np.ndarray:
    """Classic RK4 on the master equation, recorded at ascending ``times``.

    ``h``, ``gamma`` and ``rho0`` broadcast, so a batch of Hamiltonians of
    shape ``(b, n, n)`` with ``gamma`` of shape ``(b, 1, 1)`` integrates in
    one pass. Output shape is ``(len(times),) + batch + (n, n)``. Between
    recorded times the last step is shortened to land on the target.
    """
    if not step > 0:
        raise ContractError(f"RK4 step must be positive, got {step}")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ContractError("RK4 output times must be non-negative and ascending")
    if times.size and times[-1] / step > MAX_RK4_STEPS:
        raise GridSizeError(f"{times[-1] / step:.3g} RK4 steps exceed the limit of {MAX_RK4_STEPS}")
    h = _as_matrix(h).astype(complex)
    gamma = np.asarray(gamma, dtype=float)
    rho = np.broadcast_to(_as_matrix(rho0).astype(complex), np.broadcast_shapes(
        h.shape, _as_matrix(rho0).shape)).copy()
    out = np.empty((times.size,) + rho.shape, dtype=complex)
    now = 0.0
    for i, t in enumerate(times):
        if t > now:
            rho = _rk4_advance(h, gamma, rho, t - now, step)
            now = t
        out[i] = rho
    return out


def evolve_rk4(h, gamma: float, rho0, t: float, step: float) -> np.ndarray:
    """RK4 solution of the master equation at time ``t``. No renormalisation."""
    if t < 0:
        raise ContractError(f"evolution time must be non-negative, got {t}")
    return rk4_trajectory(h, gamma, rho0, [t], step)[0]
