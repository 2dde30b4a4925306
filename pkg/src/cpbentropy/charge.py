"""Charge-basis Hamiltonians for two capacitively coupled Cooper pair boxes.

Energies share one dimensionless unit and hbar = 1. The qubit states are the
charge states |g> = |n=0> and |e> = |n=1> near the co-degeneracy point
n_g1 = n_g2 = 0.5.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, GridSizeError, SingularGeometryError
from .linalg import eig_hermitian, hermitize

MAX_LATTICE_STATES = 200 ** 2

# (n1, n2) of the four-level basis b0..b3
FOUR_LEVEL_CHARGES = ((0, 0), (0, 1), (1, 0), (1, 1))


class RegimeWarning(UserWarning):
    """Parameters lie outside E_J1, E_J2, |E_m| < min(E_c1, E_c2)."""


@dataclass(frozen=True)
class QubitEnergies:
    e_c1: float = 100.0
    e_c2: float = 100.0
    e_m: float = 1.0
    e_j1: float = 30.0
    e_j2: float = 30.0
    n_g1: float = 0.5
    n_g2: float = 0.5

    def __post_init__(self):
        if not (self.e_c1 > 0 and self.e_c2 > 0):
            raise ContractError(f"charging energies must be positive, got {self.e_c1}, {self.e_c2}")
        if self.e_j1 < 0 or self.e_j2 < 0:
            raise ContractError(f"Josephson energies must be non-negative, got {self.e_j1}, {self.e_j2}")

    @property
    def regime_warning(self) -> bool:
        """True when the four-level truncation is not expected to hold."""
        ec = min(self.e_c1, self.e_c2)
        return not (self.e_j1 < ec and self.e_j2 < ec and abs(self.e_m) < ec)

    def replace(self, **changes) -> "QubitEnergies":
        fields = dict(self.__dict__)
        fields.update(changes)
        return QubitEnergies(**fields)


@dataclass(frozen=True)
class CapacitanceSpec:
    c_sigma1: float
    c_sigma2: float
    c_m: float = 0.0
    c_g1: float = 1.0
    c_g2: float = 1.0
    c_p: float = 0.0
    v_g1: float = 0.0
    v_g2: float = 0.0
    v_p: float = 0.0
    e_charge: float = 1.0

    def __post_init__(self):
        positive = dict(c_sigma1=self.c_sigma1, c_sigma2=self.c_sigma2,
                        c_g1=self.c_g1, c_g2=self.c_g2, e_charge=self.e_charge)
        for name, value in positive.items():
            if not value > 0:
                raise ContractError(f"{name} must be positive, got {value}")
        if self.c_m < 0 or self.c_p < 0:
            raise ContractError("c_m and c_p must be non-negative")


def energies_from_capacitances(spec: CapacitanceSpec, e_j1: float = 0.0,
                               e_j2: float = 0.0) -> QubitEnergies:
    """Charging, coupling energies and gate charges of a capacitance network.

    The Josephson energies are not fixed by the capacitances and are passed
    through unchanged.
    """
    det = spec.c_sigma1 * spec.c_sigma2 - spec.c_m ** 2
    if not det > 0:
        raise SingularGeometryError(
            f"C_sigma1*C_sigma2 - C_m^2 = {det} must be positive")
    q2 = 4.0 * spec.e_charge ** 2
    two_e = 2.0 * spec.e_charge
    return QubitEnergies(
        e_c1=q2 * spec.c_sigma2 / (2.0 * det),
        e_c2=q2 * spec.c_sigma1 / (2.0 * det),
        e_m=q2 * spec.c_m / det,
        e_j1=e_j1,
        e_j2=e_j2,
        n_g1=(spec.c_g1 * spec.v_g1 + spec.c_p * spec.v_p) / two_e,
        n_g2=(spec.c_g2 * spec.v_g2 + spec.c_p * spec.v_p) / two_e,
    )


def eta(p: QubitEnergies, n1, n2):
    """Electrostatic energy of the charge configuration (n1, n2)."""
    d1 = p.n_g1 - np.asarray(n1)
    d2 = p.n_g2 - np.asarray(n2)
    out = p.e_c1 * d1 ** 2 + p.e_c2 * d2 ** 2 + p.e_m * d1 * d2
    return float(out) if np.ndim(out) == 0 else out


def charge_window(n_max: int) -> np.ndarray:
    """Charges -n_max .. n_max+1, so 0 and 1 are interior for n_max >= 1."""
    return np.arange(-n_max, n_max + 2)


def lattice_index(n_max: int, n1: int, n2: int) -> int:
    w = 2 * n_max + 2
    return (n1 + n_max) * w + (n2 + n_max)


def build_lattice_hamiltonian(p: QubitEnergies, n_max: int) -> np.ndarray:
    """Hamiltonian on the truncated charge lattice |n1, n2>, row-major in (n1, n2).

    Tunnelling couples neighbouring charges with amplitude -E_J/2; hops that
    would leave the window are dropped.
    """
    if n_max < 1:
        raise ContractError(f"n_max must be >= 1, got {n_max}")
    ns = charge_window(n_max)
    w = ns.size
    if w * w > MAX_LATTICE_STATES:
        raise GridSizeError(f"{w * w} lattice states exceed the limit of {MAX_LATTICE_STATES}")
    n1, n2 = np.meshgrid(ns, ns, indexing="ij")
    h = np.diag(eta(p, n1, n2).ravel()).astype(complex)
    idx = np.arange(w * w).reshape(w, w)
    # n1 -> n1 + 1 moves one row block down
    h[idx[:-1, :].ravel(), idx[1:, :].ravel()] = -p.e_j1 / 2
    h[idx[:, :-1].ravel(), idx[:, 1:].ravel()] = -p.e_j2 / 2
    upper = np.triu(h, 1)
    return hermitize(np.diag(np.diag(h)) + upper + upper.conj().T)


def build_four_level_hamiltonian(p: QubitEnergies) -> np.ndarray:
    """4x4 Hamiltonian in the basis |g1g2>, |g1e2>, |e1g2>, |e1e2>."""
    if p.regime_warning:
        warnings.warn(
            f"four-level truncation outside its regime: E_J=({p.e_j1}, {p.e_j2}), "
            f"E_m={p.e_m}, E_c=({p.e_c1}, {p.e_c2})", RegimeWarning, stacklevel=2)
    diag = [eta(p, n1, n2) for n1, n2 in FOUR_LEVEL_CHARGES]
    h = np.diag(diag).astype(complex)
    h[0, 2] = h[2, 0] = h[1, 3] = h[3, 1] = -p.e_j1 / 2
    h[0, 1] = h[1, 0] = h[2, 3] = h[3, 2] = -p.e_j2 / 2
    return h


@dataclass(frozen=True)
class BandStructure:
    n_g_grid: np.ndarray
    bands: np.ndarray  # shape (len(n_g_grid), levels)


def band_energies(p: QubitEnergies, n_g_grid, levels: int = 4, n_max: int = 4) -> BandStructure:
    """Lowest ``levels`` lattice eigenvalues with both gate charges set to each grid value."""
    grid = np.asarray(n_g_grid, dtype=float).ravel()
    dim = (2 * n_max + 2) ** 2
    if not 1 <= levels <= dim:
        raise ContractError(f"levels must lie in [1, {dim}], got {levels}")
    bands = np.empty((grid.size, levels))
    for i, ng in enumerate(grid):
        h = build_lattice_hamiltonian(p.replace(n_g1=ng, n_g2=ng), n_max)
        bands[i] = eig_hermitian(h).values[:levels]
    return BandStructure(n_g_grid=grid, bands=bands)
