"""Parameter sweeps over the coupled-qubit model and the invariant checker."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .charge import QubitEnergies, build_four_level_hamiltonian
from .dynamics import Propagator, make_initial_state, rk4_trajectory
from .entropy import RECORD_FIELDS, observe_many
from .errors import ConfigError, GridSizeError, SweepPointError

PARAM_AXES = ("e_m", "gamma", "xi", "e_j1", "e_j2")
CSV_COLUMNS = ("t",) + PARAM_AXES + RECORD_FIELDS
MAX_GRID_POINTS = 10 ** 7
OUTPUT_KINDS = ("csv", "svg", "validate")


def _as_axis(name, value) -> tuple:
    if value is None:
        return None
    values = tuple(float(v) for v in np.atleast_1d(value))
    if not values:
        raise ConfigError(f"axis {name!r} is empty")
    return values


@dataclass(frozen=True)
class SweepConfig:
    """Declarative sweep grid.

    ``e_m``, ``e_j1`` and ``e_j2`` override the model's values when given.
    Scalars are accepted anywhere a list is and become one-point axes.
    The defaults are the invariant-check grid: E_J1 = E_J2 = 30 with
    E_c1 = E_c2 = 100.
    """

    model: QubitEnergies = field(default_factory=QubitEnergies)
    xi: tuple = (0.0, math.pi / 4, math.pi / 2)
    gamma: tuple = (0.0, 0.01, 0.1, 0.5)
    e_m: tuple | None = (0.0, 1.0, 5.0)
    e_j1: tuple | None = None
    e_j2: tuple | None = None
    t_grid: tuple = (0.0, 20.0, 201)
    outputs: tuple = ("csv",)
    title: str = "Quantum mutual entropy"

    def __post_init__(self):
        for name in PARAM_AXES:
            object.__setattr__(self, name, _as_axis(name, getattr(self, name)))
        t0, t1, n = self.t_grid
        if not (t1 > t0 >= 0):
            raise ConfigError(f"t_grid needs t_end > t_start >= 0, got {self.t_grid}")
        if int(n) != n or n < 2:
            raise ConfigError(f"t_grid needs an integer n_points >= 2, got {n}")
        object.__setattr__(self, "t_grid", (float(t0), float(t1), int(n)))
        if any(not 0 <= x <= math.pi for x in self.xi):
            raise ConfigError("xi values must lie in [0, pi]")
        if any(g < 0 for g in self.gamma):
            raise ConfigError("gamma values must be non-negative")
        outputs = tuple(self.outputs)
        bad = [o for o in outputs if o not in OUTPUT_KINDS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}; choose from {OUTPUT_KINDS}")
        object.__setattr__(self, "outputs", outputs)
        if self.n_points > MAX_GRID_POINTS:
            raise GridSizeError(f"sweep has {self.n_points} points, limit is {MAX_GRID_POINTS}")

    def axes(self) -> dict:
        """Parameter axes in row order, model defaults filled in."""
        m = self.model
        return {
            "e_m": self.e_m if self.e_m is not None else (m.e_m,),
            "gamma": self.gamma,
            "xi": self.xi,
            "e_j1": self.e_j1 if self.e_j1 is not None else (m.e_j1,),
            "e_j2": self.e_j2 if self.e_j2 is not None else (m.e_j2,),
        }

    def times(self) -> np.ndarray:
        t0, t1, n = self.t_grid
        return np.linspace(t0, t1, n)

    @property
    def n_points(self) -> int:
        return math.prod(len(v) for v in self.axes().values()) * self.t_grid[2]

    def points(self) -> list:
        """Every parameter combination as a dict, lexicographic in :data:`PARAM_AXES`."""
        axes = self.axes()
        return [dict(zip(axes, combo)) for combo in itertools.product(*axes.values())]


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Flat results table; one row per (parameter point, time).

    Rows run lexicographically over e_m, gamma, xi, e_j1, e_j2 with time
    varying fastest.
    """

    columns: dict
    axes: dict
    title: str = ""

    @property
    def n_rows(self) -> int:
        return len(self.columns["t"])

    def varied_axes(self) -> list:
        return [k for k in PARAM_AXES if len(self.axes[k]) > 1]

    def grid(self, name: str = "I") -> np.ndarray:
        """Column reshaped to ``(len(e_m), len(gamma), ..., len(t))``."""
        shape = tuple(len(self.axes[k]) for k in PARAM_AXES) + (len(self.axes["t"]),)
        return np.asarray(self.columns[name]).reshape(shape)

    @classmethod
    def from_columns(cls, columns: dict, title: str = "") -> "SweepResult":
        """Rebuild axes from a flat table by first appearance of each value."""
        axes = {k: tuple(dict.fromkeys(np.asarray(columns[k]).tolist())) for k in CSV_COLUMNS[:6]}
        expected = math.prod(len(v) for v in axes.values())
        if expected != len(columns["t"]):
            raise ConfigError(
                f"table with {len(columns['t'])} rows is not a full grid ({expected} expected)")
        return cls(columns=dict(columns), axes=axes, title=title)

    def equals(self, other: "SweepResult") -> bool:
        """Bit-exact comparison of every column."""
        return all(
            np.array_equal(np.asarray(self.columns[k]), np.asarray(other.columns[k]))
            for k in CSV_COLUMNS)


def trajectory_states(model: QubitEnergies, point: dict, times, propagator_factory=None):
    """(H, states) for one parameter point, states shaped ``(len(times), 4, 4)``."""
    p = model.replace(e_m=point["e_m"], e_j1=point["e_j1"], e_j2=point["e_j2"])
    h = build_four_level_hamiltonian(p)
    factory = propagator_factory or Propagator.from_hamiltonian
    prop = factory(h, point["gamma"])
    rho0 = make_initial_state(point["xi"])
    return h, prop.evolve_many(rho0, times)


def _trajectory_columns(task) -> dict:
    model, point, times = task
    try:
        h, states = trajectory_states(model, point, times)
        return observe_many(h, states, times)
    except Exception as exc:
        raise SweepPointError(point, exc) from exc


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Evaluate every grid point. Output is independent of ``workers``."""
    times = cfg.times()
    points = cfg.points()
    tasks = [(cfg.model, pt, times) for pt in points]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (4 * workers))
            parts = list(pool.map(_trajectory_columns, tasks, chunksize=chunk))
    else:
        parts = [_trajectory_columns(task) for task in tasks]

    nt = times.size
    columns = {k: np.empty(len(points) * nt) for k in CSV_COLUMNS}
    for i, (pt, part) in enumerate(zip(points, parts)):
        rows = slice(i * nt, (i + 1) * nt)
        for k in PARAM_AXES:
            columns[k][rows] = pt[k]
        for k in ("t",) + RECORD_FIELDS:
            columns[k][rows] = part[k]
    axes = dict(cfg.axes())
    axes["t"] = tuple(times.tolist())
    return SweepResult(columns=columns, axes=axes, title=cfg.title)


# --- invariant checks -------------------------------------------------------

TOLERANCES = {
    "trace": 1e-10,
    "positivity": 1e-10,
    "energy_conservation": 1e-9,
    "purity_monotonicity": 1e-10,
    "spectrum_invariance": 1e-9,
    "subadditivity": 1e-9,
    "araki_lieb": 1e-9,
    "population_sum": 1e-10,
    "rk4_agreement": 1e-8,
}


@dataclass
class CheckResult:
    name: str
    max_violation: float
    tolerance: float
    samples: int = 0

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_violation) and self.max_violation <= self.tolerance


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name:<22} max violation {c.max_violation:.3e}"
                         f"  (tol {c.tolerance:.0e}, {c.samples} samples)")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _worst(values) -> float:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    if not np.all(np.isfinite(v)):
        return math.inf
    return float(max(v.max(), 0.0))


class _Tracker:
    def __init__(self):
        self.worst = {name: 0.0 for name in TOLERANCES}
        self.count = {name: 0 for name in TOLERANCES}

    def add(self, name, values):
        v = np.asarray(values)
        self.worst[name] = max(self.worst[name], _worst(v))
        self.count[name] += v.size


def validate(cfg: SweepConfig, propagator_factory=None, rk4_step: float = 1e-3,
             rk4_t_max: float = 10.0, rk4_checkpoints: int = 11) -> ValidationReport:
    """Check every dynamical and entropic invariant across the sweep grid.

    The exact propagator is compared against RK4 (step ``rk4_step``) for
    every parameter point at up to ``rk4_checkpoints`` grid times in
    [0, rk4_t_max]. ``propagator_factory(h, gamma)`` replaces the exact
    propagator, which is how the negative-control tests inject a broken one.
    """
    times = cfg.times()
    points = cfg.points()
    track = _Tracker()
    hams, rk4_ref = [], []

    in_window = np.flatnonzero(times <= rk4_t_max + 1e-12)
    stride = max(1, math.ceil((in_window.size - 1) / max(rk4_checkpoints - 1, 1)))
    rk4_idx = in_window[::stride]

    with np.errstate(all="ignore"):
        for pt in points:
            h, states = trajectory_states(cfg.model, pt, times, propagator_factory)
            rho0 = states[0]
            cols = observe_many(h, states, times)
            evals = np.linalg.eigvalsh(0.5 * (states + np.swapaxes(states, -1, -2).conj()))

            track.add("trace", np.abs(np.trace(states, axis1=-2, axis2=-1) - 1.0))
            track.add("positivity", -evals[:, 0])
            track.add("energy_conservation", np.abs(cols["energy"] - cols["energy"][0]))
            if pt["gamma"] > 0:
                track.add("purity_monotonicity", np.diff(cols["purity"]))
            else:
                track.add("spectrum_invariance", np.abs(evals - evals[:1]))
            track.add("subadditivity", np.maximum(
                -cols["I"], cols["I"] - 2 * np.minimum(cols["S_A"], cols["S_B"])))
            track.add("araki_lieb", np.abs(cols["S_A"] - cols["S_B"]) - cols["S_AB"])
            pops = sum(cols[k] for k in ("p_gg", "p_ge", "p_eg", "p_ee"))
            track.add("population_sum", np.abs(pops - 1.0))

            hams.append(h)
            rk4_ref.append(states[rk4_idx])

        if points and rk4_idx.size:
            h_batch = np.stack(hams)
            g_batch = np.array([pt["gamma"] for pt in points])[:, None, None]
            rho_batch = np.stack([make_initial_state(pt["xi"]).matrix for pt in points])
            rk4 = rk4_trajectory(h_batch, g_batch, rho_batch, times[rk4_idx], rk4_step)
            exact = np.stack(rk4_ref, axis=1)
            track.add("rk4_agreement", np.abs(rk4 - exact).max(axis=(-2, -1)))

    checks = [CheckResult(name, track.worst[name], tol, track.count[name])
              for name, tol in TOLERANCES.items()]
    return ValidationReport(checks)
