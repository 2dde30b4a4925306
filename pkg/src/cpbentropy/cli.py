"""Command-line entry point.

Exit codes: 0 success, 1 usage or config error, 2 validation failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .charge import QubitEnergies, band_energies, build_four_level_hamiltonian, build_lattice_hamiltonian
from .config import load_config
from .errors import ContractError, SweepPointError
from .linalg import eig_hermitian
from .plots import line_chart, render_svg
from .sweep import SweepConfig, run_sweep, validate
from .tables import write_csv, write_table

log = logging.getLogger("cpbentropy")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", type=Path, help="sweep config file (INI format)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes for the sweep")
    p.add_argument("--format", choices=("csv", "svg", "both"), default=None,
                   help="which files to write (default: outputs listed in the config)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpbentropy", description=(
        "Mutual entropy dynamics of two coupled Cooper pair boxes under phase decoherence."))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="one trajectory (every axis single-valued)")
    _common(p)
    p = sub.add_parser("sweep", help="full parameter sweep")
    _common(p)
    p.add_argument("--plot", choices=("auto", "lines", "heatmap"), default=None)

    p = sub.add_parser("bands", help="charge-lattice energy bands vs gate charge")
    _common(p)
    p.add_argument("--ng", type=float, nargs=3, default=(-1.0, 2.0, 301),
                   metavar=("START", "STOP", "N"))
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--n-max", type=int, default=4)

    p = sub.add_parser("compare-lattice", help="four-level vs lattice spectra")
    _common(p)
    p.add_argument("--n-max", type=int, nargs="+", default=[1, 2, 3, 4])

    p = sub.add_parser("validate", help="run the invariant suite over the sweep grid")
    _common(p)
    p.add_argument("--rk4-step", type=float, default=1e-3)
    return parser


def _load(args):
    if args.config is None:
        return SweepConfig(), "auto"
    return load_config(args.config)


def _formats(args, cfg) -> set:
    if args.format == "both":
        return {"csv", "svg"}
    if args.format:
        return {args.format}
    return {o for o in cfg.outputs if o in ("csv", "svg")}


def _write_sweep(res, args, cfg, stem, plot):
    args.out.mkdir(parents=True, exist_ok=True)
    fmts = _formats(args, cfg)
    if "csv" in fmts:
        write_csv(res, args.out / f"{stem}.csv")
        log.info("wrote %s", args.out / f"{stem}.csv")
    if "svg" in fmts:
        render_svg(res, "lines" if plot == "auto" else plot, args.out / f"{stem}.svg")
        log.info("wrote %s", args.out / f"{stem}.svg")


def _run_validation(cfg, args, step=1e-3) -> int:
    report = validate(cfg, rk4_step=step)
    text = report.format()
    print(text)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "validation.txt").write_text(text + "\n", encoding="utf-8")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_simulate(args) -> int:
    cfg, plot = _load(args)
    if args.config is None:
        cfg = SweepConfig(xi=np.pi / 2, gamma=0.0, e_m=1.0)
    if cfg.n_points != cfg.t_grid[2]:
        raise ContractError("simulate needs single values for every parameter; use sweep")
    res = run_sweep(cfg)
    _write_sweep(res, args, cfg, "trajectory", "lines")
    print(f"{res.n_rows} samples; I(t_end) = {res.columns['I'][-1]:.6f} bits")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, plot = _load(args)
    res = run_sweep(cfg, workers=args.workers)
    _write_sweep(res, args, cfg, "sweep", args.plot or plot)
    print(f"{res.n_rows} rows over axes {', '.join(res.varied_axes()) or '(none)'}")
    if "validate" in cfg.outputs:
        return _run_validation(cfg, args)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg, _ = _load(args)
    return _run_validation(cfg, args, args.rk4_step)


def _model(cfg) -> QubitEnergies:
    ax = cfg.axes()
    return cfg.model.replace(e_m=ax["e_m"][0], e_j1=ax["e_j1"][0], e_j2=ax["e_j2"][0])


def cmd_bands(args) -> int:
    cfg, _ = _load(args)
    model = _model(cfg)
    start, stop, n = args.ng
    grid = np.linspace(start, stop, int(n))
    bs = band_energies(model, grid, args.levels, args.n_max)
    args.out.mkdir(parents=True, exist_ok=True)
    fmts = _formats(args, cfg) or {"csv"}
    header = ["n_g"] + [f"E_{k}" for k in range(args.levels)]
    if "csv" in fmts:
        write_table(args.out / "bands.csv", header, np.column_stack([grid, bs.bands]))
    if "svg" in fmts:
        series = [(f"E_{k}", bs.bands[:, k]) for k in range(args.levels)]
        svg = line_chart(grid, series, "Energy bands, n_g1 = n_g2 = n_g", "gate charge n_g", "energy")
        (args.out / "bands.svg").write_text(svg, encoding="utf-8")
    print(f"{grid.size} gate-charge points, {args.levels} levels, n_max = {args.n_max}")
    return EXIT_OK


def cmd_compare_lattice(args) -> int:
    cfg, _ = _load(args)
    model = _model(cfg)
    four = eig_hermitian(build_four_level_hamiltonian(model)).values
    spread = four[-1] - four[0]
    print("four-level: " + "  ".join(f"{e:.9g}" for e in four))
    rows = []
    for n_max in args.n_max:
        lat = eig_hermitian(build_lattice_hamiltonian(model, n_max)).values[:4]
        dev = np.abs(lat - four).max() / spread if spread > 0 else np.abs(lat - four).max()
        rows.append([n_max, *lat, dev])
        print(f"n_max={n_max}: " + "  ".join(f"{e:.9g}" for e in lat)
              + f"   max deviation / spread = {dev:.3e}")
    if args.format in ("csv", "both"):
        args.out.mkdir(parents=True, exist_ok=True)
        write_table(args.out / "compare_lattice.csv",
                    ["n_max", "E_0", "E_1", "E_2", "E_3", "rel_dev"], rows)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "bands": cmd_bands,
            "compare-lattice": cmd_compare_lattice, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except (ContractError, SweepPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
