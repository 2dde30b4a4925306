"""Sweep configuration files.

An INI-style file with sections ``[model]``, ``[initial]``, ``[sweep]`` and
``[output]``. Values are numbers, simple arithmetic on numbers and ``pi``,
comma-separated lists of those, or ``linspace(start, stop, n)``::

    [model]
    e_c1 = 100
    e_c2 = 100
    e_j1 = 30
    e_j2 = 30

    [initial]
    xi = pi/2

    [sweep]
    gamma = 0.01, 0.1, 0.5
    t_grid = 0, 20, 401

    [output]
    outputs = csv, svg
    title = Mutual entropy vs decoherence rate

Instead of energies, ``[model]`` may give a capacitance network
(``c_sigma1``, ``c_sigma2``, ``c_m``, ``c_g1``, ``c_g2``, ``c_p``,
``v_g1``, ``v_g2``, ``v_p``, ``e_charge``) together with ``e_j1``/``e_j2``.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import fields

import numpy as np

from .charge import CapacitanceSpec, QubitEnergies, energies_from_capacitances
from .errors import ConfigError, ContractError, SingularGeometryError
from .sweep import SweepConfig

ENERGY_KEYS = {f.name for f in fields(QubitEnergies)}
CAPACITANCE_KEYS = {f.name for f in fields(CapacitanceSpec)}
SWEEP_KEYS = {"gamma", "e_m", "e_j1", "e_j2", "t_grid"}
OUTPUT_KEYS = {"outputs", "title", "plot"}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow,
        ast.USub: operator.neg, ast.UAdd: operator.pos}
_LINSPACE = re.compile(r"^linspace\((.*)\)$")


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    try:
        return _eval(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def parse_values(text: str) -> list:
    text = text.strip()
    m = _LINSPACE.match(text)
    if m:
        args = [parse_number(a) for a in m.group(1).split(",")]
        if len(args) != 3 or args[2] != int(args[2]) or args[2] < 1:
            raise ConfigError(f"linspace needs (start, stop, n), got {text!r}")
        return np.linspace(args[0], args[1], int(args[2])).tolist()
    return [parse_number(part) for part in text.split(",") if part.strip()]


def _scalar(section: str, key: str, text: str) -> float:
    values = parse_values(text)
    if len(values) != 1:
        raise ConfigError(f"[{section}] {key} takes a single value, got {text!r}")
    return values[0]


def _check_keys(parser, section, allowed):
    if not parser.has_section(section):
        return {}
    items = dict(parser.items(section))
    unknown = sorted(set(items) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {', '.join(unknown)}")
    return items


def config_from_string(text: str) -> tuple:
    """Parse config text into ``(SweepConfig, plot_kind)``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    extra = sorted(set(parser.sections()) - {"model", "initial", "sweep", "output"})
    if extra:
        raise ConfigError(f"unknown sections: {', '.join(extra)}")

    model_items = _check_keys(parser, "model", ENERGY_KEYS | CAPACITANCE_KEYS)
    initial = _check_keys(parser, "initial", {"xi"})
    sweep = _check_keys(parser, "sweep", SWEEP_KEYS)
    output = _check_keys(parser, "output", OUTPUT_KEYS)

    model_values = {k: _scalar("model", k, v) for k, v in model_items.items()}
    try:
        cap = {k: v for k, v in model_values.items() if k in CAPACITANCE_KEYS}
        if cap:
            clash = sorted(set(model_values) & {"e_c1", "e_c2", "e_m", "n_g1", "n_g2"})
            if clash:
                raise ConfigError(f"[model] mixes capacitances with energies: {', '.join(clash)}")
            model = energies_from_capacitances(
                CapacitanceSpec(**cap), model_values.get("e_j1", 0.0),
                model_values.get("e_j2", 0.0))
        else:
            model = QubitEnergies(**model_values)
    except (ContractError, SingularGeometryError) as exc:
        raise ConfigError(str(exc)) from exc

    kwargs = {"model": model}
    if "xi" in initial:
        kwargs["xi"] = parse_values(initial["xi"])
    for key in ("gamma", "e_m", "e_j1", "e_j2"):
        if key in sweep:
            kwargs[key] = parse_values(sweep[key])
    if "e_m" not in kwargs and ("e_m" in model_values or cap):
        kwargs["e_m"] = None
    if "t_grid" in sweep:
        grid = parse_values(sweep["t_grid"])
        if len(grid) != 3:
            raise ConfigError("t_grid takes three values: t_start, t_end, n_points")
        kwargs["t_grid"] = tuple(grid)
    if "outputs" in output:
        kwargs["outputs"] = tuple(o.strip() for o in output["outputs"].split(",") if o.strip())
    if "title" in output:
        kwargs["title"] = output["title"].strip()
    plot = output.get("plot", "auto").strip()
    if plot not in ("auto", "lines", "heatmap"):
        raise ConfigError(f"plot must be auto, lines or heatmap, got {plot!r}")
    return SweepConfig(**kwargs), plot


def load_config(path) -> tuple:
    with open(path, encoding="utf-8") as fh:
        return config_from_string(fh.read())
