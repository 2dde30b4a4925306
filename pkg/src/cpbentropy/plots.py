"""Static SVG charts written as plain text; no plotting library needed.

Output is a pure function of the input data, so identical results give
byte-identical files.
"""

from __future__ import annotations

import math
from html import escape

import numpy as np

from .errors import ContractError
from .sweep import PARAM_AXES, SweepResult

WIDTH, HEIGHT = 760, 460
MARGIN = dict(left=78, right=170, top=48, bottom=62)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
# viridis sampled at 0, .25, .5, .75, 1
_CMAP = np.array([[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]], float)

AXIS_LABELS = {"t": "scaled time t", "e_m": "E_m", "gamma": "γ", "xi": "ξ",
               "e_j1": "E_J1", "e_j2": "E_J2"}
DASHES = ("", "6,3", "2,3", "8,3,2,3")


def _f(x: float) -> str:
    return f"{x:.2f}"


def nice_ticks(lo: float, hi: float, target: int = 5) -> list:
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    k = 0
    while first + k * step <= hi + 1e-9 * step:
        ticks.append(round(first + k * step, 12))
        k += 1
    return ticks


def _tick_label(v: float) -> str:
    return f"{v:.6g}" if v != 0 else "0"


def _padded_range(values) -> tuple:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        pad = 0.5 * max(abs(hi), 1.0)
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi

    def sx(self, x):
        return self.x0 + (x - self.xlo) / (self.xhi - self.xlo) * (self.x1 - self.x0)

    def sy(self, y):
        return self.y0 + (y - self.ylo) / (self.yhi - self.ylo) * (self.y1 - self.y0)

    def axes(self, title, xlabel, ylabel) -> list:
        out = [
            f'<rect x="{self.x0}" y="{self.y1}" width="{self.x1 - self.x0}" '
            f'height="{self.y0 - self.y1}" fill="none" stroke="#333" stroke-width="1"/>',
            f'<text x="{(self.x0 + self.x1) / 2:.1f}" y="28" text-anchor="middle" '
            f'font-size="16">{escape(title)}</text>',
            f'<text x="{(self.x0 + self.x1) / 2:.1f}" y="{HEIGHT - 16}" text-anchor="middle" '
            f'font-size="13">{escape(xlabel)}</text>',
            f'<text x="18" y="{(self.y0 + self.y1) / 2:.1f}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 18 {(self.y0 + self.y1) / 2:.1f})">{escape(ylabel)}</text>',
        ]
        for v in nice_ticks(self.xlo, self.xhi):
            x = _f(self.sx(v))
            out.append(f'<line x1="{x}" y1="{self.y0}" x2="{x}" y2="{self.y0 + 5}" stroke="#333"/>')
            out.append(f'<text x="{x}" y="{self.y0 + 19}" text-anchor="middle" '
                       f'font-size="11">{_tick_label(v)}</text>')
        for v in nice_ticks(self.ylo, self.yhi):
            y = _f(self.sy(v))
            out.append(f'<line x1="{self.x0 - 5}" y1="{y}" x2="{self.x0}" y2="{y}" stroke="#333"/>')
            out.append(f'<text x="{self.x0 - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
                       f'font-size="11">{_tick_label(v)}</text>')
        return out


def _document(body: list) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="DejaVu Sans, Arial, sans-serif">')
    return "\n".join(['<?xml version="1.0" encoding="UTF-8"?>', head,
                      f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>', *body, "</svg>", ""])


def line_chart(x, series, title="", xlabel="", ylabel="") -> str:
    """``series`` is a list of ``(label, y)`` pairs sharing the abscissa ``x``."""
    x = np.asarray(x, dtype=float)
    xlo, xhi = float(x.min()), float(x.max())
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    ylo, yhi = _padded_range(np.concatenate([np.asarray(y, float) for _, y in series]))
    fr = _Frame(xlo, xhi, ylo, yhi)
    body = fr.axes(title, xlabel, ylabel)
    for k, (label, y) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        dash = DASHES[(k // len(PALETTE)) % len(DASHES)]
        pts = " ".join(f"{_f(fr.sx(a))},{_f(fr.sy(b))}"
                       for a, b in zip(x, np.asarray(y, float)) if math.isfinite(b))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.4"{dash_attr} '
                    f'points="{pts}"/>')
        ly = MARGIN["top"] + 12 + 20 * k
        lx = WIDTH - MARGIN["right"] + 14
        body.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" '
                    f'stroke-width="2"{dash_attr}/>')
        body.append(f'<text x="{lx + 30}" y="{ly}" dominant-baseline="middle" '
                    f'font-size="12">{escape(label)}</text>')
    return _document(body)


def _color(u: float) -> str:
    u = min(max(u, 0.0), 1.0) * (len(_CMAP) - 1)
    i = min(int(u), len(_CMAP) - 2)
    c = _CMAP[i] + (u - i) * (_CMAP[i + 1] - _CMAP[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def _edges(v: np.ndarray) -> np.ndarray:
    if v.size == 1:
        return np.array([v[0] - 0.5, v[0] + 0.5])
    mid = 0.5 * (v[1:] + v[:-1])
    return np.concatenate([[v[0] - (mid[0] - v[0])], mid, [v[-1] + (v[-1] - mid[-1])]])


def heatmap(x, y, z, title="", xlabel="", ylabel="", zlabel="") -> str:
    """Colour map of ``z`` with shape ``(len(y), len(x))``."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    xe, ye = _edges(x), _edges(y)
    fr = _Frame(xe[0], xe[-1], ye[0], ye[-1])
    finite = z[np.isfinite(z)]
    zlo, zhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if zhi - zlo < 1e-12:
        zlo, zhi = zlo - 0.5, zhi + 0.5
    body = []
    for j in range(y.size):
        ya, yb = fr.sy(ye[j]), fr.sy(ye[j + 1])
        for i in range(x.size):
            xa, xb = fr.sx(xe[i]), fr.sx(xe[i + 1])
            val = z[j, i]
            fill = _color((val - zlo) / (zhi - zlo)) if math.isfinite(val) else "#cccccc"
            body.append(f'<rect x="{_f(xa)}" y="{_f(yb)}" width="{_f(xb - xa + 0.3)}" '
                        f'height="{_f(ya - yb + 0.3)}" fill="{fill}"/>')
    body += fr.axes(title, xlabel, ylabel)

    bx, bw = WIDTH - MARGIN["right"] + 24, 18
    top, bottom = fr.y1, fr.y0
    steps = 64
    for s in range(steps):
        ya = bottom - (bottom - top) * s / steps
        yb = bottom - (bottom - top) * (s + 1) / steps
        body.append(f'<rect x="{bx}" y="{_f(yb)}" width="{bw}" height="{_f(ya - yb + 0.3)}" '
                    f'fill="{_color((s + 0.5) / steps)}"/>')
    body.append(f'<rect x="{bx}" y="{top}" width="{bw}" height="{bottom - top}" fill="none" stroke="#333"/>')
    for v in nice_ticks(zlo, zhi):
        yy = _f(bottom - (v - zlo) / (zhi - zlo) * (bottom - top))
        body.append(f'<line x1="{bx + bw}" y1="{yy}" x2="{bx + bw + 4}" y2="{yy}" stroke="#333"/>')
        body.append(f'<text x="{bx + bw + 7}" y="{yy}" dominant-baseline="middle" '
                    f'font-size="11">{_tick_label(v)}</text>')
    body.append(f'<text x="{bx + bw / 2}" y="{top - 10}" text-anchor="middle" '
                f'font-size="12">{escape(zlabel)}</text>')
    return _document(body)


def _series_label(name: str, value: float) -> str:
    return f"{AXIS_LABELS[name]} = {value:.6g}"


def render_svg(res: SweepResult, kind: str, path, quantity: str = "I") -> None:
    """Plot a sweep: ``lines`` draws one curve of ``quantity`` vs t per value of
    the varied parameter; ``heatmap`` maps it over t and the varied parameter.

    Both need exactly one varied parameter besides time. ``lines`` also
    accepts a single trajectory with nothing varied.
    """
    varied = res.varied_axes()
    grid = res.grid(quantity)
    t = np.asarray(res.axes["t"])
    zlabel = "I (bits)" if quantity == "I" else quantity
    if kind == "lines":
        if len(varied) > 1:
            raise ContractError(f"lines plot needs at most one varied parameter, got {varied}")
        if varied:
            axis = PARAM_AXES.index(varied[0])
            curves = np.moveaxis(grid, axis, 0).reshape(len(res.axes[varied[0]]), t.size)
            series = [(_series_label(varied[0], v), c) for v, c in zip(res.axes[varied[0]], curves)]
        else:
            series = [(zlabel, grid.reshape(t.size))]
        svg = line_chart(t, series, res.title, AXIS_LABELS["t"], zlabel)
    elif kind == "heatmap":
        if len(varied) != 1:
            raise ContractError(f"heatmap needs exactly one varied parameter besides t, got {varied}")
        axis = PARAM_AXES.index(varied[0])
        values = np.asarray(res.axes[varied[0]])
        z = np.moveaxis(grid, axis, 0).reshape(values.size, t.size)
        order = np.argsort(values, kind="stable")
        svg = heatmap(t, values[order], z[order], res.title, AXIS_LABELS["t"],
                      AXIS_LABELS[varied[0]], zlabel)
    else:
        raise ContractError(f"unknown plot kind {kind!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
