"""CSV tables with provenance headers and minimal SVG line charts."""

from __future__ import annotations

import csv
import io
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__


def format_number(value: float) -> str:
    """Decimal with 12 significant digits; integers stay integral."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if value == 0:
        return "0"
    return f"{value:.12g}"


@dataclass
class CsvTable:
    """Rectangular table of finite numbers.

    Columns listed in ``nullable`` may hold ``None`` (written as an empty
    cell); columns in ``text`` hold strings.
    """

    header: list[str]
    rows: list[list] = field(default_factory=list)
    provenance: dict[str, str] = field(default_factory=dict)
    nullable: frozenset[str] = frozenset()
    text: frozenset[str] = frozenset()

    def add_row(self, row: Sequence) -> None:
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} values, header has {len(self.header)}")
        checked = []
        for name, value in zip(self.header, row):
            if name in self.text:
                checked.append("" if value is None else str(value))
                continue
            if value is None or (isinstance(value, float) and math.isnan(value) and name in self.nullable):
                if name not in self.nullable:
                    raise ValueError(f"column {name!r} needs a value")
                checked.append(None)
                continue
            if not math.isfinite(value):
                raise ValueError(f"non-finite value {value!r} in column {name!r}")
            checked.append(value)
        self.rows.append(checked)

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]

    def to_text(self) -> str:
        buf = io.StringIO()
        prov = {"version": __version__, **self.provenance}
        for key in sorted(prov):
            buf.write(f"# {key}: {prov[key]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow(
                "" if v is None else v if isinstance(v, str) else format_number(v) for v in row
            )
        return buf.getvalue()

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())
        return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Inverse of :meth:`CsvTable.write`: (provenance, header, raw rows)."""
    prov, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            prov[key.strip()] = value.strip()
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return prov, rows[0], rows[1:]


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks, t = [], start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def svg_line_chart(x: Sequence[float], y: Sequence[float], xlabel: str, ylabel: str, title: str = "",
                   width: int = 480, height: int = 320) -> str:
    """Single-series line chart with axes, ticks and labels."""
    pts = [(a, b) for a, b in zip(x, y) if b is not None and math.isfinite(a) and math.isfinite(b)]
    if not pts:
        raise ValueError("nothing to plot")
    ml, mr, mt, mb = 70, 20, 30, 50
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    if y0 == y1:
        pad = abs(y0) * 0.1 or 1.0
        y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - ml - mr, height - mt - mb

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    axis = dict(stroke="black", **{"stroke-width": "1"})
    ET.SubElement(svg, "line", x1=str(ml), y1=str(mt + ph), x2=str(ml + pw), y2=str(mt + ph), **axis)
    ET.SubElement(svg, "line", x1=str(ml), y1=str(mt), x2=str(ml), y2=str(mt + ph), **axis)
    font = {"font-family": "sans-serif", "font-size": "11"}
    for t in _nice_ticks(x0, x1):
        px = f"{sx(t):.2f}"
        ET.SubElement(svg, "line", x1=px, y1=str(mt + ph), x2=px, y2=str(mt + ph + 4), **axis)
        ET.SubElement(svg, "text", x=px, y=str(mt + ph + 16), **{"text-anchor": "middle"}, **font).text = f"{t:.3g}"
    for t in _nice_ticks(y0, y1):
        py = f"{sy(t):.2f}"
        ET.SubElement(svg, "line", x1=str(ml - 4), y1=py, x2=str(ml), y2=py, **axis)
        ET.SubElement(svg, "text", x=str(ml - 6), y=py, **{"text-anchor": "end", "dominant-baseline": "middle"}, **font).text = f"{t:.3g}"
    ET.SubElement(svg, "text", x=str(ml + pw / 2), y=str(height - 10), **{"text-anchor": "middle"}, **font).text = xlabel
    ET.SubElement(svg, "text", x="14", y=str(mt + ph / 2), transform=f"rotate(-90 14 {mt + ph / 2})",
                  **{"text-anchor": "middle"}, **font).text = ylabel
    if title:
        ET.SubElement(svg, "text", x=str(width / 2), y="18", **{"text-anchor": "middle"}, **font).text = title
    path = " ".join(f"{'M' if i == 0 else 'L'}{sx(a):.2f},{sy(b):.2f}" for i, (a, b) in enumerate(pts))
    ET.SubElement(svg, "path", d=path, fill="none", stroke="#1f5fa8", **{"stroke-width": "1.5"})
    return ET.tostring(svg, encoding="unicode")


def write_svg(path: str | Path, *args, **kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg_line_chart(*args, **kwargs))
    return path
