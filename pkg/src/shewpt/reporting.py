"""Run reports, reference-comparison rows, and dependency-free SVG plots.

Data files carry no timestamps so identical inputs give byte-identical
output; wall-clock metadata goes to a ``.meta.json`` sidecar instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

__all__ = [
    "ComparisonRow",
    "RunReport",
    "waveform_svg",
    "spectrum_svg",
    "write_json",
    "write_meta_sidecar",
]


@dataclass(frozen=True)
class ComparisonRow:
    """One reference-vs-computed line; pass/fail is derived, never set."""

    name: str
    reference: float
    computed: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.computed - self.reference) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "reference": self.reference,
            "computed": self.computed,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class RunReport:
    command: str
    inputs: dict
    outputs: dict = field(default_factory=dict)
    comparisons: list[ComparisonRow] = field(default_factory=list)

    def add_comparison(self, name, reference, computed, tolerance):
        self.comparisons.append(ComparisonRow(name, reference, computed, tolerance))

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.comparisons)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "comparisons": [row.to_dict() for row in self.comparisons],
            "all_passed": self.all_passed,
        }

    def format_text(self) -> str:
        lines = [f"# {self.command}"]
        for key, val in self.outputs.items():
            lines.append(f"  {key}: {val}")
        for row in self.comparisons:
            status = "PASS" if row.passed else "FAIL"
            lines.append(
                f"  [{status}] {row.name}: computed {row.computed:.6g} "
                f"vs reference {row.reference:.6g} (tol {row.tolerance:.3g})"
            )
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def write_meta_sidecar(path, extra=None) -> None:
    meta = {"generated_at": datetime.now(timezone.utc).isoformat()}
    if extra:
        meta.update(extra)
    write_json(meta, str(path) + ".meta.json")


def _svg_header(width, height):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
    )


def waveform_svg(t, v, path, width=800, height=400, title="waveform") -> None:
    """Polyline plot of one waveform period."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    pad = 40
    vmax = max(float(np.max(np.abs(v))), 1e-12)
    x = pad + (t - t[0]) / (t[-1] - t[0]) * (width - 2 * pad)
    y = height / 2 - v / vmax * (height / 2 - pad)
    points = " ".join(f"{xi:.2f},{yi:.2f}" for xi, yi in zip(x, y))
    parts = [_svg_header(width, height)]
    parts.append(
        f'<line x1="{pad}" y1="{height / 2}" x2="{width - pad}" '
        f'y2="{height / 2}" stroke="#999" stroke-width="1"/>\n'
    )
    parts.append(
        f'<polyline points="{points}" fill="none" stroke="#0055aa" '
        f'stroke-width="1.5"/>\n'
    )
    parts.append(f'<text x="{pad}" y="20" font-size="14">{title}</text>\n')
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))


def spectrum_svg(orders, rel_amplitudes, path, width=800, height=400,
                 title="harmonic spectrum") -> None:
    """Bar chart of harmonic amplitudes relative to the fundamental."""
    orders = list(orders)
    rel = np.asarray(rel_amplitudes, dtype=float)
    pad = 40
    bar_w = (width - 2 * pad) / max(len(orders), 1)
    top = max(float(np.max(rel)), 1e-12)
    parts = [_svg_header(width, height)]
    for i, (n, a) in enumerate(zip(orders, rel)):
        h = a / top * (height - 2 * pad)
        x0 = pad + i * bar_w
        parts.append(
            f'<rect x="{x0 + 0.15 * bar_w:.2f}" y="{height - pad - h:.2f}" '
            f'width="{0.7 * bar_w:.2f}" height="{h:.2f}" fill="#aa3300"/>\n'
        )
        if len(orders) <= 40 or n % 5 == 0:
            parts.append(
                f'<text x="{x0 + 0.5 * bar_w:.2f}" y="{height - pad + 14}" '
                f'font-size="10" text-anchor="middle">{n}</text>\n'
            )
    parts.append(f'<text x="{pad}" y="20" font-size="14">{title}</text>\n')
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))
