"""Minimal SVG rendering of the butterfly dataset (no plotting deps).

Each approximant band becomes one horizontal <line> at height p/q; an
optional highlighted convergent chain is drawn on top with type-A bands in
blue and type-B bands in red.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ButterflyRow", "render_butterfly_svg"]

_WIDTH = 900.0
_HEIGHT = 640.0
_MARGIN = 40.0


@dataclass(frozen=True)
class ButterflyRow:
    p: int
    q: int
    index: int
    lower: float
    upper: float
    band_type: str | None = None  # only set on highlighted chain rows


def _x(val: float, e_min: float, e_max: float) -> float:
    span = e_max - e_min or 1.0
    return _MARGIN + (val - e_min) / span * (_WIDTH - 2 * _MARGIN)


def _y(alpha: float) -> float:
    return _HEIGHT - _MARGIN - alpha * (_HEIGHT - 2 * _MARGIN)


def render_butterfly_svg(rows: list[ButterflyRow], chain_rows: list[ButterflyRow],
                         V: float, q_max: int) -> str:
    """Valid standalone SVG; grid bands carry class="band", the highlighted
    chain class="chain"."""
    energies = [r.lower for r in rows + chain_rows] + [r.upper for r in rows + chain_rows]
    e_min = min(energies) if energies else -2.0
    e_max = max(energies) if energies else 2.0
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:g}" height="{_HEIGHT:g}" '
        f'viewBox="0 0 {_WIDTH:g} {_HEIGHT:g}">',
        f'<title>Kohmoto butterfly, V={V:g}, q&lt;={q_max}</title>',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g id="bands" stroke="#333333" stroke-width="0.8">',
    ]
    for r in rows:
        y = _y(r.p / r.q)
        parts.append(
            f'<line class="band" x1="{_x(r.lower, e_min, e_max):.2f}" y1="{y:.2f}" '
            f'x2="{_x(r.upper, e_min, e_max):.2f}" y2="{y:.2f}"/>'
        )
    parts.append("</g>")
    if chain_rows:
        parts.append('<g id="chain" stroke-width="2.2">')
        for r in chain_rows:
            y = _y(r.p / r.q if r.q else 0.0)
            color = "blue" if r.band_type == "A" else "red"
            parts.append(
                f'<line class="chain" stroke="{color}" '
                f'x1="{_x(r.lower, e_min, e_max):.2f}" y1="{y:.2f}" '
                f'x2="{_x(r.upper, e_min, e_max):.2f}" y2="{y:.2f}"/>'
            )
        parts.append("</g>")
    axis_y = _y(0.0) + _MARGIN / 2
    parts.append(
        f'<text x="{_MARGIN}" y="{axis_y:.2f}" font-size="12">'
        f'E in [{e_min:.3f}, {e_max:.3f}], frequency vertical</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
