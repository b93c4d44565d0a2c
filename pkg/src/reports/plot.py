"""
Minimal SVG scatter plot of stability-curve points with the fitted model
error = C |log delta_C|^(-lambda).
"""

from typing import Dict, List, Optional, Sequence, Tuple
import math

WIDTH = 640
HEIGHT = 420
MARGIN = 60


def _log_range(values: Sequence[float]) -> Tuple[float, float]:
    logs = [math.log10(v) for v in values]
    lo, hi = min(logs), max(logs)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _scale(value: float, lo: float, hi: float, start: float, end: float) -> float:
    return start + (math.log10(value) - lo) / (hi - lo) * (end - start)


def curve_svg(rows: List[Dict[str, float]], fit: Optional[Dict[str, float]] = None,
              title: str = "Stability curve") -> str:
    """log-log scatter of (delta_c, h1_error); points with nonpositive values are skipped."""
    points = [(r['delta_c'], r['h1_error']) for r in rows
              if r['delta_c'] > 0 and r['h1_error'] > 0
              and math.isfinite(r['delta_c']) and math.isfinite(r['h1_error'])]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13">delta_C (log)</text>',
        f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2})">H1 error (log)</text>',
    ]
    if not points:
        parts.append(f'<text x="{WIDTH / 2}" y="{HEIGHT / 2}" text-anchor="middle" '
                     f'font-family="sans-serif">no usable points</text>')
        parts.append('</svg>')
        return "\n".join(parts)

    xlo, xhi = _log_range([p[0] for p in points])
    ylo, yhi = _log_range([p[1] for p in points])
    for x, y in points:
        cx = _scale(x, xlo, xhi, MARGIN, WIDTH - MARGIN)
        cy = _scale(y, ylo, yhi, HEIGHT - MARGIN, MARGIN)
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="#1976D2"/>')

    if fit and math.isfinite(fit.get('lambda', float('nan'))) and math.isfinite(fit.get('log_C', float('nan'))):
        coords = []
        for i in range(41):
            x = 10 ** (xlo + (xhi - xlo) * i / 40)
            if x >= 1.0:
                continue
            y = math.exp(fit['log_C']) * abs(math.log(x)) ** (-fit['lambda'])
            if y <= 0:
                continue
            coords.append(f"{_scale(x, xlo, xhi, MARGIN, WIDTH - MARGIN):.2f},"
                          f"{_scale(y, ylo, yhi, HEIGHT - MARGIN, MARGIN):.2f}")
        if coords:
            parts.append(f'<polyline points="{" ".join(coords)}" fill="none" stroke="#E53935" '
                         f'stroke-width="2"/>')
        parts.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN - 10}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="13">lambda = {fit["lambda"]:.3f}</text>')
    parts.append('</svg>')
    return "\n".join(parts)
