"""Tiny self-contained SVG line plots (log-scale residual curves).

No external tooling: the experiment figures are polylines with axes, ticks
and a legend, which is all this writer produces.
"""

import math

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62, 16, 34, 46


class Plot:
    """One panel: series of (x, y) polylines, y drawn on a log10 axis."""

    def __init__(self, title="", xlabel="", ylabel="", logy=True,
                 width=460, height=360):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.logy = logy
        self.width = width
        self.height = height
        self.series = []

    def add_series(self, label, xs, ys):
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (not self.logy or y > 0)]
        if pts:
            self.series.append((label, pts))

    def _ranges(self):
        xs = [p[0] for _, pts in self.series for p in pts]
        ys = [p[1] for _, pts in self.series for p in pts]
        if not xs:
            return 0.0, 1.0, 0.1, 1.0
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x0 == x1:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if self.logy:
            y0 = 10 ** math.floor(math.log10(y0))
            y1 = 10 ** math.ceil(math.log10(y1))
            if y0 == y1:
                y1 = y0 * 10
        elif y0 == y1:
            y0, y1 = y0 - 0.5, y1 + 0.5
        return x0, x1, y0, y1

    def render(self, dx=0, dy=0):
        x0, x1, y0, y1 = self._ranges()
        iw = self.width - _MARGIN_L - _MARGIN_R
        ih = self.height - _MARGIN_T - _MARGIN_B

        def sx(x):
            return _MARGIN_L + iw * (x - x0) / (x1 - x0)

        def sy(y):
            if self.logy:
                t = (math.log10(y) - math.log10(y0)) / (math.log10(y1) - math.log10(y0))
            else:
                t = (y - y0) / (y1 - y0)
            return _MARGIN_T + ih * (1.0 - t)

        parts = [f'<g transform="translate({dx},{dy})" font-family="sans-serif" font-size="11">']
        parts.append(
            f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{iw}" height="{ih}" '
            'fill="none" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{self.width / 2:.1f}" y="18" text-anchor="middle" '
            f'font-size="13">{self.title}</text>'
        )
        # x ticks
        for i in range(5):
            xv = x0 + (x1 - x0) * i / 4
            px = sx(xv)
            parts.append(f'<line x1="{px:.1f}" y1="{_MARGIN_T + ih}" x2="{px:.1f}" '
                         f'y2="{_MARGIN_T + ih + 4}" stroke="#333"/>')
            parts.append(f'<text x="{px:.1f}" y="{_MARGIN_T + ih + 16}" '
                         f'text-anchor="middle">{xv:.3g}</text>')
        # y ticks
        if self.logy:
            lo, hi = int(math.log10(y0)), int(math.log10(y1))
            step = max(1, (hi - lo) // 6)
            tick_vals = [10.0 ** e for e in range(lo, hi + 1, step)]
        else:
            tick_vals = [y0 + (y1 - y0) * i / 4 for i in range(5)]
        for yv in tick_vals:
            py = sy(yv)
            parts.append(f'<line x1="{_MARGIN_L - 4}" y1="{py:.1f}" x2="{_MARGIN_L}" '
                         f'y2="{py:.1f}" stroke="#333"/>')
            label = f"1e{int(round(math.log10(yv)))}" if self.logy else f"{yv:.3g}"
            parts.append(f'<text x="{_MARGIN_L - 7}" y="{py + 4:.1f}" '
                         f'text-anchor="end">{label}</text>')
        parts.append(f'<text x="{self.width / 2:.1f}" y="{self.height - 8}" '
                     f'text-anchor="middle">{self.xlabel}</text>')
        parts.append(f'<text x="14" y="{self.height / 2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 14 {self.height / 2:.1f})">{self.ylabel}</text>')
        for i, (label, pts) in enumerate(self.series):
            color = _COLORS[i % len(_COLORS)]
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                         'stroke-width="1.5"/>')
            ly = _MARGIN_T + 14 + 14 * i
            lx = _MARGIN_L + iw - 6
            parts.append(f'<line x1="{lx - 64}" y1="{ly - 4}" x2="{lx - 44}" y2="{ly - 4}" '
                         f'stroke="{color}" stroke-width="1.5"/>')
            parts.append(f'<text x="{lx - 40}" y="{ly}">{label}</text>')
        parts.append("</g>")
        return "\n".join(parts)


def write_svg(path, plots):
    """Write one or more panels side by side into a standalone SVG file."""
    width = sum(p.width for p in plots)
    height = max(p.height for p in plots)
    body = []
    dx = 0
    for p in plots:
        body.append(p.render(dx=dx))
        dx += p.width
    content = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n<rect width="{width}" height="{height}" '
        'fill="white"/>\n' + "\n".join(body) + "\n</svg>\n"
    )
    with open(path, "w") as fh:
        fh.write(content)
