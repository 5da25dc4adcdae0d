"""Minimal static SVG line plots (polylines, markers, ticks, legend)."""
import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 500
_MARGIN = dict(left=70, right=20, top=40, bottom=55)
_DASH = {"solid": None, "dashed": "8,5", "dashdot": "9,4,2,4", "dotted": "2,4"}


def _nice_ticks(lo, hi, count=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


class Plot:
    """Accumulates line series and scatter points, then renders one SVG document.

    >>> p = Plot(title="demo")
    >>> p.line([0, 1], [0, 1], label="y = x")
    >>> p.render().startswith("<?xml")
    True
    """

    def __init__(self, title="", xlabel="t", ylabel="y", width=WIDTH, height=HEIGHT):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.width, self.height = width, height
        self._lines = []
        self._points = []

    def line(self, x, y, label=None, color="#1f77b4", style="solid", width=1.8):
        self._lines.append((list(map(float, x)), list(map(float, y)), label, color, style, width))

    def points(self, x, y, label=None, color="black", radius=3.5):
        self._points.append((list(map(float, x)), list(map(float, y)), label, color, radius))

    def _bounds(self):
        xs = [v for s in self._lines + self._points for v in s[0]]
        ys = [v for s in self._lines + self._points for v in s[1]]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        pad = 0.05 * (y1 - y0 or 1.0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        m = _MARGIN
        pw = self.width - m["left"] - m["right"]
        ph = self.height - m["top"] - m["bottom"]
        x0, x1, y0, y1 = self._bounds()
        if x1 == x0:
            x1 = x0 + 1.0

        def sx(v):
            return m["left"] + (v - x0) / (x1 - x0) * pw

        def sy(v):
            return m["top"] + (y1 - v) / (y1 - y0) * ph

        out = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="12">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{m["left"]}" y="{m["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for v in _nice_ticks(x0, x1):
            px = sx(v)
            out.append(f'<line x1="{px:.2f}" y1="{m["top"] + ph}" x2="{px:.2f}" y2="{m["top"] + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{m["top"] + ph + 18}" text-anchor="middle">{v:g}</text>')
        for v in _nice_ticks(y0, y1):
            py = sy(v)
            out.append(f'<line x1="{m["left"] - 5}" y1="{py:.2f}" x2="{m["left"]}" y2="{py:.2f}" stroke="black"/>')
            out.append(f'<line x1="{m["left"]}" y1="{py:.2f}" x2="{m["left"] + pw}" y2="{py:.2f}" stroke="#e5e5e5"/>')
            out.append(f'<text x="{m["left"] - 8}" y="{py + 4:.2f}" text-anchor="end">{v:g}</text>')
        out.append(f'<text x="{m["left"] + pw / 2}" y="{self.height - 12}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="16" y="{m["top"] + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {m["top"] + ph / 2})">{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{self.width / 2}" y="24" text-anchor="middle" font-size="15">{escape(self.title)}</text>')

        out.append(f'<clipPath id="plotarea"><rect x="{m["left"]}" y="{m["top"]}" width="{pw}" height="{ph}"/></clipPath>')
        out.append('<g clip-path="url(#plotarea)">')
        for xs, ys, _, color, style, w in self._lines:
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, ys))
            dash = _DASH[style]
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{w}"{dash_attr}/>')
        for xs, ys, _, color, r in self._points:
            for a, b in zip(xs, ys):
                out.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="{r}" fill="none" stroke="{color}" stroke-width="1.3"/>')
        out.append("</g>")

        entries = [(s[2], s[3], s[4], "line") for s in self._lines if s[2]]
        entries += [(s[2], s[3], None, "point") for s in self._points if s[2]]
        lx, ly = m["left"] + pw - 190, m["top"] + 14
        for k, (label, color, style, kind) in enumerate(entries):
            yk = ly + 18 * k
            if kind == "line":
                dash = _DASH[style]
                dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
                out.append(f'<line x1="{lx}" y1="{yk}" x2="{lx + 34}" y2="{yk}" stroke="{color}" stroke-width="2"{dash_attr}/>')
            else:
                out.append(f'<circle cx="{lx + 17}" cy="{yk}" r="3.5" fill="none" stroke="{color}"/>')
            out.append(f'<text x="{lx + 42}" y="{yk + 4}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
