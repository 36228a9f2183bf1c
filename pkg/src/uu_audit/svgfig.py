"""Hand-rolled SVG charts for the report command.

SVG output (not raster) so tests can parse element counts and heights.
Every renderer is deterministic: fixed canvas sizes, sorted iteration,
two-decimal coordinates.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .grouping import FALSE_FAIL, FALSE_PASS

SPLITS = ("train", "validation", "test")
_COLORS = {"train": "#4878a8", "validation": "#e0a030", "test": "#58a066"}
_DIR_COLOR = {FALSE_FAIL: "#b04040", FALSE_PASS: "#b04040"}


class Svg:
    def __init__(self, width: int, height: int, title: str):
        self.width = width
        self.height = height
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
            f"<title>{title}</title>",
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        ]

    def rect(self, x, y, w, h, fill, cls="", dashed=False, stroke="none"):
        dash = ' stroke-dasharray="4 2"' if dashed else ""
        cls_attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<rect{cls_attr} x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'fill="{fill}" stroke="{stroke}"{dash}/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#303030", cls=""):
        cls_attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<line{cls_attr} x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{stroke}"/>'
        )

    def text(self, x, y, content, anchor="middle", cls="", size=11):
        cls_attr = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<text{cls_attr} x="{x:.2f}" y="{y:.2f}" text-anchor="{anchor}" '
            f'font-size="{size}">{content}</text>'
        )

    def to_string(self) -> str:
        return "\n".join(self.parts) + "\n</svg>\n"


def fig_accuracy(summary: Mapping[str, Mapping[str, float]], model_id: str) -> str:
    """Mean balanced accuracy per split with min/max whiskers over folds."""
    svg = Svg(420, 260, f"balanced accuracy ({model_id})")
    x0, y0, plot_h, bar_w, gap = 60, 210, 170, 70, 40
    svg.line(x0 - 10, y0, 400, y0)
    svg.line(x0 - 10, y0, x0 - 10, y0 - plot_h)
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y0 - frac * plot_h
        svg.text(x0 - 16, y + 4, f"{frac:.2f}", anchor="end", size=9)
    for i, split in enumerate(SPLITS):
        stats = summary.get(split)
        if stats is None:
            continue
        x = x0 + i * (bar_w + gap)
        h = stats["mean"] * plot_h
        svg.rect(x, y0 - h, bar_w, h, _COLORS[split], cls=f"bar split-{split}")
        cx = x + bar_w / 2
        y_min, y_max = y0 - stats["min"] * plot_h, y0 - stats["max"] * plot_h
        svg.line(cx, y_min, cx, y_max, cls=f"whisker split-{split}")
        svg.line(cx - 8, y_min, cx + 8, y_min, cls=f"whisker-cap split-{split}")
        svg.line(cx - 8, y_max, cx + 8, y_max, cls=f"whisker-cap split-{split}")
        svg.text(cx, y0 + 16, split)
        svg.text(cx, y0 - h - 6, f"{stats['mean']:.3f}", size=9)
    svg.text(210, 244, f"balanced accuracy, {model_id}", size=12)
    return svg.to_string()


def fig_probabilities(by_split: Mapping[str, Sequence[float]], bins: int = 10) -> str:
    """Histograms of predicted failing probabilities per split."""
    panel_w, panel_h, pad = 180, 150, 35
    present = [s for s in SPLITS if s in by_split] or sorted(by_split)
    svg = Svg(pad + len(present) * (panel_w + pad), 230, "predicted probabilities")
    for pi, split in enumerate(present):
        values = by_split[split]
        counts = [0] * bins
        for p in values:
            b = min(int(p * bins), bins - 1)
            counts[b] += 1
        top = max(counts) or 1
        x_left = pad + pi * (panel_w + pad)
        y0 = 185
        svg.line(x_left, y0, x_left + panel_w, y0)
        bw = panel_w / bins
        for b, n in enumerate(counts):
            h = (n / top) * panel_h
            svg.rect(
                x_left + b * bw, y0 - h, bw - 1, h, _COLORS.get(split, "#777"),
                cls=f"hist split-{split} bin-{b}",
            )
        svg.text(x_left + panel_w / 2, y0 + 16, f"{split} (n={len(values)})")
        svg.text(x_left, y0 + 28, "0", size=9)
        svg.text(x_left + panel_w, y0 + 28, "1", size=9)
    return svg.to_string()


def fig_prevalence(splits_summary: Mapping[str, Mapping]) -> str:
    """Known-unknown and unknown-unknown prevalence per split, split by error
    direction: solid bars are passed-but-predicted-failing, dashed bars are
    failed-but-predicted-passing."""
    panel_w, plot_h = 260, 150
    svg = Svg(2 * panel_w + 90, 250, "group prevalence")
    panels = (("known_unknown", "known unknowns"), ("unknown_unknown", "unknown unknowns"))
    top = 0.0
    for group, _ in panels:
        for split in splits_summary:
            d = splits_summary[split]["groups"][group].get("by_direction", {})
            top = max(top, d.get(FALSE_FAIL, 0.0), d.get(FALSE_PASS, 0.0))
    top = max(top, 0.05)
    for gi, (group, label) in enumerate(panels):
        x_left = 50 + gi * (panel_w + 40)
        y0 = 190
        svg.line(x_left, y0, x_left + panel_w, y0)
        present = [s for s in SPLITS if s in splits_summary]
        slot = panel_w / max(1, len(present))
        for si, split in enumerate(present):
            d = splits_summary[split]["groups"][group].get("by_direction", {})
            x = x_left + si * slot + 8
            bw = (slot - 24) / 2
            h_ff = (d.get(FALSE_FAIL, 0.0) / top) * plot_h
            h_fp = (d.get(FALSE_PASS, 0.0) / top) * plot_h
            svg.rect(x, y0 - h_ff, bw, h_ff, _COLORS.get(split, "#777"),
                     cls=f"bar {group} split-{split} dir-{FALSE_FAIL}")
            svg.rect(x + bw + 8, y0 - h_fp, bw, h_fp, "white",
                     cls=f"bar {group} split-{split} dir-{FALSE_PASS}",
                     dashed=True, stroke=_COLORS.get(split, "#777"))
            svg.text(x + bw + 4, y0 + 14, split, size=9)
        svg.text(x_left + panel_w / 2, 30, label, size=12)
    svg.text(
        panel_w + 65, 232,
        "solid: passed, predicted failing - dashed: failed, predicted passing", size=10,
    )
    return svg.to_string()


def fig_coefficients(characterization: Mapping, top_n: int = 15) -> str:
    """Horizontal bars of the largest-magnitude coefficients, clipped values."""
    coefs = sorted(
        characterization["coefficients"], key=lambda c: (-abs(c["gamma"]), c["id"])
    )[:top_n]
    row_h = 22
    height = 80 + row_h * len(coefs)
    svg = Svg(460, height, "unknown-unknown regression coefficients")
    mid_x, half_w = 250, 170
    svg.line(mid_x, 40, mid_x, height - 30)
    svg.text(mid_x - half_w, height - 14, "-10", size=9)
    svg.text(mid_x + half_w, height - 14, "+10", size=9)
    r2 = characterization.get("r2")
    svg.text(mid_x, 24, f"top coefficients (clipped to [-10, 10]), R2={r2:.3f}", size=12)
    for i, c in enumerate(coefs):
        y = 48 + i * row_h
        w = abs(c["clipped"]) / 10.0 * half_w
        x = mid_x - w if c["clipped"] < 0 else mid_x
        stars = "*" * (3 if c["p"] < 0.001 else 2 if c["p"] < 0.01 else 1 if c["p"] < 0.05 else 0)
        svg.rect(x, y, w, row_h - 8,
                 "#b04040" if c["clipped"] < 0 else "#4878a8",
                 cls=f"coef-bar coef-{c['id'].replace('=', '-')}")
        svg.text(mid_x - half_w - 6, y + 11, f"{c['id']}{stars}", anchor="end", size=10)
        svg.text(mid_x + half_w + 6, y + 11, f"{c['gamma']:.2f}", anchor="start", size=9)
    return svg.to_string()
