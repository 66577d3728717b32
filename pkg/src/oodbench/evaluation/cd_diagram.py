"""Critical-difference diagram rendering (SVG and plain text), byte-deterministic."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .stats import cd_groups


def render_text(mean_ranks: dict, cd: float, width: int = 60) -> str:
    k = len(mean_ranks)
    ordered = sorted(mean_ranks.items(), key=lambda kv: (kv[1], kv[0]))
    groups = cd_groups(mean_ranks, cd)
    lo, hi = 1.0, float(max(k, 2))

    def col(r):
        return int(round((r - lo) / (hi - lo) * (width - 1)))

    axis = ["-"] * width
    for t in range(1, int(hi) + 1):
        axis[col(t)] = "+"
    labels = [" "] * width
    for t in range(1, int(hi) + 1):
        s = str(t)
        c = min(col(t), width - len(s))
        labels[c : c + len(s)] = list(s)
    lines = [f"critical difference diagram (CD = {cd:.4f})", "".join(labels), "".join(axis)]
    for name, r in ordered:
        row = [" "] * width
        row[col(r)] = "*"
        lines.append(f"{''.join(row)}  {name} ({r:.3f})")
    cd_row = [" "] * width
    span = max(1, col(lo + cd) - col(lo))
    for c in range(min(span + 1, width)):
        cd_row[c] = "="
    lines.append("".join(cd_row) + "  CD")
    if groups:
        lines.append("not significantly different:")
        for g in groups:
            lines.append("  " + " - ".join(g))
    else:
        lines.append("all methods significantly different")
    return "\n".join(lines) + "\n"


def render_svg(mean_ranks: dict, cd: float) -> str:
    k = len(mean_ranks)
    ordered = sorted(mean_ranks.items(), key=lambda kv: (kv[1], kv[0]))
    groups = cd_groups(mean_ranks, cd)
    left, right, top = 40.0, 460.0, 60.0
    lo, hi = 1.0, float(max(k, 2))

    def x(r):
        return left + (r - lo) / (hi - lo) * (right - left)

    height = top + 40 + 22 * len(ordered) + 14 * len(groups)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="500" height="{height:.0f}" '
        f'viewBox="0 0 500 {height:.0f}" font-family="sans-serif" font-size="12">',
        f'<line x1="{x(lo):.2f}" y1="20.00" x2="{x(lo + cd):.2f}" y2="20.00" stroke="black" stroke-width="2"/>',
        f'<text x="{(x(lo) + x(lo + cd)) / 2:.2f}" y="14.00" text-anchor="middle">CD = {cd:.4f}</text>',
        f'<line x1="{left:.2f}" y1="{top:.2f}" x2="{right:.2f}" y2="{top:.2f}" stroke="black"/>',
    ]
    for t in range(1, int(hi) + 1):
        out.append(f'<line x1="{x(t):.2f}" y1="{top - 6:.2f}" x2="{x(t):.2f}" y2="{top:.2f}" stroke="black"/>')
        out.append(f'<text x="{x(t):.2f}" y="{top - 10:.2f}" text-anchor="middle">{t}</text>')
    for i, (name, r) in enumerate(ordered):
        y = top + 30 + 22 * i
        out.append(f'<polyline points="{x(r):.2f},{top:.2f} {x(r):.2f},{y:.2f} {right + 5:.2f},{y:.2f}" fill="none" stroke="black"/>')
        out.append(f'<text x="{right + 8:.2f}" y="{y + 4:.2f}">{escape(name)} ({r:.3f})</text>')
    ranks = dict(ordered)
    for gi, g in enumerate(groups):
        y = top + 8 + 6 * gi
        out.append(
            f'<line x1="{x(ranks[g[0]]) - 3:.2f}" y1="{y:.2f}" x2="{x(ranks[g[-1]]) + 3:.2f}" y2="{y:.2f}" '
            f'stroke="black" stroke-width="3"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cd_diagram(mean_ranks: dict, cd: float) -> dict:
    """Both renderings plus the groups they draw."""
    return {"svg": render_svg(mean_ranks, cd), "text": render_text(mean_ranks, cd), "groups": cd_groups(mean_ranks, cd)}
