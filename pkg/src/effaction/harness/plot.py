"""Plain SVG 1.1 charts built from run artifacts.

Every number is written with a fixed format and elements are emitted in a
fixed order, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..core import smooth
from .bench import read_bench
from .config import load_config
from .training import read_metrics

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
W, H = 640, 400
MARGIN = dict(left=70, right=150, top=30, bottom=50)


class PlotError(ValueError):
    pass


def _f(x: float) -> str:
    return f"{x:.2f}"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    return [first + k * step for k in range(int(math.floor((hi - first) / step + 1e-9)) + 1)]


class Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xlim, ylim, width=W, height=H):
        self.w, self.h = width, height
        self.x0, self.x1 = MARGIN["left"], width - MARGIN["right"]
        self.y0, self.y1 = height - MARGIN["bottom"], MARGIN["top"]
        self.xlim = (float(xlim[0]), float(xlim[1]) if xlim[1] > xlim[0] else float(xlim[0]) + 1.0)
        self.ylim = (float(ylim[0]), float(ylim[1]) if ylim[1] > ylim[0] else float(ylim[0]) + 1.0)
        self.body: list[str] = []
        self.legend: list[tuple[str, str]] = []
        self._axes(title, xlabel, ylabel)

    def sx(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * (self.x1 - self.x0)

    def sy(self, y):
        lo, hi = self.ylim
        return self.y0 - (y - lo) / (hi - lo) * (self.y0 - self.y1)

    def _axes(self, title, xlabel, ylabel):
        b = self.body
        b.append(f'<rect x="0" y="0" width="{self.w}" height="{self.h}" fill="white"/>')
        b.append(f'<text x="{_f((self.x0 + self.x1) / 2)}" y="18" text-anchor="middle" font-size="14">'
                 f'{_esc(title)}</text>')
        for t in _nice_ticks(*self.xlim):
            x = self.sx(t)
            b.append(f'<line x1="{_f(x)}" y1="{_f(self.y0)}" x2="{_f(x)}" y2="{_f(self.y0 + 5)}" stroke="black"/>')
            b.append(f'<text x="{_f(x)}" y="{_f(self.y0 + 18)}" text-anchor="middle" font-size="11">{t:g}</text>')
        for t in _nice_ticks(*self.ylim):
            y = self.sy(t)
            b.append(f'<line x1="{_f(self.x0 - 5)}" y1="{_f(y)}" x2="{_f(self.x1)}" y2="{_f(y)}" '
                     f'stroke="#dddddd"/>')
            b.append(f'<text x="{_f(self.x0 - 8)}" y="{_f(y + 4)}" text-anchor="end" font-size="11">{t:g}</text>')
        b.append(f'<rect x="{_f(self.x0)}" y="{_f(self.y1)}" width="{_f(self.x1 - self.x0)}" '
                 f'height="{_f(self.y0 - self.y1)}" fill="none" stroke="black"/>')
        b.append(f'<text x="{_f((self.x0 + self.x1) / 2)}" y="{_f(self.h - 10)}" text-anchor="middle" '
                 f'font-size="12">{_esc(xlabel)}</text>')
        b.append(f'<text x="16" y="{_f((self.y0 + self.y1) / 2)}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 16 {_f((self.y0 + self.y1) / 2)})">{_esc(ylabel)}</text>')

    def _pts(self, xs, ys) -> str:
        return " ".join(f"{_f(self.sx(x))},{_f(self.sy(y))}" for x, y in zip(xs, ys))

    def line(self, xs, ys, color, label=None, width=1.5, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.body.append(f'<polyline points="{self._pts(xs, ys)}" fill="none" stroke="{color}" '
                         f'stroke-width="{width}"{extra}/>')
        if label:
            self.legend.append((label, color))

    def band(self, xs, lo, hi, color, opacity=0.25):
        pts = self._pts(list(xs) + list(xs)[::-1], list(hi) + list(lo)[::-1])
        self.body.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')

    def hband(self, y_lo, y_hi, color, opacity=0.15):
        self.body.append(f'<rect x="{_f(self.x0)}" y="{_f(self.sy(y_hi))}" width="{_f(self.x1 - self.x0)}" '
                         f'height="{_f(self.sy(y_lo) - self.sy(y_hi))}" fill="{color}" fill-opacity="{opacity}"/>')

    def stem(self, x, y0, y1, color):
        self.body.append(f'<line x1="{_f(self.sx(x))}" y1="{_f(self.sy(y0))}" x2="{_f(self.sx(x))}" '
                         f'y2="{_f(self.sy(y1))}" stroke="{color}"/>')

    def cross(self, x, y, color="red", size=5):
        cx, cy = self.sx(x), self.sy(y)
        self.body.append(f'<path d="M{_f(cx - size)},{_f(cy - size)} L{_f(cx + size)},{_f(cy + size)} '
                         f'M{_f(cx - size)},{_f(cy + size)} L{_f(cx + size)},{_f(cy - size)}" '
                         f'stroke="{color}" stroke-width="2" class="episode-end"/>')

    def marker(self, x, y, color):
        self.body.append(f'<circle cx="{_f(self.sx(x))}" cy="{_f(self.sy(y))}" r="3" fill="{color}"/>')

    def render(self) -> str:
        out = ['<?xml version="1.0" encoding="UTF-8"?>',
               f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.w}" height="{self.h}" '
               f'viewBox="0 0 {self.w} {self.h}">']
        out.extend(self.body)
        for k, (label, color) in enumerate(self.legend):
            y = self.y1 + 10 + 18 * k
            out.append(f'<line x1="{_f(self.x1 + 10)}" y1="{_f(y)}" x2="{_f(self.x1 + 30)}" y2="{_f(y)}" '
                       f'stroke="{color}" stroke-width="3"/>')
            out.append(f'<text x="{_f(self.x1 + 35)}" y="{_f(y + 4)}" font-size="11">{_esc(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _write(svg: str, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg, encoding="utf-8", newline="\n")
    return path


def load_runs(run_dirs) -> dict[str, list[list[dict]]]:
    """Group metric rows by agent; a missing or empty run stops the plot with a per-directory report."""
    problems, groups = [], {}
    for d in map(Path, run_dirs):
        if not (d / "metrics.csv").exists():
            problems.append(f"{d}: no metrics.csv")
            continue
        rows = read_metrics(d / "metrics.csv")
        if not rows:
            problems.append(f"{d}: metrics.csv has no episodes")
            continue
        agent = load_config(d / "config.ini").agent if (d / "config.ini").exists() else d.name
        groups.setdefault(agent, []).append(rows)
    if problems:
        raise PlotError("; ".join(problems))
    return groups


def seed_band(runs: list[list[dict]], key: str, window: int):
    n = min(len(r) for r in runs)
    curves = np.array([smooth([row[key] for row in r[:n]], window) for r in runs])
    return np.arange(n), curves.mean(axis=0), curves.std(axis=0)


def plot_learning_curve(run_dirs, out: str | Path, window: int = 1000, key: str = "return_discounted") -> Path:
    groups = load_runs(run_dirs)
    series = {a: seed_band(runs, key, window) for a, runs in groups.items()}
    xmax = max(len(x) for x, _, _ in series.values())
    lo = min(float((m - s).min()) for _, m, s in series.values())
    hi = max(float((m + s).max()) for _, m, s in series.values())
    c = Canvas(f"Learning curve (smoothing window {window})", "episode", "discounted return",
               (0, max(xmax - 1, 1)), (lo, hi))
    for k, (agent, (x, m, s)) in enumerate(sorted(series.items())):
        color = PALETTE[k % len(PALETTE)]
        c.band(x, m - s, m + s, color)
        c.line(x, m, color, label=f"{agent} (n={len(groups[agent])})")
    return _write(c.render(), Path(out))


def plot_zones(run_dirs, out: str | Path, window: int = 1000) -> Path:
    groups = load_runs(run_dirs)
    out = Path(out)
    zones = [("steps_hypo", "hypo", "#ff7f0e"), ("steps_target", "target", "#2ca02c"),
             ("steps_hyper", "hyper", "#d62728")]
    parts = []
    for agent, runs in sorted(groups.items()):
        stack = {}
        for key, _, _ in zones:
            x, m, _ = seed_band(runs, key, window)
            stack[key] = m
        total = sum(stack.values())
        c = Canvas(f"Steps per zone: {agent}", "episode", "steps (stacked)", (0, max(len(x) - 1, 1)),
                   (0, float(total.max()) if total.size else 1.0))
        base = np.zeros_like(total)
        for key, label, color in zones:
            top = base + stack[key]
            c.band(x, base, top, color, opacity=0.6)
            c.legend.append((label, color))
            base = top
        parts.append(_write(c.render(), out.with_name(f"{out.stem}_{agent}{out.suffix}")))
    return parts[0] if len(parts) == 1 else out.parent


def read_trajectory(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise PlotError(f"{path}: empty trajectory")
    return rows


def plot_trajectory(paths, out: str | Path) -> Path:
    """Observation traces with the target band, dose stems (bottom) and meal stems (top); red crosses end episodes."""
    trajs = [(Path(p), read_trajectory(p)) for p in paths]
    obs_key = "bg" if "bg" in trajs[0][1][0] else "position"
    ys = [float(r[obs_key]) for _, t in trajs for r in t]
    xmax = max(int(t[-1]["step"]) for _, t in trajs)
    glucose = obs_key == "bg"
    lo, hi = (min(40.0, min(ys)), max(220.0, max(ys))) if glucose else (min(ys), max(ys))
    c = Canvas("Greedy evaluation trajectories", "step", obs_key, (0, max(xmax, 1)), (lo, hi))
    if glucose:
        c.hband(100.0, 150.0, "#2ca02c")
    span = hi - lo
    for k, (p, t) in enumerate(trajs):
        color = PALETTE[k % len(PALETTE)]
        steps = [int(r["step"]) for r in t]
        c.line(steps, [float(r[obs_key]) for r in t], color, label=p.stem.replace("trajectory_", ""))
        for r in t:
            if r["dose"] and float(r["dose"]) > 0:
                c.stem(int(r["step"]), lo, lo + 0.02 * span * float(r["dose"]), color)
            if float(r["meal_carbs"]) > 0:
                c.stem(int(r["step"]), hi, hi - 0.002 * span * float(r["meal_carbs"]), "#555555")
        c.cross(steps[-1], float(t[-1][obs_key]))
    return _write(c.render(), Path(out))


def plot_bench(bench_csv: str | Path, out: str | Path) -> Path:
    rows = read_bench(bench_csv)
    if not rows:
        raise PlotError(f"{bench_csv}: no bench rows")
    out = Path(out)
    agents = sorted({r.agent for r in rows})
    Ls = sorted({r.history for r in rows})
    for metric, label, suffix in (("s_per_episode", "seconds per episode", "runtime"),
                                  ("memory_bytes", "memory (MB)", "memory")):
        scale = 1e-6 if metric == "memory_bytes" else 1.0
        vals = [getattr(r, metric) * scale for r in rows]
        c = Canvas(f"{label} vs history length", "history length", label, (0, max(Ls) + 1),
                   (0, max(vals) * 1.05))
        for k, agent in enumerate(agents):
            pts = sorted((r.history, getattr(r, metric) * scale) for r in rows if r.agent == agent)
            color = PALETTE[k % len(PALETTE)]
            c.line([p[0] for p in pts], [p[1] for p in pts], color, label=agent)
            for x, y in pts:
                c.marker(x, y, color)
        _write(c.render(), out.with_name(f"{out.stem}_{suffix}{out.suffix}"))
    return out.parent
