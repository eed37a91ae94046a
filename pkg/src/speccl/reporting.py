"""Trajectory export: CSV logs, rank-event files, and static SVG plots.

Plots are rendered directly as SVG documents so a run leaves behind
self-contained artifacts without any plotting process.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["emit_csv", "read_csv", "plot_log"]


def _fmt(value):
    # 10 significant digits: parsing the text back recovers every logged
    # value to 1e-9 * max(1, |value|)
    return f"{value:.10g}"


def csv_header(log):
    n = log.x.shape[1]
    p = log.theta_hat.shape[1]
    m = log.u.shape[1]
    cols = ["t"]
    cols += [f"x{i+1}" for i in range(n)]
    cols += [f"theta_hat_{i+1}" for i in range(p)]
    cols += [f"theta_tilde_{i+1}" for i in range(p)]
    cols += [f"eig_{i+1}" for i in range(p)]
    cols += ["rank", "excited_norm", "unexcited_norm", "V"]
    cols += [f"u{i+1}" for i in range(m)]
    return cols


def emit_csv(log, path):
    """Write the log to ``path`` (9 significant digits) plus a sibling
    ``.events`` file holding one ``t_i,new_rank`` line per rank event."""
    path = Path(path)
    header = csv_header(log)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(len(log)):
                row = [_fmt(log.t[i])]
                row += [_fmt(v) for v in log.x[i]]
                row += [_fmt(v) for v in log.theta_hat[i]]
                row += [_fmt(v) for v in log.theta_tilde[i]]
                row += [_fmt(v) for v in log.eigs[i]]
                row += [str(int(log.rank[i]))]
                row += [_fmt(log.excited_norm[i]), _fmt(log.unexcited_norm[i])]
                row += [_fmt(log.V[i])]
                row += [_fmt(v) for v in log.u[i]]
                writer.writerow(row)
        events_path = path.with_suffix(".events")
        with events_path.open("w") as fh:
            for t_i, new_rank in log.rank_events:
                fh.write(f"{_fmt(t_i)},{int(new_rank)}\n")
    except OSError as exc:
        raise OSError(f"failed writing log to {path}: {exc}") from exc
    return path


def read_csv(path):
    """Read an emitted CSV back as a dict of column name -> float array."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


# --- minimal SVG line plots ---------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 720, 400
_ML, _MR, _MT, _MB = 64, 16, 36, 44


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** np.floor(np.log10(span / count))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= count:
            step *= mult
            break
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + 0.5 * step, step)


def _svg_lineplot(t, series, labels, title, ylabel):
    """Render labelled time series as a standalone SVG document string."""
    finite = [s[np.isfinite(s)] for s in series if np.any(np.isfinite(s))]
    lo = min((float(s.min()) for s in finite), default=0.0)
    hi = max((float(s.max()) for s in finite), default=1.0)
    if hi == lo:
        hi, lo = hi + 1.0, lo - 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    t0, t1 = float(t[0]), float(t[-1])
    if t1 == t0:
        t1 = t0 + 1.0

    def sx(v):
        return _ML + (v - t0) / (t1 - t0) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - lo) / (hi - lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    for tx in _ticks(t0, t1):
        parts.append(
            f'<line x1="{sx(tx):.2f}" y1="{_H - _MB}" x2="{sx(tx):.2f}" '
            f'y2="{_H - _MB + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{sx(tx):.2f}" y="{_H - _MB + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{tx:.6g}</text>'
        )
    for ty in _ticks(lo, hi):
        parts.append(
            f'<line x1="{_ML}" y1="{sy(ty):.2f}" x2="{_W - _MR}" y2="{sy(ty):.2f}" '
            f'stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{_ML - 6}" y="{sy(ty):.2f}" text-anchor="end" '
            f'dominant-baseline="middle" font-family="sans-serif" '
            f'font-size="10">{ty:.6g}</text>'
        )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>'
    )
    for i, (s, label) in enumerate(zip(series, labels)):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(
            f"{sx(tv):.2f},{sy(sv):.2f}"
            for tv, sv in zip(t, s)
            if np.isfinite(sv)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 8}" y="{_MT + 14 + 13 * i}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{label}</text>'
        )
    parts.append(
        f'<text x="{_W / 2:.0f}" y="{_H - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11">t [s]</text>'
    )
    parts.append(
        f'<text x="14" y="{_H / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 14 {_H / 2:.0f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def plot_log(log, outdir, basename):
    """Write the state / estimate / eigenvalue / Lyapunov plots for one run.

    Returns the list of written paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = log.t
    written = []

    n = log.x.shape[1]
    paths = {
        "states": _svg_lineplot(
            t, [log.x[:, i] for i in range(n)],
            [f"x{i+1}" for i in range(n)],
            f"{basename}: states", "state",
        ),
        "estimates": _svg_lineplot(
            t, [log.theta_hat[:, i] for i in range(log.theta_hat.shape[1])],
            [f"th{i+1}" for i in range(log.theta_hat.shape[1])],
            f"{basename}: parameter estimates", "estimate",
        ),
        "eigenvalues": _svg_lineplot(
            t, [log.eigs[:, i] for i in range(log.eigs.shape[1])],
            [f"lam{i+1}" for i in range(log.eigs.shape[1])],
            f"{basename}: collector eigenvalues", "eigenvalue",
        ),
        "lyapunov": _svg_lineplot(
            t, [log.V], ["V"], f"{basename}: Lyapunov value", "V",
        ),
    }
    for suffix, doc in paths.items():
        path = outdir / f"{basename}_{suffix}.svg"
        path.write_text(doc)
        written.append(path)
    return written
