"""CSV emission for heatmaps and Monte-Carlo campaigns."""

from __future__ import annotations

import io
import math
import sys
from pathlib import Path

from .sweep import OK, HeatmapResult, MonteCarloResult

HEATMAP_HEADER = "x_m,y_m,crb_y_m2,crb_x_m2,status"
MC_HEADER = "trial,err_x_m,err_y_m"


def _fmt(v) -> str:
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def heatmap_csv(result: HeatmapResult) -> str:
    buf = io.StringIO()
    buf.write(HEATMAP_HEADER + "\n")
    for x, y, cy, cx, status in result.rows():
        if status != OK:
            cy = cx = math.nan
        buf.write(f"{_fmt(x)},{_fmt(y)},{_fmt(cy)},{_fmt(cx)},{status}\n")
    return buf.getvalue()


def mc_csv(result: MonteCarloResult) -> str:
    buf = io.StringIO()
    buf.write(MC_HEADER + "\n")
    for n, (ex, ey) in enumerate(result.errors):
        buf.write(f"{n},{_fmt(ex)},{_fmt(ey)}\n")
    bx, by = result.bias
    summary = [
        ("ue_x_m", result.ue.x), ("ue_y_m", result.ue.y),
        ("trials", result.trials), ("failures", result.failures),
        ("rmse_x_m", result.rmse_x), ("rmse_y_m", result.rmse_y),
        ("sqrt_crb_x_m", result.sqrt_crb_x), ("sqrt_crb_y_m", result.sqrt_crb_y),
        ("bias_x_m", bx), ("bias_y_m", by),
    ]
    for key, val in summary:
        text = str(val) if isinstance(val, int) else _fmt(val)
        buf.write(f"# {key}={text}\n")
    return buf.getvalue()


def write_text(text: str, path) -> None:
    """Write to ``path``; ``None`` or ``-`` means stdout."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_heatmap_csv(result: HeatmapResult, path) -> None:
    write_text(heatmap_csv(result), path)


def write_mc_csv(result: MonteCarloResult, path) -> None:
    write_text(mc_csv(result), path)
