"""ExperimentReport and its on-disk layout."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

VERDICTS = ("pass", "fail", "inconclusive", "report-only")


@dataclass
class ExperimentReport:
    """Output of one named experiment.

    ``verdict_rule`` says how the verdict was reached: ``two_sided``
    (|slope - expected| <= tolerance), ``one_sided`` (a bound with a
    fitted constant), ``predicate`` (a property over a test set) or
    ``none`` (report-only).
    """

    name: str
    params: dict
    samples: list
    fitted_slope: float
    slope_stderr: float
    expected_slope: float
    tolerance: float
    verdict: str
    runtime_seconds: float = 0.0
    seed: int = 0
    verdict_rule: str = "two_sided"
    columns: tuple = ("x", "value")
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.samples:
            raise ValueError("a report needs at least one sample")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True)

    def samples_csv(self) -> str:
        """Header plus one row per sample; floats in shortest round-trip form."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.samples:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def svg_plot(samples, title: str = "", width: int = 480, height: int = 320) -> str:
    """Minimal log-log scatter: first column against the first later numeric column."""
    pts = []
    for r in samples:
        ys = [v for v in r[1:] if isinstance(v, (int, float, np.integer, np.floating))]
        if isinstance(r[0], (int, float, np.integer, np.floating)) and ys and r[0] > 0 and ys[0] > 0:
            pts.append((float(r[0]), float(ys[0])))
    if len(pts) < 2:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    lx = np.log10([p[0] for p in pts])
    ly = np.log10([p[1] for p in pts])
    pad = 40

    def sx(v):
        return pad + (v - lx.min()) / max(np.ptp(lx), 1e-12) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - ly.min()) / max(np.ptp(ly), 1e-12) * (height - 2 * pad)

    dots = "".join(f'<circle cx="{sx(a):.1f}" cy="{sy(b):.1f}" r="3"/>' for a, b in zip(lx, ly))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<text x="{pad}" y="20" font-size="12">{title} (log-log)</text>'
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="black"/>'
        f"{dots}</svg>\n"
    )


def write_run(report: ExperimentReport, out_dir, config_text: str = "", svg: bool = False) -> str:
    """Write report.json, samples.csv and config.txt into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    atomic_write(os.path.join(out_dir, "report.json"), report.to_json() + "\n")
    atomic_write(os.path.join(out_dir, "samples.csv"), report.samples_csv())
    atomic_write(os.path.join(out_dir, "config.txt"), config_text)
    if svg:
        atomic_write(os.path.join(out_dir, "samples.svg"), svg_plot(report.samples, report.name))
    return out_dir
