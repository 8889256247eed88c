"""Evaluation metrics and report emission (JSON, CSV, SVG)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .catalog import DEFAULT_CATALOG, PortCatalog
from .errors import ContractViolation
from .geodata import Domain, Point, StationSite
from .simulator import ChargingStation, SimulationResult

REPORT_SCHEMA_VERSION = 1
STATION_CSV_COLUMNS = ("station_id", "x", "y", "mean_wait_h", "arrivals", "rejections", "completed",
                       "charging_hours")


def mean_wait(result: SimulationResult) -> float | None:
    """Mean over every waiting episode, zero waits included.

    Returns ``None`` when no vehicle ever started charging, which is distinct
    from a genuine mean of 0.
    """
    if not result.waits:
        return None
    return float(sum(result.waits) / len(result.waits))


def gap(wait_baseline: float, wait: float) -> float:
    """Percent reduction of ``wait`` relative to ``wait_baseline``."""
    if not wait_baseline > 0:
        raise ContractViolation(f"baseline wait must be > 0, got {wait_baseline}")
    return 100.0 * (wait_baseline - wait) / wait_baseline


def mean_proximity(new_stations: Sequence[Point], existing: Sequence[Point]) -> float:
    """Mean distance from each new station to the nearest station present when it was placed.

    New stations are taken in order, so earlier new stations count as existing
    for later ones.
    """
    if not new_stations or not existing:
        raise ContractViolation("mean_proximity needs non-empty new and existing station lists")
    placed = list(existing)
    total = 0.0
    for p in new_stations:
        total += min(math.hypot(p.x - q.x, p.y - q.y) for q in placed)
        placed.append(p)
    return total / len(new_stations)


def _port_counts(station) -> Iterable[tuple[int, int]]:
    if isinstance(station, ChargingStation):
        counts: dict[int, int] = {}
        for p in station.ports:
            counts[p.type_index] = counts.get(p.type_index, 0) + 1
        return counts.items()
    return station.ports


def cssi(stations: Sequence[StationSite | ChargingStation], catalog: PortCatalog = DEFAULT_CATALOG) -> float:
    """Mean over stations of sum_j count_j * s_j."""
    if not stations:
        raise ContractViolation("cssi needs at least one station")
    total = 0.0
    for st in stations:
        for j, count in _port_counts(st):
            total += count * catalog.scale(j)
    return total / len(stations)


@dataclass(frozen=True)
class StationRow:
    station_id: str
    x: float
    y: float
    mean_wait_h: float
    arrivals: int
    rejections: int
    completed: int
    charging_hours: float


@dataclass
class MetricsReport:
    method: str
    seeds: list[int]
    wait: float | None
    baseline_wait: float | None
    gap: float | None
    total_charging: float
    mean_proximity: float | None
    cssi: float
    stations: list[StationRow] = field(default_factory=list)

    def __post_init__(self):
        if self.cssi < 0:
            raise ContractViolation("cssi must be >= 0")
        if self.gap is not None:
            if self.baseline_wait is None or self.wait is None:
                raise ContractViolation("gap given without both waits")
            if abs(gap(self.baseline_wait, self.wait) - self.gap) > 1e-9:
                raise ContractViolation("gap is inconsistent with the stored waits")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["schema_version"] = REPORT_SCHEMA_VERSION
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        doc = dict(doc)
        doc.pop("schema_version", None)
        doc["stations"] = [StationRow(**r) for r in doc.get("stations", [])]
        return cls(**doc)


def build_report(
    method: str,
    seeds: Sequence[int],
    results: Sequence[SimulationResult],
    sites: Sequence[StationSite],
    baseline_wait: float | None = None,
    new_stations: Sequence[Point] | None = None,
    existing: Sequence[Point] | None = None,
    catalog: PortCatalog = DEFAULT_CATALOG,
) -> MetricsReport:
    """Aggregate one or more seeded runs of the same station set."""
    if not results:
        raise ContractViolation("build_report needs at least one simulation result")
    per_seed = [w for w in (mean_wait(r) for r in results) if w is not None]
    wait = float(sum(per_seed) / len(per_seed)) if per_seed else None
    g = gap(baseline_wait, wait) if baseline_wait is not None and baseline_wait > 0 and wait is not None else None
    prox = mean_proximity(new_stations, existing) if new_stations and existing else None
    by_id = {s.id: s for s in sites}
    rows = []
    first = results[0]
    for st in first.station_stats:
        loc = by_id[st.id].location if st.id in by_id else Point(float("nan"), float("nan"))
        rows.append(StationRow(st.id, loc.x, loc.y, st.mean_wait, st.arrivals, st.rejections,
                               st.completed, st.charging_hours))
    total = float(sum(r.total_charging_hours for r in results) / len(results))
    return MetricsReport(method, [int(s) for s in seeds], wait, baseline_wait if g is not None else None,
                         g, total, prox, cssi(sites, catalog), rows)


# --------------------------------------------------------------------------- emission


def stations_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATION_CSV_COLUMNS)
    for r in report.stations:
        w.writerow([getattr(r, c) for c in STATION_CSV_COLUMNS])
    return buf.getvalue()


def station_map_svg(report: MetricsReport, domain: Domain, size_px: int = 480) -> str:
    """Stations as circles whose radius grows with their mean wait."""
    sx = size_px / max(domain.width, 1e-12)
    sy = size_px / max(domain.height, 1e-12)
    top = max((r.mean_wait_h for r in report.stations), default=0.0) or 1.0
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size_px}" height="{size_px}" '
             f'viewBox="0 0 {size_px} {size_px}">',
             f'<rect x="0" y="0" width="{size_px}" height="{size_px}" fill="white" stroke="black"/>']
    for r in report.stations:
        cx = (r.x - domain.xmin) * sx
        cy = size_px - (r.y - domain.ymin) * sy
        rad = 3.0 + 12.0 * r.mean_wait_h / top
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{rad:.2f}" fill="tomato" fill-opacity="0.6">'
                     f'<title>{r.station_id}: {r.mean_wait_h:.3f} h</title></circle>')
    parts.append("</svg>")
    return "\n".join(parts)


def line_chart_svg(series: dict[str, Sequence[tuple[float, float]]], title: str = "",
                   x_label: str = "", y_label: str = "", width: int = 560, height: int = 360) -> str:
    """Minimal multi-series polyline chart."""
    pts = [p for s in series.values() for p in s if math.isfinite(p[0]) and math.isfinite(p[1])]
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    m = 50
    pw, ph = width - 2 * m, height - 2 * m

    def xy(p):
        return m + (p[0] - x0) / (x1 - x0) * pw, m + ph - (p[1] - y0) / (y1 - y0) * ph

    colors = ["steelblue", "darkorange", "seagreen", "crimson", "purple", "saddlebrown"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<text x="{width / 2}" y="20" text-anchor="middle">{title}</text>',
           f'<line x1="{m}" y1="{m + ph}" x2="{m + pw}" y2="{m + ph}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{m + ph}" stroke="black"/>',
           f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{x_label}</text>',
           f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" '
           f'text-anchor="middle">{y_label}</text>',
           f'<text x="{m}" y="{m + ph + 15}" font-size="10">{x0:.3g}</text>',
           f'<text x="{m + pw}" y="{m + ph + 15}" font-size="10" text-anchor="end">{x1:.3g}</text>',
           f'<text x="{m - 4}" y="{m + ph}" font-size="10" text-anchor="end">{y0:.3g}</text>',
           f'<text x="{m - 4}" y="{m + 8}" font-size="10" text-anchor="end">{y1:.3g}</text>']
    for i, (name, s) in enumerate(series.items()):
        c = colors[i % len(colors)]
        coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in (xy(p) for p in s
                                                         if math.isfinite(p[0]) and math.isfinite(p[1])))
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{coords}"/>')
        out.append(f'<text x="{m + pw - 4}" y="{m + 14 * (i + 1)}" font-size="11" fill="{c}" '
                   f'text-anchor="end">{name}</text>')
    out.append("</svg>")
    return "\n".join(out)


def emit_report(report: MetricsReport, out_dir: str | Path, formats: Sequence[str] = ("json", "csv"),
                domain: Domain | None = None, stem: str = "report") -> list[Path]:
    """Write the report in the requested formats; returns the written paths.

    ``svg`` produces a station map and needs ``domain``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "json":
            p = out / f"{stem}.json"
            p.write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True))
        elif fmt == "csv":
            p = out / f"{stem}_stations.csv"
            p.write_text(stations_csv(report))
        elif fmt == "svg":
            if domain is None:
                raise ContractViolation("svg output needs the scenario domain")
            p = out / f"{stem}_map.svg"
            p.write_text(station_map_svg(report, domain))
        else:
            raise ContractViolation(f"unknown report format {fmt!r}")
        written.append(p)
    return written


def load_report(path: str | Path) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text()))
