"""Gantt charts of schedules as SVG or plain text."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

from .network import Network, Request, Schedule
from .replay import storage_intervals


@dataclass(frozen=True)
class Bar:
    label: str
    start: int
    end: int
    lane: int = 0


@dataclass
class GanttRow:
    name: str
    kind: str  # "link", "group" or "storage"
    bars: list[Bar] = field(default_factory=list)

    @property
    def lanes(self) -> int:
        return max((b.lane for b in self.bars), default=0) + 1


@dataclass
class GanttDocument:
    rows: list[GanttRow]
    horizon: int


def _assign_lanes(intervals: list[tuple[int, int, str]]) -> list[Bar]:
    lane_end: list[int] = []
    bars = []
    for s, e, label in sorted(intervals, key=lambda iv: (iv[0], iv[1], iv[2])):
        for k, end in enumerate(lane_end):
            if end <= s:
                lane_end[k] = e
                break
        else:
            k = len(lane_end)
            lane_end.append(e)
        bars.append(Bar(label, s, e, k))
    return bars


def build_gantt(schedule: Schedule, network: Network, request: Optional[Request] = None,
                storage_lanes: bool = False, group_lanes: bool = False) -> GanttDocument:
    rows = []
    for l in network.links:
        bars = [Bar(e.demand, e.start, e.end) for e in schedule.for_link(l.id)]
        rows.append(GanttRow(f"{l.id} ({l.src}->{l.dst})", "link", bars))
    if group_lanes:
        for i, g in enumerate(network.shared_groups):
            ivs = [(e.start, e.end, e.demand) for e in schedule.entries if e.link in g.members]
            rows.append(GanttRow(f"group{i} cap={g.capacity}", "group", _assign_lanes(ivs)))
    if storage_lanes:
        held = storage_intervals(schedule, network, request)
        for s in network.sites:
            if s.id in held:
                cap = "inf" if s.storage is None else s.storage
                ivs = [(a, b, name) for a, b, _, name in held[s.id]]
                rows.append(GanttRow(f"{s.id} storage cap={cap}", "storage", _assign_lanes(ivs)))
    return GanttDocument(rows, schedule.makespan)


_PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
            "#9c755f", "#bab0ac"]


def to_svg(doc: GanttDocument, unit: int = 40, lane_h: int = 22, label_w: int = 190) -> str:
    horizon = max(doc.horizon, 1)
    colours: dict[str, str] = {}
    for row in doc.rows:
        for b in row.bars:
            colours.setdefault(b.label, _PALETTE[len(colours) % len(_PALETTE)])
    height = sum(r.lanes for r in doc.rows) * lane_h + 40
    width = label_w + horizon * unit + 20
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="monospace" font-size="11">']
    y = 10
    for row in doc.rows:
        h = row.lanes * lane_h
        out.append(f'<text x="4" y="{y + h / 2 + 4:g}">{escape(row.name)}</text>')
        out.append(f'<rect x="{label_w}" y="{y}" width="{horizon * unit}" height="{h}" fill="none" stroke="#ccc"/>')
        for b in row.bars:
            bx = label_w + b.start * unit
            by = y + b.lane * lane_h + 2
            out.append(f'<rect x="{bx}" y="{by}" width="{(b.end - b.start) * unit}" height="{lane_h - 4}" '
                       f'fill="{colours[b.label]}" stroke="#333"/>')
            out.append(f'<text x="{bx + 3}" y="{by + lane_h - 9}">{escape(b.label)}</text>')
        y += h
    for t in range(horizon + 1):
        x = label_w + t * unit
        out.append(f'<line x1="{x}" y1="{y}" x2="{x}" y2="{y + 5}" stroke="#333"/>')
        out.append(f'<text x="{x - 3}" y="{y + 17}">{t}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def to_ascii(doc: GanttDocument) -> str:
    """One text line per lane; each time unit is one character."""
    width = max((len(r.name) for r in doc.rows), default=0)
    lines = []
    for row in doc.rows:
        for lane in range(row.lanes):
            cells = ["."] * doc.horizon
            for b in row.bars:
                if b.lane != lane:
                    continue
                mark = b.label[-1] if b.label else "#"
                for t in range(b.start, b.end):
                    cells[t] = mark
            name = row.name if lane == 0 else ""
            lines.append(f"{name:<{width}} |{''.join(cells)}|")
    ruler = "".join(str(t % 10) for t in range(doc.horizon))
    lines.append(f"{'':<{width}} |{ruler}|")
    return "\n".join(lines) + "\n"
