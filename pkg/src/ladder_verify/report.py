"""Report model and its text / JSON / HTML renderings."""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field

from ladder_verify import __version__
from ladder_verify.ast import Device, Location
from ladder_verify.scenario import Fault, InitialValuation, Trace, TraceStep, format_trace, format_value
from ladder_verify.svg import render_svg

SCHEMA_VERSION = 1

PROVED = "proved"
ERROR = "error"
UNKNOWN = "unknown"
SKIPPED = "skipped"


@dataclass
class Outcome:
    index: int
    status: str
    instr: str
    location: Location
    source: str
    reason: str
    trace: Trace | None = None
    unknown_reason: str | None = None
    elapsed_ms: float | None = field(default=None, compare=False)


@dataclass
class Report:
    file: str
    step_count: int
    rung_count: int
    outcomes: list[Outcome] = field(default_factory=list)
    solver: str = ""
    solver_args: list[str] = field(default_factory=list)
    mode: str = "checked"
    all_vcs: bool = False
    tool_version: str = __version__

    def count(self, status: str) -> int:
        return sum(1 for o in self.outcomes if o.status == status)

    @property
    def errors(self) -> list[Outcome]:
        return [o for o in self.outcomes if o.status == ERROR]


# --- text -----------------------------------------------------------------------

def _plural(n: int, word: str) -> str:
    return f"{n} {word}" + ("" if n == 1 else "s")


def format_init(init: InitialValuation) -> str:
    parts = []
    for d, v in init.items():
        mark = " (default)" if d in init.defaulted else ""
        parts.append(f"{d}={format_value(d, v)}{mark}")
    return " ".join(parts) if parts else "(no devices)"


def _outcome_text(o: Outcome, timings: bool) -> list[str]:
    head = {PROVED: "PROVED", ERROR: "ERROR", UNKNOWN: "INCONCLUSIVE", SKIPPED: "NOT CHECKED"}[o.status]
    if o.status == UNKNOWN:
        head += f" ({o.unknown_reason})"
    line = f"[{o.index}] {head}  {o.source}  ({o.location})"
    if timings and o.elapsed_ms is not None:
        line += f"  {o.elapsed_ms:.0f} ms"
    lines = [line, f"    reason: {o.reason}"]
    if o.status == ERROR and o.trace is not None:
        lines.append(f"    initial values: {format_init(o.trace.init)}")
        lines.append("    scenario:")
        lines += [f"      {t}" for t in format_trace(o.trace)]
    return lines


def render_text(r: Report, *, timings: bool = False) -> str:
    n = len(r.outcomes)
    lines = [
        f"ladder-verify {r.tool_version}: {r.file}: {_plural(r.step_count, 'step')}, "
        f"{_plural(r.rung_count, 'rung')}, {_plural(n, 'condition')} ({r.mode} mode)",
    ]
    for o in r.outcomes:
        lines += _outcome_text(o, timings)
    errors, proved, unknown = r.count(ERROR), r.count(PROVED), r.count(UNKNOWN)
    skipped = r.count(SKIPPED)
    if errors:
        summary = f"{_plural(errors, 'runtime error')} found"
    elif unknown:
        summary = f"inconclusive: {unknown}/{n} conditions could not be decided (not counted as proved)"
    else:
        summary = f"no runtime error found: {proved}/{n} conditions proved"
    detail = f"{proved} proved, {_plural(errors, 'error')}, {unknown} inconclusive, {skipped} not checked"
    lines.append(f"{summary} ({detail})" if errors else summary)
    return "\n".join(lines) + "\n"


# --- JSON -----------------------------------------------------------------------------

def _loc(loc: Location) -> dict:
    return {"rung": loc.rung, "step": loc.step, "line": loc.line}


def _named(pairs) -> list[dict]:
    return [{"name": n, "value": v} for n, v in pairs]


def trace_to_dict(t: Trace) -> dict:
    return {
        "init": [{"device": str(d), "value": v, "defaulted": d in t.init.defaulted} for d, v in t.init.items()],
        "steps": [{
            "location": _loc(s.location),
            "text": s.text,
            "wire": s.acc_active,
            "contact": s.contact,
            "reads": _named(s.reads),
            "writes": [{"device": str(d), "value": v} for d, v in s.writes],
        } for s in t.steps],
        "fault": None if t.fault is None else {
            "location": _loc(t.fault.location),
            "reason": t.fault.reason,
            "offending": _named(t.fault.offending_values),
        },
    }


def report_to_dict(r: Report, *, timings: bool = False) -> dict:
    outcomes = []
    for o in r.outcomes:
        entry = {
            "index": o.index,
            "status": o.status,
            "instr": o.instr,
            "location": _loc(o.location),
            "source": o.source,
            "reason": o.reason,
            "unknown_reason": o.unknown_reason,
            "scenario": None if o.trace is None else trace_to_dict(o.trace),
        }
        if timings:
            entry["elapsed_ms"] = o.elapsed_ms
        outcomes.append(entry)
    return {
        "schema": SCHEMA_VERSION,
        "tool": {"name": "ladder-verify", "version": r.tool_version, "solver": r.solver,
                 "solver_args": list(r.solver_args), "mode": r.mode, "all_vcs": r.all_vcs},
        "program": {"file": r.file, "step_count": r.step_count, "rung_count": r.rung_count},
        "summary": {"conditions": len(r.outcomes), "proved": r.count(PROVED), "errors": r.count(ERROR),
                    "unknown": r.count(UNKNOWN), "skipped": r.count(SKIPPED)},
        "outcomes": outcomes,
    }


def render_json(r: Report, *, timings: bool = False) -> str:
    return json.dumps(report_to_dict(r, timings=timings), indent=2, ensure_ascii=False) + "\n"


def _load_loc(d: dict) -> Location:
    return Location(d["rung"], d["step"], d["line"])


def _load_value(device: Device, v):
    return bool(v) if device.is_bit else int(v)


def trace_from_dict(d: dict) -> Trace:
    bits, words, defaulted = {}, {}, set()
    for e in d["init"]:
        dev = Device.parse(e["device"])
        (bits if dev.is_bit else words)[dev] = _load_value(dev, e["value"])
        if e["defaulted"]:
            defaulted.add(dev)
    steps = []
    for s in d["steps"]:
        writes = []
        for w in s["writes"]:
            dev = Device.parse(w["device"])
            writes.append((dev, _load_value(dev, w["value"])))
        steps.append(TraceStep(_load_loc(s["location"]), s["text"], s["wire"], s["contact"],
                               tuple((x["name"], x["value"]) for x in s["reads"]), tuple(writes)))
    fault = None
    if d["fault"] is not None:
        f = d["fault"]
        fault = Fault(_load_loc(f["location"]), f["reason"],
                      tuple((x["name"], x["value"]) for x in f["offending"]))
    return Trace(InitialValuation(bits, words, frozenset(defaulted)), tuple(steps), fault)


def load_json(text: str) -> Report:
    """Rebuild a :class:`Report` from :func:`render_json` output."""
    d = json.loads(text)
    if d.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {d.get('schema')!r}")
    outcomes = [
        Outcome(o["index"], o["status"], o["instr"], _load_loc(o["location"]), o["source"], o["reason"],
                None if o["scenario"] is None else trace_from_dict(o["scenario"]),
                o["unknown_reason"], o.get("elapsed_ms"))
        for o in d["outcomes"]
    ]
    tool, prog = d["tool"], d["program"]
    return Report(prog["file"], prog["step_count"], prog["rung_count"], outcomes, tool["solver"],
                  list(tool["solver_args"]), tool["mode"], tool["all_vcs"], tool["version"])


# --- HTML ---------------------------------------------------------------------------------

def render_html(program, outcome: Outcome, report: Report) -> str:
    """One self-contained page for an error: summary text plus the ladder diagram."""
    body = "\n".join(_outcome_text(outcome, False))
    svg = render_svg(program, outcome.trace)
    title = f"{report.file}: {outcome.reason}"
    return (
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        f"<title>{html.escape(title)}</title>\n"
        "<style>body{font-family:sans-serif;margin:2em}pre{background:#f5f5f5;padding:1em}</style>\n"
        "</head>\n<body>\n"
        f"<h1>{html.escape(report.file)}</h1>\n"
        f"<h2>Error location</h2>\n<p>{html.escape(outcome.source)} ({html.escape(str(outcome.location))})</p>\n"
        f"<h2>Error reason</h2>\n<p>{html.escape(outcome.reason)}</p>\n"
        f"<h2>Error scenario</h2>\n<pre>{html.escape(body)}</pre>\n"
        f"{svg}\n</body>\n</html>\n"
    )


__all__ = [
    "ERROR", "PROVED", "SKIPPED", "UNKNOWN", "Outcome", "Report", "load_json", "render_html",
    "render_json", "render_svg", "render_text",
]
