"""Static SVG rendering of a ladder program annotated with a simulated scan.

Each rung is drawn left to right between two power rails. The contact
network is rebuilt from the IL stack operations as a series/parallel tree;
coils and instruction boxes hang off its right end, one row per action.
Wire segments are blue where power flows in the trace and grey elsewhere,
and the faulting instruction is drawn in red. Output depends only on the
inputs, so identical scenarios give identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from html import escape

from ladder_verify.ast import Program, StepOp
from ladder_verify.scenario import Trace, format_value

ACTIVE = "#1565C0"
INACTIVE = "#9E9E9E"
FAULT = "#C62828"
TEXT = "#212121"

CELL_W = 110
CELL_H = 70
RAIL_X = 40
TOP = 40


@dataclass
class Node:
    kind: str  # "contact", "series", "parallel"
    children: list
    step: int = -1  # 0-based step index for contacts

    def width(self) -> int:
        if self.kind == "contact":
            return 1
        sizes = [c.width() for c in self.children]
        return sum(sizes) if self.kind == "series" else max(sizes)

    def height(self) -> int:
        if self.kind == "contact":
            return 1
        sizes = [c.height() for c in self.children]
        return max(sizes) if self.kind == "series" else sum(sizes)


def _series(a: Node | None, b: Node) -> Node:
    if a is None:
        return b
    parts = (a.children if a.kind == "series" else [a]) + (b.children if b.kind == "series" else [b])
    return Node("series", parts)


def _parallel(a: Node, b: Node) -> Node:
    parts = (a.children if a.kind == "parallel" else [a]) + (b.children if b.kind == "parallel" else [b])
    return Node("parallel", parts)


@dataclass
class RungLayout:
    network: Node | None
    outputs: list[tuple[Node | None, int]]  # (continuation contacts, action step index)


def build_rung(program: Program, rng: range) -> RungLayout:
    stack: list[Node | None] = []
    outputs: list[tuple[Node | None, int]] = []
    network = None
    for i in rng:
        step = program.steps[i]
        op = step.op
        if op.is_action:
            if network is None:
                network = stack[-1] if stack else None
                stack = [None]
            outputs.append((stack[-1] if stack else None, i))
            continue
        leaf = Node("contact", [], i)
        if op.is_load:
            stack.append(leaf)
        elif op in (StepOp.ANB, StepOp.ORB):
            b, a = stack.pop(), stack.pop()
            if op is StepOp.ANB:
                stack.append(_series(a, b) if b is not None else a)
            elif a is None or b is None:
                stack.append(a or b)
            else:
                stack.append(_parallel(a, b))
        elif op in (StepOp.AND, StepOp.ANI, StepOp.AND_CMP):
            stack[-1] = _series(stack[-1], leaf)
        else:
            stack[-1] = leaf if stack[-1] is None else _parallel(stack[-1], leaf)
    if network is None and stack:
        network = stack[-1]
    return RungLayout(network, outputs)


class _Canvas:
    def __init__(self):
        self.items: list[str] = []

    def line(self, x1, y1, x2, y2, color, width=2):
        self.items.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{color}" stroke-width="{width}"/>')

    def text(self, x, y, s, color=TEXT, size=12, anchor="middle", weight="normal"):
        self.items.append(f'<text x="{x}" y="{y}" fill="{color}" font-size="{size}" text-anchor="{anchor}"'
                          f' font-weight="{weight}">{escape(s)}</text>')

    def rect(self, x, y, w, h, stroke, fill="none", width=2, opacity=1):
        self.items.append(f'<rect x="{x}" y="{y}" width="{w}" height="{h}" stroke="{stroke}" fill="{fill}"'
                          f' fill-opacity="{opacity}" stroke-width="{width}"/>')

    def path(self, d, color, width=2):
        self.items.append(f'<path d="{d}" stroke="{color}" fill="none" stroke-width="{width}"/>')


def _color(on: bool) -> str:
    return ACTIVE if on else INACTIVE


class _RungPainter:
    def __init__(self, program: Program, trace: Trace, canvas: _Canvas):
        self.program = program
        self.canvas = canvas
        self.by_step = {ts.location.step - 1: ts for ts in trace.steps}
        self.fault_step = trace.fault.location.step - 1 if trace.fault else None

    def draw(self, node: Node | None, col: int, row: int, width: int, powered: bool) -> bool:
        """Draw ``node`` in a ``width``-column slot; return whether power leaves it."""
        c = self.canvas
        x0 = RAIL_X + col * CELL_W
        y = TOP + row * CELL_H + CELL_H // 2
        if node is None:
            c.line(x0, y, x0 + width * CELL_W, y, _color(powered))
            return powered
        if node.kind == "contact":
            out = self.contact(node.step, x0, y, powered)
            if width > 1:
                c.line(x0 + CELL_W, y, x0 + width * CELL_W, y, _color(out))
            return out
        if node.kind == "series":
            used = 0
            for child in node.children:
                w = child.width()
                powered = self.draw(child, col + used, row, w, powered)
                used += w
            if used < width:
                c.line(x0 + used * CELL_W, y, x0 + width * CELL_W, y, _color(powered))
            return powered
        outs = []
        r = row
        ys = []
        for child in node.children:
            outs.append(self.draw(child, col, r, width, powered))
            ys.append(TOP + r * CELL_H + CELL_H // 2)
            r += child.height()
        out = any(outs)
        c.line(x0, ys[0], x0, ys[-1], _color(powered))
        x1 = x0 + width * CELL_W
        for yb, ob in zip(ys[1:], outs[1:]):
            c.line(x1, ys[0], x1, yb, _color(ob))
        return out

    def contact(self, index: int, x0: int, y: int, powered: bool) -> bool:
        c = self.canvas
        step = self.program.steps[index]
        ts = self.by_step.get(index)
        closed = bool(ts and ts.contact)
        out = powered and closed
        c.line(x0, y, x0 + 40, y, _color(powered))
        c.line(x0 + 70, y, x0 + CELL_W, y, _color(out))
        glyph = _color(closed)
        c.line(x0 + 40, y - 14, x0 + 40, y + 14, glyph, 3)
        c.line(x0 + 70, y - 14, x0 + 70, y + 14, glyph, 3)
        negated = step.op in (StepOp.LDI, StepOp.ANI, StepOp.ORI)
        if negated:
            c.line(x0 + 36, y + 14, x0 + 74, y - 14, glyph)
        if step.op.is_compare:
            a, b = step.operands
            label = f"{a} {step.rel} {b}"
            values = " ".join(f"{n}={v}" for n, v in ts.reads if not n.startswith("K")) if ts else ""
        else:
            label = str(step.operands[0])
            values = format_value(None, closed != negated) if ts else ""
        c.text(x0 + 55, y + 30, label)
        if values:
            c.text(x0 + 55, y - 20, values, ACTIVE if closed else TEXT, 11)
        return out

    def action(self, index: int, x0: int, y: int, x_rail: int) -> None:
        c = self.canvas
        step = self.program.steps[index]
        ts = self.by_step.get(index)
        wire = bool(ts and ts.acc_active)
        faulted = index == self.fault_step
        c.line(x0, y, x_rail, y, _color(wire))
        cx = x_rail - CELL_W // 2
        if step.op is StepOp.CALL:
            stroke = FAULT if faulted else _color(wire)
            fill = FAULT if faulted else "#FFFFFF"
            if faulted:
                c.rect(cx - 48, y - 18, 96, 36, stroke, fill, 3, 0.15)
            else:
                c.rect(cx - 48, y - 18, 96, 36, stroke, fill)
            c.text(cx, y + 5, step.text, FAULT if faulted else TEXT, 12, weight="bold" if faulted else "normal")
            if ts:
                shown = [f"{n}={v}" for n, v in ts.reads if not n.startswith("K")]
                shown += [f"-> {d}={format_value(d, v)}" for d, v in ts.writes]
                if shown:
                    c.text(cx, y - 24, " ".join(shown), FAULT if faulted else TEXT, 11)
        else:
            color = _color(wire)
            c.line(cx - 30, y, cx - 14, y, color)
            c.line(cx + 14, y, cx + 30, y, color)
            c.path(f"M {cx - 8} {y - 14} Q {cx - 16} {y} {cx - 8} {y + 14}", color, 3)
            c.path(f"M {cx + 8} {y - 14} Q {cx + 16} {y} {cx + 8} {y + 14}", color, 3)
            if step.op is not StepOp.OUT:
                c.text(cx, y + 4, step.op.value[0], color, 11, weight="bold")
            c.text(cx, y + 30, str(step.operands[0]))
            if ts and ts.writes:
                (d, v), = ts.writes
                c.text(cx, y - 20, format_value(d, v), ACTIVE if v else TEXT, 11)


def render_svg(program: Program, trace: Trace) -> str:
    """SVG document for ``program`` annotated with the values recorded in ``trace``."""
    layouts = [build_rung(program, rng) for rng in program.rungs]
    cols = 1
    for lay in layouts:
        net_w = lay.network.width() if lay.network else 0
        cont_w = max((n.width() if n else 0 for n, _ in lay.outputs), default=0)
        cols = max(cols, net_w + cont_w + 1)
    canvas = _Canvas()
    painter = _RungPainter(program, trace, canvas)
    row = 0
    x_rail = RAIL_X + cols * CELL_W
    for r, (rng, lay) in enumerate(zip(program.rungs, layouts), start=1):
        start_row = row
        canvas.text(RAIL_X - 8, TOP + row * CELL_H + 12, f"{r}", TEXT, 11, anchor="end")
        net_w = lay.network.width() if lay.network else 0
        net_h = lay.network.height() if lay.network else 1
        out = painter.draw(lay.network, 0, row, net_w, True) if lay.network else True
        rows_used = net_h
        out_rows = []
        orow = row
        for cont, idx in lay.outputs:
            y = TOP + orow * CELL_H + CELL_H // 2
            x_start = RAIL_X + net_w * CELL_W
            cont_w = cont.width() if cont else 0
            if cont:
                painter.draw(cont, net_w, orow, cont_w, out)
            painter.action(idx, x_start + cont_w * CELL_W, y, x_rail)
            out_rows.append(y)
            orow += cont.height() if cont else 1
        rows_used = max(rows_used, orow - row)
        if len(out_rows) > 1:
            xj = RAIL_X + net_w * CELL_W
            canvas.line(xj, out_rows[0], xj, out_rows[-1], _color(out))
        row = start_row + rows_used
    height = TOP + row * CELL_H + 20
    width = x_rail + 40
    canvas.line(RAIL_X, TOP - 10, RAIL_X, height - 20, ACTIVE, 4)
    canvas.line(x_rail, TOP - 10, x_rail, height - 20, INACTIVE, 4)
    header = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
              f'viewBox="0 0 {width} {height}" font-family="monospace">')
    body = "\n".join(canvas.items)
    return f"{header}\n<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#FFFFFF\"/>\n{body}\n</svg>\n"
