"""Graphviz DOT generation for models, event overlays, and chronologies.

Thimacs map to nested clusters, stages to nodes, flows to solid edges,
and triggers to dashed edges. Event regions generally cut across
cluster boundaries and DOT clusters cannot overlap, so overlays are
drawn by filling the region's nodes and adding a legend instead.
Output is deterministic: declaration order in, identical bytes out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .behavior import Chronology, EventDef
from .core import ElementId, Model, Thimac
from .errors import UnknownHighlightEvent

_FILL = "lightgoldenrod1"


class RenderMode(enum.Enum):
    STATIC = "static"
    EVENT_OVERLAY = "events"
    CHRONOLOGY = "chronology"


@dataclass
class RenderOptions:
    mode: RenderMode = RenderMode.STATIC
    highlight: str | None = None
    simplified: bool = False


def _quote(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def _stage_label(model: Model, stage_id: ElementId) -> str:
    stage = model.stages[stage_id]
    label = stage.kind.value
    if stage.annotation is not None:
        label += f" @{stage.annotation}"
    return label


def _hidden_stages(model: Model) -> set[ElementId]:
    hidden: set[ElementId] = set()
    for flow in model.flows:
        hidden.update(flow.implicit_segments)
    return hidden


def _contracted_flows(
    model: Model, hidden: set[ElementId]
) -> list[tuple[ElementId, ElementId]]:
    """Flow endpoints with normalization-inserted stages walked through."""
    outgoing: dict[ElementId, list[ElementId]] = {}
    for flow in model.flows:
        outgoing.setdefault(flow.from_stage, []).append(flow.to_stage)

    def sinks(stage: ElementId, seen: frozenset[ElementId]) -> list[ElementId]:
        if stage not in hidden:
            return [stage]
        out: list[ElementId] = []
        for nxt in outgoing.get(stage, []):
            if nxt in seen:
                continue
            out.extend(sinks(nxt, seen | {nxt}))
        return out

    pairs: list[tuple[ElementId, ElementId]] = []
    for flow in model.flows:
        if flow.from_stage in hidden:
            continue
        for dst in sinks(flow.to_stage, frozenset({flow.from_stage, flow.to_stage})):
            if (flow.from_stage, dst) not in pairs:
                pairs.append((flow.from_stage, dst))
    return pairs


def _emit_cluster(
    model: Model,
    thimac: Thimac,
    indent: int,
    out: list[str],
    counter: list[int],
    hidden: set[ElementId],
    filled: set[ElementId],
) -> None:
    pad = "  " * indent
    out.append(f"{pad}subgraph cluster_{counter[0]} {{")
    counter[0] += 1
    label = thimac.name
    if thimac.annotation is not None:
        label += f" @{thimac.annotation}"
    out.append(f"{pad}  label={_quote(label)};")
    for sid in thimac.stages.values():
        if sid in hidden:
            continue
        attrs = f"label={_quote(_stage_label(model, sid))}"
        if sid in filled:
            attrs += f", style=filled, fillcolor={_FILL}"
        out.append(f"{pad}  {_quote(model.qualified_name(sid))} [{attrs}];")
    for child in thimac.children:
        _emit_cluster(
            model, model.thimacs[child], indent + 1, out, counter, hidden, filled
        )
    out.append(f"{pad}}}")


def render_dot(
    model: Model,
    events: list[EventDef] | None = None,
    chronology: Chronology | None = None,
    opts: RenderOptions | None = None,
) -> str:
    events = events or []
    opts = opts or RenderOptions()

    if opts.mode is RenderMode.CHRONOLOGY:
        return _render_chronology(events, chronology)

    filled: set[ElementId] = set()
    legend: list[str] = []
    if opts.mode is RenderMode.EVENT_OVERLAY:
        if opts.highlight is not None:
            wanted = [e for e in events if e.id == opts.highlight]
            if not wanted:
                raise UnknownHighlightEvent(
                    f"no event '{opts.highlight}' to highlight"
                )
            chosen = wanted
        else:
            chosen = events
        for event in chosen:
            filled.update(s for s in event.region if s in model.stages)
            text = event.id if event.label is None else f"{event.id}: {event.label}"
            legend.append(text)

    hidden = _hidden_stages(model) if opts.simplified else set()

    out = ["digraph tm {", "  rankdir=LR;", "  node [shape=box];"]
    counter = [0]
    for root in model.roots:
        _emit_cluster(
            model, model.thimacs[root], 1, out, counter, hidden, filled
        )
    if opts.simplified and hidden:
        for src, dst in _contracted_flows(model, hidden):
            out.append(
                f"  {_quote(model.qualified_name(src))} -> "
                f"{_quote(model.qualified_name(dst))};"
            )
    else:
        for flow in model.flows:
            out.append(
                f"  {_quote(model.qualified_name(flow.from_stage))} -> "
                f"{_quote(model.qualified_name(flow.to_stage))};"
            )
    for trig in model.triggers:
        if opts.simplified and (
            trig.from_stage in hidden or trig.to_stage in hidden
        ):
            continue
        out.append(
            f"  {_quote(model.qualified_name(trig.from_stage))} -> "
            f"{_quote(model.qualified_name(trig.to_stage))} [style=dashed];"
        )
    if legend:
        rows = "\\l".join(legend) + "\\l"
        out.append(f"  legend [shape=note, label={_quote(rows)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _render_chronology(
    events: list[EventDef], chronology: Chronology | None
) -> str:
    labels = {e.id: e.label for e in events}
    out = ["digraph tm_chronology {", "  rankdir=TB;", "  node [shape=ellipse];"]
    if chronology is not None:
        for node in chronology.nodes:
            label = labels.get(node)
            text = node if label is None else f"{node}\\n{label}"
            out.append(f"  {_quote(node)} [label={_quote(text)}];")
        for src, dst in chronology.edges:
            out.append(f"  {_quote(src)} -> {_quote(dst)};")
    out.append("}")
    return "\n".join(out) + "\n"
