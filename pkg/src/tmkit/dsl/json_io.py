"""JSON import/export for models, using qualified names as identifiers.

The document layout is described by ``schemas/tm-model.schema.json``.
``from_json(to_json(x))`` reproduces a structurally equal model.
"""

from __future__ import annotations

import json

from ..behavior import Chronology, EventDef
from ..core import Model, StageKind
from ..diagnostics import Diagnostic, Severity, has_errors
from ..errors import DuplicateName, DuplicateStageKind
from .parser import ParseResult


def to_json(result: ParseResult) -> str:
    if result.model is None:
        raise ValueError("cannot serialize a parse result without a model")
    model = result.model
    thimacs = []
    for thimac in model.iter_thimacs():
        stages = [
            {
                "kind": model.stages[sid].kind.value,
                "annotation": model.stages[sid].annotation,
            }
            for sid in thimac.stages.values()
        ]
        thimacs.append(
            {
                "name": model.qualified_name(thimac.id),
                "parent": (
                    model.qualified_name(thimac.parent)
                    if thimac.parent is not None
                    else None
                ),
                "annotation": thimac.annotation,
                "stages": stages,
            }
        )
    flows = [
        {
            "from": model.qualified_name(f.from_stage),
            "to": model.qualified_name(f.to_stage),
            "implicitSegments": [
                model.qualified_name(s) for s in f.implicit_segments
            ],
        }
        for f in model.flows
    ]
    triggers = [
        {
            "from": model.qualified_name(t.from_stage),
            "to": model.qualified_name(t.to_stage),
        }
        for t in model.triggers
    ]
    events = [
        {
            "id": e.id,
            "label": e.label,
            "region": sorted(model.qualified_name(s) for s in e.region),
            "repeat": e.multiplicity,
            "contains": list(e.subevents),
        }
        for e in result.events
    ]
    chronology = None
    if result.chronology is not None:
        chronology = {
            "nodes": list(result.chronology.nodes),
            "edges": [[a, b] for a, b in result.chronology.edges],
        }
    doc = {
        "thimacs": thimacs,
        "flows": flows,
        "triggers": triggers,
        "events": events,
        "chronology": chronology,
    }
    if model.memories:
        doc["memories"] = [
            {
                "from": model.qualified_name(m.from_stage),
                "to": model.qualified_name(m.to_stage),
            }
            for m in model.memories
        ]
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> ParseResult:
    diags: list[Diagnostic] = []

    def err(code: str, message: str) -> None:
        diags.append(Diagnostic(Severity.ERROR, code, message))

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        err("JSON_MALFORMED", f"invalid JSON: {exc}")
        return ParseResult(None, [], None, diags)
    if not isinstance(doc, dict):
        err("JSON_MALFORMED", "top-level value must be an object")
        return ParseResult(None, [], None, diags)

    model = Model()
    thimac_ids: dict[str, int] = {}

    for entry in doc.get("thimacs", []):
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            err("JSON_MALFORMED", "thimac entry without a name")
            continue
        parent = entry.get("parent")
        parent_id = None
        if parent is not None:
            parent_id = thimac_ids.get(parent)
            if parent_id is None:
                err("DANGLING_REF", f"thimac '{name}' references unknown parent '{parent}'")
                continue
        local = name.rsplit(".", 1)[-1]
        try:
            tid = model.add_thimac(local, parent_id, entry.get("annotation"))
        except DuplicateName as exc:
            err("DUPLICATE_DEF", str(exc))
            continue
        thimac_ids[name] = tid
        for stage in entry.get("stages", []):
            kind_name = stage.get("kind")
            try:
                kind = StageKind.from_name(kind_name)
            except (ValueError, TypeError):
                err(
                    "UNKNOWN_STAGE_KIND",
                    f"thimac '{name}' declares unknown stage kind {kind_name!r}",
                )
                continue
            try:
                model.add_stage(tid, kind, stage.get("annotation"))
            except DuplicateStageKind as exc:
                err("DUPLICATE_DEF", str(exc))

    def stage_ref(qualified, context: str) -> int | None:
        if not isinstance(qualified, str):
            err("JSON_MALFORMED", f"{context}: stage reference must be a string")
            return None
        sid = model.find_stage(qualified)
        if sid is None:
            err("DANGLING_REF", f"{context}: no stage at '{qualified}'")
        return sid

    for entry in doc.get("flows", []):
        src = stage_ref(entry.get("from"), "flow")
        dst = stage_ref(entry.get("to"), "flow")
        if src is None or dst is None:
            continue
        fid = model.add_flow(src, dst)
        segments = []
        for seg in entry.get("implicitSegments", []):
            sid = stage_ref(seg, "flow implicitSegments")
            if sid is not None:
                segments.append(sid)
        edge = next(f for f in model.flows if f.id == fid)
        edge.implicit_segments = segments

    for entry in doc.get("triggers", []):
        src = stage_ref(entry.get("from"), "trigger")
        dst = stage_ref(entry.get("to"), "trigger")
        if src is not None and dst is not None:
            model.add_trigger(src, dst)

    for entry in doc.get("memories", []):
        src = stage_ref(entry.get("from"), "memory")
        dst = stage_ref(entry.get("to"), "memory")
        if src is not None and dst is not None:
            model.add_memory(src, dst)

    events: list[EventDef] = []
    for entry in doc.get("events", []):
        eid = entry.get("id")
        if not isinstance(eid, str) or not eid:
            err("JSON_MALFORMED", "event entry without an id")
            continue
        region: set[int] = set()
        for ref in entry.get("region", []):
            sid = stage_ref(ref, f"event '{eid}' region")
            if sid is not None:
                region.add(sid)
        repeat = entry.get("repeat", 1)
        if not isinstance(repeat, int) or repeat < 1:
            err("JSON_MALFORMED", f"event '{eid}' repeat must be a positive integer")
            repeat = 1
        events.append(
            EventDef(eid, entry.get("label"), region, repeat, list(entry.get("contains", [])))
        )
    declared = {e.id for e in events}
    for event in events:
        for sub in event.subevents:
            if sub not in declared:
                err("DANGLING_REF", f"event '{event.id}' contains undeclared event '{sub}'")

    chronology = None
    chrono_doc = doc.get("chronology")
    if chrono_doc is not None:
        chronology = Chronology()
        for node in chrono_doc.get("nodes", []):
            if isinstance(node, str):
                chronology.add_node(node)
        for pair in chrono_doc.get("edges", []):
            if (
                isinstance(pair, list)
                and len(pair) == 2
                and all(isinstance(x, str) for x in pair)
            ):
                chronology.add_edge(pair[0], pair[1])
            else:
                err("JSON_MALFORMED", f"chronology edge {pair!r} must be a [from, to] pair")

    return ParseResult(
        None if has_errors(diags) else model, events, chronology, diags
    )
