"""Static TM models: thimacs, stages, flow and trigger edges.

A model is a forest of thimacs ("thing/machines"). Each thimac owns at
most one stage per kind; the transfer stage is a single bidirectional
port. Flow edges carry things between stages, trigger edges are causal
dashes. Models are append-only during construction and treated as
immutable afterwards; ``normalize`` returns a new model.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .diagnostics import SourceSpan
from .errors import (
    AmbiguousExpansion,
    DuplicateName,
    DuplicateStageKind,
    UnknownEndpoint,
    UnknownParent,
    UnknownThimac,
)

import enum

ElementId = int


class StageKind(enum.Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"
    RECEIVE = "receive"

    @classmethod
    def from_name(cls, name: str) -> "StageKind":
        # arrive/accept are surface aliases for the receive stage
        if name in ("arrive", "accept"):
            return cls.RECEIVE
        return cls(name)


# Legal (from_kind, to_kind) pairs for flow edges within one machine.
LEGAL_SAME_MACHINE: frozenset[tuple[StageKind, StageKind]] = frozenset(
    {
        (StageKind.CREATE, StageKind.PROCESS),
        (StageKind.CREATE, StageKind.RELEASE),
        (StageKind.RECEIVE, StageKind.PROCESS),
        (StageKind.RECEIVE, StageKind.RELEASE),
        (StageKind.PROCESS, StageKind.RELEASE),
        (StageKind.RELEASE, StageKind.TRANSFER),
        (StageKind.TRANSFER, StageKind.RECEIVE),
    }
)

# Across machine boundaries only port-to-port movement is legal.
LEGAL_CROSS_MACHINE: frozenset[tuple[StageKind, StageKind]] = frozenset(
    {(StageKind.TRANSFER, StageKind.TRANSFER)}
)


def edge_legal(from_kind: StageKind, to_kind: StageKind, same_machine: bool) -> bool:
    table = LEGAL_SAME_MACHINE if same_machine else LEGAL_CROSS_MACHINE
    return (from_kind, to_kind) in table


@dataclass
class Thimac:
    id: ElementId
    name: str
    parent: ElementId | None
    stages: dict[StageKind, ElementId] = field(default_factory=dict)
    children: list[ElementId] = field(default_factory=list)
    annotation: int | None = None
    span: SourceSpan | None = None


@dataclass
class Stage:
    id: ElementId
    kind: StageKind
    thimac: ElementId
    annotation: int | None = None
    span: SourceSpan | None = None


@dataclass
class FlowEdge:
    id: ElementId
    from_stage: ElementId
    to_stage: ElementId
    # stages created by normalization while expanding this edge's chain
    implicit_segments: list[ElementId] = field(default_factory=list)
    span: SourceSpan | None = None


@dataclass
class TriggerEdge:
    id: ElementId
    from_stage: ElementId
    to_stage: ElementId
    span: SourceSpan | None = None


@dataclass
class MemoryEdge:
    """Reserved dashed relation; parsed but rejected by the validator."""

    id: ElementId
    from_stage: ElementId
    to_stage: ElementId
    span: SourceSpan | None = None


class Model:
    """Hierarchical TM graph with declaration-order element tables."""

    def __init__(self) -> None:
        self.roots: list[ElementId] = []
        self.thimacs: dict[ElementId, Thimac] = {}
        self.stages: dict[ElementId, Stage] = {}
        self.flows: list[FlowEdge] = []
        self.triggers: list[TriggerEdge] = []
        self.memories: list[MemoryEdge] = []
        self._next_id = 1

    # -- construction -------------------------------------------------

    def _alloc(self) -> ElementId:
        eid = self._next_id
        self._next_id += 1
        return eid

    def add_thimac(
        self,
        name: str,
        parent: ElementId | None = None,
        annotation: int | None = None,
        span: SourceSpan | None = None,
    ) -> ElementId:
        if parent is not None and parent not in self.thimacs:
            raise UnknownParent(f"no thimac with id {parent}")
        siblings = self.roots if parent is None else self.thimacs[parent].children
        for sib in siblings:
            if self.thimacs[sib].name == name:
                raise DuplicateName(
                    f"thimac '{name}' already declared under "
                    f"{'the model root' if parent is None else self.qualified_name(parent)}"
                )
        eid = self._alloc()
        self.thimacs[eid] = Thimac(eid, name, parent, annotation=annotation, span=span)
        siblings.append(eid)
        return eid

    def add_stage(
        self,
        thimac: ElementId,
        kind: StageKind,
        annotation: int | None = None,
        span: SourceSpan | None = None,
    ) -> ElementId:
        if thimac not in self.thimacs:
            raise UnknownThimac(f"no thimac with id {thimac}")
        owner = self.thimacs[thimac]
        if kind in owner.stages:
            raise DuplicateStageKind(
                f"{self.qualified_name(thimac)} already has a {kind.value} stage"
            )
        eid = self._alloc()
        self.stages[eid] = Stage(eid, kind, thimac, annotation=annotation, span=span)
        owner.stages[kind] = eid
        return eid

    def _resolve_endpoint(self, ref: ElementId | str) -> ElementId:
        if isinstance(ref, str):
            sid = self.find_stage(ref)
            if sid is None:
                raise UnknownEndpoint(f"no stage at path '{ref}'")
            return sid
        if ref not in self.stages:
            raise UnknownEndpoint(f"no stage with id {ref}")
        return ref

    def add_flow(
        self,
        from_stage: ElementId | str,
        to_stage: ElementId | str,
        span: SourceSpan | None = None,
    ) -> ElementId:
        src = self._resolve_endpoint(from_stage)
        dst = self._resolve_endpoint(to_stage)
        if src == dst:
            raise UnknownEndpoint("flow endpoints must differ")
        existing = self.find_flow(src, dst)
        if existing is not None:
            # parallel duplicates collapse to the first edge
            return existing.id
        eid = self._alloc()
        self.flows.append(FlowEdge(eid, src, dst, span=span))
        return eid

    def add_trigger(
        self,
        from_stage: ElementId | str,
        to_stage: ElementId | str,
        span: SourceSpan | None = None,
    ) -> ElementId:
        src = self._resolve_endpoint(from_stage)
        dst = self._resolve_endpoint(to_stage)
        for t in self.triggers:
            if t.from_stage == src and t.to_stage == dst:
                return t.id
        eid = self._alloc()
        self.triggers.append(TriggerEdge(eid, src, dst, span=span))
        return eid

    def add_memory(
        self,
        from_stage: ElementId | str,
        to_stage: ElementId | str,
        span: SourceSpan | None = None,
    ) -> ElementId:
        src = self._resolve_endpoint(from_stage)
        dst = self._resolve_endpoint(to_stage)
        eid = self._alloc()
        self.memories.append(MemoryEdge(eid, src, dst, span=span))
        return eid

    def ensure_transfer(self, thimac: ElementId) -> ElementId:
        """Return the thimac's transfer port, materializing it if absent."""
        owner = self.thimacs[thimac]
        port = owner.stages.get(StageKind.TRANSFER)
        if port is None:
            port = self.add_stage(thimac, StageKind.TRANSFER)
        return port

    # -- lookup -------------------------------------------------------

    def find_flow(self, src: ElementId, dst: ElementId) -> FlowEdge | None:
        for f in self.flows:
            if f.from_stage == src and f.to_stage == dst:
                return f
        return None

    def find_thimac(self, path: str) -> ElementId | None:
        parts = path.split(".")
        scope = self.roots
        current: ElementId | None = None
        for part in parts:
            current = None
            for tid in scope:
                if self.thimacs[tid].name == part:
                    current = tid
                    break
            if current is None:
                return None
            scope = self.thimacs[current].children
        return current

    def find_stage(self, path: str) -> ElementId | None:
        """Resolve a dotted path to a stage id.

        A trailing stage-kind segment names that stage; a path ending at
        a thimac denotes its transfer port (box-to-box sugar) without
        materializing it.
        """
        parts = path.split(".")
        kind: StageKind | None = None
        if parts and parts[-1] in STAGE_KIND_NAMES:
            kind = StageKind.from_name(parts[-1])
            parts = parts[:-1]
        if not parts:
            return None
        tid = self.find_thimac(".".join(parts))
        if tid is None:
            return None
        if kind is None:
            kind = StageKind.TRANSFER
        return self.thimacs[tid].stages.get(kind)

    def qualified_name(self, element: ElementId) -> str:
        if element in self.thimacs:
            parts = []
            cur: ElementId | None = element
            while cur is not None:
                t = self.thimacs[cur]
                parts.append(t.name)
                cur = t.parent
            return ".".join(reversed(parts))
        if element in self.stages:
            st = self.stages[element]
            return f"{self.qualified_name(st.thimac)}.{st.kind.value}"
        for edge in self.flows:
            if edge.id == element:
                return (
                    f"{self.qualified_name(edge.from_stage)}"
                    f"->{self.qualified_name(edge.to_stage)}"
                )
        for trig in self.triggers:
            if trig.id == element:
                return (
                    f"{self.qualified_name(trig.from_stage)}"
                    f"~>{self.qualified_name(trig.to_stage)}"
                )
        for mem in self.memories:
            if mem.id == element:
                return (
                    f"{self.qualified_name(mem.from_stage)}"
                    f"~~{self.qualified_name(mem.to_stage)}"
                )
        raise KeyError(f"unknown element id {element}")

    def same_machine(self, stage_a: ElementId, stage_b: ElementId) -> bool:
        return self.stages[stage_a].thimac == self.stages[stage_b].thimac

    def flow_legal(self, edge: FlowEdge) -> bool:
        return edge_legal(
            self.stages[edge.from_stage].kind,
            self.stages[edge.to_stage].kind,
            self.same_machine(edge.from_stage, edge.to_stage),
        )

    def iter_thimacs(self) -> list[Thimac]:
        """All thimacs in declaration (depth-first) order."""
        out: list[Thimac] = []

        def walk(tid: ElementId) -> None:
            t = self.thimacs[tid]
            out.append(t)
            for c in t.children:
                walk(c)

        for r in self.roots:
            walk(r)
        return out

    def stages_in_order(self) -> list[Stage]:
        return sorted(self.stages.values(), key=lambda s: s.id)

    def element_count(self) -> int:
        return (
            len(self.thimacs)
            + len(self.stages)
            + len(self.flows)
            + len(self.triggers)
            + len(self.memories)
        )

    def copy(self) -> "Model":
        return copy.deepcopy(self)


STAGE_KIND_NAMES = {
    "create",
    "process",
    "release",
    "transfer",
    "receive",
    "arrive",
    "accept",
}


# -- normalization ----------------------------------------------------

_T = StageKind.TRANSFER
_R = StageKind.RELEASE
_RV = StageKind.RECEIVE


def _same_machine_inserts(x: StageKind, y: StageKind) -> list[StageKind] | None:
    if x in (StageKind.CREATE, StageKind.RECEIVE, StageKind.PROCESS) and y is _T:
        return [_R]
    if x is _T and y in (StageKind.PROCESS, StageKind.RELEASE):
        return [_RV]
    return None


def _cross_machine_chain(
    x: StageKind, y: StageKind
) -> tuple[list[StageKind], list[StageKind]] | None:
    if y is StageKind.CREATE:
        return None
    if x is _T:
        src: list[StageKind] = []
    elif x is _R:
        src = [_T]
    else:
        src = [_R, _T]
    if y is _T:
        dst: list[StageKind] = []
    elif y is _RV:
        dst = [_T]
    else:
        dst = [_T, _RV]
    return src, dst


def normalize(model: Model, strict: bool = True) -> Model:
    """Expand elided stage chains so every flow edge is legality-exact.

    Cross-machine flows gain the missing release/transfer/receive
    members; within-machine transfer skips gain the elided release or
    receive. Existing stages are reused, created ones are recorded in
    each expanded edge's ``implicit_segments``. Create stages are never
    inserted: flow origins must be explicit.

    With ``strict`` (the default) an edge admitting no legal expansion
    raises :class:`AmbiguousExpansion`; otherwise it is left in place
    for the validator to report.
    """
    out = model.copy()
    new_flows: list[FlowEdge] = []
    for edge in out.flows:
        if out.flow_legal(edge):
            new_flows.append(edge)
            continue
        src_stage = out.stages[edge.from_stage]
        dst_stage = out.stages[edge.to_stage]
        same = src_stage.thimac == dst_stage.thimac
        if same:
            inserts = _same_machine_inserts(src_stage.kind, dst_stage.kind)
            if inserts is None:
                if strict:
                    raise AmbiguousExpansion(
                        f"flow {out.qualified_name(edge.from_stage)} -> "
                        f"{out.qualified_name(edge.to_stage)} has no legal expansion"
                    )
                new_flows.append(edge)
                continue
            plan = [(k, src_stage.thimac) for k in inserts]
        else:
            chain = _cross_machine_chain(src_stage.kind, dst_stage.kind)
            if chain is None:
                if strict:
                    raise AmbiguousExpansion(
                        f"flow {out.qualified_name(edge.from_stage)} -> "
                        f"{out.qualified_name(edge.to_stage)} has no legal expansion"
                    )
                new_flows.append(edge)
                continue
            src_ins, dst_ins = chain
            plan = [(k, src_stage.thimac) for k in src_ins]
            plan += [(k, dst_stage.thimac) for k in dst_ins]

        created: list[ElementId] = []
        chain_ids = [edge.from_stage]
        for kind, owner in plan:
            sid = out.thimacs[owner].stages.get(kind)
            if sid is None:
                sid = out.add_stage(owner, kind)
                created.append(sid)
            chain_ids.append(sid)
        chain_ids.append(edge.to_stage)

        for a, b in zip(chain_ids, chain_ids[1:]):
            new_flows.append(
                FlowEdge(
                    out._alloc(),
                    a,
                    b,
                    implicit_segments=list(created),
                    span=edge.span,
                )
            )
    # expansions may recreate edges declared elsewhere; keep the first
    deduped: list[FlowEdge] = []
    seen: set[tuple[ElementId, ElementId]] = set()
    for flow in new_flows:
        key = (flow.from_stage, flow.to_stage)
        if key in seen:
            continue
        seen.add(key)
        deduped.append(flow)
    out.flows = deduped
    return out


def is_normalized(model: Model) -> bool:
    """True iff every flow edge is already in the legality matrix."""
    return all(model.flow_legal(edge) for edge in model.flows)


# -- structural equality ----------------------------------------------


def _signature(model: Model):
    thimacs = {model.qualified_name(t.id) for t in model.thimacs.values()}
    stages = {
        (model.qualified_name(s.thimac), s.kind.value) for s in model.stages.values()
    }
    flows = {
        (model.qualified_name(f.from_stage), model.qualified_name(f.to_stage))
        for f in model.flows
    }
    triggers = {
        (model.qualified_name(t.from_stage), model.qualified_name(t.to_stage))
        for t in model.triggers
    }
    memories = {
        (model.qualified_name(m.from_stage), model.qualified_name(m.to_stage))
        for m in model.memories
    }
    return thimacs, stages, flows, triggers, memories


def model_equal(a: Model, b: Model) -> bool:
    """Structural equality up to element ids, edge order, and provenance.

    Thimacs are matched by qualified name, stages by (owner, kind), and
    edges by their matched endpoints; normalization provenance and
    annotations do not participate.
    """
    return _signature(a) == _signature(b)
