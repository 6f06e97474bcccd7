"""The pattern quintuple of a boundaried colored graph or of a clause.

A pattern records everything about a boundary tuple that quantifier-free
formulas can see: which indices carry equal vertices, which are apices, their
colors, the induced edges, and the family of connection graphs realizable by
disjoint path systems.

Connection graphs carry loops as well as edges: a loop at index ``i`` records
a single-vertex path occupying the boundary vertex ``v_i`` (these participate
in disjointness, so a loop constrains which other connections can coexist).
The family is computed at the vertex level and then lifted to index graphs,
which keeps it congruent across repeated boundary entries.
"""

from __future__ import annotations

from dataclasses import dataclass

from .structures import BOT


@dataclass(frozen=True)
class ConnGraph:
    """One member of the connection family: loops plus edges on indices."""

    loops: frozenset
    edges: frozenset  # pairs (i, j) with i < j

    def sort_key(self):
        return (tuple(sorted(self.loops)), tuple(sorted(self.edges)))


@dataclass(frozen=True)
class Pattern:
    """Quintuple (V, kappa, delta, H_e, H_P) over boundary indices 1..r.

    ``index_set`` is the set of indices whose boundary entry is present.
    ``dp_cap`` records the arity cap the connection family was built with;
    comparing patterns built with different caps is meaningless, so helpers
    reject it.
    """

    r: int
    index_set: frozenset
    parts: frozenset  # frozensets partitioning index_set
    kappa: frozenset  # pairs (index, constant position), 1-based
    delta: frozenset  # pairs (index, color position), 1-based
    h_e: frozenset  # pairs (i, j) with i < j
    h_p: frozenset  # of ConnGraph
    h: int
    l: int
    dp_cap: int

    def is_empty(self):
        return False

    def sort_key(self):
        return (
            self.r,
            tuple(sorted(self.index_set)),
            tuple(sorted(tuple(sorted(p)) for p in self.parts)),
            tuple(sorted(self.kappa)),
            tuple(sorted(self.delta)),
            tuple(sorted(self.h_e)),
            tuple(sorted(g.sort_key() for g in self.h_p)),
        )


class EmptyPattern:
    """The distinguished pattern of an unsatisfiable clause."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def is_empty(self):
        return True

    def __repr__(self):
        return "EmptyPattern()"


EMPTY_PATTERN = EmptyPattern()


def check_same_cap(a, b):
    if a.dp_cap != b.dp_cap or a.h != b.h or a.l != b.l:
        raise ValueError(
            f"patterns built against different parameters are not comparable: "
            f"(h={a.h}, l={a.l}, dp_cap={a.dp_cap}) vs (h={b.h}, l={b.l}, dp_cap={b.dp_cap})"
        )


def lift_system(trivials, pairs, boundary):
    """Lift a vertex-level path system to a connection graph on indices.

    ``trivials`` is the set of vertices occupied by single-vertex paths and
    ``pairs`` the set of unordered endpoint pairs of the non-trivial paths.
    The lift marks every index pair the system connects, so repeated boundary
    entries come out congruent.
    """
    idx = [(i, v) for i, v in enumerate(boundary, start=1) if v is not BOT]
    loops = frozenset(i for i, v in idx if v in trivials)
    pair_sets = {frozenset(p) for p in pairs}
    edges = set()
    for i, vi in idx:
        for j, vj in idx:
            if i >= j:
                continue
            if vi == vj:
                if vi in trivials:
                    edges.add((i, j))
            elif frozenset((vi, vj)) in pair_sets:
                edges.add((i, j))
    return ConnGraph(loops=loops, edges=frozenset(edges))


def assemble_pattern(structure, boundary, apex_entries, h_p, dp_cap):
    """Build the quintuple from a boundary tuple and a connection family."""
    idx = [(i, v) for i, v in enumerate(boundary, start=1) if v is not BOT]
    index_set = frozenset(i for i, _ in idx)
    by_vertex = {}
    for i, v in idx:
        by_vertex.setdefault(v, []).append(i)
    parts = frozenset(frozenset(g) for g in by_vertex.values())
    kappa = frozenset(
        (i, j)
        for i, v in idx
        for j, a in enumerate(apex_entries, start=1)
        if a is not BOT and v == a
    )
    delta = frozenset(
        (i, j)
        for i, v in idx
        for j, ys in enumerate(structure.colors, start=1)
        if v in ys
    )
    h_e = frozenset(
        (i, j)
        for i, vi in idx
        for j, vj in idx
        if i < j and structure.has_edge(vi, vj)
    )
    return Pattern(
        r=len(boundary),
        index_set=index_set,
        parts=parts,
        kappa=kappa,
        delta=delta,
        h_e=h_e,
        h_p=frozenset(h_p),
        h=len(structure.colors),
        l=len(apex_entries),
        dp_cap=dp_cap,
    )
