"""Exact decision procedures for disjoint and scattered paths, and the
pairing/imprint/compression machinery of boundaried graphs.

The searches here are plain depth-first backtracking: the problems are
NP-hard in general, exponential worst case is accepted, and determinism
matters more than speed at the scales this package targets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import BudgetExceeded, InvariantViolation
from .limits import PAIRINGS_MAX_N
from .patterns import assemble_pattern, lift_system
from .structures import BOT, edge_key


def adjacency(s):
    """Adjacency lists of the Gaifman graph, as sorted tuples."""
    adj = {v: [] for v in range(s.n)}
    for a, b in s.edges:
        adj[a].append(b)
        adj[b].append(a)
    return {v: tuple(sorted(ws)) for v, ws in adj.items()}


def all_distances(n, adj):
    """All-pairs BFS distances; missing keys mean unreachable."""
    dist = {}
    for src in range(n):
        d = {src: 0}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in d:
                    d[y] = d[x] + 1
                    queue.append(y)
        dist[src] = d
    return dist


# -- dp / sdp evaluation ----------------------------------------------------


def eval_dp(s, pairs):
    """Decide the disjoint-paths predicate on ``s``.

    Each pair with distinct present endpoints requires a path of length at
    least two; a pair with identical present endpoints is satisfied by the
    single-vertex path occupying that vertex; a pair whose both entries are
    absent is vacuous (this keeps the constant self-pairs of translated
    sentences harmless when the constant is absent); a pair with exactly one
    absent entry is false.  All paths must be pairwise vertex-disjoint.
    """
    return eval_sdp(s, 0, pairs)


def eval_sdp(s, radius, pairs):
    """Disjoint paths that additionally keep pairwise distance > radius.

    For every two distinct paths, no vertex of one may lie within ``radius``
    of a vertex of the other (distance in the host graph).  Radius 0 is
    exactly ``eval_dp``.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    trivials = []
    goals = []
    for u, v in pairs:
        if u is BOT and v is BOT:
            continue
        if u is BOT or v is BOT:
            return False
        if u == v:
            trivials.append(u)
        else:
            goals.append(edge_key(u, v))
    adj = adjacency(s)
    dist = all_distances(s.n, adj) if radius > 0 else None

    def near(x, y):
        if radius == 0:
            return x == y
        return dist[x].get(y, radius + 1) <= radius

    fixed = [(t,) for t in trivials]
    for i, p in enumerate(fixed):
        for q in fixed[:i]:
            if near(p[0], q[0]):
                return False
    # Full disjointness: no path may touch another pair's endpoint.
    endpoint_conflicts = trivials + [w for g in goals for w in g]
    for i, (u, v) in enumerate(goals):
        if goals.index((u, v)) != i:
            return False  # duplicate distinct-endpoint pair
        for t in trivials:
            if near(t, u) or near(t, v):
                return False
        for x, y in goals[:i]:
            if near(u, x) or near(u, y) or near(v, x) or near(v, y):
                return False
    order = sorted(goals, key=lambda g: (min(len(adj[g[0]]), len(adj[g[1]])), g))

    def blocked_by(paths, x):
        for p in paths:
            for w in p:
                if near(x, w):
                    return True
        return False

    def route(i, done):
        if i == len(order):
            return True
        u, v = order[i]
        other_endpoints = set(endpoint_conflicts) - {u, v}

        def extend(x, seen, edges_used):
            if x == v and edges_used >= 2:
                path = tuple(seen)
                if route(i + 1, done + [path]):
                    return True
            for y in adj[x]:
                if y in seen or y in other_endpoints:
                    continue
                if y == v:
                    if edges_used + 1 >= 2:
                        path = tuple(seen) + (v,)
                        if route(i + 1, done + [path]):
                            return True
                    continue
                if blocked_by(done, y):
                    continue
                seen.append(y)
                if extend(y, seen, edges_used + 1):
                    return True
                seen.pop()
            return False

        if blocked_by(done, u) or blocked_by(done, v):
            return False
        return extend(u, [u], 0)

    return route(0, fixed)


# -- linkages, pairings, imprints -------------------------------------------


@dataclass(frozen=True)
class Linkage:
    """Pairwise vertex-disjoint simple paths, canonically ordered.

    Single-vertex paths are admitted (they carry the identical-terminal
    convention); a path of at least one edge is called non-trivial.
    """

    paths: tuple

    def __post_init__(self):
        seen = set()
        for p in self.paths:
            if len(set(p)) != len(p):
                raise InvariantViolation(f"path {p} repeats a vertex")
            if seen & set(p):
                raise InvariantViolation("linkage paths are not vertex-disjoint")
            seen |= set(p)

    @staticmethod
    def of(paths):
        canon = tuple(sorted(min(tuple(p), tuple(reversed(p))) for p in paths))
        return Linkage(canon)

    def terminals(self):
        return frozenset(w for p in self.paths for w in (p[0], p[-1]))

    def terminal_pairs(self):
        """The pattern of the linkage: one endpoint pair per path."""
        return frozenset(frozenset((p[0], p[-1])) for p in self.paths)

    def vertices(self):
        return frozenset(w for p in self.paths for w in p)


@dataclass(frozen=True)
class Pairing:
    """A boundaried linkage: all terminals lie on the boundary."""

    linkage: Linkage
    boundary: tuple

    def __post_init__(self):
        allowed = frozenset(v for v in self.boundary if v is not BOT)
        if not self.linkage.terminals() <= allowed:
            raise InvariantViolation("pairing terminals must lie on the boundary")


@dataclass(frozen=True)
class Imprint:
    """Connection graph of a pairing on its present boundary indices."""

    index_set: frozenset
    loops: frozenset
    edges: frozenset


def imprint(p):
    """Index graph with an edge {i, j} exactly when the linkage joins
    boundary_i to boundary_j (loops record single-vertex paths)."""
    conn = lift_system(
        trivials={q[0] for q in p.linkage.paths if len(q) == 1},
        pairs={(q[0], q[-1]) for q in p.linkage.paths if len(q) > 1},
        boundary=p.boundary,
    )
    index_set = frozenset(i for i, v in enumerate(p.boundary, start=1) if v is not BOT)
    return Imprint(index_set=index_set, loops=conn.loops, edges=conn.edges)


def _simple_paths(adj, u, v, forbidden, min_edges):
    """Yield simple u-v paths of length >= min_edges avoiding ``forbidden``."""
    def extend(x, seen, edges_used):
        for y in adj[x]:
            if y in seen or y in forbidden:
                continue
            if y == v:
                if edges_used + 1 >= min_edges:
                    yield tuple(seen) + (v,)
                continue
            seen.append(y)
            yield from extend(y, seen, edges_used + 1)
            seen.pop()

    if u in forbidden or v in forbidden:
        return
    yield from extend(u, [u], 0)


def enumerate_pairings(g, min_edges=1, include_trivial=False, max_n=None):
    """All pairings of a boundaried graph.

    ``min_edges`` selects the non-triviality threshold: 1 gives the general
    pairing notion, 2 the variant matching the connection families of
    patterns.  ``include_trivial`` additionally admits single-vertex paths at
    boundary vertices.  Enumeration is guarded to small hosts.
    """
    host = g.base
    limit = PAIRINGS_MAX_N if max_n is None else max_n
    if host.n > limit:
        raise BudgetExceeded("pairings", {"n": host.n, "max_n": limit})
    adj = adjacency(host)
    bverts = sorted({v for v in g.boundary if v is not BOT})
    slots = sorted({edge_key(u, v) for u in bverts for v in bverts if u != v})
    out = set()

    def rec(i, used, paths):
        if i == len(slots):
            base = list(paths)
            if include_trivial:
                free = [v for v in bverts if v not in used]
                for mask in range(1 << len(free)):
                    extra = [(free[k],) for k in range(len(free)) if mask >> k & 1]
                    out.add(Pairing(Linkage.of(base + extra), g.boundary))
            else:
                out.add(Pairing(Linkage.of(base), g.boundary))
            return
        # Either no path joins this terminal pair...
        rec(i + 1, used, paths)
        u, v = slots[i]
        if u in used or v in used:
            return
        # ...or exactly one does (two disjoint paths cannot share terminals).
        # Interior vertices may be anything unused, boundary or not.
        for p in _simple_paths(adj, u, v, used, min_edges):
            rec(i + 1, used | set(p), paths + [p])

    rec(0, frozenset(), [])
    return out


def compression(g, dp_cap=None, max_n=None):
    """Recover the pattern of a boundaried graph from its pairings alone.

    This is the enumeration route: list every pairing (length->=2 paths plus
    single-vertex paths), take imprints, and read the connection family off
    them.  It must agree with the direct pattern computation on every input.
    """
    r = len(g.boundary)
    if dp_cap is None:
        dp_cap = r * (r + 1) // 2
    family = set()
    for p in enumerate_pairings(g, min_edges=2, include_trivial=True, max_n=max_n):
        trivs = {q[0] for q in p.linkage.paths if len(q) == 1}
        pairs = {(q[0], q[-1]) for q in p.linkage.paths if len(q) > 1}
        if len(trivs) + len(pairs) > dp_cap:
            continue
        family.add(lift_system(trivs, pairs, g.boundary))
    return assemble_pattern(g.base, g.boundary, g.apex.entries, family, dp_cap)


# -- gluing pairings ---------------------------------------------------------


def glue_pairings(p1, p2, ell):
    """Glue two compatible pairings along their last ``ell`` boundary slots.

    The suffix vertices are identified pairwise; the result is boundaried by
    the first ``r`` slots, taking whichever side holds the present entry.
    Raises InvariantViolation naming the violated compatibility clause.
    """
    if len(p1.boundary) != len(p2.boundary):
        raise InvariantViolation("compatibility: boundaries differ in length")
    t = len(p1.boundary)
    if ell < 0 or ell > t:
        raise InvariantViolation("compatibility: bad shared-suffix length")
    r = t - ell
    t1, t2 = p1.linkage.terminals(), p2.linkage.terminals()
    for k in range(r, t):
        if p1.boundary[k] is BOT or p1.boundary[k] not in t1:
            raise InvariantViolation(
                f"compatibility: suffix slot {k + 1} is not a terminal on the left"
            )
        if p2.boundary[k] is BOT or p2.boundary[k] not in t2:
            raise InvariantViolation(
                f"compatibility: suffix slot {k + 1} is not a terminal on the right"
            )
    for k in range(r):
        if (p1.boundary[k] is BOT) == (p2.boundary[k] is BOT):
            raise InvariantViolation(
                f"compatibility: slot {k + 1} must be present on exactly one side"
            )
    pat1, pat2 = p1.linkage.terminal_pairs(), p2.linkage.terminal_pairs()
    for i in range(r, t):
        for j in range(i + 1, t):
            left = frozenset((p1.boundary[i], p1.boundary[j])) in pat1
            right = frozenset((p2.boundary[i], p2.boundary[j])) in pat2
            if left and right:
                raise InvariantViolation(
                    f"compatibility: suffix pair ({i + 1}, {j + 1}) joined on both sides"
                )

    for i in range(r, t):
        for j in range(i + 1, t):
            if (p1.boundary[i] == p1.boundary[j]) != (p2.boundary[i] == p2.boundary[j]):
                raise InvariantViolation(
                    f"compatibility: suffix slots {i + 1} and {j + 1} identify inconsistently"
                )

    # Relabel the right side away from the left, then identify the suffix.
    offset = max([0] + [w for q in p1.linkage.paths for w in q]) + 1
    ident = {p2.boundary[k]: p1.boundary[k] for k in range(r, t)}

    def remap(v):
        return ident[v] if v in ident else v + offset

    edges = set()
    verts = set()
    for q in p1.linkage.paths:
        verts |= set(q)
        edges |= {edge_key(a, b) for a, b in zip(q, q[1:])}
    for q in p2.linkage.paths:
        mq = [remap(w) for w in q]
        verts |= set(mq)
        edges |= {edge_key(a, b) for a, b in zip(mq, mq[1:])}

    # The union of the two sides must again be a disjoint union of paths.
    nbr = {v: set() for v in verts}
    for a, b in edges:
        nbr[a].add(b)
        nbr[b].add(a)
    paths = []
    seen = set()
    for v in sorted(verts):
        if v in seen:
            continue
        comp = _trace_component(v, nbr)
        if comp is None:
            raise InvariantViolation("compatibility: gluing created a cycle")
        seen |= set(comp)
        paths.append(comp)
    boundary = tuple(
        p1.boundary[k] if p1.boundary[k] is not BOT else remap(p2.boundary[k])
        for k in range(r)
    )
    return Pairing(Linkage.of(paths), boundary)


def _trace_component(v, nbr):
    """Walk the component of ``v``; return its path order or None if cyclic."""
    comp = {v}
    frontier = [v]
    while frontier:
        x = frontier.pop()
        for y in nbr[x]:
            if y not in comp:
                comp.add(y)
                frontier.append(y)
    ends = [x for x in comp if len(nbr[x] & comp) <= 1]
    if len(comp) == 1:
        return (v,)
    if any(len(nbr[x] & comp) > 2 for x in comp) or len(ends) != 2:
        return None
    path = [min(ends)]
    prev = None
    while True:
        nxt = [y for y in nbr[path[-1]] if y != prev and y in comp]
        if not nxt:
            break
        prev = path[-1]
        path.append(nxt[0])
    if len(path) != len(comp):
        return None
    return tuple(path)
