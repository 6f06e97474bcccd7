"""Colored rooted graph structures and their file format.

A structure is a finite simple graph with named pairwise-disjoint vertex
colors, named constants that may be absent, optional annotation sets used to
restrict quantifier ranges, and (after apex projection) per-constant
neighborhood colors that are allowed to overlap.

Vertices are dense integer ids ``0..n-1``.  The absent element is represented
by ``None`` (exported as ``BOT``) and never appears inside a relation.  All
structures are immutable; operations return new values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import InvariantViolation, StructureSyntaxError, VocabularyMismatch

# The distinguished absent element.  It is not a vertex id.
BOT = None


def edge_key(u, v):
    """Canonical unordered representation of an edge."""
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class VocabShape:
    """The vocabulary shape a formula is written against.

    ``proj`` marks constant-projected vocabularies, whose per-constant
    neighborhood colors are named ``C_<constant>`` and may overlap.
    """

    color_names: tuple = ()
    const_names: tuple = ()
    annot_count: int = 0
    proj: bool = False

    @property
    def h(self):
        return len(self.color_names)

    @property
    def l(self):
        return len(self.const_names)

    def proj_color_names(self):
        return tuple(f"C_{c}" for c in self.const_names) if self.proj else ()


@dataclass(frozen=True)
class ColoredStructure:
    n: int
    edges: frozenset = frozenset()
    color_names: tuple = ()
    colors: tuple = ()
    const_names: tuple = ()
    constants: tuple = ()
    annotations: tuple = ()
    # Per-constant neighborhood colors of a projected structure; empty when
    # the structure is not a projection.  Unlike ``colors`` these may overlap.
    proj_colors: tuple = ()

    def __post_init__(self):
        problems = validate(self)
        if problems:
            raise InvariantViolation("; ".join(problems))

    # -- basic queries ---------------------------------------------------

    @property
    def vertices(self):
        return range(self.n)

    def has_edge(self, u, v):
        if u is BOT or v is BOT or u == v:
            return False
        return edge_key(u, v) in self.edges

    def neighbors(self, v):
        out = set()
        for a, b in self.edges:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    def degree(self, v):
        return len(self.neighbors(v))

    def color_index_of(self, v):
        """Index of the (unique) base color containing v, or None."""
        for j, ys in enumerate(self.colors):
            if v in ys:
                return j
        return None

    def constant(self, name):
        return self.constants[self.const_names.index(name)]

    def shape(self):
        return VocabShape(
            color_names=self.color_names,
            const_names=self.const_names,
            annot_count=len(self.annotations),
            proj=bool(self.proj_colors),
        )

    # -- derived structures ----------------------------------------------

    def delete_vertices(self, dead):
        """Induced substructure on the surviving vertices, ids compacted.

        Deleted constants become absent.
        """
        dead = set(dead)
        keep = [v for v in self.vertices if v not in dead]
        if not keep:
            raise InvariantViolation("cannot delete every vertex: universe must be non-empty")
        remap = {v: i for i, v in enumerate(keep)}
        return ColoredStructure(
            n=len(keep),
            edges=frozenset(
                edge_key(remap[a], remap[b])
                for a, b in self.edges
                if a not in dead and b not in dead
            ),
            color_names=self.color_names,
            colors=tuple(frozenset(remap[v] for v in ys if v not in dead) for ys in self.colors),
            const_names=self.const_names,
            constants=tuple(
                BOT if c is BOT or c in dead else remap[c] for c in self.constants
            ),
            annotations=tuple(
                frozenset(remap[v] for v in r if v not in dead) for r in self.annotations
            ),
            proj_colors=tuple(
                frozenset(remap[v] for v in cs if v not in dead) for cs in self.proj_colors
            ),
        )

    def relabeled(self, perm):
        """Isomorphic copy under the permutation ``perm`` (a dict or list)."""
        p = (lambda v: perm[v])
        return ColoredStructure(
            n=self.n,
            edges=frozenset(edge_key(p(a), p(b)) for a, b in self.edges),
            color_names=self.color_names,
            colors=tuple(frozenset(p(v) for v in ys) for ys in self.colors),
            const_names=self.const_names,
            constants=tuple(BOT if c is BOT else p(c) for c in self.constants),
            annotations=tuple(frozenset(p(v) for v in r) for r in self.annotations),
            proj_colors=tuple(frozenset(p(v) for v in cs) for cs in self.proj_colors),
        )


@dataclass(frozen=True)
class ApexTuple:
    """An ordered tuple of distinct vertices (entries may be absent)."""

    entries: tuple

    def __post_init__(self):
        real = [v for v in self.entries if v is not BOT]
        if len(real) != len(set(real)):
            raise InvariantViolation("apex-tuple entries must be distinct where present")

    def __len__(self):
        return len(self.entries)

    def real_vertices(self):
        return frozenset(v for v in self.entries if v is not BOT)


@dataclass(frozen=True)
class BoundariedColoredGraph:
    base: ColoredStructure
    apex: ApexTuple = field(default_factory=lambda: ApexTuple(()))
    boundary: tuple = ()

    def __post_init__(self):
        for v in self.boundary:
            if v is not BOT and not (0 <= v < self.base.n):
                raise InvariantViolation(f"boundary vertex {v} out of range")
        for v in self.apex.entries:
            if v is not BOT and not (0 <= v < self.base.n):
                raise InvariantViolation(f"apex vertex {v} out of range")


# -- validation -----------------------------------------------------------


def validate(s):
    """Check every ColoredStructure invariant; returns a list of violations."""
    problems = []
    if s.n < 1:
        problems.append("universe must be non-empty (n >= 1)")
    for e in s.edges:
        if not (isinstance(e, tuple) and len(e) == 2):
            problems.append(f"edge {e!r} is not a vertex pair")
            continue
        a, b = e
        if a == b:
            problems.append(f"anti-reflexive: self-loop at {a}")
        if a is BOT or b is BOT:
            problems.append("absent element inside an edge")
            continue
        if not (0 <= a < s.n and 0 <= b < s.n):
            problems.append(f"edge {e} out of range")
        if a > b:
            problems.append(f"edge {e} not stored in canonical order")
    if len(s.color_names) != len(s.colors):
        problems.append("color names and color sets differ in length")
    seen = set()
    for name, ys in zip(s.color_names, s.colors):
        for v in ys:
            if v is BOT or not (0 <= v < s.n):
                problems.append(f"color {name} out of range")
            elif v in seen:
                problems.append(f"colors not pairwise disjoint at vertex {v}")
        seen |= set(ys)
    if len(s.const_names) != len(s.constants):
        problems.append("constant names and values differ in length")
    real = [c for c in s.constants if c is not BOT]
    for c in real:
        if not (0 <= c < s.n):
            problems.append(f"constant value {c} out of range")
    if len(real) != len(set(real)):
        problems.append("non-absent constant values must be distinct (apex-tuple use)")
    for i, r in enumerate(s.annotations, start=1):
        for v in r:
            if v is BOT or not (0 <= v < s.n):
                problems.append(f"annotation {i} out of range")
    if s.proj_colors and len(s.proj_colors) != len(s.const_names):
        problems.append("projected colors must align with constants")
    for i, cs in enumerate(s.proj_colors):
        for v in cs:
            if v is BOT or not (0 <= v < s.n):
                problems.append(f"projected color {i + 1} out of range")
    if len(set(s.color_names)) != len(s.color_names):
        problems.append("duplicate color name")
    if len(set(s.const_names)) != len(s.const_names):
        problems.append("duplicate constant name")
    return problems


# -- file format -----------------------------------------------------------
#
# Line-oriented, ``#`` comments, order-insensitive except that ``n`` comes
# first.  Directives:
#
#   n <int>
#   edge <u> <v>
#   color <name> <v>...
#   const <name> <v|_>
#   annot <i> <v>...          (1-based annotation index)
#   pcolor <const-name> <v>...   (projected neighborhood color; may overlap)


def parse_structure(text):
    """Parse structure-file contents into a validated ColoredStructure."""
    n = None
    edges = set()
    color_names, colors = [], []
    const_names, constants = [], []
    annots = {}
    pcolors = {}

    def vertex(tok, lineno, col):
        try:
            v = int(tok)
        except ValueError:
            raise StructureSyntaxError(f"expected a vertex id, got {tok!r}", lineno, col)
        if n is None or not (0 <= v < n):
            raise StructureSyntaxError(f"vertex id {v} out of range 0..{(n or 0) - 1}", lineno, col)
        return v

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head, args = toks[0], toks[1:]
        if n is None and head != "n":
            raise StructureSyntaxError("first directive must be 'n <int>'", lineno)
        if head == "n":
            if n is not None:
                raise StructureSyntaxError("duplicate 'n' directive", lineno)
            if len(args) != 1:
                raise StructureSyntaxError("'n' takes exactly one integer", lineno)
            try:
                n = int(args[0])
            except ValueError:
                raise StructureSyntaxError(f"bad vertex count {args[0]!r}", lineno, 3)
            if n < 1:
                raise StructureSyntaxError("universe must be non-empty (n >= 1)", lineno, 3)
        elif head == "edge":
            if len(args) != 2:
                raise StructureSyntaxError("'edge' takes two vertex ids", lineno)
            u, v = vertex(args[0], lineno, 6), vertex(args[1], lineno, 6)
            if u == v:
                raise StructureSyntaxError("anti-reflexive: self-loop forbidden", lineno)
            edges.add(edge_key(u, v))
        elif head == "color":
            if not args:
                raise StructureSyntaxError("'color' needs a name", lineno)
            name = args[0]
            if name in color_names:
                raise StructureSyntaxError(f"duplicate color name {name!r}", lineno)
            color_names.append(name)
            colors.append(frozenset(vertex(t, lineno, 7) for t in args[1:]))
        elif head == "const":
            if len(args) != 2:
                raise StructureSyntaxError("'const' takes a name and a vertex id or '_'", lineno)
            name = args[0]
            if name in const_names:
                raise StructureSyntaxError(f"duplicate constant name {name!r}", lineno)
            const_names.append(name)
            constants.append(BOT if args[1] == "_" else vertex(args[1], lineno, 7))
        elif head == "annot":
            if not args:
                raise StructureSyntaxError("'annot' needs a 1-based index", lineno)
            try:
                idx = int(args[0])
            except ValueError:
                raise StructureSyntaxError(f"bad annotation index {args[0]!r}", lineno, 7)
            if idx < 1:
                raise StructureSyntaxError("annotation indices are 1-based", lineno, 7)
            if idx in annots:
                raise StructureSyntaxError(f"duplicate annotation index {idx}", lineno, 7)
            annots[idx] = frozenset(vertex(t, lineno, 7) for t in args[1:])
        elif head == "pcolor":
            if not args:
                raise StructureSyntaxError("'pcolor' needs a constant name", lineno)
            name = args[0]
            if name in pcolors:
                raise StructureSyntaxError(f"duplicate projected color {name!r}", lineno)
            pcolors[name] = frozenset(vertex(t, lineno, 8) for t in args[1:])
        else:
            raise StructureSyntaxError(f"unknown directive {head!r}", lineno)

    if n is None:
        raise StructureSyntaxError("missing 'n' directive", 1)
    for name in pcolors:
        if name not in const_names:
            raise StructureSyntaxError(f"pcolor {name!r} has no matching constant", 1)
    proj = ()
    if pcolors:
        proj = tuple(pcolors.get(name, frozenset()) for name in const_names)
    annotations = ()
    if annots:
        top = max(annots)
        annotations = tuple(annots.get(i, frozenset()) for i in range(1, top + 1))
    return ColoredStructure(
        n=n,
        edges=frozenset(edges),
        color_names=tuple(color_names),
        colors=tuple(colors),
        const_names=tuple(const_names),
        constants=tuple(constants),
        annotations=annotations,
        proj_colors=proj,
    )


def serialize_structure(s):
    """Canonical text form; parse(serialize(s)) reproduces ``s`` exactly."""
    lines = [f"n {s.n}"]
    for a, b in sorted(s.edges):
        lines.append(f"edge {a} {b}")
    for name, ys in zip(s.color_names, s.colors):
        lines.append(" ".join(["color", name] + [str(v) for v in sorted(ys)]))
    for name, c in zip(s.const_names, s.constants):
        lines.append(f"const {name} {'_' if c is BOT else c}")
    for i, r in enumerate(s.annotations, start=1):
        lines.append(" ".join(["annot", str(i)] + [str(v) for v in sorted(r)]))
    if s.proj_colors:
        for name, cs in zip(s.const_names, s.proj_colors):
            lines.append(" ".join(["pcolor", name] + [str(v) for v in sorted(cs)]))
    return "\n".join(lines) + "\n"


# -- structure algebra -------------------------------------------------------


def disjoint_union(a, b):
    """Disjoint union; b's vertex ids are shifted by a.n.

    Constants must agree or be absent on at least one side; the union takes
    the present value (shifting b's).
    """
    if (
        a.color_names != b.color_names
        or a.const_names != b.const_names
        or len(a.annotations) != len(b.annotations)
        or bool(a.proj_colors) != bool(b.proj_colors)
    ):
        raise VocabularyMismatch("disjoint union requires identical vocabulary shapes")
    off = a.n
    constants = []
    for name, ca, cb in zip(a.const_names, a.constants, b.constants):
        if ca is BOT:
            constants.append(BOT if cb is BOT else cb + off)
        elif cb is BOT:
            constants.append(ca)
        else:
            raise VocabularyMismatch(
                f"constant {name!r} is present on both sides of a disjoint union"
            )
    shift = lambda vs: frozenset(v + off for v in vs)
    return ColoredStructure(
        n=a.n + b.n,
        edges=a.edges | frozenset((u + off, v + off) for u, v in b.edges),
        color_names=a.color_names,
        colors=tuple(ya | shift(yb) for ya, yb in zip(a.colors, b.colors)),
        const_names=a.const_names,
        constants=tuple(constants),
        annotations=tuple(ra | shift(rb) for ra, rb in zip(a.annotations, b.annotations)),
        proj_colors=tuple(ca | shift(cb) for ca, cb in zip(a.proj_colors, b.proj_colors)),
    )


def gaifman_graph(s):
    """The Gaifman graph as ``(n, edges)``.

    For colored-graph vocabularies only the binary edge relation contributes;
    unary relations and constants add nothing.
    """
    return (s.n, frozenset(s.edges))


def canonical_form(s):
    """Relabel vertices into a canonical order for equality up to relabeling.

    Sorts vertices by a stable local invariant, then greedily by id.  This is
    only used to compare small structures in tests (disjoint-union
    associativity); it is exact there because ties are broken on sorted
    neighbor lists after an initial ordering pass.
    """
    sig = {}
    for v in s.vertices:
        sig[v] = (
            s.degree(v),
            s.color_index_of(v) if s.color_index_of(v) is not None else -1,
            tuple(sorted(i for i, c in enumerate(s.constants) if c == v)),
            tuple(sorted(i for i, r in enumerate(s.annotations) if v in r)),
        )
    order = sorted(s.vertices, key=lambda v: (sig[v], sorted(sig[w] for w in s.neighbors(v)), v))
    perm = {v: i for i, v in enumerate(order)}
    return s.relabeled(perm)
