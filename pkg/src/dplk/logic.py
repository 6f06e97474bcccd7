"""Formula AST, concrete syntax, prenex conversion, full disjunctive normal
form, and clause patterns.

Formulas are immutable trees over terms (variables and constants).  The
disjoint-paths atom stores its argument pairs as a sorted multiset of sorted
pairs: endpoint order within a pair and pair order are semantically
irrelevant, so canonicalizing at construction keeps atom identity syntactic.

The full-DNF machinery works against an indexed vocabulary: free variables
are x1..xr, colors and constants are addressed by their position in the
supplied vocabulary shape.  Scattered-paths atoms and projected-color atoms
are deliberately outside its scope (evaluation supports them; the pattern
calculus is about the plain disjoint-paths logic).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormulaSyntaxError, VocabularyMismatch
from .limits import check_budget, dnf_budget
from .patterns import EMPTY_PATTERN, ConnGraph, Pattern


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def key(self):
        return (0, self.name)


@dataclass(frozen=True)
class Cst:
    name: str

    def key(self):
        return (1, self.name)


def _sort_pair(a, b):
    return (a, b) if a.key() <= b.key() else (b, a)


# -- formulas ----------------------------------------------------------------


@dataclass(frozen=True)
class Eq:
    left: object
    right: object

    def __post_init__(self):
        a, b = _sort_pair(self.left, self.right)
        object.__setattr__(self, "left", a)
        object.__setattr__(self, "right", b)


@dataclass(frozen=True)
class InColor:
    term: object
    color: str


@dataclass(frozen=True)
class InProjColor:
    term: object
    const: str


@dataclass(frozen=True)
class EdgeAtom:
    left: object
    right: object

    def __post_init__(self):
        a, b = _sort_pair(self.left, self.right)
        object.__setattr__(self, "left", a)
        object.__setattr__(self, "right", b)


def _canon_pairs(pairs):
    fixed = tuple(_sort_pair(a, b) for a, b in pairs)
    return tuple(sorted(fixed, key=lambda p: (p[0].key(), p[1].key())))


@dataclass(frozen=True)
class Dp:
    pairs: tuple

    @staticmethod
    def of(pairs):
        return Dp(tuple(pairs))

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("dp takes at least one pair of terms")
        object.__setattr__(self, "pairs", _canon_pairs(self.pairs))


@dataclass(frozen=True)
class Sdp:
    radius: int
    pairs: tuple

    @staticmethod
    def of(radius, pairs):
        return Sdp(radius, tuple(pairs))

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("sdp takes at least one pair of terms")
        if self.radius < 0:
            raise ValueError("sdp radius must be non-negative")
        object.__setattr__(self, "pairs", _canon_pairs(self.pairs))


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class And:
    parts: tuple

    @staticmethod
    def of(parts):
        parts = tuple(parts)
        if not parts:
            return TRUE
        return parts[0] if len(parts) == 1 else And(parts)


@dataclass(frozen=True)
class Or:
    parts: tuple

    @staticmethod
    def of(parts):
        parts = tuple(parts)
        if not parts:
            return FALSE
        return parts[0] if len(parts) == 1 else Or(parts)


@dataclass(frozen=True)
class Exists:
    var: str
    body: object
    annot: int | None = None


@dataclass(frozen=True)
class Forall:
    var: str
    body: object
    annot: int | None = None


# Truth constants, encoded as the empty conjunction / disjunction.
TRUE = And(())
FALSE = Or(())

ATOM_TYPES = (Eq, InColor, InProjColor, EdgeAtom, Dp, Sdp)


def is_atom(f):
    return isinstance(f, ATOM_TYPES)


@dataclass(frozen=True)
class PrenexSentence:
    """A quantifier prefix over a quantifier-free matrix.

    Prefix entries are ``(quantifier, variable, annotation-or-None)`` with
    quantifier one of ``"E"`` or ``"A"``.
    """

    prefix: tuple
    matrix: object

    def __post_init__(self):
        names = [v for _, v, _ in self.prefix]
        if len(set(names)) != len(names):
            raise ValueError("prenex prefix variables must be distinct")
        if quantifier_rank(self.matrix) != 0:
            raise ValueError("prenex matrix must be quantifier-free")

    def rank(self):
        return len(self.prefix)

    def to_formula(self):
        f = self.matrix
        for q, v, annot in reversed(self.prefix):
            f = Exists(v, f, annot) if q == "E" else Forall(v, f, annot)
        return f


# -- generic traversal -------------------------------------------------------


def children(f):
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def map_atoms(f, fn):
    """Rebuild ``f`` with every atom replaced by ``fn(atom)``."""
    if is_atom(f):
        return fn(f)
    if isinstance(f, Not):
        return Not(map_atoms(f.body, fn))
    if isinstance(f, And):
        return And.of(map_atoms(p, fn) for p in f.parts)
    if isinstance(f, Or):
        return Or.of(map_atoms(p, fn) for p in f.parts)
    if isinstance(f, Exists):
        return Exists(f.var, map_atoms(f.body, fn), f.annot)
    if isinstance(f, Forall):
        return Forall(f.var, map_atoms(f.body, fn), f.annot)
    raise TypeError(f"not a formula: {f!r}")


def rename_vars(f, mapping):
    """Rename free variable occurrences; quantifiers shadow as usual."""

    def term(t):
        if isinstance(t, Var) and t.name in mapping:
            return Var(mapping[t.name])
        return t

    def atom(a):
        if isinstance(a, Eq):
            return Eq(term(a.left), term(a.right))
        if isinstance(a, InColor):
            return InColor(term(a.term), a.color)
        if isinstance(a, InProjColor):
            return InProjColor(term(a.term), a.const)
        if isinstance(a, EdgeAtom):
            return EdgeAtom(term(a.left), term(a.right))
        if isinstance(a, Dp):
            return Dp.of(tuple((term(x), term(y)) for x, y in a.pairs))
        if isinstance(a, Sdp):
            return Sdp.of(a.radius, tuple((term(x), term(y)) for x, y in a.pairs))
        raise TypeError(a)

    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        body = rename_vars(f.body, inner) if inner else f.body
        return type(f)(f.var, body, f.annot)
    if is_atom(f):
        return atom(f)
    if isinstance(f, Not):
        return Not(rename_vars(f.body, mapping))
    if isinstance(f, (And, Or)):
        return type(f).of(rename_vars(p, mapping) for p in f.parts)
    raise TypeError(f"not a formula: {f!r}")


def free_variables(f, bound=frozenset()):
    if is_atom(f):
        out = set()
        for t in _atom_terms(f):
            if isinstance(t, Var) and t.name not in bound:
                out.add(t.name)
        return out
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body, bound | {f.var})
    out = set()
    for c in children(f):
        out |= free_variables(c, bound)
    return out


def _atom_terms(a):
    if isinstance(a, Eq):
        return (a.left, a.right)
    if isinstance(a, (InColor, InProjColor)):
        return (a.term,)
    if isinstance(a, EdgeAtom):
        return (a.left, a.right)
    if isinstance(a, (Dp, Sdp)):
        return tuple(t for p in a.pairs for t in p)
    raise TypeError(a)


def quantifier_rank(f):
    """Maximum quantifier nesting depth (prefix length for prenex forms)."""
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_rank(f.body)
    if is_atom(f):
        return 0
    return max((quantifier_rank(c) for c in children(f)), default=0)


def _all_names(f):
    """Every variable name occurring in ``f``, bound or free."""
    if is_atom(f):
        return {t.name for t in _atom_terms(f) if isinstance(t, Var)}
    out = set()
    if isinstance(f, (Exists, Forall)):
        out.add(f.var)
    for c in children(f):
        out |= _all_names(c)
    return out


# -- concrete syntax ---------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<lparen>\()|(?P<rparen>\))|(?P<lbrack>\[)|(?P<rbrack>\])"
    r"|(?P<comma>,)|(?P<dot>\.)|(?P<amp>&)|(?P<bar>\|)|(?P<bang>!)"
    r"|(?P<eq>=)|(?P<at>@)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)

_KEYWORDS = {"exists", "forall", "in", "E", "dp", "sdp", "true", "false"}


class _Parser:
    def __init__(self, text, shape):
        self.text = text
        self.shape = shape
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == m.start():
                if text[pos:].strip():
                    raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
                break
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self, kind=None, value=None):
        if self.i >= len(self.toks):
            return None
        k, v, _ = self.toks[self.i]
        if kind is not None and k != kind:
            return None
        if value is not None and v != value:
            return None
        return v

    def pos(self):
        return self.toks[self.i][2] if self.i < len(self.toks) else len(self.text)

    def take(self, kind, value=None, what=None):
        got = self.peek(kind, value)
        if got is None:
            raise FormulaSyntaxError(f"expected {what or value or kind}", self.pos())
        self.i += 1
        return got

    def sentence(self):
        prefix = []
        while self.peek("name") in ("exists", "forall"):
            q = "E" if self.take("name") == "exists" else "A"
            var = self.take("name", what="a variable")
            if var in _KEYWORDS:
                raise FormulaSyntaxError(f"{var!r} cannot be a variable name", self.pos())
            annot = None
            if self.peek("name", "in") is not None and self._int_follows():
                self.take("name", "in")
                annot = int(self.take("int"))
                if not (1 <= annot <= self.shape.annot_count):
                    raise FormulaSyntaxError(f"unknown annotation index {annot}", self.pos())
            self.take("dot", what="'.' after quantifier")
            prefix.append((q, var, annot))
        body = self.disj()
        for q, var, annot in reversed(prefix):
            body = Exists(var, body, annot) if q == "E" else Forall(var, body, annot)
        return body

    def _int_follows(self):
        return self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "int"

    def disj(self):
        parts = [self.conj()]
        while self.peek("bar") is not None:
            self.take("bar")
            parts.append(self.conj())
        return Or.of(parts)

    def conj(self):
        parts = [self.unit()]
        while self.peek("amp") is not None:
            self.take("amp")
            parts.append(self.unit())
        return And.of(parts)

    def unit(self):
        if self.peek("bang") is not None:
            self.take("bang")
            return Not(self.unit())
        if self.peek("lparen") is not None:
            self.take("lparen")
            inner = self.sentence()
            self.take("rparen", what="')'")
            return inner
        if self.peek("name") in ("exists", "forall"):
            return self.sentence()
        return self.atom()

    def term(self):
        if self.peek("at") is not None:
            self.take("at")
            name = self.take("name", what="a constant name")
            if name not in self.shape.const_names:
                raise FormulaSyntaxError(f"unknown constant {name!r}", self.pos())
            return Cst(name)
        name = self.take("name", what="a term")
        if name in _KEYWORDS:
            raise FormulaSyntaxError(f"unexpected keyword {name!r}", self.pos())
        return Var(name)

    def pair_list(self):
        self.take("lparen", what="'('")
        terms = [self.term()]
        while self.peek("comma") is not None:
            self.take("comma")
            terms.append(self.term())
        self.take("rparen", what="')'")
        if len(terms) % 2 != 0 or not terms:
            raise FormulaSyntaxError(
                "disjoint-paths atoms take an even, positive number of terms", self.pos()
            )
        return tuple((terms[i], terms[i + 1]) for i in range(0, len(terms), 2))

    def atom(self):
        if self.peek("name", "true") is not None:
            self.take("name")
            return TRUE
        if self.peek("name", "false") is not None:
            self.take("name")
            return FALSE
        if self.peek("name", "E") is not None:
            self.take("name")
            self.take("lparen", what="'('")
            a = self.term()
            self.take("comma", what="','")
            b = self.term()
            self.take("rparen", what="')'")
            return EdgeAtom(*_sort_pair(a, b))
        if self.peek("name", "dp") is not None:
            self.take("name")
            return Dp.of(self.pair_list())
        if self.peek("name", "sdp") is not None:
            self.take("name")
            self.take("lbrack", what="'['")
            radius = int(self.take("int", what="a radius"))
            self.take("rbrack", what="']'")
            return Sdp.of(radius, self.pair_list())
        left = self.term()
        if self.peek("eq") is not None:
            self.take("eq")
            return Eq(*_sort_pair(left, self.term()))
        if self.peek("name", "in") is not None:
            self.take("name", "in")
            name = self.take("name", what="a color name")
            if name in self.shape.color_names:
                return InColor(left, name)
            if name in self.shape.proj_color_names():
                return InProjColor(left, name[len("C_"):])
            raise FormulaSyntaxError(f"unknown color {name!r}", self.pos())
        raise FormulaSyntaxError("expected '=', 'in', or an atom", self.pos())


def parse_formula(text, shape=None, allow_free=False):
    """Parse formula text against a vocabulary shape.

    Sentences are the default; ``allow_free`` admits free variables (used for
    quantifier-free matrices).  Unknown color, constant, or annotation names
    are rejected at parse time.
    """
    from .structures import VocabShape

    shape = shape or VocabShape()
    p = _Parser(text, shape)
    f = p.sentence()
    if p.i != len(p.toks):
        raise FormulaSyntaxError("trailing input after formula", p.pos())
    free = free_variables(f)
    if free and not allow_free:
        raise FormulaSyntaxError(
            f"unbound variables in sentence: {', '.join(sorted(free))}", 0
        )
    return f


def serialize_formula(f, top=True):
    """Stable concrete syntax; parsing it back reproduces the tree."""
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        annot = f" in {f.annot}" if f.annot is not None else ""
        inner = f"{q} {f.var}{annot}. {serialize_formula(f.body, top=True)}"
        return inner if top else f"({inner})"
    if isinstance(f, And):
        if not f.parts:
            return "true"
        return "(" + " & ".join(serialize_formula(p, top=False) for p in f.parts) + ")"
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        return "(" + " | ".join(serialize_formula(p, top=False) for p in f.parts) + ")"
    if isinstance(f, Not):
        return "!" + serialize_formula(f.body, top=False)
    if isinstance(f, Eq):
        return f"{_term_str(f.left)} = {_term_str(f.right)}"
    if isinstance(f, InColor):
        return f"{_term_str(f.term)} in {f.color}"
    if isinstance(f, InProjColor):
        return f"{_term_str(f.term)} in C_{f.const}"
    if isinstance(f, EdgeAtom):
        return f"E({_term_str(f.left)},{_term_str(f.right)})"
    if isinstance(f, Dp):
        return "dp(" + ",".join(_term_str(t) for p in f.pairs for t in p) + ")"
    if isinstance(f, Sdp):
        return f"sdp[{f.radius}](" + ",".join(_term_str(t) for p in f.pairs for t in p) + ")"
    raise TypeError(f"not a formula: {f!r}")


def _term_str(t):
    return t.name if isinstance(t, Var) else f"@{t.name}"


# -- prenex conversion ------------------------------------------------------


def to_prenex(f):
    """Convert a sentence to prenex form.

    Leading quantifiers pass through verbatim (annotations included).  Inner
    quantifiers are extracted after fresh renaming; annotated inner
    quantifiers are rejected because an empty annotation range would not
    commute past connectives.
    """
    prefix = []
    while isinstance(f, (Exists, Forall)):
        prefix.append(("E" if isinstance(f, Exists) else "A", f.var, f.annot))
        f = f.body
    counter = [0]
    taken = {v for _, v, _ in prefix} | _all_names(f)

    def fresh(base):
        counter[0] += 1
        name = f"v{counter[0]}"
        while name in taken:
            counter[0] += 1
            name = f"v{counter[0]}"
        taken.add(name)
        return name

    def rec(g, positive):
        if is_atom(g):
            return [], g if positive else Not(g)
        if isinstance(g, Not):
            return rec(g.body, not positive)
        if isinstance(g, (And, Or)):
            make_and = isinstance(g, And) == positive
            quants, mats = [], []
            for part in g.parts:
                q, m = rec(part, positive)
                quants.extend(q)
                mats.append(m)
            combined = And.of(mats) if make_and else Or.of(mats)
            return quants, combined
        if isinstance(g, (Exists, Forall)):
            if g.annot is not None:
                raise ValueError(
                    "prenex conversion requires inner quantifiers to be unannotated"
                )
            name = fresh(g.var)
            body = rename_vars(g.body, {g.var: name})
            q, m = rec(body, positive)
            is_exists = isinstance(g, Exists) == positive
            return [("E" if is_exists else "A", name, None)] + q, m
        raise TypeError(f"not a formula: {g!r}")

    quants, matrix = rec(f, True)
    return PrenexSentence(tuple(prefix) + tuple(quants), matrix)


# -- canonical atoms of the indexed vocabulary --------------------------------


def default_dp_cap(r):
    """Largest useful disjoint-paths arity over r variables."""
    return r * (r + 1) // 2


def canonical_atoms(r, h, l, dp_cap):
    """The ordered atom universe a full clause must decide.

    Atoms are tuples: ("eq", i, j), ("ceq", i, j), ("col", i, j),
    ("edge", i, j), ("dp", pairs) with 1-based indices and ``pairs`` a sorted
    multiset of sorted index pairs.
    """
    atoms = []
    for i in range(1, r + 1):
        for j in range(i + 1, r + 1):
            atoms.append(("eq", i, j))
    for i in range(1, r + 1):
        for j in range(1, l + 1):
            atoms.append(("ceq", i, j))
    for i in range(1, r + 1):
        for j in range(1, h + 1):
            atoms.append(("col", i, j))
    for i in range(1, r + 1):
        for j in range(i + 1, r + 1):
            atoms.append(("edge", i, j))
    pair_types = [(a, b) for a in range(1, r + 1) for b in range(a, r + 1)]

    def multisets(start, size):
        if size == 0:
            yield ()
            return
        for k in range(start, len(pair_types)):
            for rest in multisets(k, size - 1):
                yield (pair_types[k],) + rest

    for arity in range(1, dp_cap + 1):
        for pairs in multisets(0, arity):
            atoms.append(("dp", pairs))
    return atoms


def count_canonical_atoms(r, h, l, dp_cap):
    from math import comb

    p = r * (r + 1) // 2
    dp = sum(comb(p + k - 1, k) for k in range(1, dp_cap + 1))
    return r * (r - 1) // 2 + r * l + r * h + r * (r - 1) // 2 + dp


def atom_to_formula(atom, shape):
    kind = atom[0]
    if kind == "eq":
        return Eq(Var(f"x{atom[1]}"), Var(f"x{atom[2]}"))
    if kind == "ceq":
        return Eq(*_sort_pair(Var(f"x{atom[1]}"), Cst(shape.const_names[atom[2] - 1])))
    if kind == "col":
        return InColor(Var(f"x{atom[1]}"), shape.color_names[atom[2] - 1])
    if kind == "edge":
        return EdgeAtom(Var(f"x{atom[1]}"), Var(f"x{atom[2]}"))
    if kind == "dp":
        return Dp.of(tuple((Var(f"x{a}"), Var(f"x{b}")) for a, b in atom[1]))
    raise ValueError(atom)


def formula_atom_to_canonical(a, r, shape):
    """Map an atom over x1..xr and the shape's names to its canonical tuple."""

    def vidx(t):
        if not isinstance(t, Var) or not re.fullmatch(r"x[1-9][0-9]*", t.name):
            raise VocabularyMismatch(f"full-DNF formulas use variables x1..x{r}, got {t!r}")
        i = int(t.name[1:])
        if not (1 <= i <= r):
            raise VocabularyMismatch(f"variable {t.name} out of range x1..x{r}")
        return i

    if isinstance(a, Eq):
        if isinstance(a.left, Var) and isinstance(a.right, Var):
            i, j = sorted((vidx(a.left), vidx(a.right)))
            if i == j:
                return ("taut",)
            return ("eq", i, j)
        var = a.left if isinstance(a.left, Var) else a.right
        cst = a.right if isinstance(a.right, Cst) else a.left
        if not isinstance(cst, Cst) or not isinstance(var, Var):
            raise VocabularyMismatch("constant-to-constant equality has no clause pattern")
        return ("ceq", vidx(var), shape.const_names.index(cst.name) + 1)
    if isinstance(a, InColor):
        return ("col", vidx(a.term), shape.color_names.index(a.color) + 1)
    if isinstance(a, EdgeAtom):
        if not (isinstance(a.left, Var) and isinstance(a.right, Var)):
            raise VocabularyMismatch("edge atoms over constants have no clause pattern")
        i, j = sorted((vidx(a.left), vidx(a.right)))
        if i == j:
            return ("contra",)
        return ("edge", i, j)
    if isinstance(a, Dp):
        pairs = []
        for x, y in a.pairs:
            if not (isinstance(x, Var) and isinstance(y, Var)):
                raise VocabularyMismatch("dp atoms over constants have no clause pattern")
            pairs.append(tuple(sorted((vidx(x), vidx(y)))))
        return ("dp", tuple(sorted(pairs)))
    if isinstance(a, (Sdp, InProjColor)):
        raise VocabularyMismatch(
            "scattered-paths and projected-color atoms are outside the pattern calculus"
        )
    raise TypeError(a)


# -- clause analysis ----------------------------------------------------------


def set_partitions(items):
    """All partitions of ``items``, each as a tuple of sorted tuples."""
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for sub in set_partitions(rest):
        for k in range(len(sub)):
            yield tuple(sorted(sub[:k] + (tuple(sorted(sub[k] + (first,))),) + sub[k + 1:]))
        yield tuple(sorted(((first,),) + sub))


def classify_dp_atom(pairs, part_of):
    """Normalize a dp atom against an equality partition.

    Returns ``("false",)`` or ``("true",)`` when the partition forces the
    atom, else ``("free", trivial_parts, matching)`` naming the part-level
    system whose realizability the atom asks about.
    """
    trivials = []
    distinct = []
    for a, b in pairs:
        pa, pb = part_of[a], part_of[b]
        if pa == pb:
            trivials.append(pa)
        else:
            distinct.append((pa, pb) if pa < pb else (pb, pa))
    if len(set(trivials)) != len(trivials) or len(set(distinct)) != len(distinct):
        return ("false",)
    touched = set()
    for p, q in distinct:
        if p in touched or q in touched:
            return ("false",)
        touched |= {p, q}
    if touched & set(trivials):
        return ("false",)
    if not distinct:
        return ("true",)
    return ("free", frozenset(trivials), frozenset(distinct))


class FullClause:
    """A consistent total decision of every canonical atom."""

    __slots__ = ("r", "shape", "dp_cap", "partition", "part_of", "cmap", "colmap",
                 "edge_true", "dp_true")

    def __init__(self, r, shape, dp_cap, partition, cmap, colmap, edge_true, dp_true):
        self.r = r
        self.shape = shape
        self.dp_cap = dp_cap
        self.partition = partition  # tuple of sorted tuples of indices
        self.part_of = {i: p for p in partition for i in p}
        self.cmap = cmap  # part -> constant position (partial)
        self.colmap = colmap  # part -> color position (partial)
        self.edge_true = edge_true  # frozenset of part pairs (sorted tuples)
        self.dp_true = dp_true  # frozenset of free-class keys decided true

    def decide(self, atom):
        kind = atom[0]
        if kind == "eq":
            return self.part_of[atom[1]] == self.part_of[atom[2]]
        if kind == "ceq":
            return self.cmap.get(self.part_of[atom[1]]) == atom[2]
        if kind == "col":
            return self.colmap.get(self.part_of[atom[1]]) == atom[2]
        if kind == "edge":
            pa, pb = self.part_of[atom[1]], self.part_of[atom[2]]
            if pa == pb:
                return False
            return (min(pa, pb), max(pa, pb)) in self.edge_true
        if kind == "dp":
            cls = classify_dp_atom(atom[1], self.part_of)
            if cls[0] == "false":
                return False
            if cls[0] == "true":
                return True
            return (cls[1], cls[2]) in self.dp_true
        raise ValueError(atom)

    def sign_vector(self, atoms):
        return tuple(self.decide(a) for a in atoms)

    def literals(self, atoms):
        return [(self.decide(a), a) for a in atoms]

    def to_formula(self, atoms):
        lits = []
        for sign, a in self.literals(atoms):
            af = atom_to_formula(a, self.shape)
            lits.append(af if sign else Not(af))
        return And.of(lits)

    def pattern(self):
        """The clause pattern: equalities, constants, colors, edges, and the
        connection family this clause asserts."""
        index_set = frozenset(range(1, self.r + 1))
        parts = frozenset(frozenset(p) for p in self.partition)
        kappa = frozenset(
            (i, j) for p in self.partition for i in p
            if (j := self.cmap.get(p)) is not None
        )
        delta = frozenset(
            (i, j) for p in self.partition for i in p
            if (j := self.colmap.get(p)) is not None
        )
        h_e = frozenset(
            (i, j)
            for pa, pb in self.edge_true
            for i in pa
            for j in pb
            if i < j
        ) | frozenset(
            (j, i)
            for pa, pb in self.edge_true
            for i in pa
            for j in pb
            if j < i
        )
        family = {ConnGraph(frozenset(), frozenset())}
        part_list = list(self.partition)
        for mask in range(1, 1 << len(part_list)):
            chosen = [part_list[k] for k in range(len(part_list)) if mask >> k & 1]
            if len(chosen) > self.dp_cap:
                continue
            family.add(self._lift(frozenset(chosen), frozenset()))
        for trivs, matching in self.dp_true:
            family.add(self._lift(trivs, matching))
        return Pattern(
            r=self.r,
            index_set=index_set,
            parts=parts,
            kappa=kappa,
            delta=delta,
            h_e=h_e,
            h_p=frozenset(family),
            h=self.shape.h,
            l=self.shape.l,
            dp_cap=self.dp_cap,
        )

    def _lift(self, trivial_parts, matching):
        loops = frozenset(i for p in trivial_parts for i in p)
        edges = set()
        for p in trivial_parts:
            for i in p:
                for j in p:
                    if i < j:
                        edges.add((i, j))
        for pa, pb in matching:
            for i in pa:
                for j in pb:
                    edges.add((min(i, j), max(i, j)))
        return ConnGraph(loops=loops, edges=frozenset(edges))


def _dnf_source_clauses(m):
    """Syntactic DNF of a quantifier-free formula, as literal lists."""
    if quantifier_rank(m) != 0:
        raise ValueError("full DNF applies to quantifier-free formulas")

    def nnf(g, positive):
        if is_atom(g):
            return [[(positive, g)]]
        if isinstance(g, Not):
            return nnf(g.body, not positive)
        parts = g.parts
        make_and = isinstance(g, And) == positive
        if make_and:
            out = [[]]
            for part in parts:
                sub = nnf(part, positive)
                out = [a + b for a in out for b in sub]
            return out
        out = []
        for part in parts:
            out.extend(nnf(part, positive))
        return out

    clauses = []
    for lits in nnf(m, True):
        seen = {}
        ok = True
        for sign, atom in lits:
            if seen.get(atom, sign) != sign:
                ok = False  # contains an atom both positively and negatively
                break
            seen[atom] = sign
        if ok:
            clauses.append([(sign, atom) for atom, sign in sorted(seen.items(), key=lambda kv: repr(kv[0]))])
    return clauses


def full_dnf_clauses(m, r, shape, dp_cap=None, budget=None):
    """Enumerate the consistent full clauses of an equivalent full DNF.

    Returns ``(atoms, clauses)`` with ``atoms`` the canonical atom universe
    and ``clauses`` the FullClause list, canonically ordered.  Clauses whose
    equality, constant, color, edge, or forced disjoint-paths content is
    contradictory are never produced, which both keeps the expansion feasible
    and implements the unsatisfiable-clause rule of pattern extraction.
    """
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    if budget is None:
        budget = dnf_budget()
    h, l = shape.h, shape.l
    check_budget("dnf-atoms", count_canonical_atoms(r, h, l, dp_cap), budget,
                 r=r, dp_cap=dp_cap)
    atoms = canonical_atoms(r, h, l, dp_cap)
    sources = []
    for lits in _dnf_source_clauses(m):
        canon = []
        contradictory = False
        for sign, atom in lits:
            c = formula_atom_to_canonical(atom, r, shape)
            if c == ("taut",):
                if not sign:
                    contradictory = True
                    break
                continue
            if c == ("contra",):
                if sign:
                    contradictory = True
                    break
                continue
            if c[0] == "dp" and len(c[1]) > dp_cap:
                raise VocabularyMismatch(
                    f"dp atom of arity {len(c[1])} exceeds dp_cap={dp_cap}"
                )
            canon.append((sign, c))
        if not contradictory:
            sources.append(canon)

    out = {}
    total = [0]
    for source in sources:
        _expand_source(source, r, shape, dp_cap, atoms, budget, out, total)
    clauses = [out[k] for k in sorted(out)]
    return atoms, clauses


def _expand_source(source, r, shape, dp_cap, atoms, budget, out, total):
    h, l = shape.h, shape.l
    eq_req = {}
    ceq_req, col_req, edge_req, dp_req = [], [], [], []
    for sign, a in source:
        if a[0] == "eq":
            if eq_req.get((a[1], a[2]), sign) != sign:
                return
            eq_req[(a[1], a[2])] = sign
        elif a[0] == "ceq":
            ceq_req.append((sign, a))
        elif a[0] == "col":
            col_req.append((sign, a))
        elif a[0] == "edge":
            edge_req.append((sign, a))
        else:
            dp_req.append((sign, a))

    for partition in set_partitions(range(1, r + 1)):
        part_of = {i: p for p in partition for i in p}
        if any((part_of[i] == part_of[j]) != s for (i, j), s in eq_req.items()):
            continue
        # Constants: an injective partial map from parts to constant slots.
        cmaps = _part_maps(partition, l, ceq_req, part_of, injective=True)
        if not cmaps:
            continue
        colmaps = _part_maps(partition, h, col_req, part_of, injective=False)
        if not colmaps:
            continue
        pairs = [
            (pa, pb)
            for i, pa in enumerate(partition)
            for pb in partition[i + 1:]
        ]
        pinned = {}
        ok = True
        for sign, (_, i, j) in edge_req:
            pa, pb = part_of[i], part_of[j]
            if pa == pb:
                if sign:
                    ok = False
                    break
                continue
            key = (min(pa, pb), max(pa, pb))
            if pinned.get(key, sign) != sign:
                ok = False
                break
            pinned[key] = sign
        if not ok:
            continue
        free_pairs = [p for p in pairs if (min(p), max(p)) not in pinned]
        # Disjoint-paths classes living over this partition.
        classes = sorted(
            {
                cls[1:]
                for a in atoms
                if a[0] == "dp"
                for cls in [classify_dp_atom(a[1], part_of)]
                if cls[0] == "free"
            },
            key=lambda td: (sorted(map(sorted, td[0])), sorted(td[1])),
        )
        dp_pinned = {}
        ok = True
        for sign, (_, ps) in dp_req:
            cls = classify_dp_atom(ps, part_of)
            if cls[0] == "false":
                if sign:
                    ok = False
                    break
            elif cls[0] == "true":
                if not sign:
                    ok = False
                    break
            else:
                key = cls[1:]
                if dp_pinned.get(key, sign) != sign:
                    ok = False
                    break
                dp_pinned[key] = sign
        if not ok:
            continue
        free_classes = [c for c in classes if c not in dp_pinned]
        amount = (
            len(cmaps) * len(colmaps) * (1 << len(free_pairs)) * (1 << len(free_classes))
        )
        check_budget("dnf-clauses", total[0] + amount, budget, r=r, dp_cap=dp_cap)
        total[0] += amount
        for cmap in cmaps:
            for colmap in colmaps:
                for emask in range(1 << len(free_pairs)):
                    edge_true = {k for k, v in pinned.items() if v}
                    for kk in range(len(free_pairs)):
                        if emask >> kk & 1:
                            p = free_pairs[kk]
                            edge_true.add((min(p), max(p)))
                    for dmask in range(1 << len(free_classes)):
                        dp_true = {k for k, v in dp_pinned.items() if v}
                        for kk in range(len(free_classes)):
                            if dmask >> kk & 1:
                                dp_true.add(free_classes[kk])
                        clause = FullClause(
                            r, shape, dp_cap, partition, dict(cmap), dict(colmap),
                            frozenset(edge_true), frozenset(dp_true),
                        )
                        key = clause.sign_vector(atoms)
                        out.setdefault(key, clause)


def _part_maps(partition, slots, requirements, part_of, injective):
    """Partial maps part -> slot consistent with the pinned requirements."""
    pinned = {}
    forbidden = {p: set() for p in partition}
    for sign, (_, i, j) in requirements:
        p = part_of[i]
        if sign:
            if pinned.get(p, j) != j:
                return []
            pinned[p] = j
        else:
            forbidden[p].add(j)
    for p, j in pinned.items():
        if j in forbidden[p]:
            return []
    if injective:
        vals = [j for j in pinned.values()]
        if len(set(vals)) != len(vals):
            return []
    maps = [dict(pinned)]
    for p in partition:
        if p in pinned:
            continue
        new = []
        for m in maps:
            new.append(m)  # part stays unmapped
            for j in range(1, slots + 1):
                if j in forbidden[p]:
                    continue
                if injective and j in m.values():
                    continue
                m2 = dict(m)
                m2[p] = j
                new.append(m2)
        maps = new
    return maps


def to_full_dnf(m, r, shape, dp_cap=None, budget=None):
    """Equivalent full-DNF formula: every clause decides every canonical atom.

    Every clause of ``m`` survives as a subset of some output clause.  Raises
    BudgetExceeded when the expansion would exceed the clause budget.
    """
    atoms, clauses = full_dnf_clauses(m, r, shape, dp_cap, budget)
    return Or.of(c.to_formula(atoms) for c in clauses)


def ext_patterns(m, r, shape, dp_cap=None, budget=None):
    """The set of patterns of the clauses of a full DNF extending ``m``.

    Unsatisfiable clauses carry the empty pattern and are dropped.
    """
    _, clauses = full_dnf_clauses(m, r, shape, dp_cap, budget)
    return {c.pattern() for c in clauses}


def clause_pattern(literals, r, shape, dp_cap=None):
    """Pattern of a single full clause given as (sign, canonical-atom) pairs.

    Returns the empty pattern when the clause is inconsistent; raises when the
    clause fails to decide some canonical atom.
    """
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    atoms = canonical_atoms(r, shape.h, shape.l, dp_cap)
    decided = {}
    for sign, atom in literals:
        if decided.get(atom, sign) != sign:
            return EMPTY_PATTERN
        decided[atom] = sign
    missing = [a for a in atoms if a not in decided]
    if missing:
        raise ValueError(f"clause is not full: undecided atom {missing[0]!r}")
    source = [(sign, atom) for atom, sign in sorted(decided.items())]
    out = {}
    _expand_source(source, r, shape, dp_cap, atoms, dnf_budget(), out, [0])
    if not out:
        return EMPTY_PATTERN
    (clause,) = out.values()
    return clause.pattern()
