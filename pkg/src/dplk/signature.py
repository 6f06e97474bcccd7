"""The recursive signature calculus over annotated tuples.

A depth-0 signature is the atomic type of a tuple over the universe extended
with the absent element; a depth-i signature is the set of depth-(i-1)
signatures over one more annotated choice (the absent element is always an
available choice).  Signatures are canonical nested values: equality is
structural, and a stable text serialization supports golden tests.

Equal signatures force agreement on every sentence of matching quantifier
rank; the harness here checks that, and the assignment-tree machinery turns
model checking into the search for a spanning subtree whose leaves all
satisfy the matrix (equivalently: whose leaf pattern colorings land in the
matrix's pattern set - both forms are computed and compared).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import VocabularyMismatch
from .logic import (
    And, Exists, Forall, Not, Or, PrenexSentence, Var, atom_to_formula,
    canonical_atoms, default_dp_cap, ext_patterns, rename_vars,
)
from .patterns import lift_system
from .semantics import _eval, connection_family, pattern_of
from .structures import BOT, ApexTuple, BoundariedColoredGraph


@dataclass(frozen=True)
class AtomicType:
    """The set of canonical atoms true of a tuple over V plus the absent
    element; atoms mentioning an absent slot are never present."""

    atoms: frozenset
    r: int
    h: int
    l: int
    dp_cap: int

    def serialize(self):
        return "t{" + ";".join(sorted(_atom_str(a) for a in self.atoms)) + "}"


@dataclass(frozen=True)
class Signature:
    """Depth-i signature: a canonical set of depth-(i-1) signatures."""

    depth: int
    items: frozenset
    r: int
    dp_cap: int

    def serialize(self):
        return "s{" + ",".join(sorted(x.serialize() for x in self.items)) + "}"


def _atom_str(a):
    if a[0] == "dp":
        return "dp(" + ",".join(f"{p}-{q}" for p, q in a[1]) + ")"
    return f"{a[0]}({a[1]},{a[2]})"


def atomic_type(s, tup, dp_cap=None):
    """Canonical atoms true of ``tup`` (entries are vertex ids or absent)."""
    r = len(tup)
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    h, l = len(s.colors), len(s.constants)
    family = connection_family(s, tuple(tup), dp_cap)
    true_atoms = set()
    for a in canonical_atoms(r, h, l, dp_cap):
        kind = a[0]
        if kind == "eq":
            vi, vj = tup[a[1] - 1], tup[a[2] - 1]
            if vi is not BOT and vi == vj:
                true_atoms.add(a)
        elif kind == "ceq":
            vi, c = tup[a[1] - 1], s.constants[a[2] - 1]
            if vi is not BOT and c is not BOT and vi == c:
                true_atoms.add(a)
        elif kind == "col":
            vi = tup[a[1] - 1]
            if vi is not BOT and vi in s.colors[a[2] - 1]:
                true_atoms.add(a)
        elif kind == "edge":
            if s.has_edge(tup[a[1] - 1], tup[a[2] - 1]):
                true_atoms.add(a)
        else:
            if _dp_atom_true(a[1], tup, family):
                true_atoms.add(a)
    return AtomicType(frozenset(true_atoms), r, h, l, dp_cap)


def _dp_atom_true(pairs, tup, family):
    trivs, dpaths = set(), set()
    for i, j in pairs:
        vi, vj = tup[i - 1], tup[j - 1]
        if vi is BOT or vj is BOT:
            return False
        if vi == vj:
            if vi in trivs:
                return False  # duplicate single-vertex path
            trivs.add(vi)
        else:
            key = (min(vi, vj), max(vi, vj))
            if key in dpaths:
                return False  # duplicate connection demand
            dpaths.add(key)
    touched = set()
    for p, q in dpaths:
        if p in touched or q in touched or p in trivs or q in trivs:
            return False
        touched |= {p, q}
    return lift_system(trivs, dpaths, tuple(tup)) in family


def signature(s, annotations, r, dp_cap=None):
    """sig^r over the annotation sequence (``None`` means unannotated)."""
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    ranges = _ranges(s, annotations, r)
    memo = {}

    def rec(prefix):
        if prefix in memo:
            return memo[prefix]
        depth_left = r - len(prefix)
        if depth_left == 0:
            out = atomic_type(s, prefix, dp_cap)
        else:
            dom = list(ranges[len(prefix)]) + [BOT]
            out = Signature(
                depth=depth_left,
                items=frozenset(rec(prefix + (u,)) for u in dom),
                r=r,
                dp_cap=dp_cap,
            )
        memo[prefix] = out
        return out

    return rec(())


def _ranges(s, annotations, r):
    if annotations is None:
        return [tuple(range(s.n))] * r
    if len(annotations) != r:
        raise VocabularyMismatch(f"need {r} annotation sets, got {len(annotations)}")
    return [tuple(sorted(a)) for a in annotations]


def signatures_comparable(a, b):
    if a.r != b.r or a.dp_cap != b.dp_cap:
        raise VocabularyMismatch(
            "signatures built with different rank or dp_cap are not comparable"
        )


# -- assignment trees ----------------------------------------------------------


@dataclass(frozen=True)
class TreeNode:
    """One node of an assignment tree.

    ``label`` is the representative vertex realizing this branch's signature
    (absent when only the absent element realizes it - such children exist in
    the tree but are never selected by a spanning subtree).  ``labels`` is the
    root-to-node label tuple.
    """

    label: object
    labels: tuple
    value: object
    children: tuple


@dataclass(frozen=True)
class AssignmentTree:
    root: TreeNode
    height: int
    dp_cap: int


def build_assignment(s, annotations, r, dp_cap=None):
    """Assignment tree: one child per distinct sub-signature, labeled by the
    smallest vertex realizing it (or the absent element)."""
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    ranges = _ranges(s, annotations, r)
    memo = {}

    def sig_of(prefix):
        if prefix in memo:
            return memo[prefix]
        depth_left = r - len(prefix)
        if depth_left == 0:
            out = atomic_type(s, prefix, dp_cap)
        else:
            dom = list(ranges[len(prefix)]) + [BOT]
            out = Signature(
                depth=depth_left,
                items=frozenset(sig_of(prefix + (u,)) for u in dom),
                r=r,
                dp_cap=dp_cap,
            )
        memo[prefix] = out
        return out

    def node_of(prefix):
        depth = len(prefix)
        if depth == r:
            return TreeNode(
                label=prefix[-1] if prefix else None,
                labels=prefix,
                value=sig_of(prefix),
                children=(),
            )
        groups = {}
        for u in list(ranges[depth]) + [BOT]:
            sub = sig_of(prefix + (u,))
            key = sub.serialize()
            entry = groups.setdefault(key, {"reals": [], "bot": False})
            if u is BOT:
                entry["bot"] = True
            else:
                entry["reals"].append(u)
        kids = []
        for key in sorted(groups):
            entry = groups[key]
            rep = min(entry["reals"]) if entry["reals"] else BOT
            kids.append(node_of(prefix + (rep,)))
        return TreeNode(
            label=prefix[-1] if prefix else None,
            labels=prefix,
            value=sig_of(prefix),
            children=tuple(kids),
        )

    return AssignmentTree(root=node_of(()), height=r, dp_cap=dp_cap)


def tree_leaves(tree):
    out = []

    def walk(node):
        if not node.children:
            out.append(node)
            return
        for c in node.children:
            walk(c)

    walk(tree.root)
    return out


def pattern_coloring(s, tree, leaf):
    """Pattern of the root-to-leaf label tuple."""
    g = BoundariedColoredGraph(
        base=s, apex=ApexTuple(tuple(s.constants)), boundary=leaf.labels
    )
    return pattern_of(g, dp_cap=tree.dp_cap)


def check_via_spanning_tree(s, sentence, dp_cap=None):
    """Model checking as spanning-subtree search over the assignment tree.

    Existential quantifiers pick one present-labeled child, universal ones
    take all present-labeled children; a candidate subtree certifies the
    sentence when every leaf satisfies the matrix.  Leaf satisfaction is
    computed both directly and through membership of the leaf's pattern
    coloring in the matrix's pattern set; the two must agree.
    """
    if not isinstance(sentence, PrenexSentence):
        raise TypeError("check_via_spanning_tree expects a PrenexSentence")
    r = sentence.rank()
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    _require_cap_covers(sentence.matrix, dp_cap)
    annotations = [
        s.annotations[a - 1] if a is not None else frozenset(range(s.n))
        for _, _, a in sentence.prefix
    ]
    tree = build_assignment(s, annotations, r, dp_cap)
    names = [v for _, v, _ in sentence.prefix]
    matrix_x = rename_vars(sentence.matrix, {v: f"x{i}" for i, v in enumerate(names, 1)})
    hpsi = ext_patterns(matrix_x, r, s.shape(), dp_cap)

    def leaf_ok(node):
        env = {name: v for name, v in zip(names, node.labels)}
        direct = _eval(s, sentence.matrix, env)
        via_pattern = pattern_coloring(s, tree, node) in hpsi
        if direct != via_pattern:
            raise AssertionError(
                "pattern-set membership disagrees with direct matrix evaluation "
                f"on labels {node.labels}"
            )
        return direct

    def search(node, depth):
        if depth == r:
            return leaf_ok(node)
        kids = [c for c in node.children if c.label is not BOT]
        if sentence.prefix[depth][0] == "E":
            return any(search(c, depth + 1) for c in kids)
        return all(search(c, depth + 1) for c in kids)

    return search(tree.root, 0)


def _require_cap_covers(matrix, dp_cap):
    from .logic import Dp, children, is_atom

    def walk(f):
        if isinstance(f, Dp) and len(f.pairs) > dp_cap:
            raise VocabularyMismatch(
                f"dp atom of arity {len(f.pairs)} exceeds dp_cap={dp_cap}"
            )
        if not is_atom(f):
            for c in children(f):
                walk(c)

    walk(matrix)


# -- compiling a signature back into a sentence ---------------------------------


def bot_projection(value, slot):
    """The value the absent branch at position ``slot`` must take.

    Masking a slot removes every atom mentioning it; the projection of any
    present branch equals the absent branch, which makes the absent branches
    of a well-formed signature redundant - and checkable.
    """
    if isinstance(value, AtomicType):
        return AtomicType(
            atoms=frozenset(a for a in value.atoms if not _mentions(a, slot)),
            r=value.r,
            h=value.h,
            l=value.l,
            dp_cap=value.dp_cap,
        )
    return Signature(
        depth=value.depth,
        items=frozenset(bot_projection(x, slot) for x in value.items),
        r=value.r,
        dp_cap=value.dp_cap,
    )


def _mentions(atom, slot):
    kind = atom[0]
    if kind == "dp":
        return any(slot in p for p in atom[1])
    if kind in ("eq", "edge"):
        return atom[1] == slot or atom[2] == slot
    return atom[1] == slot


def signature_to_sentence(beta, shape):
    """A sentence holding exactly on structures whose signature is ``beta``.

    Requires the unannotated form.  If the absent branches of ``beta`` are
    inconsistent with being a signature at all, the canonical false sentence
    comes back.
    """
    r, cap = beta.r, beta.dp_cap
    universe = canonical_atoms(r, shape.h, shape.l, cap)

    def compile_value(value, depth):
        if isinstance(value, AtomicType):
            lits = []
            for a in universe:
                af = atom_to_formula(a, shape)
                lits.append(af if a in value.atoms else Not(af))
            return And.of(lits)
        slot = depth + 1
        delta = bot_projection(next(iter(value.items)), slot)
        if delta not in value.items:
            return None
        var = f"x{slot}"
        reals = sorted(value.items - {delta}, key=lambda x: x.serialize())
        parts = [Exists(var, compile_value(x, depth + 1)) for x in reals]
        everyone = sorted(value.items, key=lambda x: x.serialize())
        parts.append(Forall(var, Or.of(compile_value(x, depth + 1) for x in everyone)))
        if any(p is None or _contains_none(p) for p in parts):
            return None
        return And.of(parts)

    out = compile_value(beta, 0)
    return Or.of(()) if out is None or _contains_none(out) else out


def _contains_none(f):
    if f is None:
        return True
    from .logic import children, is_atom

    if is_atom(f):
        return False
    return any(_contains_none(c) for c in children(f))


# -- annotation reduction ---------------------------------------------------------


def reduce_annotation(s, annotations, r, dp_cap=None):
    """Shrink annotation sets while preserving the signature.

    Greedy single-vertex removals, levels in order and vertices ascending,
    repeated to a fixed point; each removal is re-verified by recomputing the
    signature.  The result is locally minimal.
    """
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    target = signature(s, annotations, r, dp_cap)
    work = [set(a) for a in annotations]
    changed = True
    while changed:
        changed = False
        for i in range(r):
            for v in sorted(work[i]):
                trial = [set(a) for a in work]
                trial[i].discard(v)
                if signature(s, [frozenset(a) for a in trial], r, dp_cap) == target:
                    work = trial
                    changed = True
    return tuple(frozenset(a) for a in work)


# -- agreement of equal-signature structures ----------------------------------


def lemma2_check(s1, s2, r, sentences, dp_cap=None):
    """If the structures have equal sig^r, assert sentence agreement.

    Returns a report dict; any disagreement on a rank-<=r sentence while the
    signatures are equal is a genuine defect and lands in
    ``counterexamples``.
    """
    from .semantics import evaluate

    if s1.shape() != s2.shape():
        raise VocabularyMismatch("structures must share a vocabulary shape")
    if dp_cap is None:
        dp_cap = default_dp_cap(r)
    sig1 = signature(s1, None, r, dp_cap)
    sig2 = signature(s2, None, r, dp_cap)
    report = {
        "signatures_equal": sig1 == sig2,
        "checked": 0,
        "counterexamples": [],
    }
    if sig1 != sig2:
        return report
    for phi in sentences:
        rank = phi.rank() if isinstance(phi, PrenexSentence) else None
        if rank is not None and rank > r:
            raise VocabularyMismatch(f"sentence rank {rank} exceeds {r}")
        a, b = evaluate(s1, phi), evaluate(s2, phi)
        report["checked"] += 1
        if a != b:
            report["counterexamples"].append(phi)
    return report
