"""Direct Tarskian evaluation of sentences on colored structures, and the
pattern of a boundaried colored graph.

Quantifiers range over real vertices only; the absent element is never a
witness.  Equality and relation atoms are false whenever an argument is
absent, with one deliberate exception: a disjoint-paths pair whose two sides
are the *same* term interpreted as absent is vacuous.  Translated sentences
pin down apices with constant self-pairs, and an absent apex must make those
pins harmless rather than false.
"""

from __future__ import annotations

from .errors import VocabularyMismatch
from .logic import (
    And, Cst, Dp, EdgeAtom, Eq, Exists, Forall, InColor, InProjColor, Not, Or,
    PrenexSentence, Sdp, Var, is_atom,
)
from .patterns import assemble_pattern, lift_system
from .paths import eval_dp, eval_sdp
from .structures import BOT, BoundariedColoredGraph


def check_vocabulary(s, f):
    """Verify every name and index in ``f`` exists in ``s``."""
    if isinstance(f, PrenexSentence):
        for _, _, annot in f.prefix:
            if annot is not None and not (1 <= annot <= len(s.annotations)):
                raise VocabularyMismatch(f"annotation index {annot} not declared")
        check_vocabulary(s, f.matrix)
        return
    if isinstance(f, InColor):
        if f.color not in s.color_names:
            raise VocabularyMismatch(f"unknown color {f.color!r}")
    elif isinstance(f, InProjColor):
        if not s.proj_colors or f.const not in s.const_names:
            raise VocabularyMismatch(f"no projected color for constant {f.const!r}")
    elif is_atom(f):
        for t in _terms(f):
            if isinstance(t, Cst) and t.name not in s.const_names:
                raise VocabularyMismatch(f"unknown constant {t.name!r}")
    elif isinstance(f, (Exists, Forall)):
        if f.annot is not None and not (1 <= f.annot <= len(s.annotations)):
            raise VocabularyMismatch(f"annotation index {f.annot} not declared")
        check_vocabulary(s, f.body)
    elif isinstance(f, Not):
        check_vocabulary(s, f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            check_vocabulary(s, p)
    else:
        raise TypeError(f"not a formula: {f!r}")


def _terms(a):
    if isinstance(a, Eq):
        return (a.left, a.right)
    if isinstance(a, (InColor, InProjColor)):
        return (a.term,)
    if isinstance(a, EdgeAtom):
        return (a.left, a.right)
    return tuple(t for p in a.pairs for t in p)


def evaluate(s, phi, env=None):
    """Evaluate a sentence (or a formula under ``env``) on a structure.

    ``phi`` may be a PrenexSentence or any closed formula; nested quantifiers
    (as produced by sentence translations) are handled directly, with
    short-circuiting.
    """
    if isinstance(phi, PrenexSentence):
        phi = phi.to_formula()
    check_vocabulary(s, phi)
    return _eval(s, phi, dict(env or {}))


def _resolve(s, t, env):
    if isinstance(t, Var):
        if t.name not in env:
            raise VocabularyMismatch(f"unbound variable {t.name!r}")
        return env[t.name]
    return s.constant(t.name)


def _dp_pairs(s, atom, env):
    """Resolve dp/sdp argument pairs; None signals a false atom.

    Same-term absent pairs are dropped as vacuous; any other absent argument
    makes the atom false (relations never contain the absent element).
    """
    out = []
    for t1, t2 in atom.pairs:
        v1, v2 = _resolve(s, t1, env), _resolve(s, t2, env)
        if v1 is BOT and v2 is BOT:
            if t1 == t2:
                continue
            return None
        if v1 is BOT or v2 is BOT:
            return None
        out.append((v1, v2))
    return out


def _eval(s, f, env):
    if isinstance(f, Eq):
        a, b = _resolve(s, f.left, env), _resolve(s, f.right, env)
        return a is not BOT and b is not BOT and a == b
    if isinstance(f, InColor):
        v = _resolve(s, f.term, env)
        return v is not BOT and v in s.colors[s.color_names.index(f.color)]
    if isinstance(f, InProjColor):
        v = _resolve(s, f.term, env)
        return v is not BOT and v in s.proj_colors[s.const_names.index(f.const)]
    if isinstance(f, EdgeAtom):
        return s.has_edge(_resolve(s, f.left, env), _resolve(s, f.right, env))
    if isinstance(f, Dp):
        pairs = _dp_pairs(s, f, env)
        return pairs is not None and eval_dp(s, pairs)
    if isinstance(f, Sdp):
        pairs = _dp_pairs(s, f, env)
        return pairs is not None and eval_sdp(s, f.radius, pairs)
    if isinstance(f, Not):
        return not _eval(s, f.body, env)
    if isinstance(f, And):
        return all(_eval(s, p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(s, p, env) for p in f.parts)
    if isinstance(f, (Exists, Forall)):
        domain = (
            sorted(s.annotations[f.annot - 1]) if f.annot is not None else range(s.n)
        )
        shadowed = env.get(f.var, _MISSING)
        hit = False
        for v in domain:
            env[f.var] = v
            val = _eval(s, f.body, env)
            if isinstance(f, Exists) and val:
                hit = True
                break
            if isinstance(f, Forall) and not val:
                break
        else:
            hit = isinstance(f, Forall)
        if shadowed is _MISSING:
            env.pop(f.var, None)
        else:
            env[f.var] = shadowed
        return hit
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


# -- patterns of boundaried colored graphs ------------------------------------


def connection_family(s, boundary, dp_cap):
    """All connection graphs realizable over the boundary tuple.

    Enumerates vertex-level systems (a set of single-vertex paths plus a set
    of endpoint pairs for length->=2 paths, at most ``dp_cap`` connections in
    total), keeps the realizable ones, and lifts them to index graphs.
    """
    verts = sorted({v for v in boundary if v is not BOT})
    vpairs = [(a, b) for i, a in enumerate(verts) for b in verts[i + 1:]]
    family = set()
    for tmask in range(1 << len(verts)):
        trivs = [verts[k] for k in range(len(verts)) if tmask >> k & 1]
        for dmask in range(1 << len(vpairs)):
            pairs = [vpairs[k] for k in range(len(vpairs)) if dmask >> k & 1]
            if len(trivs) + len(pairs) > dp_cap:
                continue
            query = [(t, t) for t in trivs] + pairs
            if eval_dp(s, query):
                family.add(lift_system(set(trivs), set(pairs), boundary))
    return family


def pattern_of(g, dp_cap=None):
    """The quintuple (V, kappa, delta, H_e, H_P) of a boundaried graph."""
    if not isinstance(g, BoundariedColoredGraph):
        raise TypeError("pattern_of expects a BoundariedColoredGraph")
    r = len(g.boundary)
    if dp_cap is None:
        dp_cap = r * (r + 1) // 2
    family = connection_family(g.base, g.boundary, dp_cap)
    return assemble_pattern(g.base, g.boundary, g.apex.entries, family, dp_cap)


def realizes(s, vertices, pattern):
    """Whether the tuple's pattern equals ``pattern``.

    Equivalently (and exercised as a property in tests), whether the tuple
    satisfies the clause the pattern came from.  The empty pattern is realized
    by nothing.
    """
    if pattern.is_empty():
        return False
    if len(vertices) != pattern.r:
        raise VocabularyMismatch(
            f"tuple arity {len(vertices)} does not match pattern arity {pattern.r}"
        )
    from .patterns import check_same_cap
    from .structures import ApexTuple

    g = BoundariedColoredGraph(
        base=s, apex=ApexTuple(tuple(s.constants)), boundary=tuple(vertices)
    )
    mine = pattern_of(g, dp_cap=pattern.dp_cap)
    check_same_cap(mine, pattern)
    return mine == pattern
