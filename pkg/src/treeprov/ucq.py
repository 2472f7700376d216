"""UCQs: parsing, evaluation oracles, compilation to tree automata, and
the N[X]-provenance pipeline for treelike instances.

Compilation uses a direct partial-match state construction: a state is
the node's slot domain together with the set of partial-match
descriptors (partial variable->slot maps plus matched-atom sets) that
some valuation of the subtree can realize.  Inequality atoms (used
internally for forced queries) are enforced eagerly: two variables
required distinct can never share a slot, and elements that have gone
out of scope are distinct from everything still in scope.
"""

import itertools
import re
from dataclasses import dataclass, field

from . import automata
from .automata import BNTA, EMPTY, intersect, lazy_determinize, memoized, union
from .circuits import Circuit, Polynomial, fix_inputs, rename_inputs
from .encoding import KFact, annotate, encode
from .errors import NoDecomposition
from .provcirc import nx_provenance_circuit
from .relational import (Fact, Instance, normalize_decomposition,
                         tree_decomposition)
from .trees import postorder


@dataclass(frozen=True)
class Atom:
    rel: str
    vars: tuple


@dataclass(frozen=True)
class CQ:
    atoms: tuple  # of Atom, repeated atoms = multiplicity
    diseqs: frozenset = frozenset()  # of frozenset({x, y})

    @property
    def variables(self):
        out = []
        for a in self.atoms:
            for v in a.vars:
                if v not in out:
                    out.append(v)
        return out


@dataclass(frozen=True)
class UCQ:
    disjuncts: tuple  # of CQ
    free: tuple = ()


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|[(),;])")


def parse_ucq(text, free=()):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise SyntaxError("bad character at position %d" % pos)
            break
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    i = 0

    def peek():
        return tokens[i][0] if i < len(tokens) else None

    def expect(tok):
        nonlocal i
        if peek() != tok:
            at = tokens[i][1] if i < len(tokens) else len(text)
            raise SyntaxError("expected %r at position %d" % (tok, at))
        i += 1

    def name():
        nonlocal i
        t = peek()
        if t is None or t in "(),;":
            at = tokens[i][1] if i < len(tokens) else len(text)
            raise SyntaxError("expected a name at position %d" % at)
        i += 1
        return t

    def atom():
        rel = name()
        expect("(")
        vs = [name()]
        while peek() == ",":
            expect(",")
            vs.append(name())
        expect(")")
        return Atom(rel, tuple(vs))

    def cq():
        atoms = [atom()]
        while peek() == ",":
            expect(",")
            atoms.append(atom())
        return CQ(tuple(atoms))

    disjuncts = [cq()]
    while peek() == ";":
        expect(";")
        disjuncts.append(cq())
    if i != len(tokens):
        raise SyntaxError("trailing input at position %d" % tokens[i][1])
    q = UCQ(tuple(disjuncts), tuple(free))
    allvars = set()
    for d in q.disjuncts:
        allvars |= set(d.variables)
    for v in q.free:
        if v not in allvars:
            raise SyntaxError("free variable %s does not occur" % v)
    return q


# ---------------------------------------------------------------------------
# Direct evaluation oracles


def cq_matches(cq, instance):
    """All satisfying assignments of one CQ by domain enumeration."""
    vs = cq.variables
    dom = instance.domain
    keys = instance.fact_keys()
    out = []
    for combo in itertools.product(dom, repeat=len(vs)):
        asg = dict(zip(vs, combo))
        ok = all(asg[x] != asg[y]
                 for pair in cq.diseqs for x, y in [tuple(pair)])
        if ok and all((a.rel, tuple(asg[v] for v in a.vars)) in keys
                      for a in cq.atoms):
            out.append(asg)
    return out


def enumerate_matches(q, instance):
    """All (disjunct index, assignment) pairs."""
    out = []
    for j, d in enumerate(q.disjuncts):
        for asg in cq_matches(d, instance):
            out.append((j, asg))
    return out


def satisfies(q, instance):
    return any(cq_matches(d, instance) for d in q.disjuncts)


def nx_provenance_bruteforce(q, instance):
    """Sum over disjuncts and matches of the product of matched-fact
    variables (fact ids), with multiplicity."""
    key_to_id = {f.key(): f.id for f in instance.facts}
    total = Polynomial()
    for j, asg in enumerate_matches(q, instance):
        term = Polynomial.constant(1)
        for a in q.disjuncts[j].atoms:
            fid = key_to_id[(a.rel, tuple(asg[v] for v in a.vars))]
            term = term * Polynomial.variable(fid)
        total = total + term
    return total


def bag_satisfies(cq, bag):
    """Bag-homomorphism oracle: some assignment whose per-fact usage
    counts fit within the bag multiplicities (diseqs respected)."""
    vs = cq.variables
    dom = sorted({a for key in bag for a in key[1]}, key=str)
    for combo in itertools.product(dom, repeat=len(vs)):
        asg = dict(zip(vs, combo))
        if not all(asg[x] != asg[y]
                   for pair in cq.diseqs for x, y in [tuple(pair)]):
            continue
        usage = {}
        for a in cq.atoms:
            key = (a.rel, tuple(asg[v] for v in a.vars))
            usage[key] = usage.get(key, 0) + 1
        if all(bag.get(key, 0) >= m for key, m in usage.items()):
            return True
    return False


# ---------------------------------------------------------------------------
# Partial-match automaton


@dataclass(frozen=True)
class _MatchCQ:
    """Internal CQ form: atoms carry a set of allowed relation names."""
    atoms: tuple  # of (frozenset of rels, vars tuple)
    diseqs: frozenset
    variables: tuple


def _match_form(cq):
    vs = tuple(cq.variables)
    return _MatchCQ(tuple((frozenset([a.rel]), a.vars) for a in cq.atoms),
                    cq.diseqs, vs)


def _close(mcq, descs, struct):
    """Extend descriptors by matching the node's fact (if any) against
    unmatched atoms, to fixpoint.  struct = (rel, slot tuple) or None."""
    if struct is None:
        return descs
    rel, slots = struct
    all_atoms = mcq.atoms
    out = set(descs)
    frontier = list(descs)
    while frontier:
        mu, matched = frontier.pop()
        mud = dict(mu)
        for idx, (rels, avars) in enumerate(all_atoms):
            if idx in matched or rel not in rels or len(avars) != len(slots):
                continue
            new = dict(mud)
            ok = True
            for v, s in zip(avars, slots):
                if new.get(v, s) != s:
                    ok = False
                    break
                new[v] = s
            if not ok:
                continue
            # inequality atoms: distinct slots mean distinct elements
            for pair in mcq.diseqs:
                x, y = tuple(pair)
                if x in new and y in new and new[x] == new[y]:
                    ok = False
                    break
            if not ok:
                continue
            d = (frozenset(new.items()), matched | {idx})
            if d not in out:
                out.add(d)
                frontier.append(d)
    return out


def _reinterpret(mcq, descs, child_dom, node_dom):
    """Project descriptors into the parent's slot scope; a variable whose
    element leaves scope while it still occurs in an unmatched atom kills
    the descriptor."""
    shared = child_dom & node_dom
    out = set()
    for mu, matched in descs:
        keep = {}
        dead = False
        gone = set()
        for v, s in mu:
            if s in shared:
                keep[v] = s
            else:
                gone.add(v)
        if gone:
            for idx, (rels, avars) in enumerate(mcq.atoms):
                if idx not in matched and gone & set(avars):
                    dead = True
                    break
        if not dead:
            out.add((frozenset(keep.items()), matched))
    return out


def match_automaton(cq):
    """Lazy bNTA over KFact labels testing one CQ (with optional
    inequality atoms) on valid tree encodings."""
    mcq = cq if isinstance(cq, _MatchCQ) else _match_form(cq)
    n_atoms = len(mcq.atoms)
    empty_desc = (frozenset(), frozenset())

    def struct_of(label):
        if label.rel is None:
            return None
        return (label.rel, label.args)

    def iota(label):
        descs = _close(mcq, {empty_desc}, struct_of(label))
        return frozenset([(label.dom, frozenset(descs))])

    def delta(s1, s2, label):
        dom1, descs1 = s1
        dom2, descs2 = s2
        r1 = _reinterpret(mcq, descs1, dom1, label.dom)
        r2 = _reinterpret(mcq, descs2, dom2, label.dom)
        merged = set()
        for mu1, m1 in r1:
            d1 = dict(mu1)
            for mu2, m2 in r2:
                new = dict(d1)
                ok = True
                for v, s in mu2:
                    if new.get(v, s) != s:
                        ok = False
                        break
                    new[v] = s
                if not ok:
                    continue
                for pair in mcq.diseqs:
                    x, y = tuple(pair)
                    if x in new and y in new and new[x] == new[y]:
                        ok = False
                        break
                if ok:
                    merged.add((frozenset(new.items()), m1 | m2))
        merged = _close(mcq, merged, struct_of(label))
        return frozenset([(label.dom, frozenset(merged))])

    full = frozenset(range(n_atoms))

    def is_final(state):
        _, descs = state
        return any(m == full for _, m in descs)

    return BNTA(iota, delta, is_final)


def compile_bool(q, k=None):
    """bNTA over the k-fact alphabet testing a UCQ on valid encodings."""
    if isinstance(q, CQ):
        q = UCQ((q,))
    return memoized(union([match_automaton(d) for d in q.disjuncts]))


# ---------------------------------------------------------------------------
# Bag compilation (multiplicity-aware)


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def forced_queries(cq):
    """Equivalence-class expansion: one forced query (all variables
    pairwise distinct) per partition of the variables."""
    vs = cq.variables
    out = []
    for part in set_partitions(vs):
        rep = {}
        for cls in part:
            r = cls[0]
            for v in cls:
                rep[v] = r
        atoms = {}
        for a in cq.atoms:
            key = (a.rel, tuple(rep[v] for v in a.vars))
            atoms[key] = atoms.get(key, 0) + 1
        reps = sorted({rep[v] for v in vs}, key=str)
        diseqs = frozenset(frozenset(p) for p in itertools.combinations(reps, 2))
        out.append((atoms, diseqs, rep))
    return out


def compile_bag(cq, k=None, p=None):
    """bNTA over (KFact, {0..p}) accepting an annotated encoding iff its
    bag instance satisfies the CQ under bag-homomorphism semantics.

    Built per the forced-query route: expand over variable equivalence
    classes, move to the multiplicity-expanded signature (relation names
    (R, i)), compile, and relabel the annotated alphabet back into it.
    """
    total = len(cq.atoms)
    if p is None:
        p = total
    if p < total:
        raise ValueError("p must be at least the total atom multiplicity")
    branches = []
    for atoms, diseqs, _rep in forced_queries(cq):
        matoms = []
        for (rel, avars), mult in sorted(atoms.items(), key=repr):
            allowed = frozenset((rel, j) for j in range(mult, p + 1))
            matoms.append((allowed, avars))
        reps = tuple(sorted({v for _, avars in matoms for v in avars},
                            key=str))
        branches.append(match_automaton(
            _MatchCQ(tuple(matoms), diseqs, reps)))

    def h(lab):
        kf, i = lab
        if kf.rel is None or i == 0:
            return KFact(kf.dom)
        return KFact(kf.dom, (kf.rel, i), kf.args)

    return memoized(automata.relabel_hom(union(branches), h))


# ---------------------------------------------------------------------------
# N[X] provenance pipeline


def _p_rel(var):
    return ("Px", var)


def exactly_one_automaton(xvars, p):
    """Accepts annotated encodings containing, for each x, exactly one
    (Px,x)-fact with annotation 1 (annotations >= 2 rejected)."""
    xset = frozenset(xvars)

    def contribution(label, ann):
        rel = label[0].rel
        if isinstance(rel, tuple) and rel[0] == "Px" and rel[1] in xset:
            if ann == 0:
                return frozenset()
            if ann == 1:
                return frozenset([rel[1]])
            return None  # reject
        return frozenset()

    def iota(lab):
        c = contribution(lab, lab[1])
        if c is None:
            return EMPTY
        return frozenset([c])

    def delta(s1, s2, lab):
        if s1 & s2:
            return EMPTY
        c = contribution(lab, lab[1])
        if c is None or (c & (s1 | s2)):
            return EMPTY
        return frozenset([s1 | s2 | c])

    return BNTA(iota, delta, lambda s: s == xset)


def run_count_duplication(det, is_additional):
    """State-duplication wrapper: on additional-fact labels annotated 1,
    targets of the annotation-0 and annotation-1 transitions are kept
    disjoint (copies 0 and 1) and both offered, so that accepting runs
    count the accepted presence patterns of the additional facts."""

    def spread(lab, t0, t1):
        out = set()
        out |= {(s, 0) for s in t0}
        out |= {(s, 1) for s in t1}
        return frozenset(out)

    def iota(lab):
        if is_additional(lab[0]) and lab[1] == 1:
            return spread(lab, det.iota((lab[0], 0)), det.iota(lab))
        return frozenset((s, 0) for s in det.iota(lab))

    def delta(q1, q2, lab):
        a, b = q1[0], q2[0]
        if is_additional(lab[0]) and lab[1] == 1:
            return spread(lab, det.delta(a, b, (lab[0], 0)),
                          det.delta(a, b, lab))
        return frozenset((s, 0) for s in det.delta(a, b, lab))

    return BNTA(iota, delta, lambda s: det.is_final(s[0]))


def _augmented_instance(instance, xvars):
    dom = instance.domain
    sig = dict(instance.signature)
    facts = list(instance.facts)
    extra_ids = set()
    n = 0
    for x in xvars:
        sig[_p_rel(x)] = 1
        for a in dom:
            n += 1
            fid = ("aux", n)
            facts.append(Fact(_p_rel(x), (a,), fid))
            extra_ids.add(fid)
    return Instance(sig, facts), extra_ids


def _zero_circuit():
    return Circuit("semiring", {("out",): ("add", ())}, ("out",))


def nx_disjunct_provenance(cq, instance, k=None):
    """N[X] provenance circuit of one CQ disjunct, inputs = fact ids."""
    if not instance.facts or not instance.domain:
        return _zero_circuit()
    xvars = cq.variables
    aug = CQ(cq.atoms + tuple(Atom(_p_rel(x), (x,)) for x in xvars),
             cq.diseqs)
    inst2, extra_ids = _augmented_instance(instance, xvars)
    l = len(aug.atoms)
    p = l
    a_bag = compile_bag(aug, k, p)
    a_one = exactly_one_automaton(xvars, p)
    det = lazy_determinize(memoized(intersect(a_bag, a_one)))

    def is_additional(kf):
        return isinstance(kf.rel, tuple) and kf.rel[0] == "Px"

    a3 = memoized(run_count_duplication(memoized(det), is_additional))

    decomp = tree_decomposition(inst2, k)
    enc = encode(inst2, normalize_decomposition(decomp))
    caps = {}
    for n in postorder(enc.root):
        fid = enc.node_fact.get(id(n))
        if fid is None:
            caps[id(n)] = 0
        elif fid in extra_ids:
            caps[id(n)] = 1
    res = nx_provenance_circuit(a3, enc.root, l=l, p=p, ann_caps=caps)
    rename = {}
    fixed = {}
    for n in postorder(enc.root):
        gate = res.input_map[id(n)]
        fid = enc.node_fact.get(id(n))
        if fid is not None and fid not in extra_ids:
            rename[gate] = fid
        else:
            fixed[gate] = 1
    return fix_inputs(rename_inputs(res.circuit, rename), fixed)


def nx_provenance(q, instance, k=None):
    """N[X] provenance circuit of a UCQ on a treelike instance; the
    per-disjunct circuits share their fact-id input gates and feed a top
    sum gate."""
    if isinstance(q, CQ):
        q = UCQ((q,))
    gates = {}
    outs = []
    for j, d in enumerate(q.disjuncts):
        c = nx_disjunct_provenance(d, instance, k)

        def m(g, j=j):
            if c.gates[g][0] == "inp":
                return g
            return (j, g)

        for g, (t, ins) in c.gates.items():
            if t == "inp":
                gates[g] = ("inp", ())
            else:
                gates[m(g)] = (t, tuple(m(i) for i in ins))
        outs.append(m(c.output))
    gates[("top",)] = ("add", tuple(outs))
    return Circuit("semiring", gates, ("top",))
