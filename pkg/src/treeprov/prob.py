"""Probabilistic applications: pc/pcc/BID instances, lineage circuits
through cc-encodings and stitching, exact probability evaluation by
junction-tree message passing, and match counting.

All probabilities are exact rationals (fractions.Fraction).
"""

import itertools
from fractions import Fraction

from .automata import lift_boolean, memoized
from .circuits import (Circuit, arity_two, circuit_relational_encoding,
                       fix_inputs, rename_inputs, stitch,
                       sum_decompositions)
from .encoding import TreeEncoding, alphabet_label
from .errors import NoDecomposition
from .provcirc import bool_provenance_circuit
from .relational import (Bag, Fact, Instance, TreeDecomposition,
                         normalize_decomposition, tree_decomposition)
from .trees import Node, postorder
from .ucq import CQ, UCQ, Atom, compile_bool


# ---------------------------------------------------------------------------
# Propositional formulas (pc-instance annotations)


def parse_formula(text):
    """Grammar: OR-expr of AND-exprs of literals; literals are event
    names, constants 0/1, !lit, and parenthesized expressions."""
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()!&|":
            tokens.append(c)
            i += 1
        elif c.isalnum() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise SyntaxError("bad character %r at position %d" % (c, i))
    pos = [0]

    def peek():
        return tokens[pos[0]] if pos[0] < len(tokens) else None

    def take():
        t = peek()
        pos[0] += 1
        return t

    def literal():
        t = take()
        if t == "!":
            return ("not", literal())
        if t == "(":
            f = or_expr()
            if take() != ")":
                raise SyntaxError("missing )")
            return f
        if t in ("0", "1"):
            return ("const", t == "1")
        if t is None or t in "()!&|":
            raise SyntaxError("unexpected token %r" % t)
        return ("var", t)

    def and_expr():
        f = literal()
        while peek() == "&":
            take()
            f = ("and", f, literal())
        return f

    def or_expr():
        f = and_expr()
        while peek() == "|":
            take()
            f = ("or", f, and_expr())
        return f

    f = or_expr()
    if peek() is not None:
        raise SyntaxError("trailing input in formula")
    return f


def formula_events(f):
    if f[0] == "var":
        return {f[1]}
    if f[0] == "const":
        return set()
    out = set()
    for sub in f[1:]:
        out |= formula_events(sub)
    return out


def eval_formula(f, assignment):
    if f[0] == "var":
        return bool(assignment[f[1]])
    if f[0] == "const":
        return f[1]
    if f[0] == "not":
        return not eval_formula(f[1], assignment)
    if f[0] == "and":
        return eval_formula(f[1], assignment) and eval_formula(f[2], assignment)
    return eval_formula(f[1], assignment) or eval_formula(f[2], assignment)


def format_formula(f):
    if f[0] == "var":
        return f[1]
    if f[0] == "const":
        return "1" if f[1] else "0"
    if f[0] == "not":
        sub = format_formula(f[1])
        if f[1][0] in ("and", "or"):
            sub = "(%s)" % sub
        return "!" + sub
    op = " & " if f[0] == "and" else " | "
    parts = []
    for sub in f[1:]:
        s = format_formula(sub)
        if f[0] == "and" and sub[0] == "or":
            s = "(%s)" % s
        parts.append(s)
    return op.join(parts)


# ---------------------------------------------------------------------------
# Instance flavors


class PCInstance:
    """Facts annotated with propositional formulas over independent
    events with given probabilities."""

    def __init__(self, instance, conds, events):
        self.instance = instance
        self.conds = dict(conds)  # fact id -> formula AST
        self.events = {e: Fraction(p) for e, p in events.items()}
        for fid, f in self.conds.items():
            missing = formula_events(f) - set(self.events)
            if missing:
                raise ValueError("undeclared events %s" % sorted(missing))
        for f in instance.facts:
            if f.id not in self.conds:
                self.conds[f.id] = ("const", True)


class PCCInstance:
    """Facts gated by gates of a Boolean circuit with probabilistic
    inputs."""

    def __init__(self, instance, circuit, phi, probs):
        self.instance = instance
        self.circuit = circuit
        self.phi = dict(phi)  # fact id -> gate id
        self.probs = {g: Fraction(p) for g, p in probs.items()}
        for f in instance.facts:
            if f.id not in self.phi:
                raise ValueError("phi not total: missing %s" % f.id)
        for g in circuit.inputs():
            p = self.probs.get(g)
            if p is None:
                raise ValueError("missing probability for input %r" % (g,))
            if not 0 <= p <= 1:
                raise ValueError("probability out of range for %r" % (g,))


class BIDInstance:
    """Block-independent-disjoint: per key-valuation block, at most one
    fact is present; blocks are independent."""

    def __init__(self, instance, key_positions, probs):
        self.instance = instance
        self.key_positions = {r: tuple(v) for r, v in key_positions.items()}
        self.probs = {fid: Fraction(p) for fid, p in probs.items()}
        for f in instance.facts:
            if f.id not in self.probs:
                raise ValueError("missing probability for %s" % f.id)
            if not 0 < self.probs[f.id] <= 1:
                raise ValueError("block probabilities must be in (0,1]")
        for block, facts in self.blocks().items():
            if sum(self.probs[f.id] for f in facts) > 1:
                raise ValueError("block %r probabilities exceed 1" % (block,))

    def block_key(self, fact):
        pos = self.key_positions.get(fact.rel, tuple(range(len(fact.args))))
        return (fact.rel, tuple(fact.args[i] for i in pos))

    def blocks(self):
        out = {}
        for f in self.instance.facts:
            out.setdefault(self.block_key(f), []).append(f)
        return out


class CCEncoding:
    """Tree encoding of the instance part, a same-skeleton decomposition
    of the circuit, and the per-bag selected gate chi."""

    def __init__(self, encoding, circuit, circuit_decomposition, chi):
        self.encoding = encoding
        self.circuit = circuit
        self.circuit_decomposition = circuit_decomposition
        self.chi = chi  # id(encoding node) -> gate id


def pc_relational_encoding(pc):
    """Width measure for pc-instances: the original facts plus binary
    Occ (element, event) and Cooc (event, event) facts."""
    sig = dict(pc.instance.signature)
    sig["Occ"] = 2
    sig["Cooc"] = 2
    facts = list(pc.instance.facts)
    seen = set()
    n = 0

    def add(rel, args):
        nonlocal n
        if (rel, args) in seen:
            return
        seen.add((rel, args))
        n += 1
        facts.append(Fact(rel, args, ("oc", n)))

    for f in pc.instance.facts:
        events = sorted(formula_events(pc.conds[f.id]))
        for e in events:
            for a in f.args:
                add("Occ", (a, ("ev", e)))
        for i, e in enumerate(events):
            for g in events[i + 1:]:
                add("Cooc", (("ev", e), ("ev", g)))
    return Instance(sig, facts)


def pc_width(pc):
    return tree_decomposition(pc_relational_encoding(pc)).width


# ---------------------------------------------------------------------------
# Sparse junction-tree message passing


class _Rel:
    __slots__ = ("vars", "rows")

    def __init__(self, vars, rows):
        self.vars = tuple(vars)
        self.rows = rows  # dict assignment-tuple -> Fraction


_UNIT = _Rel((), {(): Fraction(1)})


def _join(r1, r2):
    shared = [v for v in r2.vars if v in r1.vars]
    extra = [v for v in r2.vars if v not in r1.vars]
    i1 = [r1.vars.index(v) for v in shared]
    i2 = [r2.vars.index(v) for v in shared]
    e2 = [r2.vars.index(v) for v in extra]
    index = {}
    for row, w in r2.rows.items():
        key = tuple(row[i] for i in i2)
        index.setdefault(key, []).append((tuple(row[i] for i in e2), w))
    out = {}
    for row, w in r1.rows.items():
        key = tuple(row[i] for i in i1)
        for ext, w2 in index.get(key, ()):
            out[row + ext] = out.get(row + ext, Fraction(0)) + w * w2
    # note: joining two sparse rows with the same full assignment cannot
    # happen (keys are total on the union), so this is a plain product
    return _Rel(r1.vars + tuple(extra), out)


def _project(rel, keep):
    keep = [v for v in rel.vars if v in keep]
    idx = [rel.vars.index(v) for v in keep]
    out = {}
    for row, w in rel.rows.items():
        key = tuple(row[i] for i in idx)
        out[key] = out.get(key, Fraction(0)) + w
    return _Rel(keep, out)


def _eliminate_to(factors, keep):
    """Sum out every variable not in keep, one variable at a time,
    always picking the variable whose factors are cheapest to join.
    Exploits sparsity: rows stay limited to consistent assignments."""
    facs = {i: f for i, f in enumerate(factors)}
    nxt = len(facs)
    var_fac = {}
    for i, f in facs.items():
        for v in f.vars:
            var_fac.setdefault(v, set()).add(i)
    reprs = {}

    def rkey(v):
        r = reprs.get(v)
        if r is None:
            r = reprs[v] = repr(v)
        return r

    elim = {v for v in var_fac if v not in keep}
    while elim:
        best = None
        for v in elim:
            size = 1
            for i in var_fac[v]:
                size *= max(len(facs[i].rows), 1)
            key = (size, rkey(v))
            if best is None or key < best[0]:
                best = (key, v)
        v = best[1]
        group = sorted(var_fac[v])
        r = _UNIT
        for i in group:
            r = _join(r, facs[i])
        r = _project(r, set(r.vars) - {v})
        for i in group:
            f = facs.pop(i)
            for u in f.vars:
                var_fac[u].discard(i)
        elim.discard(v)
        var_fac.pop(v, None)
        facs[nxt] = r
        for u in r.vars:
            var_fac.setdefault(u, set()).add(nxt)
        nxt += 1
    r = _UNIT
    for i in sorted(facs):
        r = _join(r, facs[i])
    return r


def _gate_factor(circuit, g, probs):
    t, ins = circuit.gates[g]
    if t == "inp":
        p = probs[g]
        return _Rel((g,), {(1,): p, (0,): 1 - p})
    if t == "not":
        return _Rel((ins[0], g), {(0, 1): Fraction(1), (1, 0): Fraction(1)})
    rows = {}
    if len(ins) == 0:
        rows[(1 if t == "and" else 0,)] = Fraction(1)
        return _Rel((g,), rows)
    for a in (0, 1):
        for b in (0, 1):
            v = (a and b) if t == "and" else (a or b)
            rows[(a, b, int(v))] = Fraction(1)
    return _Rel((ins[0], ins[1], g), rows)


def message_passing_prob(circuit, decomposition, probs):
    """Exact Pr[output = 1] for an arity-two Boolean circuit under
    independent inputs, by two-pass message passing over the circuit's
    tree decomposition (potentials stored sparsely)."""
    for g, (t, ins) in circuit.gates.items():
        if t in ("and", "or") and len(ins) not in (0, 2):
            raise ValueError("message passing needs arity-two circuits")
    bags = decomposition.bags()
    gate_home = {}
    for b in bags:
        for g in b.dom:
            if g in gate_home or g not in circuit.gates:
                continue
            if set(circuit.gates[g][1]) <= b.dom:
                gate_home[g] = b
    for g in circuit.gates:
        if g not in gate_home:
            raise ValueError(
                "invalid decomposition: no bag covers gate %r and its inputs"
                % (g,))
    factors = {}
    for g, b in gate_home.items():
        factors.setdefault(id(b), []).append(_gate_factor(circuit, g, probs))

    # re-root at a bag containing the output gate
    adjacency = {id(b): [] for b in bags}
    bag_by_id = {id(b): b for b in bags}
    for b in bags:
        for c in b.children:
            adjacency[id(b)].append(id(c))
            adjacency[id(c)].append(id(b))
    root = gate_home[circuit.output]
    order = []  # (bag id, parent id)
    seen = {id(root)}
    queue = [(id(root), None)]
    while queue:
        bid, par = queue.pop()
        order.append((bid, par))
        for nb in adjacency[bid]:
            if nb not in seen:
                seen.add(nb)
                queue.append((nb, bid))
    if len(order) < len(bags):
        raise ValueError("decomposition is not connected")

    messages = {}  # bag id -> message to its parent
    children = {}
    for bid, par in order:
        if par is not None:
            children.setdefault(par, []).append(bid)
    for bid, par in reversed(order):
        local = list(factors.get(bid, ()))
        for c in children.get(bid, ()):
            local.append(messages[c])
        if par is None:
            belief = _eliminate_to(local, {circuit.output})
        else:
            sep = bag_by_id[bid].dom & bag_by_id[par].dom
            messages[bid] = _eliminate_to(local, sep)
    marg = _project(belief, {circuit.output})
    total = sum(marg.rows.values(), Fraction(0))
    if total == 0:
        raise ValueError("inconsistent potentials")
    if marg.vars == (circuit.output,):
        return marg.rows.get((1,), Fraction(0)) / total
    # output unconstrained anywhere (cannot happen for covered circuits)
    raise ValueError("output gate not covered")


def brute_force_prob(circuit, probs):
    """Testing oracle: sum over all input valuations."""
    from .circuits import eval_bool

    inputs = sorted(circuit.inputs(), key=repr)
    total = Fraction(0)
    for bits in itertools.product((0, 1), repeat=len(inputs)):
        nu = dict(zip(inputs, bits))
        w = Fraction(1)
        for g, b in nu.items():
            w *= probs[g] if b else 1 - probs[g]
        if w and eval_bool(circuit, nu):
            total += w
    return total


# ---------------------------------------------------------------------------
# cc-encodings and lineage


def _gate_elem(g):
    return ("g", g)


def pcc_joint_instance(instance, circuit):
    """Relational encoding of a pcc-instance: circuit facts plus one
    R_plus fact per data fact linking its arguments to its gate."""
    gates_inst = circuit_relational_encoding(circuit)
    sig = {}
    facts = []
    for f in gates_inst.facts:
        sig[f.rel] = len(f.args)
        facts.append(Fact(f.rel, tuple(_gate_elem(a) for a in f.args), f.id))
    return sig, facts


def joint_decomposition(pcc, k=None):
    sig, gate_facts = pcc_joint_instance(pcc.instance, pcc.circuit)
    for rel, arity in pcc.instance.signature.items():
        sig[("plus", rel)] = arity + 1
    facts = list(gate_facts)
    for f in pcc.instance.facts:
        facts.append(Fact(("plus", f.rel),
                          tuple(f.args) + (_gate_elem(pcc.phi[f.id]),),
                          ("plus", f.id)))
    joint = Instance(sig, facts)
    return joint, tree_decomposition(joint, k)


def cc_encode(pcc, decomposition):
    """Build the cc-encoding from a (joint) decomposition: walk the
    normalized bag tree producing, per bag, a k-fact over the data
    elements, a circuit bag over the gate elements, and chi."""
    decomposition = normalize_decomposition(decomposition)
    def is_gate(e):
        return isinstance(e, tuple) and len(e) == 2 and e[0] == "g"

    k = max((len([e for e in b.dom if not is_gate(e)])
             for b in decomposition.bags()), default=1) - 1
    k = max(k, 0)
    joint = decomposition.instance

    fact_nodes = {}
    chi = {}

    def split(bag):
        data, gates = set(), set()
        for e in bag.dom:
            if is_gate(e):
                gates.add(e[1])
            else:
                data.add(e)
        return data, gates

    def build(bag, parent_slots):
        data, gates = split(bag)
        slot_of = {a: s for a, s in parent_slots.items() if a in data}
        used = set(parent_slots.values())
        free = [s for s in range(1, 2 * k + 3) if s not in used]
        for a, s in zip(sorted(data - set(slot_of), key=str), free):
            slot_of[a] = s
        struct = None
        orig_fact = None
        if bag.facts:
            jf = joint.by_id[bag.facts[0]]
            if isinstance(jf.rel, tuple) and jf.rel[0] == "plus":
                rel = jf.rel[1]
                args = jf.args[:-1]
                struct = (rel, tuple(slot_of[a] for a in args))
                orig_fact = jf.id[1]
        label = alphabet_label({slot_of[a] for a in data}, struct, k)
        if bag.children:
            ln, lb = build(bag.children[0], slot_of)
            rn, rb = build(bag.children[1], slot_of)
            node = Node(label, ln, rn)
            cbag = Bag(gates, [lb, rb])
        else:
            node = Node(label)
            cbag = Bag(gates)
        if orig_fact is not None:
            fact_nodes[orig_fact] = node
            chi[id(node)] = joint.by_id[bag.facts[0]].args[-1][1]
        return node, cbag

    root, croot = build(decomposition.root, {})
    enc = TreeEncoding(root, k, fact_nodes)
    return CCEncoding(enc, None,
                      TreeDecomposition(croot, normalized=True), chi)


def lineage_circuit(automaton, pcc, k=None):
    """Boolean lineage of a query automaton over a pcc-instance: a
    circuit over the pcc inputs evaluating to query truth on each
    possible world, with a bounded-width decomposition."""
    c2, rep, _ = arity_two(pcc.circuit)
    phi2 = {fid: rep[g] for fid, g in pcc.phi.items()}
    pcc2 = PCCInstance(pcc.instance, c2, phi2, pcc.probs)
    joint, decomp = joint_decomposition(pcc2, k)
    cc = cc_encode(pcc2, decomp)
    enc = cc.encoding
    lifted = memoized(lift_boolean(automaton))
    res = bool_provenance_circuit(lifted, enc.root)

    rename = {}
    fixed = {}
    for n in postorder(enc.root):
        gate = res.input_map[id(n)]
        g = cc.chi.get(id(n))
        if g is not None:
            rename[gate] = g
        else:
            fixed[gate] = 1
    inner = fix_inputs(rename_inputs(res.circuit, rename), fixed)
    inner_inputs = set(inner.inputs())

    # keep the lineage gates out of the outer circuit's id space
    def wrap(g):
        return g if g in inner_inputs else ("prov", g)

    inner = Circuit("bool",
                    {wrap(g): (t, tuple(wrap(i) for i in ins))
                     for g, (t, ins) in inner.gates.items()},
                    wrap(inner.output))
    stitched = stitch(c2, inner)

    def conv(bag):
        return Bag({wrap(rename.get(g, g)) for g in bag.dom},
                   [conv(c) for c in bag.children])

    t_inner = TreeDecomposition(conv(res.decomposition.root), normalized=True)
    t_sum = sum_decompositions(cc.circuit_decomposition, t_inner)
    return stitched, t_sum


def _as_automaton(query):
    if isinstance(query, (UCQ, CQ)):
        return compile_bool(query)
    return query


def query_probability_pcc(query, pcc, k=None):
    automaton = _as_automaton(query)
    circuit, decomp = lineage_circuit(automaton, pcc, k)
    return message_passing_prob(circuit, decomp, pcc.probs)


def pcc_worlds(pcc):
    """Testing oracle: (world instance, probability) per input valuation."""
    from .circuits import eval_bool
    from .relational import subinstance

    inputs = sorted(pcc.circuit.inputs(), key=repr)
    out = []
    for bits in itertools.product((0, 1), repeat=len(inputs)):
        nu = dict(zip(inputs, bits))
        w = Fraction(1)
        for g, b in nu.items():
            w *= pcc.probs[g] if b else 1 - pcc.probs[g]
        if not w:
            continue
        val = {}
        for f in pcc.instance.facts:
            sub = Circuit("bool", pcc.circuit.gates, pcc.phi[f.id])
            val[f.id] = eval_bool(sub, nu)
        out.append((subinstance(pcc.instance, val), w))
    return out


# ---------------------------------------------------------------------------
# pc -> pcc


def pc_to_pcc(pc, k=None):
    """Rewrite each fact's formula as a DNF over its satisfying event
    valuations; the cap on distinct events per formula is enforced."""
    gates = {}

    def add(gid, t, ins=()):
        gates[gid] = (t, tuple(ins))
        return gid

    for e in pc.events:
        add(("e", e), "inp")
    neg_built = set()

    def neg(e):
        if e not in neg_built:
            add(("ne", e), "not", (("e", e),))
            neg_built.add(e)
        return ("ne", e)

    phi = {}
    for f in pc.instance.facts:
        formula = pc.conds[f.id]
        events = sorted(formula_events(formula))
        if k is not None and len(events) > k:
            raise ValueError(
                "formula of %s uses %d events, more than the width bound %d"
                % (f.id, len(events), k))
        terms = []
        for bits in itertools.product((0, 1), repeat=len(events)):
            asg = dict(zip(events, bits))
            if not eval_formula(formula, asg):
                continue
            lits = [("e", e) if asg[e] else neg(e) for e in events]
            terms.append(add(("t", f.id, bits), "and", lits))
        phi[f.id] = add(("phi", f.id), "or", terms)
    out = add(("truegate",), "and")
    circuit = Circuit("bool", gates, out)
    return PCCInstance(pc.instance, circuit, phi,
                       {("e", e): p for e, p in pc.events.items()})


def pc_worlds(pc):
    """Testing oracle for pc-instances."""
    from .relational import subinstance

    events = sorted(pc.events)
    out = []
    for bits in itertools.product((0, 1), repeat=len(events)):
        asg = dict(zip(events, bits))
        w = Fraction(1)
        for e, b in asg.items():
            w *= pc.events[e] if b else 1 - pc.events[e]
        if not w:
            continue
        val = {f.id: int(eval_formula(pc.conds[f.id], asg))
               for f in pc.instance.facts}
        out.append((subinstance(pc.instance, val), w))
    return out


# ---------------------------------------------------------------------------
# BID -> pcc


def bid_to_pcc(bid, k=None):
    """Per-block mutually-exclusive selection circuits routed along the
    block's subtree of a normalized decomposition; Pr[g_in(b)] equals
    the cumulative fact mass below b (recorded in invariant_probs)."""
    instance = bid.instance
    decomp = normalize_decomposition(tree_decomposition(instance, k))
    assigned = decomp.assigned_bag()
    bags = decomp.bags()

    gates = {}
    probs = {}
    phi = {}
    invariant_probs = {}

    def add(gid, t, ins=()):
        gates[gid] = (t, tuple(ins))
        return gid

    def add_input(gid, p):
        add(gid, "inp")
        probs[gid] = p
        return gid

    for bi, (block, facts) in enumerate(sorted(
            bid.blocks().items(), key=lambda kv: repr(kv[0]))):
        key_elems = set(block[1])
        in_ta = {id(b) for b in bags if key_elems <= b.dom}
        w = {}
        for f in facts:
            b = assigned[f.id]
            w[id(b)] = w.get(id(b), Fraction(0)) + bid.probs[f.id]
        # cumulative mass bottom-up over the block subtree
        wc = {}
        order = [b for b in bags if id(b) in in_ta]
        for b in reversed(order):  # bags() is top-down (stack order)
            tot = w.get(id(b), Fraction(0))
            for c in b.children:
                tot += wc.get(id(c), Fraction(0))
            wc[id(b)] = tot
        # root = topmost bag (in top-down order) carrying the full mass
        top = None
        total = sum(bid.probs[f.id] for f in facts)
        for b in order:
            if wc[id(b)] == total:
                top = b
                break

        def emit(b, g_in, p_in):
            invariant_probs[g_in] = wc[id(b)]
            h = w.get(id(b), Fraction(0))
            rest = wc[id(b)] - h
            cond = g_in
            if h > 0:
                if rest > 0:
                    gh = add_input(("bid", bi, id(b), "h"), h / wc[id(b)])
                    sel = add(("bid", bi, id(b), "sel"), "and", (gh, g_in))
                    ngh = add(("bid", bi, id(b), "nh"), "not", (gh,))
                    cond = add(("bid", bi, id(b), "rest"), "and", (g_in, ngh))
                else:
                    sel = g_in
                for f in facts:
                    if id(assigned[f.id]) == id(b):
                        phi[f.id] = sel
            if rest > 0:
                kids = [c for c in b.children
                        if wc.get(id(c), Fraction(0)) > 0]
                if len(kids) == 1:
                    emit(kids[0], cond, rest)
                else:
                    wl = wc[id(kids[0])]
                    sw = add_input(("bid", bi, id(b), "sw"), wl / rest)
                    nsw = add(("bid", bi, id(b), "nsw"), "not", (sw,))
                    gl = add(("bid", bi, id(b), "L"), "and", (cond, sw))
                    gr = add(("bid", bi, id(b), "R"), "and", (cond, nsw))
                    emit(kids[0], gl, wl)
                    emit(kids[1], gr, rest - wl)

        if total == 1:
            g_root = add(("bid", bi, "root"), "and")  # constant 1
        else:
            g_root = add_input(("bid", bi, "root"), total)
        emit(top, g_root, total)

    out = add(("truegate",), "and")
    circuit = Circuit("bool", gates, out)
    pcc = PCCInstance(instance, circuit, phi, probs)
    pcc.invariant_probs = invariant_probs
    return pcc


def bid_worlds(bid):
    """Testing oracle: enumerate one choice (or none) per block."""
    blocks = sorted(bid.blocks().items(), key=lambda kv: repr(kv[0]))
    choices = []
    for block, facts in blocks:
        opts = [(None, 1 - sum(bid.probs[f.id] for f in facts))]
        opts += [(f, bid.probs[f.id]) for f in facts]
        choices.append(opts)
    out = []
    for combo in itertools.product(*choices):
        w = Fraction(1)
        present = set()
        for f, p in combo:
            w *= p
            if f is not None:
                present.add(f.id)
        if not w:
            continue
        val = {f.id: int(f.id in present) for f in bid.instance.facts}
        from .relational import subinstance
        out.append((subinstance(bid.instance, val), w))
    return out


def query_probability_bid(query, bid, k=None):
    # k bounds the data decomposition; the joint circuit+data instance
    # is decomposed without a bound (its width is larger but controlled)
    return query_probability_pcc(query, bid_to_pcc(bid, k), None)


# ---------------------------------------------------------------------------
# Counting


def _count_rel(var):
    return ("Cnt", var)


def count_matches(q, instance, k=None):
    """|{a-bar : I |= q(a-bar)}| via the BID reduction: one uniform
    block per free variable, probability times |dom|^{free}."""
    if isinstance(q, CQ):
        q = UCQ((q,))
    free = tuple(q.free)
    dom = instance.domain
    if free and not dom:
        return 0
    sig = dict(instance.signature)
    key_positions = {r: tuple(range(a)) for r, a in sig.items()}
    facts = list(instance.facts)
    probs = {f.id: Fraction(1) for f in instance.facts}
    n = 0
    for x in free:
        rel = _count_rel(x)
        sig[rel] = 1
        key_positions[rel] = ()  # one block for the whole table
        for a in dom:
            n += 1
            fid = ("cnt", n)
            facts.append(Fact(rel, (a,), fid))
            probs[fid] = Fraction(1, len(dom))
    bid = BIDInstance(Instance(sig, facts), key_positions, probs)
    q2 = UCQ(tuple(CQ(d.atoms + tuple(Atom(_count_rel(x), (x,))
                                      for x in free), d.diseqs)
                   for d in q.disjuncts))
    pr = query_probability_bid(q2, bid, k)
    count = pr * Fraction(len(dom)) ** len(free)
    if count.denominator != 1:
        raise AssertionError("count came out non-integral: %s" % count)
    return int(count)


# ---------------------------------------------------------------------------
# JSON


def format_fraction(x):
    x = Fraction(x)
    return "%d/%d" % (x.numerator, x.denominator)


def pc_to_json(pc):
    from .relational import instance_to_json

    out = instance_to_json(pc.instance)
    for entry in out["facts"]:
        entry["cond"] = format_formula(pc.conds[entry["id"]])
    out["events"] = {e: format_fraction(p) for e, p in sorted(pc.events.items())}
    return out


def pc_from_json(data):
    from .relational import instance_from_json

    instance = instance_from_json(data)
    conds = {}
    for entry in data.get("facts", []):
        if "cond" in entry:
            conds[entry["id"]] = parse_formula(entry["cond"])
    events = {e: Fraction(p) for e, p in data.get("events", {}).items()}
    return PCInstance(instance, conds, events)


def bid_to_json(bid):
    from .relational import instance_to_json

    out = instance_to_json(bid.instance)
    for entry in out["facts"]:
        entry["prob"] = format_fraction(bid.probs[entry["id"]])
    out["key_positions"] = {r: list(v)
                            for r, v in sorted(bid.key_positions.items())}
    return out


def bid_from_json(data):
    from .relational import instance_from_json

    instance = instance_from_json(data)
    probs = {}
    for entry in data.get("facts", []):
        probs[entry["id"]] = Fraction(entry["prob"])
    return BIDInstance(instance, data.get("key_positions", {}), probs)


def pcc_to_json(pcc):
    from .circuits import circuit_to_json
    from .relational import instance_to_json

    cjson = circuit_to_json(pcc.circuit)
    idx = {g: i for i, g in enumerate(pcc.circuit.topo_order())}
    return {
        "instance": instance_to_json(pcc.instance),
        "circuit": cjson,
        "phi": [{"fact": fid, "gate": idx[g]} for fid, g in
                sorted(pcc.phi.items(), key=lambda kv: str(kv[0]))],
        "probs": [{"gate": idx[g], "prob": format_fraction(p)}
                  for g, p in sorted(pcc.probs.items(),
                                     key=lambda kv: str(kv[0]))],
    }


def pcc_from_json(data):
    from .circuits import circuit_from_json
    from .relational import instance_from_json

    instance = instance_from_json(data["instance"])
    circuit = circuit_from_json(data["circuit"])
    ids = []
    for i, e in enumerate(data["circuit"]["gates"]):
        ids.append(e.get("name", i) if e["type"] == "inp" else i)
    phi = {e["fact"]: ids[e["gate"]] for e in data["phi"]}
    probs = {ids[e["gate"]]: Fraction(e["prob"]) for e in data["probs"]}
    return PCCInstance(instance, circuit, phi, probs)
