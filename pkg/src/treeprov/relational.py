"""Relational instances, fact valuations, and tree decompositions."""

import json
from dataclasses import dataclass

from .errors import NoDecomposition


@dataclass(frozen=True)
class Fact:
    rel: str
    args: tuple
    id: str

    def key(self):
        return (self.rel, self.args)


class Instance:
    """A finite set of ground facts over a signature (set semantics)."""

    def __init__(self, signature, facts):
        self.signature = dict(signature)
        for name, arity in self.signature.items():
            if arity < 1:
                raise ValueError("arity must be positive: %s" % name)
        seen = set()
        out = []
        for f in facts:
            if f.rel not in self.signature:
                raise ValueError("unknown relation %s" % f.rel)
            if len(f.args) != self.signature[f.rel]:
                raise ValueError("arity mismatch for %s" % f.rel)
            if f.key() in seen:
                raise ValueError("duplicate fact %s%s" % (f.rel, f.args))
            seen.add(f.key())
            out.append(f)
        self.facts = tuple(out)
        self.by_id = {f.id: f for f in self.facts}
        if len(self.by_id) != len(self.facts):
            raise ValueError("duplicate fact ids")
        self.by_rel = {}
        for f in self.facts:
            self.by_rel.setdefault(f.rel, []).append(f)

    @property
    def domain(self):
        out = []
        seen = set()
        for f in self.facts:
            for a in f.args:
                if a not in seen:
                    seen.add(a)
                    out.append(a)
        return out

    def fact_keys(self):
        return {f.key() for f in self.facts}

    def __len__(self):
        return len(self.facts)

    def __repr__(self):
        return "Instance(%d facts)" % len(self.facts)


def make_instance(signature, triples):
    """Convenience: triples are (rel, args) pairs; ids assigned F1, F2, ..."""
    facts = [Fact(rel, tuple(args), "F%d" % (i + 1))
             for i, (rel, args) in enumerate(triples)]
    return Instance(signature, facts)


def subinstance(instance, valuation):
    """Keep the facts mapped to 1 by the (total) valuation."""
    for f in instance.facts:
        if f.id not in valuation:
            raise ValueError("partial valuation: missing %s" % f.id)
    kept = [f for f in instance.facts if valuation[f.id] == 1]
    return Instance(instance.signature, kept)


def instances_isomorphic(i1, i2):
    """Isomorphism up to renaming of domain elements (backtracking search)."""
    if len(i1.facts) != len(i2.facts):
        return False
    d1, d2 = i1.domain, i2.domain
    if len(d1) != len(d2):
        return False

    def profile(inst):
        prof = {}
        for f in inst.facts:
            for pos, a in enumerate(f.args):
                prof.setdefault(a, []).append((f.rel, pos))
        return {a: tuple(sorted(v)) for a, v in prof.items()}

    p1, p2 = profile(i1), profile(i2)
    if sorted(p1.values()) != sorted(p2.values()):
        return False
    keys2 = i2.fact_keys()

    def extend(idx, mapping, used):
        if idx == len(d1):
            mapped = {(f.rel, tuple(mapping[a] for a in f.args))
                      for f in i1.facts}
            return mapped == keys2
        a = d1[idx]
        for b in d2:
            if b in used or p1[a] != p2[b]:
                continue
            mapping[a] = b
            used.add(b)
            if extend(idx + 1, mapping, used):
                return True
            del mapping[a]
            used.remove(b)
        return False

    return extend(0, {}, set())


# ---------------------------------------------------------------------------
# Tree decompositions


class Bag:
    """One bag of a decomposition; holds domain elements and assigned facts."""

    def __init__(self, dom, children=(), facts=()):
        self.dom = frozenset(dom)
        self.children = list(children)
        self.facts = tuple(facts)

    def __repr__(self):
        return "Bag(%s)" % sorted(self.dom, key=str)


class TreeDecomposition:
    def __init__(self, root, instance=None, normalized=False):
        self.root = root
        self.instance = instance
        self.normalized = normalized

    def bags(self):
        out = []
        stack = [self.root]
        while stack:
            b = stack.pop()
            out.append(b)
            stack.extend(b.children)
        return out

    @property
    def width(self):
        return max(len(b.dom) for b in self.bags()) - 1

    def bag_parents(self):
        par = {}
        for b in self.bags():
            for c in b.children:
                par[id(c)] = b
        return par

    def assigned_bag(self):
        """Map fact id -> bag (normalized decompositions)."""
        out = {}
        for b in self.bags():
            for fid in b.facts:
                out[fid] = b
        return out


def primal_graph(instance):
    """Vertices = domain elements; edges between co-occurring elements."""
    verts = instance.domain
    adj = {v: set() for v in verts}
    for f in instance.facts:
        args = set(f.args)
        for a in args:
            for b in args:
                if a != b:
                    adj[a].add(b)
    return verts, adj


def _exact_elimination_order(verts, adj):
    """Optimal-width elimination ordering by DP over vertex subsets."""
    n = len(verts)
    index = {v: i for i, v in enumerate(verts)}
    nbr = [0] * n
    for v in verts:
        for u in adj[v]:
            nbr[index[v]] |= 1 << index[u]
    full = (1 << n) - 1
    INF = n + 1

    def q_count(s_mask, v):
        # vertices outside s_mask (and != v) reachable from v through s_mask
        seen = 1 << v
        stack = [v]
        out = 0
        while stack:
            u = stack.pop()
            m = nbr[u] & ~seen
            seen |= m
            rest = m
            while rest:
                low = rest & -rest
                rest ^= low
                w = low.bit_length() - 1
                if (s_mask >> w) & 1:
                    stack.append(w)
                else:
                    out |= low
        return bin(out).count("1")

    best = {0: -1}
    choice = {}
    # process subsets in increasing popcount
    by_count = [[] for _ in range(n + 1)]
    for s in range(1 << n):
        by_count[bin(s).count("1")].append(s)
    for cnt in range(1, n + 1):
        for s in by_count[cnt]:
            val = INF
            pick = -1
            rest = s
            while rest:
                low = rest & -rest
                rest ^= low
                v = low.bit_length() - 1
                sub = s ^ low
                cand = max(best[sub], q_count(sub, v))
                if cand < val:
                    val = cand
                    pick = v
            best[s] = val
            choice[s] = pick
    order_rev = []
    s = full
    while s:
        v = choice[s]
        order_rev.append(verts[v])
        s ^= 1 << v
    return list(reversed(order_rev)), best[full]


def _min_fill_order(verts, adj):
    """Min-fill heuristic elimination ordering."""
    adj = {v: set(adj[v]) for v in verts}
    remaining = set(verts)
    order = []
    width = 0
    while remaining:
        best_v, best_fill = None, None
        for v in sorted(remaining, key=str):
            nb = adj[v] & remaining
            fill = 0
            nb_list = sorted(nb, key=str)
            for i, a in enumerate(nb_list):
                for b in nb_list[i + 1:]:
                    if b not in adj[a]:
                        fill += 1
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
        nb = adj[best_v] & remaining
        width = max(width, len(nb))
        for a in nb:
            for b in nb:
                if a != b:
                    adj[a].add(b)
        remaining.remove(best_v)
        order.append(best_v)
    return order, width


def _decomposition_from_order(verts, adj, order, instance):
    """Standard bag construction along an elimination ordering."""
    if not verts:
        return TreeDecomposition(Bag(frozenset()), instance)
    adj = {v: set(adj[v]) for v in verts}
    pos = {v: i for i, v in enumerate(order)}
    bags = []
    later_nbrs = []
    remaining = set(verts)
    for v in order:
        nb = adj[v] & remaining - {v}
        bags.append(Bag({v} | nb))
        later_nbrs.append(nb)
        for a in nb:
            for b in nb:
                if a != b:
                    adj[a].add(b)
        remaining.remove(v)
    # attach each bag to the bag of its earliest-eliminated later neighbor
    roots = []
    for i, nb in enumerate(later_nbrs):
        if nb:
            j = min(pos[u] for u in nb)
            bags[j].children.append(bags[i])
        else:
            roots.append(bags[i])
    root = roots[-1]
    for r in roots[:-1]:
        root.children.append(r)
    return TreeDecomposition(root, instance)


EXACT_LIMIT = 14


def tree_decomposition(instance, k=None):
    """Width-minimal (exact for small domains, min-fill otherwise)
    decomposition; NoDecomposition if the width bound k is exceeded."""
    if k is not None and k < 1:
        raise ValueError("width bound must be >= 1")
    verts, adj = primal_graph(instance)
    if not verts:
        return TreeDecomposition(Bag(frozenset()), instance)
    if len(verts) <= EXACT_LIMIT:
        order, width = _exact_elimination_order(verts, adj)
    else:
        order, width = _min_fill_order(verts, adj)
    if k is not None and width > k:
        raise NoDecomposition("width %d exceeds bound %d" % (width, k))
    return _decomposition_from_order(verts, adj, order, instance)


def check_decomposition(instance, decomposition):
    """Connectivity + coverage + assigned bags cover their facts."""
    bags = decomposition.bags()
    parent = decomposition.bag_parents()
    elems = set()
    for b in bags:
        elems |= b.dom
    for a in elems:
        containing = [b for b in bags if a in b.dom]
        edges = sum(1 for b in containing
                    if id(b) in parent and a in parent[id(b)].dom)
        if len(containing) - edges != 1:
            return False
    for f in instance.facts:
        if not any(set(f.args) <= b.dom for b in bags):
            return False
    for b in bags:
        for fid in b.facts:
            f = instance.by_id.get(fid)
            if f is None or not set(f.args) <= b.dom:
                return False
    return True


def normalize_decomposition(decomposition):
    """Binary full tree, at most one assigned fact per bag, same width.

    Each fact is assigned to its topmost covering bag, then every bag is
    expanded into a chain with one fact per node; fan-out is binarized
    through copies of the bag and empty-domain padding leaves.
    """
    instance = decomposition.instance
    if instance is None:
        raise ValueError("decomposition has no attached instance")
    # topmost (minimum depth, first in BFS order) covering bag per fact
    depth = {id(decomposition.root): 0}
    bfs = [decomposition.root]
    i = 0
    while i < len(bfs):
        b = bfs[i]
        i += 1
        for c in b.children:
            depth[id(c)] = depth[id(b)] + 1
            bfs.append(c)
    assigned = {id(b): [] for b in bfs}
    for f in instance.facts:
        target = None
        for b in bfs:  # BFS order: first hit is topmost
            if set(f.args) <= b.dom:
                target = b
                break
        if target is None:
            raise ValueError("decomposition does not cover %s" % f.id)
        assigned[id(target)].append(f.id)

    def pad():
        return Bag(frozenset())

    def binarize_children(dom, kids):
        """Attach a list of built subtrees below a chain of dom-copies."""
        if len(kids) <= 2:
            return list(kids)
        helper = Bag(dom, binarize_children(dom, kids[1:]))
        return [kids[0], helper]

    def build(bag):
        kids = [build(c) for c in bag.children]
        kids = binarize_children(bag.dom, kids)
        if len(kids) == 1:
            kids = [kids[0], pad()]
        facts = assigned[id(bag)]
        chain_facts = facts if facts else [None]
        # bottom of the chain carries the children
        node = None
        for fid in reversed(chain_facts):
            fs = (fid,) if fid is not None else ()
            if node is None:
                node = Bag(bag.dom, kids, fs)
            else:
                node = Bag(bag.dom, [node, pad()], fs)
        return node

    root = build(decomposition.root)
    return TreeDecomposition(root, instance, normalized=True)


# ---------------------------------------------------------------------------
# JSON formats


def instance_to_json(instance):
    return {
        "signature": dict(instance.signature),
        "facts": [{"rel": f.rel, "args": list(f.args), "id": f.id}
                  for f in instance.facts],
    }


def instance_from_json(data):
    facts = []
    for i, f in enumerate(data.get("facts", [])):
        facts.append(Fact(f["rel"], tuple(f["args"]),
                          f.get("id", "F%d" % (i + 1))))
    return Instance(data["signature"], facts)


def load_instance(path):
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def decomposition_to_json(decomposition):
    def conv(bag):
        out = {"dom": sorted(bag.dom, key=str)}
        if bag.facts:
            out["facts"] = list(bag.facts)
        if bag.children:
            out["children"] = [conv(c) for c in bag.children]
        return out

    return conv(decomposition.root)


def decomposition_from_json(data, instance=None):
    def conv(node):
        return Bag(node["dom"],
                   [conv(c) for c in node.get("children", [])],
                   tuple(node.get("facts", [])))

    return TreeDecomposition(conv(data), instance)
