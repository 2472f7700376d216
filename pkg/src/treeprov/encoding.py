"""Tree encodings of treelike instances over the k-fact alphabet.

A k-fact is a pair (dom, struct) where dom is a subset of at most k+1 of
the 2k+2 slot names (here: integers 1..2k+2) and struct is zero or one
fact whose arguments are slots of dom.  A tree encoding is a binary full
tree labeled with k-facts; decoding reads the tree top-down, picking
fresh elements for slots not shared with the parent.
"""

from dataclasses import dataclass

from .relational import Fact, Instance, TreeDecomposition
from .trees import Node, postorder, preorder


@dataclass(frozen=True)
class KFact:
    dom: frozenset
    rel: object = None  # relation name or None
    args: tuple = ()

    def neuter(self):
        return KFact(self.dom)

    def __repr__(self):
        d = ",".join("a%d" % s for s in sorted(self.dom))
        if self.rel is None:
            return "({%s},-)" % d
        return "({%s},%s(%s))" % (d, self.rel,
                                  ",".join("a%d" % s for s in self.args))


def alphabet_label(dom, struct, k):
    """Canonical KFact, validated against the width parameter k."""
    dom = frozenset(dom)
    if len(dom) > k + 1:
        raise ValueError("k-fact domain too large for width %d" % k)
    if any(s < 1 or s > 2 * k + 2 for s in dom):
        raise ValueError("slot outside 1..%d" % (2 * k + 2))
    if struct is None:
        return KFact(dom)
    rel, args = struct
    if not set(args) <= dom:
        raise ValueError("fact arguments outside the label domain")
    return KFact(dom, rel, tuple(args))


class TreeEncoding:
    """Binary full KFact-tree plus the fact-id <-> node bijection."""

    def __init__(self, root, k, fact_nodes=None, node_bag=None):
        self.root = root
        self.k = k
        self.fact_nodes = dict(fact_nodes or {})  # fact id -> Node
        self.node_fact = {id(n): fid for fid, n in self.fact_nodes.items()}
        self.node_bag = node_bag or {}  # id(Node) -> source Bag

    def nodes(self):
        return postorder(self.root)


def encode(instance, decomposition):
    """Tree encoding of a normalized decomposition of the instance.

    Slot choice: shared elements reuse the parent's slots; fresh elements
    take the smallest slots not used by the parent, in sorted element
    order.  The root bag maps its elements to slots 1.. in sorted order.
    """
    if not decomposition.normalized:
        decomposition = _ensure_normalized(decomposition, instance)
    k = max(decomposition.width, 0)

    def label_of(bag, slot_of):
        struct = None
        if bag.facts:
            f = instance.by_id[bag.facts[0]]
            struct = (f.rel, tuple(slot_of[a] for a in f.args))
        return alphabet_label({slot_of[a] for a in bag.dom}, struct, k)

    fact_nodes = {}
    node_bag = {}

    def build(bag, parent_slot_of):
        used = set(parent_slot_of.values())
        slot_of = {a: s for a, s in parent_slot_of.items() if a in bag.dom}
        free = [s for s in range(1, 2 * k + 3) if s not in used]
        fresh = sorted(bag.dom - set(slot_of), key=str)
        for a, s in zip(fresh, free):
            slot_of[a] = s
        if bag.children:
            left = build(bag.children[0], slot_of)
            right = build(bag.children[1], slot_of)
            node = Node(label_of(bag, slot_of), left, right)
        else:
            node = Node(label_of(bag, slot_of))
        if bag.facts:
            fact_nodes[bag.facts[0]] = node
        node_bag[id(node)] = bag
        return node

    root = build(decomposition.root, {})
    return TreeEncoding(root, k, fact_nodes, node_bag)


def _ensure_normalized(decomposition, instance):
    from .relational import normalize_decomposition

    if decomposition.instance is None:
        decomposition = TreeDecomposition(decomposition.root, instance)
    return normalize_decomposition(decomposition)


INVALID = None  # decode returns None for invalid encodings


def decode(root):
    """Instance decoded from a KFact-tree, or None if some fact is
    created twice.  Fresh elements are named e1, e2, ... in preorder."""
    facts = []
    seen = set()
    counter = [0]

    def fresh():
        counter[0] += 1
        return "e%d" % counter[0]

    def walk(node, parent_map):
        label = node.label
        elem_of = {}
        for s in sorted(label.dom):
            if s in parent_map:
                elem_of[s] = parent_map[s]
            else:
                elem_of[s] = fresh()
        if label.rel is not None:
            key = (label.rel, tuple(elem_of[s] for s in label.args))
            if key in seen:
                return False
            seen.add(key)
            facts.append(key)
        if not node.is_leaf():
            if not walk(node.left, elem_of):
                return False
            if not walk(node.right, elem_of):
                return False
        return True

    if not walk(root, {}):
        return INVALID
    signature = {}
    for rel, args in facts:
        signature[rel] = len(args)
    return Instance(signature,
                    [Fact(rel, args, "F%d" % (i + 1))
                     for i, (rel, args) in enumerate(facts)])


def decode_bag(root):
    """Bag instance (fact key -> multiplicity) of an annotated tree whose
    labels are (KFact, i) pairs; None if a fact node repeats a fact."""
    bag = {}
    seen = set()
    counter = [0]

    def fresh():
        counter[0] += 1
        return "e%d" % counter[0]

    def walk(node, parent_map):
        label, ann = node.label
        elem_of = {}
        for s in sorted(label.dom):
            elem_of[s] = parent_map.get(s) or fresh()
        if label.rel is not None:
            key = (label.rel, tuple(elem_of[s] for s in label.args))
            if key in seen:
                return False
            seen.add(key)
            if ann > 0:
                bag[key] = ann
        if not node.is_leaf():
            if not walk(node.left, elem_of):
                return False
            if not walk(node.right, elem_of):
                return False
        return True

    if not walk(root, {}):
        return INVALID
    return bag


def annotate(encoding, valuation, default=1):
    """Tree with labels (KFact, i): fact nodes get the valuation of their
    fact, all other nodes get the default annotation."""
    node_fact = encoding.node_fact

    def ann(node):
        fid = node_fact.get(id(node))
        return valuation[fid] if fid is not None else default

    return annotate_tree(encoding.root, ann)


def annotate_tree(root, ann):
    """New tree with labels (old_label, ann(node))."""
    rebuilt = {}
    for n in postorder(root):
        lab = (n.label, ann(n))
        if n.is_leaf():
            rebuilt[id(n)] = Node(lab)
        else:
            rebuilt[id(n)] = Node(lab, rebuilt[id(n.left)], rebuilt[id(n.right)])
    return rebuilt[id(root)]


def teval(root):
    """Strip a Boolean annotation: (tau,1) -> tau, (tau,0) -> neuter(tau)."""
    rebuilt = {}
    for n in postorder(root):
        label, b = n.label
        lab = label if b else label.neuter()
        if n.is_leaf():
            rebuilt[id(n)] = Node(lab)
        else:
            rebuilt[id(n)] = Node(lab, rebuilt[id(n.left)], rebuilt[id(n.right)])
    return rebuilt[id(root)]


def teval_label(label, b):
    return label if b else label.neuter()


def kfact_labels(signature, k):
    """The full (finite) k-fact alphabet for a signature."""
    import itertools

    slots = range(1, 2 * k + 3)
    out = []
    for size in range(0, k + 2):
        for dom in itertools.combinations(slots, size):
            domset = frozenset(dom)
            out.append(KFact(domset))
            for rel in sorted(signature, key=str):
                arity = signature[rel]
                for args in itertools.product(sorted(domset), repeat=arity):
                    out.append(KFact(domset, rel, args))
    return out


# ---------------------------------------------------------------------------
# JSON

def label_to_json(label):
    out = {"dom": sorted(label.dom)}
    if label.rel is not None:
        out["fact"] = {"rel": label.rel, "args": list(label.args)}
    return out


def label_from_json(data):
    struct = None
    if "fact" in data:
        struct = (data["fact"]["rel"], tuple(data["fact"]["args"]))
    dom = frozenset(data["dom"])
    if struct is None:
        return KFact(dom)
    return KFact(dom, struct[0], struct[1])


def encoding_to_json(encoding):
    node_fact = encoding.node_fact

    def conv(node):
        out = label_to_json(node.label)
        fid = node_fact.get(id(node))
        if fid is not None:
            out["fact_id"] = fid
        if not node.is_leaf():
            out["children"] = [conv(node.left), conv(node.right)]
        return out

    return {"k": encoding.k, "tree": conv(encoding.root)}


def encoding_from_json(data):
    fact_nodes = {}

    def conv(d):
        label = label_from_json(d)
        kids = d.get("children")
        if kids:
            node = Node(label, conv(kids[0]), conv(kids[1]))
        else:
            node = Node(label)
        if "fact_id" in d:
            fact_nodes[d["fact_id"]] = node
        return node

    root = conv(data["tree"])
    return TreeEncoding(root, data["k"], fact_nodes)
