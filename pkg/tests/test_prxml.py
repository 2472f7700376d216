import random
from fractions import Fraction

import pytest

from treeprov.prob import pc_to_pcc, pc_width
from treeprov.prxml import (BOT, PrXMLDoc, PrXMLNode, doc_canon,
                            doc_from_json, doc_nodes, doc_to_json,
                            fie_to_pc, fie_worlds, lcrs, muxind_to_binary,
                            muxind_to_fie, muxind_worlds,
                            prxml_query_probability, scope_width, unlcrs,
                            xml_relational_encoding)
from treeprov.relational import tree_decomposition
from treeprov.ucq import parse_ucq

from genutil import rand_doc


def test_doc_validation():
    with pytest.raises(ValueError):
        PrXMLDoc(PrXMLNode("m", "mux"))
    bad_mux = PrXMLNode("r", "regular",
                        [(None, PrXMLNode("m", "mux",
                                          [(Fraction(3, 4), PrXMLNode("a")),
                                           (Fraction(1, 2), PrXMLNode("b"))]))])
    with pytest.raises(ValueError):
        PrXMLDoc(bad_mux)
    bad_fie = PrXMLNode("r", "regular",
                        [(None, PrXMLNode("f", "fie",
                                          [(("var", "e"), PrXMLNode("a"))]))])
    with pytest.raises(ValueError):
        PrXMLDoc(bad_fie)  # event e undeclared
    PrXMLDoc(bad_fie, {"e": Fraction(1, 2)})  # fine when declared


def test_lcrs_roundtrip():
    rng = random.Random(91)
    for _ in range(30):
        doc = rand_doc(rng)
        back = unlcrs(lcrs(doc.root))
        assert doc_canon(back) == doc_canon(doc.root)


def test_lcrs_binary_full_with_bot_pads():
    rng = random.Random(92)
    doc = rand_doc(rng)
    t = lcrs(doc.root)
    stack = [t]
    n_source = len(doc_nodes(doc.root))
    n_labeled = 0
    while stack:
        n = stack.pop()
        assert (n.left is None) == (n.right is None)
        if n.label is None:
            assert n.is_leaf()
        else:
            n_labeled += 1
        if not n.is_leaf():
            stack.extend((n.left, n.right))
    assert n_labeled == n_source


def test_xml_relational_encoding():
    doc = PrXMLDoc(PrXMLNode("r", "regular",
                             [(None, PrXMLNode("a")),
                              (None, PrXMLNode("b",
                                               children=[(None,
                                                          PrXMLNode("a"))]))]))
    inst = xml_relational_encoding(doc.root)
    keys = inst.fact_keys()
    assert ("P_r", ("n1",)) in keys
    assert ("FC", ("n1", "n2")) in keys
    assert ("NS", ("n2", "n3")) in keys
    assert ("FC", ("n3", "n4")) in keys
    assert ("P_a", ("n2",)) in keys and ("P_a", ("n4",)) in keys
    # sibling/child chains keep the width at 1
    assert tree_decomposition(inst).width == 1


def test_muxind_to_binary_preserves_distribution():
    rng = random.Random(93)
    for _ in range(40):
        doc = rand_doc(rng)
        binary = muxind_to_binary(doc)
        assert muxind_worlds(binary) == muxind_worlds(doc)


def test_binary_form_shape():
    rng = random.Random(94)
    for _ in range(30):
        binary = muxind_to_binary(rand_doc(rng))
        for n in doc_nodes(binary.root):
            assert len(n.children) in (0, 2)
            if n.kind == "mux":
                assert sum(p for p, _ in n.children) == 1


def test_muxind_to_fie_preserves_distribution():
    rng = random.Random(95)
    for _ in range(30):
        binary = muxind_to_binary(rand_doc(rng))
        fie = muxind_to_fie(binary)
        assert fie_worlds(fie) == muxind_worlds(binary)


def test_fie_scope_width_at_most_one():
    rng = random.Random(96)
    for _ in range(30):
        fie = muxind_to_fie(muxind_to_binary(rand_doc(rng)))
        assert scope_width(fie) <= 1


def test_fie_to_pc_width_bounded():
    """pc-encoding width stays small when event scopes are small."""
    rng = random.Random(97)
    for _ in range(15):
        fie = muxind_to_fie(muxind_to_binary(rand_doc(rng)))
        pc = fie_to_pc(fie)
        w = pc_width(pc)
        assert w <= scope_width(fie) + 2


def test_fie_to_pc_worlds():
    """Possible worlds of the pc-instance induce the same document
    distribution: a P-fact holds iff its incoming fie edge is true."""
    rng = random.Random(98)
    from treeprov.prob import pc_worlds
    for _ in range(10):
        fie = muxind_to_fie(muxind_to_binary(rand_doc(rng, max_choices=4)))
        pc = fie_to_pc(fie)
        # the marginal probability of each conditioned fact must equal the
        # probability that its formula holds
        import itertools
        events = sorted(pc.events)
        for fid, cond in pc.conds.items():
            want = Fraction(0)
            for bits in itertools.product((0, 1), repeat=len(events)):
                nu = dict(zip(events, bits))
                w = Fraction(1)
                for e, b in nu.items():
                    w *= pc.events[e] if b else 1 - pc.events[e]
                from treeprov.prob import eval_formula
                if eval_formula(cond, nu):
                    want += w
            got = sum((w for inst, w in pc_worlds(pc)
                       if fid in inst.by_id), Fraction(0))
            assert got == want


def test_prxml_query_probability():
    # root with one ind child labeled a, kept with probability p:
    # Pr[exists an a-node] = p
    p = Fraction(2, 7)
    doc = PrXMLDoc(PrXMLNode("r", "regular",
                             [(None, PrXMLNode("ind", "ind",
                                               [(p, PrXMLNode("a"))]))]))
    q = parse_ucq("P_a(x)")
    assert prxml_query_probability(q, doc) == p


def test_prxml_query_probability_mux():
    # mux child: a with 3/10, b with 5/10; Pr[some b node] = 1/2
    doc = PrXMLDoc(PrXMLNode("r", "regular",
                             [(None, PrXMLNode("mux", "mux",
                                               [(Fraction(3, 10),
                                                 PrXMLNode("a")),
                                                (Fraction(5, 10),
                                                 PrXMLNode("b"))]))]))
    assert prxml_query_probability(parse_ucq("P_a(x)"), doc) == \
        Fraction(3, 10)


def test_doc_json_roundtrip():
    rng = random.Random(99)
    for _ in range(10):
        doc = rand_doc(rng)
        back = doc_from_json(doc_to_json(doc))
        assert doc_canon(back.root) == doc_canon(doc.root)
        fie = muxind_to_fie(muxind_to_binary(doc))
        back2 = doc_from_json(doc_to_json(fie))
        assert back2.events == fie.events
        assert doc_canon(back2.root) == doc_canon(fie.root)
