import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from equix.query import (AndMatch, ConcreteQueryNode, NotMatch, PhraseMatch,
                         QueryFormatError, TRUE, WordMatch, complement,
                         describable_by, eval_matcher, parse_query,
                         parse_query_document, serialize_query,
                         serialize_query_document, translate,
                         validate_query_against_dtd)
from equix.synth import random_document, random_matcher, random_query_for


def test_eval_matcher_examples():
    wild_west = AndMatch((WordMatch("wild"), WordMatch("west")))
    assert eval_matcher(wild_west, "the Wild West rides")
    assert not eval_matcher(wild_west, "the wild north")
    assert eval_matcher(TRUE, "")
    assert not eval_matcher(NotMatch(WordMatch("villain")), "villain 436 Jack Robinson")


def test_word_and_phrase_token_boundaries():
    assert not eval_matcher(WordMatch("wild"), "wilderness")
    assert eval_matcher(PhraseMatch("wild west"), "a Wild  West story")
    assert not eval_matcher(PhraseMatch("wild west"), "wild western tale")
    assert not eval_matcher(PhraseMatch("wild west"), "west wild")


def test_complement():
    assert eval_matcher(complement(TRUE), "anything") is False
    m = AndMatch((WordMatch("a"), NotMatch(WordMatch("b"))))
    assert complement(complement(m)) == m
    assert not eval_matcher(complement(WordMatch("redford")), "stars Redford")


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**9), text=st.text(max_size=40))
def test_complement_is_pointwise_negation(seed, text):
    m = random_matcher(random.Random(seed), depth=3)
    assert eval_matcher(complement(m), text) == (not eval_matcher(m, text))
    assert complement(complement(m)) == m


def test_translate_single_node():
    aq = translate(ConcreteQueryNode(label="movieInfo", output=True))
    assert len(aq) == 1
    assert aq.ops == ("and",)
    assert aq.output == {0}
    assert aq.quantifiers == (None,)


def test_translate_paper_query(paper_abstract):
    aq = paper_abstract
    assert aq.labels == ("movieInfo", "movie", "descr", "title",
                         "character", "role", "star", "actor")
    by = {label: i for i, label in enumerate(aq.labels)}
    # the negated existential became a universal edge into an or-node
    assert aq.quantifiers[by["character"]] == "forall"
    assert aq.ops[by["character"]] == "or"
    assert aq.matchers[by["character"]] == NotMatch(TRUE)
    # negation kept propagating: leaf edges flipped, matchers complemented
    assert aq.quantifiers[by["role"]] == "forall"
    assert aq.matchers[by["role"]] == NotMatch(WordMatch("villain"))
    assert aq.quantifiers[by["star"]] == "forall"
    assert aq.matchers[by["star"]] == NotMatch(WordMatch("redford"))
    # the non-negated side is untouched
    assert aq.quantifiers[by["movie"]] == "exists"
    assert aq.ops[by["movie"]] == "and"
    assert aq.output == {by["descr"], by["title"]}


def test_translate_not_forall_pushes_negation():
    cq = ConcreteQueryNode(label="a", children=[
        ConcreteQueryNode(label="x", quantifier="not_forall",
                          matcher=WordMatch("w"), children=[
                              ConcreteQueryNode(label="y", quantifier="exists",
                                                matcher=WordMatch("v"))])])
    aq = translate(cq)
    assert aq.quantifiers[1] == "exists"      # not-forall edge became existential
    assert aq.matchers[1] == NotMatch(WordMatch("w"))
    assert aq.ops[1] == "or"
    assert aq.quantifiers[2] == "forall"      # negation continued through the edge
    assert aq.matchers[2] == NotMatch(WordMatch("v"))


def test_translate_uses_only_positive_quantifiers():
    rng = random.Random(5)
    for _ in range(50):
        doc = random_document(rng)
        cq = random_query_for(rng, doc, quantifiers=(
            "exists", "not_exists", "forall", "not_forall"))
        aq = translate(cq)
        assert all(qt in (None, "exists", "forall") for qt in aq.quantifiers)
        assert all(op in ("and", "or") for op in aq.ops)


def test_translate_is_deterministic(paper_query):
    assert translate(paper_query) == translate(paper_query)


def test_parse_minimal_query():
    cq = parse_query('{"element": "movieInfo"}')
    assert cq.label == "movieInfo"
    assert cq.matcher == TRUE
    assert not cq.output and not cq.children


def test_parse_serialize_round_trip(paper_query):
    again = parse_query(serialize_query(paper_query))
    assert again == paper_query


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_round_trip_random_queries(seed):
    rng = random.Random(seed)
    doc = random_document(rng)
    cq = random_query_for(rng, doc, quantifiers=(
        "exists", "not_exists", "forall", "not_forall"))
    assert parse_query(serialize_query(cq)) == cq


def test_parse_aggregation_block():
    cq = parse_query(json.dumps({
        "element": "movieInfo",
        "children": [{
            "element": "movie", "quantifier": "exists",
            "agg": [{"fn": "count"}],
            "aggConstraints": [{"fn": "count", "cmp": ">=", "value": 2}],
        }],
    }))
    movie = cq.children[0]
    assert movie.aggregates == ("count",)
    atom = movie.agg_constraints[0]
    assert (atom.fn, atom.cmp, atom.value) == ("count", ">=", 2.0)


def test_parse_errors():
    with pytest.raises(QueryFormatError):
        parse_query('{"element": "a", "children": [{"element": "b", "quantifier": "some"}]}')
    with pytest.raises(QueryFormatError):
        parse_query('{"element": "a", "constraint": {"op": "fuzzy"}}')
    with pytest.raises(QueryFormatError):
        parse_query('not json at all')
    with pytest.raises(QueryFormatError):
        parse_query('{"noelement": true}')


def test_query_document_round_trip(paper_query):
    from equix.query import QueryDocument
    qd = QueryDocument(query=paper_query, catalog="movies",
                       mode="descendant", ontology=frozenset({"movie"}))
    again = parse_query_document(serialize_query_document(qd))
    assert again == qd


def test_validate_query_against_dtd(paper_query, movie_dtd):
    assert validate_query_against_dtd(paper_query, movie_dtd) == []

    bad_child = ConcreteQueryNode(label="movieInfo", children=[
        ConcreteQueryNode(label="movie", quantifier="exists", children=[
            ConcreteQueryNode(label="director", quantifier="exists")])])
    diags = validate_query_against_dtd(bad_child, movie_dtd)
    assert any("director" in d for d in diags)

    wrong_root = ConcreteQueryNode(label="movie")
    diags = validate_query_against_dtd(wrong_root, movie_dtd)
    assert any("root" in d for d in diags)


def test_validate_attribute_edges(movie_dtd):
    q = ConcreteQueryNode(label="movieInfo", children=[
        ConcreteQueryNode(label="movie", quantifier="exists", children=[
            ConcreteQueryNode(label="character", quantifier="exists", children=[
                ConcreteQueryNode(label="role", quantifier="exists")])])])
    assert validate_query_against_dtd(q, movie_dtd) == []


def test_describable_by(movie_doc):
    assert describable_by(movie_doc, {"movie", "director"})
    assert not describable_by(movie_doc, set())
    labels = {movie_doc.nodes[n].label for n in movie_doc.complex_ids()}
    assert describable_by(movie_doc, labels)
    # attribute names count as well
    assert describable_by(movie_doc, {"role"})
