import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from equix.dtd import (ANY, EMPTY, EMPTY_SYM, PCDATA, AttDef, Choice, Dtd,
                       DtdParseError, ElementRef, Opt, Plus, Seq, Star,
                       conforms, content_model_matches, dtd_descendant,
                       dtd_size, element_refs, parse_dtd, serialize_dtd,
                       strictly_conforms, validate_document)
from equix.synth import random_dtd
from equix.xmlmodel import parse_document

from oracles import derivative_matches


def test_parse_movie_dtd(movie_dtd):
    assert len(movie_dtd.elements) == 7
    assert movie_dtd.root_element_name == "movieInfo"
    assert movie_dtd.elements["movie"] == Seq(
        (ElementRef("descr"), ElementRef("title"), Plus(ElementRef("character"))))
    assert movie_dtd.elements["character"] == EMPTY
    assert movie_dtd.elements["descr"] == PCDATA
    assert movie_dtd.attlists["character"] == [
        AttDef("role", "CDATA", True), AttDef("star", "IDREF", True)]


def test_parse_single_empty_element():
    d = parse_dtd("<!ELEMENT a EMPTY>")
    assert d.elements == {"a": EMPTY}
    assert d.root_element_name == "a"


def test_parse_errors():
    with pytest.raises(DtdParseError):
        parse_dtd("<!ELEMENT a (b)>")  # dangling reference
    with pytest.raises(DtdParseError):
        parse_dtd("<!ELEMENT a EMPTY><!ELEMENT a EMPTY>")  # duplicate
    with pytest.raises(DtdParseError):
        parse_dtd("<!ELEMENT a EMPTY><!ATTLIST a k NMTOKEN #REQUIRED>")
    with pytest.raises(DtdParseError):
        parse_dtd("<!ELEMENT a EMPTY><!ATTLIST a k (x|y) #REQUIRED>")
    with pytest.raises(DtdParseError) as err:
        parse_dtd("<!ELEMENT a\n  (#GARBAGE)>")
    assert err.value.line == 2


def test_mixed_content_validates_as_any():
    d = parse_dtd("<!ELEMENT a (#PCDATA|b)*><!ELEMENT b EMPTY>")
    assert d.elements["a"] == ANY
    doc = parse_document("<a>text<b/>more</a>")
    assert conforms(doc, d)


def test_content_model_matches_movie(movie_dtd):
    movie = movie_dtd.elements["movie"]
    assert content_model_matches(movie, ["descr", "title", "character", "character"])
    assert content_model_matches(movie, ["descr", "title", "character"])
    assert not content_model_matches(movie, ["descr", "title"])  # + needs one
    assert not content_model_matches(movie, ["title", "descr", "character"])
    assert content_model_matches(EMPTY, [])
    assert not content_model_matches(EMPTY, ["x"])
    assert not content_model_matches(EMPTY, [], has_text=True)
    assert not content_model_matches(Plus(ElementRef("character")), [])
    assert content_model_matches(PCDATA, [], has_text=True)
    assert not content_model_matches(PCDATA, ["x"])
    assert content_model_matches(ANY, ["x", "y"], has_text=True)


def test_content_model_rejects_placeholder():
    with pytest.raises(ValueError):
        content_model_matches(EMPTY_SYM, [])


def _random_content(rng: random.Random, depth: int):
    names = ("a", "b", "c")
    if depth == 0 or rng.random() < 0.3:
        return ElementRef(rng.choice(names))
    roll = rng.random()
    if roll < 0.2:
        return Opt(_random_content(rng, depth - 1))
    if roll < 0.4:
        return Star(_random_content(rng, depth - 1))
    if roll < 0.55:
        return Plus(_random_content(rng, depth - 1))
    items = tuple(_random_content(rng, depth - 1) for _ in range(rng.randint(2, 3)))
    return Seq(items) if roll < 0.8 else Choice(items)


def test_nfa_agrees_with_derivative_oracle_exhaustively():
    """Every child sequence of length <= 5 over three names, against a batch
    of random content models plus the movie models."""
    rng = random.Random(7)
    models = [_random_content(rng, 3) for _ in range(120)]
    movie = parse_dtd(
        "<!ELEMENT movieInfo (movie+,actor+)><!ELEMENT movie EMPTY><!ELEMENT actor EMPTY>")
    models.append(movie.elements["movieInfo"])
    sequences = [seq for k in range(6)
                 for seq in itertools.product("abc", repeat=k)]
    for cd in models:
        for seq in sequences:
            assert content_model_matches(cd, list(seq)) == derivative_matches(cd, seq), \
                f"disagreement on {cd} vs {seq}"


def test_conformance_fixture(movie_doc, movie_dtd):
    assert strictly_conforms(movie_doc, movie_dtd)
    assert conforms(movie_doc, movie_dtd)


def test_strict_requires_root_label(movie_dtd):
    doc = parse_document("<movie><descr>d</descr><title>t</title>"
                         "<character role='r' star='s'/></movie>")
    # conforms to the element rules it uses, but the root label is wrong
    assert not strictly_conforms(doc, movie_dtd)


def test_conformance_violations(movie_dtd):
    missing_role = parse_document(
        "<movieInfo><movie><descr>d</descr><title>t</title>"
        "<character star='436'/></movie>"
        "<actor id='436'><name>n</name></actor></movieInfo>", movie_dtd)
    diags = validate_document(missing_role, movie_dtd, strict=True)
    assert any("role" in d and "missing" in d for d in diags)

    undeclared = parse_document(
        "<movieInfo><movie whoops='1'><descr>d</descr><title>t</title>"
        "<character role='r' star='436'/></movie>"
        "<actor id='436'><name>n</name></actor></movieInfo>", movie_dtd)
    assert any("undeclared attribute" in d
               for d in validate_document(undeclared, movie_dtd))

    dangling = parse_document(
        "<movieInfo><movie><descr>d</descr><title>t</title>"
        "<character role='r' star='999'/></movie>"
        "<actor id='436'><name>n</name></actor></movieInfo>", movie_dtd)
    assert any("matches no ID" in d for d in validate_document(dangling, movie_dtd))


def test_strictly_conforms_implies_conforms(movie_dtd):
    rng = random.Random(11)
    for _ in range(30):
        d = random_dtd(rng)
        from equix.synth import random_conforming_document
        doc = random_conforming_document(rng, d)
        if strictly_conforms(doc, d):
            assert conforms(doc, d)


def test_dtd_descendant(movie_dtd):
    assert dtd_descendant(movie_dtd, "movieInfo", "name")  # via actor
    assert not dtd_descendant(movie_dtd, "title", "movie")
    assert not dtd_descendant(movie_dtd, "movie", "movie")
    assert dtd_descendant(movie_dtd, "movie", "character")


def test_dtd_descendant_transitive():
    rng = random.Random(3)
    for _ in range(25):
        d = random_dtd(rng, n_elements=7)
        names = list(d.elements)
        for a in names:
            for b in names:
                for c in names:
                    if dtd_descendant(d, a, b) and dtd_descendant(d, b, c):
                        assert dtd_descendant(d, a, c)


def test_serialize_round_trip(movie_dtd):
    text = serialize_dtd(movie_dtd)
    again = parse_dtd(text, root_name="movieInfo")
    assert again.elements == movie_dtd.elements
    assert again.attlists == movie_dtd.attlists
    assert "<!ELEMENT character EMPTY>" in text
    choice = Dtd("r", {"r": Choice((ElementRef("a"), ElementRef("b"))),
                       "a": EMPTY, "b": EMPTY})
    assert "(a|b)" in serialize_dtd(choice)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_serialize_round_trip_random(seed):
    d = random_dtd(random.Random(seed))
    again = parse_dtd(serialize_dtd(d), root_name=d.root_element_name)
    assert again.elements == d.elements
    assert again.attlists == d.attlists


def test_serialize_rejects_placeholder():
    d = Dtd("a", {"a": EMPTY})
    d.elements["a"] = Seq((ElementRef("a"), EMPTY_SYM))
    with pytest.raises(ValueError):
        serialize_dtd(d)


def test_dtd_size(movie_dtd):
    assert dtd_size(movie_dtd) == (
        len(movie_dtd.elements)
        + 3  # attdefs
        + sum(1 for _ in _iter_nodes(movie_dtd)))


def _iter_nodes(d):
    def walk(cd):
        yield cd
        if isinstance(cd, (Seq, Choice)):
            for i in cd.items:
                yield from walk(i)
        elif isinstance(cd, (Opt, Star, Plus)):
            yield from walk(cd.item)
    for cd in d.elements.values():
        yield from walk(cd)


def test_element_refs(movie_dtd):
    assert element_refs(movie_dtd.elements["movieInfo"]) == {"movie", "actor"}
    assert element_refs(PCDATA) == set()
