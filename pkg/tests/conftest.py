from __future__ import annotations

from collections import deque
from pathlib import Path

import pytest

from equix.dtd import parse_dtd
from equix.query import parse_query_document, translate
from equix.xmlmodel import Document, parse_document

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def figure_order(doc: Document) -> list[int]:
    """The paper-style numbering of the movie figure: complex nodes in
    level order, children in document order.  Index = figure number."""
    order: list[int] = []
    queue = deque([doc.root])
    while queue:
        n = queue.popleft()
        order.append(n)
        queue.extend(c for c in doc.children(n) if not doc.nodes[c].atomic)
    return order


@pytest.fixture(scope="session")
def movie_dtd():
    return parse_dtd((FIXTURES / "movies.dtd").read_text())


@pytest.fixture(scope="session")
def movie_doc(movie_dtd):
    return parse_document((FIXTURES / "movies.xml").read_text(), movie_dtd)


@pytest.fixture(scope="session")
def fig(movie_doc):
    order = figure_order(movie_doc)
    assert len(order) == 31
    return order


@pytest.fixture(scope="session")
def paper_query_doc():
    return parse_query_document((FIXTURES / "paper_query.json").read_text())


@pytest.fixture(scope="session")
def paper_query(paper_query_doc):
    return paper_query_doc.query


@pytest.fixture(scope="session")
def paper_abstract(paper_query_doc):
    qd = paper_query_doc
    return translate(qd.query, qd.mode, qd.ontology)
