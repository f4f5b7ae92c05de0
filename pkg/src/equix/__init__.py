"""EquiX: a search processor for XML catalogs.

Quantified tree queries over DTD-conforming documents, with projected result
documents and an automatically synthesized result DTD for requerying.
"""

from .dtd import Dtd, conforms, parse_dtd, serialize_dtd, strictly_conforms
from .evaluator import (enumerate_satisfying_matchings, evaluate_catalog,
                        evaluate_to_document, is_satisfying_matching,
                        query_evaluate, retrieval_matching, union_matchings)
from .query import (AbstractQuery, ConcreteQueryNode, QueryDocument, complement,
                    eval_matcher, parse_query, parse_query_document,
                    serialize_query, translate, validate_query_against_dtd)
from .resultdtd import create_result_dtd, simplify
from .store import Catalog, CatalogStore, QueryRun
from .xmlmodel import Document, parse_document, serialize_document

__version__ = "0.1.0"

__all__ = [
    "AbstractQuery", "Catalog", "CatalogStore", "ConcreteQueryNode", "Document",
    "Dtd", "QueryDocument", "QueryRun", "complement", "conforms",
    "create_result_dtd", "enumerate_satisfying_matchings", "eval_matcher",
    "evaluate_catalog", "evaluate_to_document", "is_satisfying_matching",
    "parse_document", "parse_dtd", "parse_query", "parse_query_document",
    "query_evaluate", "retrieval_matching", "serialize_document",
    "serialize_dtd", "serialize_query", "simplify", "strictly_conforms",
    "translate", "union_matchings", "validate_query_against_dtd",
]
