"""Exact computation with transformations of N and maximal subsemigroups of T(N)."""
from . import witnesses  # noqa: F401  (registers the Lazy constructions)
from .engine import ClassFlags, InvariantReport, Tri, classify, term_invariants, window_report
from .epset import EPSet
from .extnat import INF, ExtNat, Fin
from .rca import Affine, Const, RcaMap
from .terms import ColEmbed, ColProj, Compose, Lazy, Rca, parse_term, serialize, term_eval

__all__ = [
    "Affine", "ClassFlags", "ColEmbed", "ColProj", "Compose", "Const", "EPSet", "ExtNat", "Fin",
    "INF", "InvariantReport", "Lazy", "Rca", "RcaMap", "Tri", "classify", "parse_term",
    "serialize", "term_eval", "term_invariants", "window_report",
]
