"""Trigraded spectral sequences over F2[tau], with the motivic mmf tables as data."""

from .grading import Expression, Monomial, TriDegree, MMF_ATOMS, parse_expression, degree_of, is_homogeneous
from .taulin import TauScalar, TauMatrix, TorsionModule, smith_normal_form, solve_linear, subquotient_decomposition
from .algebra import Presentation, Window, enumerate_monomials, graded_basis, normal_form
from .sseq import (
    DifferentialTable,
    Page,
    check_d_squared,
    compare_generators,
    forced_relations,
    infer_differential,
    leibniz_differential,
    turn_page,
    validate_differential_table,
)
from .mmfdata import Dataset, extend_by_periodicity, load_dataset, validate_dataset
from .homotopy import assemble_stem, expand_hidden_extensions, invert_tau
from .chart import ChartStyle, layout_page, render_svg

__version__ = "0.1.0"
