"""Exact, certificate-producing lower bounds on the diameter of Sidon sets."""
from .cells import BoundParams, build_cell, enumerate_interlacings, lemma1_form, locate_cell, nonempty_cells
from .certfile import recheck, write_certificate
from .certify import Certificate, certify, corollary_bound, two_window_certify
from .lp import LinearProgram, LPResult, Relation, Status, lp_solve, verify_result
from .numerics import AffineForm, affine_eval, rational_from_decimal
from .search import SearchSchedule, local_search
from .sidon import SidonSet, check_thin, cutoff_vector, etsse_residual, generate_sidon
from .thin import thin_report

__version__ = "0.1.0"

__all__ = [
    "AffineForm", "BoundParams", "Certificate", "LinearProgram", "LPResult", "Relation",
    "SearchSchedule", "SidonSet", "Status", "affine_eval", "build_cell", "certify",
    "check_thin", "corollary_bound", "cutoff_vector", "enumerate_interlacings",
    "etsse_residual", "generate_sidon", "lemma1_form", "local_search", "locate_cell",
    "lp_solve", "nonempty_cells", "rational_from_decimal", "recheck", "thin_report",
    "two_window_certify", "verify_result", "write_certificate",
]
