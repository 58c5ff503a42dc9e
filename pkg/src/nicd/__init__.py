"""Exact analysis of Boolean functions under the binary erasure model."""
from .exact import RationalPoly, parse_rational, poly_eval, rat
from .boolfn import (
    BooleanFunction,
    CubeSymmetry,
    FourierExpansion,
    LtfSpec,
    apply_symmetry,
    canonical_form,
    dictator,
    eval_extension,
    from_ltf,
    inverse_wht,
    is_odd,
    is_unbiased,
    majority,
    parse_function,
    render_function,
    wht,
)

__version__ = "0.1.0"
