"""Enhanced Milnor invariants lambda and rho of isolated critical points of maps R^4 -> R^2.

The invariants are Hopf invariants of the left and right quaternionic
complex structures carried by the plane field ``<Df>`` on a small sphere
around the critical point; they are computed by tracing preimage curves and
linking them, with intersection-number oracles as an independent check.
"""

from .errors import MilnorSplitError, NumericInstability
from .invariants import InvariantReport, lambda_rho, mirror_map
from .linking import hopf_invariant, linking_number
from .oracles import halfcomplex_intersection_oracle, intersection_mult_analytic, milnor_oracle
from .polymap import MapExpr, eval_map, isolatedness_probe, parse_map, wirtinger_differential
from .quaternion import Quaternion, TwoFrame, hopf_map, l_of_frame, quat_product, r_of_frame

__all__ = [
    "InvariantReport",
    "MapExpr",
    "MilnorSplitError",
    "NumericInstability",
    "Quaternion",
    "TwoFrame",
    "eval_map",
    "halfcomplex_intersection_oracle",
    "hopf_invariant",
    "hopf_map",
    "intersection_mult_analytic",
    "isolatedness_probe",
    "l_of_frame",
    "lambda_rho",
    "linking_number",
    "milnor_oracle",
    "mirror_map",
    "parse_map",
    "quat_product",
    "r_of_frame",
    "wirtinger_differential",
]
