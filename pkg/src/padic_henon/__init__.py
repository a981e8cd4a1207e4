"""p-adic Henon maps T(x, y) = (a y + b (x^q - x), x): orbits, itinerary coding,
the Bernoulli measure on the attractor, and exact ball counts."""

from .dimension import BallId, box_count, dimension_estimate, theoretical_dimension
from .dynamics import backward_orbit, basin_entry_time, eigen_norms, forward_orbit, phi, step, step_inv
from .padic import FieldParams, PadicScalar, Point, canonical_params, parse_literal
from .symbolic import ItineraryWindow, conjugacy_residual, decode, encode, shift

__all__ = [
    "BallId", "FieldParams", "ItineraryWindow", "PadicScalar", "Point",
    "backward_orbit", "basin_entry_time", "box_count", "canonical_params", "conjugacy_residual",
    "decode", "dimension_estimate", "eigen_norms", "encode", "forward_orbit", "parse_literal",
    "phi", "shift", "step", "step_inv", "theoretical_dimension",
]
