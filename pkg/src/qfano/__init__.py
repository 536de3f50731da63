"""Exact numerics for Q-Fano threefold candidates and Sarkisov link arithmetic."""

from .basket import Basket, BasketError, QuotientPoint, anticanonical_c2, enumerate_baskets, make_point, sigma
from .riemann_roch import (
    CandidateInvalid,
    FanoCandidate,
    HilbertProfile,
    candidate,
    euler_char,
    h0,
    hilbert_profile,
    integrality_valid,
    lambda_of,
    local_class_of_A,
    point_contribution,
)

__version__ = "0.1.0"
