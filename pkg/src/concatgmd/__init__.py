"""Concatenated codes with constant-trial GMD decoding, error exponents and simulation."""

from concatgmd.finite_field import GF2m
from concatgmd.outer_code import RSCode
from concatgmd.channel import ChannelModel, capacity, parse_channel
from concatgmd.inner_code import InnerCode, random_linear_codebook, ml_decode
from concatgmd.gmd import (
    GmdParams,
    ReliabilityVector,
    build_patterns,
    forney_gmd,
    revised_gmd,
    weighted_correlation,
)
from concatgmd.multilevel import ConcatScheme, concat_decode, concat_encode

__all__ = [
    "GF2m",
    "RSCode",
    "ChannelModel",
    "capacity",
    "parse_channel",
    "InnerCode",
    "random_linear_codebook",
    "ml_decode",
    "GmdParams",
    "ReliabilityVector",
    "build_patterns",
    "forney_gmd",
    "revised_gmd",
    "weighted_correlation",
    "ConcatScheme",
    "concat_decode",
    "concat_encode",
]

__version__ = "0.1.0"
