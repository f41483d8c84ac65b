"""Shared construction helpers for the test modules."""

import numpy as np

from risanchor.channel import BsLink, make_profile
from risanchor.geometry import RisSegment

F_C = 25e9


def single_pixel(center=(0.0, -3.0), slope=0.0, side=1):
    return RisSegment.centered(center, slope, 1, 0.006, side)


def link_for(ris, bs=(250.0, -250.0)):
    return BsLink.from_geometry(bs, ris)


def mirror(ris):
    return make_profile("mirror", ris.pixel_count)


def rel(a, b):
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
