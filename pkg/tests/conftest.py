"""Shared builders: geometries are expensive enough to cache per session."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from gqupir.fields import GF
from gqupir.geometry import build_pg2, build_q4, build_w3

_GQ_CACHE = {}
_PLANE_CACHE = {}


def get_gq(family, q):
    key = (family, q)
    if key not in _GQ_CACHE:
        builder = {"w3": build_w3, "q4": build_q4}[family]
        _GQ_CACHE[key] = builder(GF(q))
    return _GQ_CACHE[key]


def get_plane(q):
    if q not in _PLANE_CACHE:
        _PLANE_CACHE[q] = build_pg2(GF(q))
    return _PLANE_CACHE[q]
