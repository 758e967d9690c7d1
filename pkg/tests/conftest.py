"""Shared test machinery.

Identification pairs at the finest levels are the expensive objects in
this suite (the largest gasket pair takes tens of seconds to certify),
so they are built once and shared.  The wall time of each build is
recorded; the runtime criteria sum the recorded times rather than
re-measuring, which keeps the accounting honest regardless of which
test touched a pair first.
"""
import time

import numpy as np
import pytest
from hypothesis import settings

from quecert import identify, models
from quecert.certify import certify

settings.register_profile("suite", max_examples=30, deadline=None)
settings.load_profile("suite")

# coarse/fine level pairs exercised end to end
INTERVAL_PAIRS = [(1, 6), (2, 7), (3, 8), (4, 8), (5, 8), (6, 8)]
GASKET_PAIRS = [(1, 4), (2, 5), (3, 6), (4, 7)]

_pairs: dict = {}
_seconds: dict = {}


def get_pair(name, m, M):
    """Session-cached (pair, certificate) for one level pair."""
    key = (name, m, M)
    if key not in _pairs:
        t0 = time.perf_counter()
        pair = identify.build_identification(models.by_name(name), m, M)
        cert = certify(pair)
        _seconds[key] = time.perf_counter() - t0
        _pairs[key] = (pair, cert)
    return _pairs[key]


def pair_seconds(name, m, M) -> float:
    get_pair(name, m, M)
    return _seconds[(name, m, M)]


def iter_acceptance_pairs():
    for m, M in INTERVAL_PAIRS:
        pair, cert = get_pair("interval", m, M)
        yield "interval", m, M, pair, cert
    for m, M in GASKET_PAIRS:
        pair, cert = get_pair("gasket", m, M)
        yield "gasket", m, M, pair, cert


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260822)
