"""Differential checks: the symbolic deciders against brute-force windows.

Randomized closed-form sequences are checked two ways: the exact decision
procedure, and direct evaluation of every pair in a finite window.  A "no"
must come with a genuine violating pair; a "yes" must survive the window.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from borno.closedforms import EpsForm
from borno.errors import NotDecided
from borno.seqspace import (
    DiskForm,
    GeoTerm,
    ModelSpace,
    SeqVector,
    SequenceModel,
    WindowTerm,
    cauchy_check,
    convergence_check,
    gauge_value,
)

RATIOS = [Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(2, 3),
          Fraction(3, 4), Fraction(-1, 3)]
COEFFS = [Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(2),
          Fraction(-3, 2)]

WINDOW = 36


def random_vector(rng, allow_tail=True):
    prefix = {}
    for k in range(int(rng.integers(0, 3))):
        prefix[int(rng.integers(0, 4))] = COEFFS[rng.integers(len(COEFFS))]
    tails = ()
    start = max(prefix, default=-1) + 1
    if allow_tail and rng.random() < 0.4:
        tails = ((COEFFS[rng.integers(len(COEFFS))],
                  RATIOS[rng.integers(len(RATIOS))]),)
    v = SeqVector(prefix, tails, start)
    if v.is_zero:
        return SeqVector.unit(int(rng.integers(0, 4)), 1)
    return v


def random_model(rng):
    geo = []
    if rng.random() < 0.5:
        geo.append(GeoTerm(1, 1, random_vector(rng)))
    for _ in range(int(rng.integers(1, 3))):
        geo.append(GeoTerm(COEFFS[rng.integers(len(COEFFS))],
                           RATIOS[rng.integers(len(RATIOS))],
                           random_vector(rng)))
    windows = ()
    if rng.random() < 0.3:
        u = SeqVector.geometric(COEFFS[rng.integers(len(COEFFS))],
                                abs(RATIOS[rng.integers(len(RATIOS))]))
        windows = (WindowTerm(COEFFS[rng.integers(len(COEFFS))], u),)
    return SequenceModel(geo_terms=tuple(geo), window_terms=windows)


def random_eps(rng):
    amp = abs(COEFFS[rng.integers(len(COEFFS))])
    ratio = abs(RATIOS[rng.integers(len(RATIOS))])
    return EpsForm.geometric(amp, ratio)


@pytest.mark.parametrize("seed", range(60))
def test_cauchy_decision_matches_window(seed):
    rng = np.random.default_rng(seed)
    space = ModelSpace((DiskForm("sum"), DiskForm("sup")))
    disk_index = int(rng.integers(0, 2))
    disk = space.disk(disk_index)
    model = random_model(rng)
    eps = random_eps(rng)
    try:
        report = cauchy_check(model, space, disk_index, eps)
    except NotDecided:
        return  # outside the decidable fragment, honestly reported
    window_violation = None
    for m in range(WINDOW):
        xm = model.at(m)
        for n in range(m + 1, WINDOW):
            g = gauge_value(disk, model.at(n).subtract(xm))
            if g == math.inf or not eps.ge_value(m, g):
                window_violation = (m, n)
                break
        if window_violation:
            break
    if report.holds:
        assert window_violation is None, (
            f"decider said yes but window found violation {window_violation}")
    else:
        m, n = report.violating_pair
        g = gauge_value(disk, model.at(n).subtract(model.at(m)))
        assert g == math.inf or not eps.ge_value(m, g), (
            "reported violating pair is not a violation")


@pytest.mark.parametrize("seed", range(40))
def test_convergence_decision_matches_window(seed):
    rng = np.random.default_rng(1000 + seed)
    space = ModelSpace((DiskForm("sum"), DiskForm("sup")))
    disk_index = int(rng.integers(0, 2))
    disk = space.disk(disk_index)
    model = random_model(rng)
    eps = random_eps(rng)
    limit = model.limit_vector()
    try:
        report = convergence_check(model, space, disk_index, eps, limit)
    except NotDecided:
        return
    window_violation = None
    for n in range(WINDOW):
        g = gauge_value(disk, model.at(n).subtract(limit))
        if g == math.inf or not eps.ge_value(n, g):
            window_violation = n
            break
    if report.holds:
        assert window_violation is None
    else:
        n = report.violating_pair[0]
        g = gauge_value(disk, model.at(n).subtract(limit))
        assert g == math.inf or not eps.ge_value(n, g)


@pytest.mark.parametrize("seed", range(40))
def test_gauge_value_between_partial_sum_and_envelope(seed):
    rng = np.random.default_rng(2000 + seed)
    v = random_vector(rng)
    disk = DiskForm("sum")
    g = gauge_value(disk, v)
    horizon = 300
    partial = sum((disk.weight.value(k) * abs(v.value(k))
                   for k in range(horizon)), Fraction(0))
    tail_bound = sum((abs(a) * abs(s) ** horizon / (1 - abs(s))
                      for a, s in v.tails), Fraction(0))
    assert partial <= g <= partial + tail_bound

    sup_disk = DiskForm("sup")
    gs = gauge_value(sup_disk, v)
    sup_partial = max((sup_disk.weight.value(k) * abs(v.value(k))
                       for k in range(horizon)), default=Fraction(0))
    assert sup_partial <= gs
    assert gs <= max(sup_partial, tail_bound)


@pytest.mark.parametrize("seed", range(20))
def test_subsequences_evaluate_consistently(seed):
    rng = np.random.default_rng(3000 + seed)
    model = random_model(rng)
    a = int(rng.integers(1, 4))
    b = int(rng.integers(0, 3))
    sub = model.subsequence(a, b)
    for n in range(12):
        assert sub.at(n) == model.at(a * n + b)
