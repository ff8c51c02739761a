"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines. Each
test pins its own tolerance instead of trusting the one stored in the check.
"""

import pytest

from obslab import verify


def report(check):
    print("\n" + check.line())
    return check


def test_c01_covering():
    c = report(verify.covering())
    assert c.value >= 1 - 1e-12
    assert c.passed


def test_c02_overlap():
    c = report(verify.overlap())
    assert c.value <= 5 and c.threshold == 5
    assert c.passed


def test_c03_energy_sandwich():
    c = report(verify.energy_sandwich())
    assert c.value <= 1e-10
    assert c.passed


def test_c04_band_norm_equivalence():
    c = report(verify.band_norm_equivalence())
    assert c.value <= 1e-13
    assert c.passed


def test_c05_commutation():
    c = report(verify.commutation())
    assert c.value <= 1e-8
    assert c.passed


def test_c06_decay():
    c = report(verify.decay())
    assert c.value >= 4.0
    assert c.passed


def test_c07_exact_constants():
    c = report(verify.exact_constants())
    assert c.value <= 1e-10
    assert c.passed


def test_c08_gramian_oracle():
    c = report(verify.gramian_oracle())
    assert c.value <= 1e-8
    assert c.seconds < 30.0
    assert c.passed


def test_c09_invisible_mode():
    c = report(verify.invisible_mode())
    assert c.value >= 1 - 1e-8
    assert c.passed


def test_c10_theorem_chain():
    c = report(verify.theorem_chain())
    assert c.value >= 1.0
    assert c.seconds < 120.0
    assert c.passed


def test_c11_tau_separation():
    c = report(verify.tau_separation())
    assert c.value < 0.05
    assert c.passed


@pytest.mark.parametrize("fn", verify.INVARIANTS, ids=lambda f: f.__name__)
def test_invariant(fn):
    c = report(fn())
    assert c.passed
