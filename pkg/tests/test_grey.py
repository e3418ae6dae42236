from datetime import date
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotorkit.errors import ConfigInvalid, LengthMismatch, UnknownParent
from rotorkit.grey import GraConfig, grade_against, gra_coefficients, gra_grades, preprocess
from rotorkit.panel import Panel


def test_hand_worked_batch():
    # initial-value: parent (1,2,3); children (1,2,3), (1,2/3,1/3)
    # deltas (0,0,0), (0,4/3,8/3); dmin 0, dmax 8/3, rho*dmax 4/3
    xi = gra_coefficients([1, 2, 3], [[1, 2, 3], [3, 2, 1]], GraConfig(rho=0.5))
    assert xi[0].tolist() == [1.0, 1.0, 1.0]
    assert xi[1] == pytest.approx([1.0, 0.5, 1 / 3], abs=1e-15)
    grades = grade_against([1, 2, 3], {"same": [1, 2, 3], "rev": [3, 2, 1]})
    assert grades["same"] == 1.0
    assert grades["rev"] == pytest.approx(float(Fraction(11, 18)), abs=1e-15)


def test_degenerate_batch():
    xi = gra_coefficients([1, 2, 3], [[2, 4, 6], [3, 6, 9]])
    assert np.all(xi == 1.0)
    assert gra_coefficients([1, 1], [1, 1]).tolist() == [1.0, 1.0]


def test_single_child_shape():
    assert gra_coefficients([1, 2, 3], [1, 3, 2]).shape == (3,)


def test_errors():
    with pytest.raises(LengthMismatch):
        gra_coefficients([1, 2, 3], [1, 2])
    with pytest.raises(ConfigInvalid):
        GraConfig(rho=0)
    with pytest.raises(ConfigInvalid):
        GraConfig(preprocessing="log")


def test_unknown_parent(table2):
    with pytest.raises(UnknownParent):
        gra_grades(table2, "HSI")


def test_duplicate_child_is_maximal():
    days = [date(2023, 1, d) for d in (1, 2, 3, 4)]
    p = Panel.from_arrays(days, {"P": [1, 2, 3, 4], "dup": [1, 2, 3, 4], "x": [4, 1, 3, 2], "y": [1, 1, 2, 2]})
    res = gra_grades(p, "P")
    assert res.grades["dup"] == 1.0
    assert res.ranking()[0] == "dup"


def _gra_oracle(parent, children, rho=0.5):
    """Plain-Python Deng GRA, initial-value preprocessing, pooled extremes."""
    p = [x / parent[0] for x in parent]
    deltas = {n: [abs(x / c[0] - q) for x, q in zip(c, p)] for n, c in children.items()}
    flat = [d for ds in deltas.values() for d in ds]
    lo, hi = min(flat), max(flat)
    return {n: sum((lo + rho * hi) / (d + rho * hi) for d in ds) / len(ds) for n, ds in deltas.items()}


def test_table2_grades(table2):
    res = gra_grades(table2, "SSE")
    oracle = _gra_oracle(list(table2["SSE"].values), {n: list(table2[n].values) for n in ("STAR50", "GEM", "SZI")})
    frozen = {"STAR50": 0.5944698794978684, "GEM": 0.6472475530062508, "SZI": 0.7155876263697424}
    for n in frozen:
        assert oracle[n] == pytest.approx(frozen[n], abs=1e-12)
        assert res.grades[n] == pytest.approx(frozen[n], abs=1e-12)
    assert res.ranking() == ["SZI", "GEM", "STAR50"]


def test_coefficients_csv(table2):
    text = gra_grades(table2, "SSE").coefficients_csv()
    lines = text.splitlines()
    assert lines[0] == "date,STAR50,GEM,SZI"
    assert len(lines) == 96


@pytest.mark.parametrize("method", ["initial-value", "mean-value", "min-max", "none"])
def test_preprocess(method):
    x = preprocess(np.array([2.0, 4.0, 6.0]), method)
    expected = {
        "initial-value": [1, 2, 3],
        "mean-value": [0.5, 1, 1.5],
        "min-max": [0, 0.5, 1],
        "none": [2, 4, 6],
    }[method]
    assert x.tolist() == pytest.approx(expected)


pos = st.floats(0.1, 100, allow_nan=False)


@st.composite
def batches(draw):
    n = draw(st.integers(2, 12))
    k = draw(st.integers(1, 4))
    parent = draw(st.lists(pos, min_size=n, max_size=n))
    kids = [draw(st.lists(pos, min_size=n, max_size=n)) for _ in range(k)]
    return parent, kids


@given(batches(), st.floats(0.01, 1.0))
@settings(max_examples=300)
def test_bounds(batch, rho):
    parent, kids = batch
    xi = gra_coefficients(parent, kids, GraConfig(rho=rho))
    assert np.all(xi > 0) and np.all(xi <= 1 + 1e-15)


@given(batches())
@settings(max_examples=200)
def test_reflexive(batch):
    parent, _ = batch
    assert np.mean(gra_coefficients(parent, parent)) == pytest.approx(1.0, abs=1e-12)


@given(batches(), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
@settings(max_examples=300)
def test_rho_monotone(batch, r1, r2):
    parent, kids = batch
    lo, hi = sorted((r1, r2))
    if hi - lo < 1e-6:
        return
    a = gra_coefficients(parent, kids, GraConfig(rho=lo))
    b = gra_coefficients(parent, kids, GraConfig(rho=hi))
    p0 = preprocess(np.asarray(parent), "initial-value")
    delta = np.abs(np.stack([preprocess(np.asarray(k), "initial-value") for k in kids]) - p0)
    mask = delta > delta.min() + 1e-12 * max(delta.max(), 1)
    assert np.all(b[mask] > a[mask])


@given(batches(), st.floats(0.01, 100), st.floats(0.01, 100))
@settings(max_examples=200)
def test_scaling_invariance_initial_value(batch, s0, s1):
    parent, kids = batch
    base = gra_coefficients(parent, kids)
    scaled = gra_coefficients([s0 * x for x in parent], [[s1 * x for x in k] for k in kids])
    assert np.allclose(base, scaled, atol=1e-9)
