import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from liftscale.distribution import JointTable, marginal_x, marginal_y
from liftscale.errors import EmptySupport, InvalidDistribution, ZeroProbabilityWindow
from liftscale.metrics import (
    Window,
    conditional_entropy,
    entropy,
    eta_global,
    eta_window,
    lift,
    lift_cell,
    mutual_information,
)

from tables import GRADES_MP, GRADES_ALL, GRADES_M, TERTILE_LABELS, cover_table, tertile_table

# frozen from a 40-digit mpmath summation over the cells
GRADES_MP_H_Y = 1.0984527213374778
GRADES_MP_CE = 1.0558911097834732
GRADES_MP_MI = 0.042561611554004627
GRADES_MP_ETA = 0.038746876153378309
GRADES_M_H_Y = 1.0985361264092017


# ---------------------------------------------------------------- entropy

def test_entropy_uniform():
    assert entropy([0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)


@pytest.mark.parametrize("p", [[1.0], [1.0, 0.0], [0.0, 1.0, 0.0]])
def test_entropy_degenerate(p):
    assert entropy(p) == 0.0


def test_entropy_grade_marginal():
    h = marginal_y(tertile_table(GRADES_M))
    assert entropy(h) == pytest.approx(GRADES_M_H_Y, abs=1e-14)


@pytest.mark.parametrize("p", [[0.5, 0.6], [1.2, -0.2], [0.3, 0.3]])
def test_entropy_rejects_non_distributions(p):
    with pytest.raises(InvalidDistribution):
        entropy(p)


# ---------------------------------------------------------------- CE / MI / eta

def test_grades_information_quantities():
    t = tertile_table(GRADES_MP)
    assert entropy(marginal_y(t)) == pytest.approx(GRADES_MP_H_Y, abs=1e-14)
    assert conditional_entropy(t) == pytest.approx(GRADES_MP_CE, abs=1e-14)
    assert mutual_information(t) == pytest.approx(GRADES_MP_MI, abs=1e-14)
    assert eta_global(t) == pytest.approx(GRADES_MP_ETA, abs=1e-14)


def test_published_eta_values():
    t1 = tertile_table(GRADES_MP)
    assert mutual_information(t1) == pytest.approx(0.0387 * entropy(marginal_y(t1)), abs=1e-3)
    assert eta_global(t1) == pytest.approx(0.0387, abs=5e-4)
    assert eta_global(tertile_table(GRADES_ALL)) == pytest.approx(0.0354, abs=5e-4)
    assert eta_global(cover_table()) == pytest.approx(0.307, abs=5e-4)


def test_deterministic_and_independent_tables():
    det = JointTable.from_counts([[10, 0], [0, 10]])
    assert conditional_entropy(det) == 0.0
    assert mutual_information(det) == pytest.approx(math.log(2), abs=1e-15)
    assert eta_global(det) == pytest.approx(1.0, abs=1e-15)
    ind = JointTable.from_counts([[2, 6], [3, 9]])
    assert mutual_information(ind) == pytest.approx(0.0, abs=1e-12)
    assert conditional_entropy(ind) == pytest.approx(entropy(marginal_y(ind)), abs=1e-12)
    assert eta_global(ind) == pytest.approx(0.0, abs=1e-12)


def test_degenerate_target_has_eta_one():
    t = JointTable.from_counts([[4], [7]])
    assert eta_global(t) == 1.0
    assert eta_window(t, [0]) == 1.0


def test_empty_table_errors():
    t = JointTable((), (), np.zeros((0, 0), dtype=int))
    for fn in (conditional_entropy, mutual_information, eta_global, lift):
        with pytest.raises(EmptySupport):
            fn(t)


# ---------------------------------------------------------------- lift

def test_lift_published_cells():
    assert lift_cell(tertile_table(GRADES_MP), 0, 1) == pytest.approx(1.46, abs=5e-3)
    assert lift_cell(tertile_table(GRADES_ALL), 2, 2) == pytest.approx(1.49, abs=5e-3)
    assert lift_cell(tertile_table(GRADES_M), 2, 2) == pytest.approx(1.51, abs=5e-3)
    assert lift_cell(cover_table(), 0, 2) == pytest.approx(4.94, abs=5e-2)


def test_lift_independent_uniform_is_one():
    np.testing.assert_array_equal(lift(JointTable.from_counts([[25, 25], [25, 25]])).lift, 1.0)


def test_lift_zero_cells():
    lt = lift(cover_table())
    assert lt.lift[0, 6] == 0.0
    assert lt.base is not None
    with pytest.raises(ValueError):
        lt.lift[0, 0] = 1.0


# ---------------------------------------------------------------- windows

def test_eta_window_top_tertile():
    t = tertile_table(GRADES_M)
    w = Window.of(t, [(TERTILE_LABELS[2],)], subset=("M",))
    assert eta_window(t, w) == pytest.approx(0.0575, abs=5e-4)
    assert eta_window(t, [2]) == eta_window(t, w)


def test_eta_window_full_range_is_global():
    t = tertile_table(GRADES_ALL)
    assert eta_window(t, range(3)) == pytest.approx(eta_global(t), abs=1e-12)


def test_eta_window_independent_rows_score_zero():
    # row 2 shifts h away from (1/4, 3/4), so rows 0 and 1 now carry information
    t = JointTable.from_counts([[1, 3], [2, 6], [4, 0]])
    assert eta_window(t, [0, 1]) > 0.01
    t = JointTable.from_counts([[1, 3], [2, 6], [1, 3]])
    assert eta_window(t, [0, 1]) == pytest.approx(0.0, abs=1e-12)
    assert eta_window(t, [2]) == pytest.approx(0.0, abs=1e-12)


def test_eta_window_functional():
    t = JointTable.from_counts([[5, 0, 0], [0, 7, 0], [2, 2, 2]])
    assert eta_window(t, [0, 1]) == pytest.approx(1.0, abs=1e-9)


def test_eta_window_errors():
    t = tertile_table(GRADES_M)
    with pytest.raises(ZeroProbabilityWindow):
        eta_window(t, [])
    with pytest.raises(ValueError):
        Window.of(t, [("Tertile 9",)])
    with pytest.raises(ValueError):
        Window((), frozenset())


# ---------------------------------------------------------------- properties

@st.composite
def count_tables(draw, max_side=6, max_count=200):
    r = draw(st.integers(1, max_side))
    c = draw(st.integers(1, max_side))
    cells = draw(st.lists(st.integers(0, max_count), min_size=r * c, max_size=r * c))
    m = np.array(cells, dtype=np.int64).reshape(r, c)
    assume((m.sum(axis=1) > 0).all() and (m.sum(axis=0) > 0).all())
    return JointTable.from_counts(m)


PROPS = settings(max_examples=200, deadline=None)


@PROPS
@given(count_tables())
def test_lift_marginal_identity(t):
    h = marginal_y(t)
    np.testing.assert_allclose(lift(t).lift @ h, 1.0, atol=1e-9)


@PROPS
@given(count_tables())
def test_mi_decomposition(t):
    assert mutual_information(t) == pytest.approx(
        entropy(marginal_y(t)) - conditional_entropy(t), abs=1e-9)


@PROPS
@given(count_tables())
def test_mi_is_expected_log_lift(t):
    f = t.counts / t.total
    lt = lift(t).lift
    pos = t.counts > 0
    assert np.sum(f[pos] * np.log(lt[pos])) == pytest.approx(mutual_information(t), abs=1e-9)


@PROPS
@given(count_tables())
def test_eta_bounds(t):
    assert 0.0 <= eta_global(t) <= 1.0
    n = len(t.x_levels)
    for i in range(n):
        assert 0.0 <= eta_window(t, [i]) <= 1.0
    assert 0.0 <= eta_window(t, range(0, n, 2)) <= 1.0


@PROPS
@given(st.lists(st.integers(1, 50), min_size=1, max_size=6),
       st.lists(st.integers(1, 50), min_size=2, max_size=6))
def test_independence_exact(a, b):
    # a single y level is degenerate and scores 1 by convention
    t = JointTable.from_counts(np.outer(a, b))
    # exact rational check of the construction itself
    total = sum(a) * sum(b)
    assert all(Fraction(ai * bj * total, ai * sum(b) * sum(a) * bj) == 1 for ai in a for bj in b)
    assert eta_global(t) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(lift(t).lift, 1.0, atol=1e-12)


@PROPS
@given(count_tables())
def test_no_uniform_lift(t):
    # over the observed range R_X x R_Y, including empty cells
    lt = lift(t).lift
    assert lt.min() <= 1.0 + 1e-12
    assert lt.max() >= 1.0 - 1e-12
    assert lt[t.counts > 0].max() >= 1.0 - 1e-12


def test_lift_can_exceed_one_on_every_occupied_cell():
    # the average-one identity is over g x h, so occupied cells alone may all lift
    t = JointTable.from_counts([[0, 1], [1, 0]])
    lt = lift(t).lift
    np.testing.assert_array_equal(lt[t.counts > 0], [2.0, 2.0])
    assert lt.min() == 0.0
    assert np.sum(np.outer(marginal_x(t), marginal_y(t)) * lt) == pytest.approx(1.0, abs=1e-15)


@PROPS
@given(count_tables(), st.integers(2, 1000))
def test_count_scale_invariance(t, k):
    s = JointTable.from_counts(t.counts * k)
    assert eta_global(s) == pytest.approx(eta_global(t), abs=1e-12)
    np.testing.assert_allclose(lift(s).lift, lift(t).lift, atol=1e-12, rtol=0)
    assert eta_window(s, [0]) == pytest.approx(eta_window(t, [0]), abs=1e-12)


@PROPS
@given(count_tables())
def test_full_window_equals_global(t):
    assert eta_window(t, range(len(t.x_levels))) == pytest.approx(eta_global(t), abs=1e-12)


@PROPS
@given(st.lists(st.integers(0, 3), min_size=1, max_size=6), st.integers(1, 30), st.integers(0, 30))
def test_functional_window(ys, n, extra):
    # every row in the window maps to one y; a free row keeps h non-degenerate
    n_y = 4
    counts = np.zeros((len(ys) + 1, n_y), dtype=np.int64)
    for i, y in enumerate(ys):
        counts[i, y] = n
    counts[-1] = 1 + extra
    t = JointTable.from_counts(counts)
    assert eta_window(t, range(len(ys))) == pytest.approx(1.0, abs=1e-9)
