import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import U, int_det
from plll.experiments import gen_pathological, gen_type1, gen_type2
from plll.linalg import FlopCounter
from plll.reduction import (
    GrowthOverflowError,
    IterationLimitError,
    ReductionParams,
    SingularBasisError,
    apply_igt,
    lovasz_holds,
    reduce,
    reduce_elll,
    reduce_lll,
    reduce_plll,
    size_reduced,
    swap_step,
)

REDUCERS = {"lll": reduce_lll, "elll": reduce_elll, "plll": reduce_plll}


def _residual(H, s):
    return np.linalg.norm(H @ s.Z - s.Q @ s.R, 2) / np.linalg.norm(H, 2)


@pytest.mark.parametrize("delta", [0.25, 0.0, 1.01, -1.0])
def test_params_reject_bad_delta(delta):
    with pytest.raises(ValueError):
        ReductionParams(delta=delta)


def test_params_accept_boundary_and_default():
    assert ReductionParams().delta == 0.75
    assert ReductionParams(delta=1.0).delta == 1.0
    with pytest.raises(ValueError):
        ReductionParams(algorithm="bkz")


def test_igt_rounds_to_nearest():
    R = np.array([[1.0, 0.7], [0.0, 1.0]])
    Z = np.eye(2, dtype=np.int64)
    assert apply_igt(R, Z, 0, 1) == 1
    assert R[0, 1] == pytest.approx(-0.3)
    np.testing.assert_array_equal(Z, [[1, -1], [0, 1]])


def test_igt_noop_when_reduced():
    R = np.array([[2.0, 0.9], [0.0, 1.0]])
    Z = np.eye(2, dtype=np.int64)
    assert apply_igt(R, Z, 0, 1) == 0
    np.testing.assert_array_equal(R, [[2.0, 0.9], [0.0, 1.0]])
    np.testing.assert_array_equal(Z, np.eye(2))


def test_igt_tie_goes_away_from_zero():
    R = np.array([[1.0, 2.5], [0.0, 1.0]])
    Z = np.eye(2, dtype=np.int64)
    assert apply_igt(R, Z, 0, 1) == 3
    assert R[0, 1] == -0.5


def test_igt_touches_only_upper_rows_of_column():
    rng = np.random.default_rng(0)
    R = np.triu(rng.standard_normal((5, 5))) + 3 * np.eye(5)
    R[1, 4] = 40.0
    Z = np.eye(5, dtype=np.int64)
    before = R.copy()
    zeta = apply_igt(R, Z, 1, 4)
    assert zeta != 0
    changed = np.argwhere(R != before)
    assert all(j == 4 and i <= 1 for i, j in changed)
    assert abs(R[1, 4]) <= abs(R[1, 1]) / 2
    assert int_det(Z) == 1


def test_igt_zero_pivot_raises():
    R = np.array([[0.0, 1.0], [0.0, 1.0]])
    with pytest.raises(SingularBasisError):
        apply_igt(R, np.eye(2, dtype=np.int64), 0, 1)


def test_swap_step_identity():
    R = np.eye(2)
    Z = np.eye(2, dtype=np.int64)
    swap_step(R, Z, np.eye(2), 1)
    assert abs(R[0, 0]) == pytest.approx(1.0)
    np.testing.assert_array_equal(Z, [[0, 1], [1, 0]])


def test_swap_step_example():
    R = np.array([[2.0, 1.0], [0.0, 1.0]])
    Z = np.eye(2, dtype=np.int64)
    Q = np.eye(2)
    H = Q @ R
    swap_step(R, Z, Q, 1)
    assert R[0, 0] == pytest.approx(math.sqrt(2))
    assert abs(R[1, 1]) == pytest.approx(math.sqrt(2))
    np.testing.assert_allclose(Q.T @ H @ Z, R, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 9), seed=st.integers(0, 2**32 - 1))
def test_swap_step_preserves_diag_product(n, seed):
    rng = np.random.default_rng(seed)
    R = np.triu(rng.standard_normal((n, n)))
    k = int(rng.integers(1, n))
    pair = abs(R[k - 1, k - 1] * R[k, k])
    swap_step(R, np.eye(n, dtype=np.int64), None, k)
    assert abs(R[k - 1, k - 1] * R[k, k]) == pytest.approx(pair, rel=10 * U)


@pytest.mark.parametrize("algo", ["lll", "elll", "plll"])
def test_identity_is_fixed(algo):
    s = REDUCERS[algo](np.eye(5))
    np.testing.assert_array_equal(s.R, np.eye(5))
    np.testing.assert_array_equal(s.Z, np.eye(5))
    assert s.swaps == 0


def test_lll_small_trace():
    s = reduce_lll([[1.0, 0.6], [0.0, 1.0]])
    np.testing.assert_allclose(s.R, [[1.0, -0.4], [0.0, 1.0]], atol=1e-15)
    np.testing.assert_array_equal(s.Z, [[1, -1], [0, 1]])
    assert s.swaps == 0


def test_plll_small_trace():
    # Householder start keeps R0 = H; one IGT with zeta = 1, then a swap
    s = reduce_plll([[2.0, 1.0], [0.0, 1.0]], ReductionParams(algorithm="plll", qr="householder"))
    assert (s.igts, s.swaps) == (1, 1)
    np.testing.assert_allclose(np.abs(s.R), math.sqrt(2) * np.array([[1, 1], [0, 1]]), atol=1e-15)
    assert lovasz_holds(s.R, 0.75)
    assert abs(int_det(s.Z)) == 1


def test_pathological_growth():
    H = gen_pathological(20)
    assert np.abs(reduce_lll(H).R).max() <= 1 + 1e-8
    assert np.abs(reduce_elll(H).R).max() == 2.0**19
    plll = reduce_plll(H)
    # no swap is ever triggered, so PLLL leaves H untouched and entries stay bounded
    assert plll.swaps == 0 and plll.igts == 0
    assert np.abs(plll.R).max() == 4.0


def test_pathological_elll_n50_exact_power():
    s = reduce_elll(gen_pathological(50))
    assert np.abs(s.R).max() == 2.0**49


def test_plll_pathological_n50_stable():
    H = gen_pathological(50)
    s = reduce_plll(H)
    assert np.abs(s.R).max() <= 4.0
    assert _residual(H, s) <= 100 * 50 * U


def test_elll_growth_guard_names_entry():
    with pytest.raises(GrowthOverflowError) as err:
        reduce_elll(gen_pathological(80))
    assert err.value.entry is not None


def test_elll_configurable_guard():
    with pytest.raises(GrowthOverflowError) as err:
        reduce_elll(gen_pathological(30), ReductionParams(algorithm="elll", overflow_guard=1e3))
    assert err.value.entry[0] == "R"


@pytest.mark.parametrize("algo", ["lll", "elll", "plll"])
def test_singular_input_raises(algo):
    with pytest.raises(SingularBasisError):
        REDUCERS[algo](np.zeros((2, 2)))


def test_iteration_cap():
    H = gen_type1(10, 0)
    with pytest.raises(IterationLimitError):
        reduce_lll(H, ReductionParams(algorithm="lll", max_iter=3))


@pytest.mark.parametrize("algo", ["lll", "elll", "plll"])
@pytest.mark.parametrize("seed", range(8))
def test_contracts_type1(algo, seed):
    n = 4 + 3 * seed
    H = gen_type1(n, seed)
    s = REDUCERS[algo](H)
    assert s.Z.dtype.kind == "i"
    assert abs(int_det(s.Z)) == 1
    assert np.all(np.tril(s.R, -1) == 0.0)
    assert lovasz_holds(s.R, 0.75)
    if algo == "lll":
        assert size_reduced(s.R, tol=1e-12)
    if algo == "elll":
        assert size_reduced(s.R, tol=1e-12, superdiagonal_only=True)
    if algo != "elll":
        assert _residual(H, s) <= 100 * n * U


@pytest.mark.parametrize("seed", range(5))
def test_plll_never_wastes_an_igt(seed):
    for gen in (gen_type1, gen_type2):
        s = reduce_plll(gen(15, seed))
        assert s.idle_igts == 0
    assert reduce_lll(gen_type1(15, seed)).idle_igts > 0


def test_shared_householder_ablation():
    H = gen_type1(12, 3)
    for algo in ("lll", "elll", "plll"):
        s = reduce(H, ReductionParams(algorithm=algo, qr="householder"))
        assert lovasz_holds(s.R, 0.75)
        assert abs(int_det(s.Z)) == 1


def test_flops_are_counted_into_given_counter():
    fc = FlopCounter(10)
    s = reduce_plll(gen_type1(8, 0), fc=fc)
    assert s.flops == fc.count > 10


def test_elll_babai_residual_matches_lll():
    from plll.ils import babai_point

    rng = np.random.default_rng(11)
    for n in range(2, 13):
        H = gen_type1(n, rng)
        y = H @ rng.integers(-5, 6, n) + 0.3 * rng.standard_normal(n)
        res = []
        for s in (reduce_lll(H), reduce_elll(H)):
            ybar = s.transform(y)
            res.append(np.sum((ybar - s.R @ babai_point(s.R, ybar)) ** 2))
        assert res[1] == pytest.approx(res[0], rel=1e-6)
