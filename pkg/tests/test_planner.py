import math

import pytest
from hypothesis import given, settings, strategies as st

from fpmodmat.block import max_block_size_sw
from fpmodmat.multiword import word_base
from fpmodmat.planner import (CONCAT_THRESHOLD, VARIANTS, ProductPlan, admits, crt_comparison,
                              crt_num_products, mw_block_size, mw_num_products, plan_for_prime,
                              select_variant, variant_bit_limit)
from fpmodmat.primes import largest_prime_with_bits

# largest bit length each variant admits at t = 53
TABLE_LIMITS = {(1, 1): 26, (1, 2): 35, (1, 3): 39, (1, 4): 42, (2, 2): 52, (2, 3): 52}


def test_block_size_examples():
    assert mw_block_size(2, 2, largest_prime_with_bits(52)) == 1
    assert mw_block_size(1, 1, 3) == 2251799813685247 == max_block_size_sw(2, 2, 3)
    assert mw_block_size(2, 3, largest_prime_with_bits(52)) > 1


@settings(max_examples=300, deadline=None)
@given(u=st.integers(1, 4), v=st.integers(1, 4), bits=st.integers(3, 52))
def test_block_size_is_maximal(u, v, bits):
    p = largest_prime_with_bits(bits)
    a = p - 1 if u == 1 else word_base(p, u)
    b = p - 1 if v == 1 else word_base(p, v)
    lam = mw_block_size(u, v, p)
    if lam:
        assert lam * a * b + p - 1 <= 2**53
    assert (lam + 1) * a * b + p - 1 > 2**53


def test_single_word_matches_single_word_block_size():
    for bits in range(3, 30):
        p = largest_prime_with_bits(bits)
        assert mw_block_size(1, 1, p) == max_block_size_sw(p - 1, p - 1, p)


@pytest.mark.parametrize("uv,limit", TABLE_LIMITS.items())
def test_variant_bit_limits(uv, limit):
    assert variant_bit_limit(*uv, 53) == limit


def test_limits_hold_for_actual_primes():
    for (u, v), limit in TABLE_LIMITS.items():
        assert mw_block_size(u, v, largest_prime_with_bits(limit)) >= 1
        if limit < 52:
            assert mw_block_size(u, v, largest_prime_with_bits(limit + 1)) == 0


def test_larger_min_lambda_shifts_limits_down():
    for uv in VARIANTS:
        lo = variant_bit_limit(*uv, 53, min_lambda=512)
        assert lo <= variant_bit_limit(*uv, 53)
    assert variant_bit_limit(1, 1, 53, min_lambda=512) < 26


def test_variant_bit_limit_rejects_zero_words():
    with pytest.raises(ValueError):
        variant_bit_limit(0, 1)


def _selected(bits, dims=(1024, 1024, 1024), **kw):
    plan = select_variant(bits, *dims, **kw)
    return plan.u, plan.v


def test_select_examples():
    assert _selected(20) == (1, 1)
    assert _selected(37) == (1, 3)
    assert _selected(45) == (2, 2)


def test_select_ranges_square():
    expected = {}
    for b in range(1, 27):
        expected[b] = (1, 1)
    for b in range(27, 36):
        expected[b] = (1, 2)
    for b in range(36, 40):
        expected[b] = (1, 3)
    for b in range(40, 53):
        expected[b] = (2, 2)  # 40-42 tie: fewer total words without concatenation
    assert {b: _selected(b) for b in range(1, 53)} == expected


def test_select_tie_goes_to_1_4_when_concatenating():
    dims = (10923, 32768, 32)
    for b in (40, 41, 42):
        plan = select_variant(b, *dims)
        assert (plan.u, plan.v, plan.concat) == (1, 4, "B")
    assert _selected(43, dims) == (2, 2)
    assert _selected(39, dims) == (1, 3)


def test_select_concat_side_a_swaps_words():
    plan = select_variant(41, 32, 32768, 10923)
    assert (plan.u, plan.v, plan.concat) == (4, 1, "A")


def test_select_threshold():
    assert select_variant(30, 300, 300, 300).concat == "none"
    assert select_variant(30, 300, 300, CONCAT_THRESHOLD - 1).concat == "B"
    assert select_variant(20, 10, 10, 10).concat == "none"  # single word: nothing to concatenate


@settings(max_examples=200, deadline=None)
@given(bits=st.integers(1, 52), m=st.integers(1, 2000), k=st.integers(1, 5000),
       n=st.integers(1, 2000), min_lambda=st.sampled_from([1, 2, 16, 512]))
def test_select_plan_is_feasible(bits, m, k, n, min_lambda):
    try:
        plan = select_variant(bits, m, k, n, min_lambda=min_lambda)
    except ValueError:
        assert not any(admits(*uv, bits, 53, min_lambda) for uv in VARIANTS)
        return
    worst = max(2**bits - 1, 2)
    assert plan.lam >= 1
    assert plan.lam <= max(k, 1)
    assert plan.lam <= mw_block_size(plan.u, plan.v, worst)
    assert mw_block_size(plan.u, plan.v, worst) >= min_lambda
    assert bits <= variant_bit_limit(min(plan.u, plan.v), max(plan.u, plan.v))


def test_select_errors():
    with pytest.raises(ValueError, match="unrepresentable"):
        select_variant(53, 10, 10, 10)
    with pytest.raises(ValueError):
        select_variant(0, 10, 10, 10)


def test_plan_for_prime_overrides():
    p = largest_prime_with_bits(41)
    plan = plan_for_prime(p, 100, 100, 100)
    assert (plan.u, plan.v, plan.concat) == (1, 4, "B")
    plan = plan_for_prime(p, 1000, 1000, 1000)
    assert (plan.u, plan.v, plan.concat) == (2, 2, "none")
    assert plan_for_prime(p, 100, 100, 100, concat="off").concat == "none"
    assert plan_for_prime(p, 100, 100, 100, concat="a").concat == "A"
    assert plan_for_prime(p, 1000, 1000, 1000, variant=(2, 3), lam=5).lam == 5
    assert plan_for_prime(p, 1000, 1000, 1000, variant=(2, 3)).lam == 1000  # clamped to k
    assert plan_for_prime(p, 10, 10**7, 10, variant=(2, 3)).lam == mw_block_size(2, 3, p)


def test_plan_cost_model():
    plan = ProductPlan(2, 3, 10, "none", 5, 95, 7)
    assert plan.predicted_products == 6
    assert plan.predicted_reductions == 6 * 5 * 7 * (10 + 2)
    assert plan.storage_entries == 95 * (2 * 5 + 3 * 7) + 35
    assert ProductPlan(2, 3, 10, "B", 5, 95, 7).storage_entries == plan.storage_entries + 3 * 35
    assert ProductPlan(2, 3, 10, "A", 5, 95, 7).storage_entries == plan.storage_entries + 2 * 35
    assert plan.predicted_flops == 2 * 6 * 5 * 95 * 7


# -------------------------------------------------------------------- CRT --

def test_crt_examples():
    assert crt_num_products(40, 32768, 53, 1) == 4
    assert crt_num_products(26, 1024, 53, 512) == 3
    assert crt_num_products(52, 2, 53, 1) == 4


def test_crt_formula_independently():
    for b in range(1, 53):
        for k in (2, 1024, 32768):
            for lam in (1, 512):
                num = 4 * b + 2 * int(math.log2(k))
                den = 53 - int(math.log2(lam))
                assert crt_num_products(b, k, 53, lam) == -(-num // den)


def test_crt_errors():
    with pytest.raises(ValueError):
        crt_num_products(10, 100, 53, 2**53)
    with pytest.raises(ValueError):
        crt_num_products(0, 100)


def test_mw_count_examples():
    assert mw_num_products(30, 53, 1) == (1, 2, 2)
    assert mw_num_products(40, 53, 1) == (2, 2, 4)
    assert mw_num_products(52, 53, 1) == (2, 2, 4)


def test_mw_count_every_bitsize():
    for lam in (1, 512):
        for b in range(1, 53):
            u, v, uv = mw_num_products(b, 53, lam)
            assert uv == u * v
            assert (u + v) * b <= uv * (53 - math.log2(lam))
            assert mw_block_size(u, v, max(2**b - 1, 2)) >= lam


@pytest.mark.parametrize("lam", [1, 512])
def test_mw_never_needs_more_products_with_few_words(lam):
    for k in (2, 1024, 32768):
        for b, s, uv, u, v in crt_comparison(range(27, 53), k, 53, lam):
            if u + v <= 4:
                assert uv <= s


@pytest.mark.parametrize("lam", [1, 512])
def test_comparison_columns_nondecreasing(lam):
    rows = crt_comparison(range(1, 53), 32768, 53, lam)
    for col in (1, 2):
        vals = [r[col] for r in rows]
        assert vals == sorted(vals)


def test_mw_count_rejects_unrepresentable():
    with pytest.raises(ValueError):
        mw_num_products(53)
