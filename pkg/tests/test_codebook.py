import itertools
import math

import pytest

from imisac.codebook import (CodebookError, CodebookSpec, OrderedAssignment, SelectionPattern,
                             assignment_count, binomial, bits_for_selection, bits_to_int, build_lut,
                             floor_log2, int_to_bits, partition_count, rank_assignment,
                             rank_combination, rank_partition, rank_permutation, scheme_rate,
                             unrank_assignment, unrank_combination, unrank_partition,
                             unrank_permutation)


def colex_subsets(k, n):
    """Independent colex order: sort k-subsets by their reversed index tuple."""
    return sorted(itertools.combinations(range(n), k), key=lambda c: tuple(reversed(c)))


def brute_partitions(n, groups):
    size = n // groups
    return [lab for lab in itertools.product(range(groups), repeat=n)
            if all(lab.count(g) == size for g in range(groups))]


def test_binomial_small_values():
    assert binomial(1, 2) == 2
    assert binomial(2, 4) == 6


@pytest.mark.parametrize("n", range(13))
def test_binomial_matches_subset_count(n):
    for k in range(n + 1):
        assert binomial(k, n) == sum(1 for _ in itertools.combinations(range(n), k))


def test_binomial_domain_errors():
    with pytest.raises(CodebookError):
        binomial(3, 2)
    with pytest.raises(CodebookError):
        binomial(1, 63)


def test_bits_for_selection():
    assert bits_for_selection(1, 2) == 1
    assert bits_for_selection(2, 4) == 2
    assert bits_for_selection(5, 5) == 0


@pytest.mark.parametrize("n", range(1, 13))
def test_bits_bracket_count(n):
    for k in range(n + 1):
        b, c = bits_for_selection(k, n), binomial(k, n)
        assert 2**b <= c < 2 ** (b + 1)


def test_unrank_first_colex_subset():
    assert unrank_combination(0, 2, 4).indices == (0, 1)


@pytest.mark.parametrize("n", range(1, 11))
def test_combination_bijection_exhaustive(n):
    for k in range(n + 1):
        oracle = colex_subsets(k, n)
        for r, sub in enumerate(oracle):
            p = unrank_combination(r, k, n, full=True)
            assert p.indices == sub
            assert rank_combination(p, full=True) == r
        limit = 1 << bits_for_selection(k, n)
        for r in range(limit):
            assert rank_combination(unrank_combination(r, k, n)) == r


def test_combination_rank_out_of_range():
    with pytest.raises(CodebookError):
        unrank_combination(4, 2, 4)
    with pytest.raises(CodebookError):
        rank_combination(SelectionPattern((2, 3), 4))  # colex rank 5 is not a codeword


def test_permutation_examples():
    assert unrank_permutation(0, 3) == (0, 1, 2)
    assert rank_permutation((1, 0, 2)) == 2


@pytest.mark.parametrize("k", range(1, 8))
def test_permutation_bijection_exhaustive(k):
    for r, perm in enumerate(itertools.permutations(range(k))):
        assert unrank_permutation(r, k, full=True) == perm
        assert rank_permutation(perm, full=True) == r
    with pytest.raises(CodebookError):
        unrank_permutation(1 << floor_log2(math.factorial(k)), k)


@pytest.mark.parametrize("k,n", [(1, 3), (2, 3), (2, 4), (3, 5), (4, 4)])
def test_assignment_bijection(k, n):
    seen = set()
    for r in range(assignment_count(k, n)):
        a = unrank_assignment(r, k, n, full=True)
        assert rank_assignment(a, full=True) == r
        assert OrderedAssignment.from_items(a.items(), n) == a
        seen.add(a.items())
    assert seen == set(itertools.permutations(range(n), k))


@pytest.mark.parametrize("n,groups", [(4, 2), (6, 3), (6, 2), (4, 4), (3, 1)])
def test_partition_bijection(n, groups):
    oracle = brute_partitions(n, groups)
    assert partition_count(n, groups) == len(oracle)
    labels = [unrank_partition(r, n, groups) for r in range(len(oracle))]
    assert sorted(labels) == sorted(oracle)
    assert [rank_partition(lab, groups) for lab in labels] == list(range(len(oracle)))


def test_bit_packing_big_endian():
    assert bits_to_int([1, 0, 1]) == 5
    assert list(int_to_bits(5, 4)) == [0, 1, 0, 1]
    with pytest.raises(CodebookError):
        int_to_bits(16, 4)


def test_build_lut():
    lut = build_lut(CodebookSpec(1, 2))
    assert [p.indices for p in lut] == [(0,), (1,)]
    lut = build_lut(CodebookSpec(2, 4))
    assert [p.indices for p in lut] == colex_subsets(2, 4)[:4]
    lut = build_lut(CodebookSpec(3, 8))
    assert all(p == unrank_combination(i, 3, 8) for i, p in enumerate(lut))
    assert len({p.indices for p in lut}) == len(lut)
    with pytest.raises(MemoryError):
        build_lut(CodebookSpec(20, 60))


def test_rate_worked_examples():
    r = scheme_rate("frac", N=8, N_s=2, K=4, M=4)
    assert (r.nominal_bits, r.exact_bits) == (11, 11)
    assert r.groups == {"phase": 4, "frequency": 2, "antenna": 4, "permutation": 1}
    r = scheme_rate("fh", H=2, N=2, K=3)
    assert (r.nominal_bits, r.exact_bits) == (8, 8)
    r = scheme_rate("majorcom", N=4, K=8)
    assert (r.nominal_bits, r.exact_bits) == (12, 10)
    r = scheme_rate("spim", L_C=2, L_s=1)
    assert (r.nominal_bits, r.exact_bits) == (1, 1)
    r = scheme_rate("grouped", N=4, K=4, G=2)
    assert (r.nominal_bits, r.exact_bits) == (8, 5)
    assert scheme_rate("antenna", N=8, N_s=4, M=4).exact_bits == 14


def test_rate_exact_matches_enumeration():
    # majorcom distinct: count ordered tuples of distinct slots
    for N, K in [(2, 3), (3, 4), (4, 8), (2, 6)]:
        count = sum(1 for _ in itertools.permutations(range(K), N))
        assert scheme_rate("majorcom", N=N, K=K).exact_bits == floor_log2(count)
    for N, K in [(2, 3), (3, 3)]:
        count = sum(1 for _ in itertools.product(range(K), repeat=N))
        assert scheme_rate("majorcom", N=N, K=K, reuse=True).exact_bits == floor_log2(count)
    # grouped: (chosen slots) x (equal labelled partitions)
    for N, K, G in [(4, 4, 2), (6, 4, 3), (4, 3, 1), (6, 5, 2)]:
        count = math.comb(K, G) * len(brute_partitions(N, G))
        assert scheme_rate("grouped", N=N, K=K, G=G).exact_bits == floor_log2(count)
    assert scheme_rate("grouped", N=4, K=4, G=2).exact_bits == 5


def test_rate_exact_not_above_nominal():
    for N, K in [(2, 3), (3, 5), (4, 8), (5, 7)]:
        r = scheme_rate("majorcom", N=N, K=K)
        assert r.exact_bits <= r.nominal_bits
    for N, K, G in [(4, 4, 2), (6, 4, 3), (6, 6, 2)]:
        r = scheme_rate("grouped", N=N, K=K, G=G)
        assert r.exact_bits <= r.nominal_bits


@pytest.mark.parametrize("scheme,params", [
    ("frac", dict(N=2, N_s=3, K=4)),
    ("frac", dict(N=8, N_s=3, K=2)),
    ("majorcom", dict(N=5, K=4)),
    ("grouped", dict(N=5, K=4, G=2)),
    ("fh", dict(H=1, N=4, K=3)),
    ("subcarrier", dict(K=4, K_s=2, M=3)),
    ("spim", dict(L_C=2, L_s=3)),
])
def test_rate_rejects_invalid(scheme, params):
    with pytest.raises(CodebookError):
        scheme_rate(scheme, **params)


def test_rate_unknown_scheme():
    with pytest.raises(CodebookError):
        scheme_rate("nonsense")
