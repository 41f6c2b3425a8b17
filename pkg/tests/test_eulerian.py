from fractions import Fraction

import pytest

from opnlab.arith import sigma_of
from opnlab.errors import CandidateRejected
from opnlab.eulerian import (
    EulerianCandidate,
    index_report,
    perfection_oracle,
    rejection_reasons,
    sigma_prime_power,
    validate_candidate,
)
from opnlab.scan import ScanConfig, enumerate_candidates

from oracles import divisor_sum, naive_valid


def test_validate_accepts_17_1_5():
    c = validate_candidate(17, 1, 5)
    assert c.N == 425 and c.pk == 17


@pytest.mark.parametrize(
    "triple, code",
    [((13, 2, 3), "BadExponent"), ((7, 1, 3), "BadResidue"), ((21, 1, 5), "NotPrime"),
     ((5, 1, 15), "NotCoprime"), ((5, 1, 4), "EvenM"), ((5, -3, 3), "BadExponent")],
)  # fmt: skip
def test_validate_rejections(triple, code):
    with pytest.raises(CandidateRejected) as info:
        validate_candidate(*triple)
    assert code in info.value.codes


def test_rejection_lists_every_failure():
    with pytest.raises(CandidateRejected) as info:
        validate_candidate(9, 2, 6)
    assert info.value.codes == ["NotPrime", "BadExponent", "NotCoprime", "EvenM"]


def test_validate_matches_naive_checker():
    for p in range(0, 1001):
        for k in range(-1, 10):
            for m in range(0, 100):
                assert (not rejection_reasons(p, k, m)) == naive_valid(p, k, m), (p, k, m)


def test_index_report_5_1_3():
    idx = index_report(validate_candidate(5, 1, 3))
    assert (idx.e1, idx.e2, idx.e3, idx.e4, idx.e5) == (Fraction(13, 5), 3, 5, 2, 1)
    assert not idx.all_agree and not idx.perfection_equivalent
    assert idx.degenerate == ()


def test_index_report_m_equals_one_is_degenerate():
    idx = index_report(validate_candidate(5, 1, 1))
    assert idx.e1 == Fraction(1, 5) and idx.e2 == Fraction(1, 3)
    assert idx.e4 == 0
    assert "m_equals_one" in idx.degenerate


@pytest.mark.parametrize("triple", [(17, 1, 5), (5, 1, 3), (13, 1, 1)])
def test_perfection_oracle_examples(triple):
    c = validate_candidate(*triple)
    assert perfection_oracle(c) is False
    assert divisor_sum(c.N) != 2 * c.N


def test_sigma_425():
    assert sigma_of(425) == 18 * 31 == 558


def test_descartes_spoof_index_chain():
    c = validate_candidate(22021, 1, 3003, {22021})
    assert c.N == 198585576189
    assert perfection_oracle(c)
    idx = index_report(c)
    assert idx.perfection_equivalent and idx.all_agree
    assert idx.e1 == idx.e5 == 819
    # Without the pretense the same triple is an ordinary non-perfect number.
    assert not perfection_oracle(EulerianCandidate(22021, 1, 3003))


def test_index_chain_on_enumerated_candidates():
    """e1 = e2 <=> sigma(p^k) sigma(m^2) = 2 p^k m^2 <=> sigma(N) = 2N, on every candidate."""
    count = 0
    for c in enumerate_candidates(ScanConfig(m_max=61, pk_max=3000, require_positive_gap=False)):
        idx = index_report(c)
        product_form = sigma_prime_power(c.p, c.k) * idx.sigma_m2 == 2 * c.N
        oracle = perfection_oracle(c)
        assert idx.perfection_equivalent == product_form == oracle
        assert idx.sigma_m2 == divisor_sum(c.m * c.m)
        if oracle:  # never at this scale; the implication must still hold
            assert idx.e1.denominator == 1 and idx.e1 == idx.e5
        count += 1
    assert count > 5000

