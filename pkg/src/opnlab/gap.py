"""The gap m^2 - p^k = 2^r * t: decomposition, six-way case split, proof routes, battery.

Everything here is exact integer or Fraction arithmetic. Predicates about
odd perfect numbers are evaluated as necessary conditions: a failure
certifies that N is not perfect, a pass proves nothing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .eulerian import EulerianCandidate, sigma_m_squared
from .errors import (
    InconsistentInputs,
    MEqualsPowerOfTwo,
    MEqualsT,
    NonPositiveGap,
    SquareGap,
)

# Known lower bound on m for a genuine odd perfect number. Reported only:
# every candidate a scan can reach lies far below it.
M_LOWER_BOUND = "10^375"


def two_adic_valuation(n: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    return (n & -n).bit_length() - 1


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


@dataclass(frozen=True)
class GapDecomposition:
    gap: int
    r: int
    t: int

    def __post_init__(self):
        if self.gap != (self.t << self.r) or self.t % 2 == 0 or self.r < 2:
            raise ValueError(f"bad decomposition {self.gap} = 2^{self.r} * {self.t}")
        # t odd and r >= 2 rule out t == 2^r.
        assert self.t != 1 << self.r

    @property
    def two_r(self) -> int:
        return 1 << self.r


def decompose(gap: int) -> GapDecomposition:
    if gap <= 0:
        raise NonPositiveGap(f"gap {gap} is not positive")
    r = two_adic_valuation(gap)
    return GapDecomposition(gap, r, gap >> r)


def gap_decompose(c: EulerianCandidate) -> GapDecomposition:
    gap = c.m * c.m - c.pk
    if gap <= 0:
        raise NonPositiveGap(f"m^2 - p^k = {c.m * c.m} - {c.pk} = {gap} <= 0 for (p, k, m) = ({c.p}, {c.k}, {c.m})")
    return decompose(gap)


class Case(enum.IntEnum):
    """Strict orderings of m, t and 2^r."""

    CASE1 = 1  # m > t > 2^r
    CASE2 = 2  # m > 2^r > t
    CASE3 = 3  # t > m > 2^r
    CASE4 = 4  # 2^r > m > t
    CASE5 = 5  # t > 2^r > m
    CASE6 = 6  # 2^r > t > m

    @property
    def ordering(self) -> str:
        return _ORDERINGS[self]


_ORDERINGS = {
    Case.CASE1: "m > t > 2^r",
    Case.CASE2: "m > 2^r > t",
    Case.CASE3: "t > m > 2^r",
    Case.CASE4: "2^r > m > t",
    Case.CASE5: "t > 2^r > m",
    Case.CASE6: "2^r > t > m",
}


def classify_case(m: int, d: GapDecomposition) -> Case:
    t, tr = d.t, d.two_r
    if m == t:
        raise MEqualsT(f"m = t = {m}: m would divide p^k")
    if m == tr:
        raise MEqualsPowerOfTwo(f"m = 2^{d.r} = {m}: m must be odd")
    if m > t and m > tr:
        return Case.CASE1 if t > tr else Case.CASE2
    if m < t and m < tr:
        return Case.CASE5 if t > tr else Case.CASE6
    return Case.CASE3 if t > m else Case.CASE4


class Conclusion(str, enum.Enum):
    PROVEN_M_LT_PK = "m<p^k"
    PROVEN_PK_LT_M = "p^k<m"
    IMPOSSIBLE = "impossible"
    OPEN = "open"


@dataclass(frozen=True)
class SubtractionRoute:
    """Subtract q^2 (q = t in Case 1, q = 2^r in Case 2) from both sides.

    (m + q)(m - q) = p^k - q(q - other), so (m + q) divides the right side
    and m < m + q <= p^k - q(q - other) < p^k.
    """

    q: int
    other: int
    lhs: int
    dividend: int
    divides: bool
    chain_holds: bool

    @property
    def concludes(self) -> bool:
        return self.divides and self.chain_holds


@dataclass(frozen=True)
class SignRoute:
    """Sign of a product like (m - t)(m + 2^r) bounds p^k against m|2^r - t|."""

    product: str
    product_sign: int
    bound: int  # m * |2^r - t|
    pk_above_bound: bool


@dataclass(frozen=True)
class ContraryCheck:
    """Cases 3/4: p^k < m would force 2m < 2^r + t + 1. Reported, never used."""

    lhs: int  # 2m
    rhs: int  # 2^r + t + 1
    holds: bool
    pk_upper_bound: int  # m (2^r + t), bound from (m - t)(m - 2^r) < 0
    pk_below_upper_bound: bool

    @property
    def refutes_pk_lt_m(self) -> bool:
        return not self.holds


@dataclass(frozen=True)
class ImplicationVerdict:
    case: Case
    conclusion: Conclusion
    abs_diff_one: bool
    proof_variant_agreement: bool
    sign_route: SignRoute
    subtraction_route: SubtractionRoute | None = None
    sandwich: tuple[int, int] | None = None
    sandwich_holds: bool | None = None
    contrary: ContraryCheck | None = None


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def derive_verdict(m: int, pk: int, d: GapDecomposition, label: Case) -> ImplicationVerdict:
    t, tr = d.t, d.two_r
    if pk != m * m - tr * t:
        raise InconsistentInputs(f"p^k = {pk} but m^2 - 2^r t = {m * m - tr * t}")
    if label != classify_case(m, d):
        raise InconsistentInputs(f"{label!r} does not match the ordering of m={m}, t={t}, 2^r={tr}")

    diff = abs(tr - t)
    abs_diff_one = diff == 1
    bound = m * diff

    if label in (Case.CASE1, Case.CASE2):
        q, other = (t, tr) if label is Case.CASE1 else (tr, t)
        lhs = (m + q) * (m - q)
        dividend = pk - q * (q - other)
        sub = SubtractionRoute(
            q=q,
            other=other,
            lhs=lhs,
            dividend=dividend,
            divides=lhs == dividend and dividend > 0 and dividend % (m + q) == 0,
            chain_holds=m < m + q <= dividend < pk,
        )
        if label is Case.CASE1:
            sign = SignRoute("(m - t)(m + 2^r)", _sign((m - t) * (m + tr)), bound, pk > bound)
        else:
            sign = SignRoute("(m - 2^r)(m + t)", _sign((m - tr) * (m + t)), bound, pk > bound)
        # p^k > m|2^r - t| >= m.
        sign_concludes = sign.product_sign > 0 and sign.pk_above_bound and diff >= 1
        return ImplicationVerdict(
            case=label,
            conclusion=Conclusion.PROVEN_M_LT_PK,
            abs_diff_one=abs_diff_one,
            proof_variant_agreement=sub.concludes and sign_concludes and m < pk,
            sign_route=sign,
            subtraction_route=sub,
        )

    if label in (Case.CASE3, Case.CASE4):
        if label is Case.CASE3:
            sign = SignRoute("(m + 2^r)(m - t)", _sign((m + tr) * (m - t)), bound, pk > bound)
        else:
            sign = SignRoute("(m - 2^r)(m + t)", _sign((m - tr) * (m + t)), bound, pk > bound)
        lo, hi = min(tr, t), max(tr, t)
        upper = m * (tr + t)
        contrary = ContraryCheck(
            lhs=2 * m,
            rhs=tr + t + 1,
            holds=2 * m < tr + t + 1,
            pk_upper_bound=upper,
            pk_below_upper_bound=pk < upper,
        )
        # Both routes only bound p^k from above here.
        agreement = sign.product_sign < 0 and pk < bound and contrary.pk_below_upper_bound
        return ImplicationVerdict(
            case=label,
            conclusion=Conclusion.PROVEN_PK_LT_M if abs_diff_one else Conclusion.OPEN,
            abs_diff_one=abs_diff_one,
            proof_variant_agreement=agreement,
            sign_route=sign,
            sandwich=(lo, hi),
            sandwich_holds=lo < m < hi,
            contrary=contrary,
        )

    # Cases 5 and 6: m below both t and 2^r gives m^2 < 2^r t, i.e. p^k < 0.
    sign = SignRoute("(m - t)(m - 2^r)", _sign((m - t) * (m - tr)), bound, pk > bound)
    return ImplicationVerdict(
        case=label,
        conclusion=Conclusion.IMPOSSIBLE,
        abs_diff_one=abs_diff_one,
        proof_variant_agreement=m * m < tr * t and pk < 0,
        sign_route=sign,
    )


@dataclass(frozen=True)
class InstanceCheck:
    m: int
    pk: int
    lhs: int  # (m + q)(m - q)
    rhs: int  # p^k - surplus
    identity_holds: bool
    side_condition_holds: bool  # m > q
    divides: bool
    concludes_m_lt_pk: bool


@dataclass(frozen=True)
class NearestSquareArgument:
    """Subtract q^2, the smallest square above the gap: (m+q)(m-q) = p^k - surplus.

    The divisibility (m + q) | (p^k - surplus), and with it m < p^k, only
    follows when m > q. Dropping that side condition is exactly the
    mistake this record keeps visible.
    """

    gap: int
    q: int
    surplus: int
    side_condition: str = "m > q"
    conclusion: str = "m < p^k when the side condition holds"
    instance: InstanceCheck | None = None


def nearest_square_argument(
    gap: int, *, m: int | None = None, pk: int | None = None, allow_square: bool = False
) -> NearestSquareArgument:
    """Materialize the nearest-square argument for ``gap``; optionally check it on (m, p^k).

    Square gaps raise SquareGap unless ``allow_square`` is set.
    """
    if gap < 1:
        raise NonPositiveGap(f"gap {gap} must be >= 1")
    if is_square(gap) and not allow_square:
        raise SquareGap(f"gap {gap} = {isqrt(gap)}^2 is a perfect square")
    q = isqrt(gap) + 1
    surplus = q * q - gap
    instance = None
    if m is not None:
        if pk is None:
            pk = m * m - gap
        if m * m - pk != gap:
            raise InconsistentInputs(f"m^2 - p^k = {m * m - pk}, not {gap}")
        lhs, rhs = (m + q) * (m - q), pk - surplus
        side = m > q
        divides = rhs > 0 and rhs % (m + q) == 0
        instance = InstanceCheck(
            m=m,
            pk=pk,
            lhs=lhs,
            rhs=rhs,
            identity_holds=lhs == rhs,
            side_condition_holds=side,
            divides=divides,
            concludes_m_lt_pk=side and divides and m + q <= rhs < pk,
        )
    return NearestSquareArgument(gap, q, surplus, instance=instance)


@dataclass(frozen=True)
class Predicate:
    name: str
    holds: bool
    witness: dict
    # "necessary": fails only if N is not an odd perfect number.
    # "conjectural": an open conjecture, reported but never a certificate.
    kind: str = "necessary"


@dataclass(frozen=True)
class PredicateReport:
    entries: tuple[Predicate, ...]
    bounds: dict

    def __getitem__(self, name: str) -> Predicate:
        for entry in self.entries:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def holds(self, name: str) -> bool:
        return self[name].holds

    @property
    def failed(self) -> list[str]:
        return [e.name for e in self.entries if e.kind == "necessary" and not e.holds]

    @property
    def certifies_non_perfection(self) -> bool:
        return bool(self.failed)


PREDICATE_NAMES = (
    "gap_mod_4",
    "gap_at_least_4",
    "gap_not_square",
    "gap_gt_2m",
    "gap_gt_m2_over_3",
    "pk_lt_two_thirds_m2",
    "sigma_ratio_ge_7",
    "pk_ne_2m_minus_1",
    "m4_gt_n",
    "p_lt_m",
    "pk_lt_m",
)


def theorem_battery(c: EulerianCandidate, sigma_m2: int | None = None) -> PredicateReport:
    """Evaluate every necessary condition on the candidate, with exact witnesses."""
    m, p, pk = c.m, c.p, c.pk
    m2 = m * m
    gap = m2 - pk
    if gap <= 0:
        raise NonPositiveGap(f"m^2 - p^k = {gap} <= 0 for (p, k, m) = ({c.p}, {c.k}, {c.m})")
    if sigma_m2 is None:
        sigma_m2 = sigma_m_squared(m, c.pretend_primes)
    root = isqrt(gap)
    n = pk * m2
    entries = (
        Predicate("gap_mod_4", gap % 4 == 0, {"gap": gap, "gap_mod_4": gap % 4}),
        Predicate("gap_at_least_4", gap >= 4, {"gap": gap}),
        Predicate("gap_not_square", root * root != gap, {"gap": gap, "isqrt": root, "isqrt_squared": root * root}),
        Predicate("gap_gt_2m", gap > 2 * m, {"gap": gap, "two_m": 2 * m}),
        Predicate("gap_gt_m2_over_3", 3 * gap > m2, {"gap": gap, "m2_over_3": Fraction(m2, 3)}),
        Predicate("pk_lt_two_thirds_m2", 3 * pk < 2 * m2, {"pk": pk, "two_thirds_m2": Fraction(2 * m2, 3)}),
        Predicate(
            "sigma_ratio_ge_7",
            sigma_m2 >= 7 * pk,
            {"sigma_m2": sigma_m2, "pk": pk, "ratio": Fraction(sigma_m2, pk)},
        ),
        Predicate("pk_ne_2m_minus_1", pk != 2 * m - 1, {"pk": pk, "two_m_minus_1": 2 * m - 1}),
        Predicate("m4_gt_n", m2 * m2 > n, {"m4": m2 * m2, "N": n}),
        Predicate("p_lt_m", p < m, {"p": p, "m": m}),
        Predicate("pk_lt_m", pk < m, {"pk": pk, "m": m}, kind="conjectural"),
    )
    report = PredicateReport(
        entries,
        bounds={
            "gap_lower_bound_2m": 2 * m,
            "gap_lower_bound_m2_over_3": Fraction(m2, 3),
            "m_lower_bound": M_LOWER_BOUND,
            "m_lower_bound_enforced": False,
        },
    )
    # p^k < 2m^2/3 gives m^2 - p^k > m^2/3 by subtraction.
    assert not report.holds("pk_lt_two_thirds_m2") or report.holds("gap_gt_m2_over_3")
    return report


@dataclass(frozen=True)
class GapAnalysis:
    candidate: EulerianCandidate
    decomposition: GapDecomposition
    case: Case
    verdict: ImplicationVerdict
    battery: PredicateReport


def analyze(c: EulerianCandidate, sigma_m2: int | None = None) -> GapAnalysis:
    d = gap_decompose(c)
    case = classify_case(c.m, d)
    return GapAnalysis(
        c, d, case, derive_verdict(c.m, c.pk, d, case), theorem_battery(c, sigma_m2)
    )
