"""Exhaustive scans over Eulerian candidates (p, k, m).

The per-record arithmetic is inlined in ``_scan_block`` because the
acceptance range has about seven million candidates; with ``audit=True``
every record is additionally re-derived through :func:`opnlab.gap.analyze`
and any disagreement is reported as a violation.
"""

from __future__ import annotations

import multiprocessing
from bisect import bisect_left
from dataclasses import dataclass, field, fields
from math import isqrt
from typing import IO, Iterator

from .arith import is_prime, prime_sieve
from .errors import InvalidScanConfig, OpnError
from .eulerian import EulerianCandidate, sigma_m_squared
from .gap import Case, Conclusion, analyze

# Largest m_max^2 for which t-primality comes from a sieve instead of Miller-Rabin.
T_SIEVE_LIMIT = 50_000_000

CSV_COLUMNS = (
    "p", "k", "m", "pk", "gap", "r", "t", "case", "verdict",
    "abs_diff_one", "t_mersenne", "t_prime", "sandwich_lo", "sandwich_hi",
    "gap_not_square", "gap_gt_2m", "gap_gt_m2_over_3", "sigma_ratio_ge_7",
    "pk_ne_2m_minus_1",
)  # fmt: skip

INVERTED = "inverted"


@dataclass(frozen=True)
class ScanConfig:
    m_max: int
    pk_max: int
    require_positive_gap: bool = True
    workers: int = 1
    audit: bool = False
    block_size: int = 16  # odd m values per work unit

    def __post_init__(self):
        problems = []
        if self.m_max < 1:
            problems.append(f"m_max must be >= 1, got {self.m_max}")
        if self.pk_max < 5:
            problems.append(f"pk_max must be >= 5, got {self.pk_max}")
        if self.workers < 1:
            problems.append(f"workers must be >= 1, got {self.workers}")
        if self.block_size < 1:
            problems.append(f"block_size must be >= 1, got {self.block_size}")
        if problems:
            raise InvalidScanConfig("; ".join(problems))


@dataclass(frozen=True)
class ScanRecord:
    p: int
    k: int
    m: int
    pk: int
    gap: int
    r: int | None
    t: int | None
    case: int | None
    verdict: str
    abs_diff_one: bool | None
    t_mersenne: bool | None  # t == 2^r - 1
    t_prime: bool | None
    sandwich_lo: int | None
    sandwich_hi: int | None
    gap_not_square: bool
    gap_gt_2m: bool
    gap_gt_m2_over_3: bool
    sigma_ratio_ge_7: bool
    pk_ne_2m_minus_1: bool
    sandwich_holds: bool | None = None

    @property
    def regime(self) -> str:
        return INVERTED if self.verdict == INVERTED else "standard"

    def csv_row(self) -> str:
        return _csv_line(tuple(getattr(self, c) for c in CSV_COLUMNS))


@dataclass
class ScanSummary:
    total_candidates: int = 0
    per_case: dict[int, int] = field(default_factory=lambda: {c: 0 for c in range(1, 7)})
    proven_m_lt_pk: int = 0
    proven_pk_lt_m: int = 0
    impossible: int = 0
    open: int = 0
    abs_diff_one: int = 0
    t_mersenne: int = 0
    t_prime: int = 0
    conjecture_holds: int = 0  # t == 2^r - 1 and t prime
    conjecture_fails: int = 0
    inverted: int = 0
    gap_8_or_40: int = 0
    gap_8_or_40_m_lt_pk: int = 0
    violations: list[dict] = field(default_factory=list)

    def merge(self, other: ScanSummary) -> None:
        for f in fields(self):
            if f.name == "per_case":
                for c, v in other.per_case.items():
                    self.per_case[c] += v
            elif f.name == "violations":
                self.violations.extend(other.violations)
            else:
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def check_counts(self) -> bool:
        standard = self.total_candidates - self.inverted
        return (
            sum(self.per_case.values()) == standard
            and self.proven_m_lt_pk + self.proven_pk_lt_m + self.impossible + self.open == standard
            and self.conjecture_holds + self.conjecture_fails == standard
        )

    @property
    def ok(self) -> bool:
        return not self.violations


def _csv_line(values) -> str:
    out = []
    for v in values:
        if v is None:
            out.append("")
        elif v is True:
            out.append("true")
        elif v is False:
            out.append("false")
        else:
            out.append(str(v))
    return ",".join(out)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


class _Context:
    """Per-process lookup tables for one config."""

    def __init__(self, cfg: ScanConfig):
        self.cfg = cfg
        bound = cfg.pk_max
        if cfg.require_positive_gap:
            bound = min(bound, max(5, cfg.m_max * cfg.m_max - 1))
        sieve = prime_sieve(bound)
        entries = []
        for p in range(5, bound + 1, 4):
            if sieve[p]:
                pk, k = p, 1
                while pk <= bound:
                    entries.append((p, k, pk))
                    pk *= p**4
                    k += 4
        self.entries = entries
        self.primes = [e[0] for e in entries]
        t_bound = cfg.m_max * cfg.m_max
        self.t_sieve = prime_sieve(t_bound) if t_bound <= T_SIEVE_LIMIT else None


_CTX: _Context | None = None


def _context(cfg: ScanConfig) -> _Context:
    global _CTX
    if _CTX is None or _CTX.cfg != cfg:
        _CTX = _Context(cfg)
    return _CTX


def _triples(ctx: _Context, m: int) -> Iterator[tuple[int, int, int]]:
    m2 = m * m
    entries = ctx.entries
    hi = bisect_left(ctx.primes, m2) if ctx.cfg.require_positive_gap else len(entries)
    for i in range(hi):
        p, k, pk = entries[i]
        if m % p and (pk < m2 or not ctx.cfg.require_positive_gap):
            yield p, k, pk


def _m_values(cfg: ScanConfig) -> list[int]:
    return list(range(1, cfg.m_max + 1, 2))


def enumerate_candidates(cfg: ScanConfig) -> Iterator[EulerianCandidate]:
    """Every valid candidate in range exactly once, ordered by (m, p, k)."""
    ctx = _context(cfg)
    for m in _m_values(cfg):
        for p, k, _ in _triples(ctx, m):
            yield EulerianCandidate(p, k, m)


class ScanFailure(OpnError):
    code = "ScanFailure"

    def __init__(self, triple, cause):
        self.triple = triple
        super().__init__(f"{type(cause).__name__} at (p, k, m) = {triple}: {cause}")


def _violation(p, k, m, reason):
    return {"p": p, "k": k, "m": m, "reason": reason}


def _scan_block(args) -> tuple[list, ScanSummary]:
    cfg, ms = args
    ctx = _context(cfg)
    rows = []
    s = ScanSummary()
    per_case = s.per_case
    bad = s.violations
    t_sieve = ctx.t_sieve
    for m in ms:
        m2 = m * m
        try:
            s_m2 = sigma_m_squared(m)
        except OpnError as exc:
            raise ScanFailure((None, None, m), exc) from exc
        for p, k, pk in _triples(ctx, m):
            s.total_candidates += 1
            gap = m2 - pk
            root = isqrt(gap) if gap >= 0 else -1
            battery = (
                root * root != gap,
                gap > 2 * m,
                3 * gap > m2,
                s_m2 >= 7 * pk,
                pk != 2 * m - 1,
            )
            if gap <= 0:
                s.inverted += 1
                rows.append((p, k, m, pk, gap, None, None, None, INVERTED,
                             None, None, None, None, None) + battery)  # fmt: skip
                continue

            tr = gap & -gap
            r = tr.bit_length() - 1
            t = gap >> r
            # Independent halving loop for the 2-adic valuation.
            v, g = 0, gap
            while g % 2 == 0:
                g //= 2
                v += 1
            if v != r or g != t:
                bad.append(_violation(p, k, m, f"valuation mismatch {v} != {r}"))
            if r < 2:
                bad.append(_violation(p, k, m, f"r = {r} < 2"))
            if (p % 8 == 5 and r != 2) or (p % 8 == 1 and r < 3):
                bad.append(_violation(p, k, m, f"2-adic refinement fails: p = {p} mod 8, r = {r}"))
            if m == t or m == tr:
                bad.append(_violation(p, k, m, f"m coincides with t or 2^r (t={t}, 2^r={tr})"))
                continue

            diff = tr - t if tr > t else t - tr
            lo = hi = None
            if m > t and m > tr:
                case = 1 if t > tr else 2
                q, other = (t, tr) if case == 1 else (tr, t)
                dividend = pk - q * (q - other)
                subtraction = (
                    (m + q) * (m - q) == dividend
                    and dividend > 0
                    and dividend % (m + q) == 0
                    and m < m + q <= dividend < pk
                )
                if not (subtraction and pk > m * diff and m < pk):
                    bad.append(_violation(p, k, m, f"case {case} proof routes disagree or m >= p^k"))
                verdict = Conclusion.PROVEN_M_LT_PK.value
                s.proven_m_lt_pk += 1
            elif m < t and m < tr:
                case = 5 if t > tr else 6
                bad.append(_violation(p, k, m, f"case {case} reached with positive gap"))
                verdict = Conclusion.IMPOSSIBLE.value
                s.impossible += 1
            else:
                case = 3 if t > m else 4
                lo, hi = (tr, t) if tr < t else (t, tr)
                if not lo < m < hi:
                    bad.append(_violation(p, k, m, f"sandwich {lo} < {m} < {hi} fails"))
                if not (pk < m * diff and pk < m * (tr + t)):
                    bad.append(_violation(p, k, m, "case 3/4 upper bounds fail"))
                if diff == 1:
                    if not pk < m:
                        bad.append(_violation(p, k, m, "|2^r - t| = 1 but p^k >= m"))
                    verdict = Conclusion.PROVEN_PK_LT_M.value
                    s.proven_pk_lt_m += 1
                else:
                    verdict = Conclusion.OPEN.value
                    s.open += 1
            per_case[case] += 1

            mersenne = t == tr - 1
            t_prime = bool(t_sieve[t]) if t_sieve is not None else is_prime(t)
            s.abs_diff_one += diff == 1
            s.t_mersenne += mersenne
            s.t_prime += t_prime
            if mersenne and t_prime:
                s.conjecture_holds += 1
            else:
                s.conjecture_fails += 1
            if gap == 8 or gap == 40:
                s.gap_8_or_40 += 1
                s.gap_8_or_40_m_lt_pk += m < pk

            row = (p, k, m, pk, gap, r, t, case, verdict,
                   diff == 1, mersenne, t_prime, lo, hi) + battery  # fmt: skip
            rows.append(row)
            if cfg.audit:
                for reason in _audit(row, s_m2):
                    bad.append(_violation(p, k, m, reason))
    return rows, s


def _audit(row, s_m2) -> list[str]:
    """Re-derive a row through the reference gap-analysis path."""
    p, k, m = row[:3]
    try:
        a = analyze(EulerianCandidate(p, k, m), sigma_m2=s_m2)
    except OpnError as exc:
        return [f"reference path raised {exc.code}: {exc}"]
    v = a.verdict
    sandwich = v.sandwich or (None, None)
    b = a.battery
    expected = (
        p, k, m, a.candidate.pk, a.decomposition.gap, a.decomposition.r, a.decomposition.t,
        int(a.case), v.conclusion.value, v.abs_diff_one,
        a.decomposition.t == a.decomposition.two_r - 1, is_prime(a.decomposition.t),
        sandwich[0], sandwich[1],
        b.holds("gap_not_square"), b.holds("gap_gt_2m"), b.holds("gap_gt_m2_over_3"),
        b.holds("sigma_ratio_ge_7"), b.holds("pk_ne_2m_minus_1"),
    )  # fmt: skip
    problems = []
    if tuple(expected) != tuple(row):
        problems.append(f"kernel row {row} != reference {expected}")
    if not v.proof_variant_agreement:
        problems.append("reference proof routes disagree")
    if v.sandwich_holds is False:
        problems.append("reference sandwich fails")
    if a.case in (Case.CASE5, Case.CASE6):
        problems.append("reference reached case 5/6")
    return problems


def _record(row) -> ScanRecord:
    rec = ScanRecord(*row)
    if rec.sandwich_lo is not None:
        rec = ScanRecord(*row, sandwich_holds=rec.sandwich_lo < rec.m < rec.sandwich_hi)
    return rec


def _blocks(cfg: ScanConfig):
    ms = _m_values(cfg)
    for i in range(0, len(ms), cfg.block_size):
        yield cfg, ms[i : i + cfg.block_size]


def _run_blocks(cfg: ScanConfig, consume) -> ScanSummary:
    """Feed each block's rows to ``consume`` in (m, p, k) order; return the merged summary."""
    summary = ScanSummary()
    if cfg.workers == 1:
        results = map(_scan_block, _blocks(cfg))
        for rows, part in results:
            consume(rows)
            summary.merge(part)
        return summary
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(cfg.workers) as pool:
        # imap keeps block order, so output is independent of the worker count.
        for rows, part in pool.imap(_scan_block, _blocks(cfg)):
            consume(rows)
            summary.merge(part)
    return summary


def run_scan(cfg: ScanConfig) -> tuple[list[ScanRecord], ScanSummary]:
    records: list[ScanRecord] = []
    summary = _run_blocks(cfg, lambda rows: records.extend(map(_record, rows)))
    assert summary.check_counts()
    return records, summary


def scan_to_csv(cfg: ScanConfig, out: IO[str]) -> ScanSummary:
    """Stream the scan as CSV (fixed header) into ``out``."""
    out.write(csv_header() + "\n")

    def write(rows):
        if rows:
            out.write("\n".join(map(_csv_line, rows)) + "\n")

    summary = _run_blocks(cfg, write)
    assert summary.check_counts()
    return summary
