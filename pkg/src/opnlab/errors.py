"""Exception hierarchy shared by every opnlab module."""


class OpnError(Exception):
    """Base class; ``code`` is the short machine-readable name used in reports."""

    code = "OpnError"


class FactoringTimeout(OpnError):
    code = "FactoringTimeout"

    def __init__(self, n: int, cofactor: int, curves: int):
        self.n = n
        self.cofactor = cofactor
        self.curves = curves
        super().__init__(
            f"could not split {len(str(cofactor))}-digit cofactor of {n} "
            f"after {curves} ECM curves"
        )


class CandidateRejected(OpnError):
    """A raw (p, k, m) triple failed one or more Eulerian-form conditions.

    ``reasons`` lists every failed condition as ``(code, detail)``.
    """

    code = "CandidateRejected"

    def __init__(self, p: int, k: int, m: int, reasons: list[tuple[str, str]]):
        self.p, self.k, self.m = p, k, m
        self.reasons = reasons
        super().__init__(
            f"({p}, {k}, {m}) rejected: "
            + "; ".join(f"{code}: {detail}" for code, detail in reasons)
        )

    @property
    def codes(self) -> list[str]:
        return [code for code, _ in self.reasons]


class NonPositiveGap(OpnError):
    code = "NonPositiveGap"


class SquareGap(OpnError):
    code = "SquareGap"


class MEqualsT(OpnError):
    code = "MEqualsT"


class MEqualsPowerOfTwo(OpnError):
    code = "MEqualsPowerOfTwo"


class InconsistentInputs(OpnError):
    code = "InconsistentInputs"


class InvalidScanConfig(OpnError, ValueError):
    code = "InvalidScanConfig"
