"""Exception hierarchy.

Everything raised for bad input data derives from :class:`DataError`, which the
CLI maps to exit code 2.
"""


class HFAugError(Exception):
    pass


class DataError(HFAugError):
    pass


class MalformedRow(DataError):
    def __init__(self, line_no, reason):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class UnknownEdgeType(MalformedRow):
    pass


class NegativeAmount(MalformedRow):
    pass


class DanglingEndpoint(DataError):
    def __init__(self, edge, missing):
        self.edge = edge
        self.missing = missing
        super().__init__(f"edge {edge.src}->{edge.dst} references unknown account {missing}")


class CallIntoEOA(DataError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"call edge {edge.src}->{edge.dst} targets an EOA")


class LabelKindError(DataError):
    pass


class UnknownAccount(DataError, KeyError):
    def __str__(self):
        return f"unknown account {self.args[0]!r}"


class InsufficientCandidates(DataError):
    pass


class NegativeValue(DataError, ValueError):
    pass


class PatternSyntaxError(HFAugError, ValueError):
    def __init__(self, position, reason):
        self.position = position
        self.reason = reason
        super().__init__(f"at position {position}: {reason}")


class KindMismatch(HFAugError, ValueError):
    pass


class KindMismatchAtStart(KindMismatch):
    pass


class AnchorOutOfRange(HFAugError, IndexError):
    pass


class KindIncompatible(HFAugError, ValueError):
    pass


class EmptyCorpus(DataError, ValueError):
    pass


class SingleClassData(DataError, ValueError):
    pass


class DimensionMismatch(HFAugError, ValueError):
    pass


class LengthMismatch(HFAugError, ValueError):
    pass


class EmptyInput(HFAugError, ValueError):
    pass


class TooFewSamples(DataError, ValueError):
    pass
