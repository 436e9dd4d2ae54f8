"""Exception hierarchy.

Every error raised by the library derives from :class:`SuperenergyError`.
Errors describing a case the library deliberately does not handle also
derive from :class:`Unsupported`; the CLI maps those to exit code 2.
"""


class SuperenergyError(ValueError):
    """Base class for all library errors."""


class Unsupported(SuperenergyError):
    """Input is well formed but outside what is implemented."""


# frames and tensors
class DegenerateMetric(SuperenergyError):
    pass


class WrongSignature(SuperenergyError):
    pass


class NonTimelikeFutureAxis(SuperenergyError):
    pass


class SlotOutOfRange(SuperenergyError):
    pass


class FrameMismatch(SuperenergyError):
    pass


class RankMismatch(SuperenergyError):
    pass


class CapExceeded(Unsupported):
    """Rank above 8 or dimension above 6."""


# folded forms
class ZeroTensor(SuperenergyError):
    pass


class RankZero(SuperenergyError):
    pass


class ArityMismatch(SuperenergyError):
    pass


class StructureMismatch(SuperenergyError):
    pass


class NotAntisymmetric(SuperenergyError):
    pass


class UnsupportedNBlock(Unsupported):
    pass


class FoldTooLarge(Unsupported):
    pass


# cones and classification
class NotSymmetric(SuperenergyError):
    pass


class NotDominant(SuperenergyError):
    pass


class NotDiagonalizable(Unsupported):
    pass


class WrongDimension(Unsupported):
    pass


class BadParams(SuperenergyError):
    pass


# causal maps
class SingularJacobian(SuperenergyError):
    pass


class DegenerateCandidate(SuperenergyError):
    pass


class UnknownExample(SuperenergyError):
    pass


# wavefronts
class NegativeInitial(SuperenergyError):
    pass


class CutOutOfRange(SuperenergyError):
    pass


class BadRange(SuperenergyError):
    pass


class ConstraintViolation(SuperenergyError):
    pass
