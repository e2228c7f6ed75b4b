"""Exception hierarchy shared by all qdual modules."""


class QdualError(ValueError):
    """Base class for every error raised by qdual."""


class CutoffExceeded(QdualError):
    """A raising operation would populate a Fock level above the cutoff."""


class UndefinedObservable(QdualError):
    """A normalised observable has a vanishing denominator (0/0)."""


class GridMismatch(QdualError):
    """Phase-scan samples do not sit on the grid required for reconstruction."""


class NotHermitian(QdualError):
    pass


class NotNormalized(QdualError):
    pass


class DegenerateBloch(QdualError):
    """The local Bloch vector is (numerically) zero, so no direction is singled out."""


class BadSubsystemIndex(QdualError):
    pass


class DimensionMismatch(QdualError):
    pass


class NotDichotomic(QdualError):
    """Observable is not Hermitian with spectrum in {+1, -1}."""


class NegativeAlpha(QdualError):
    pass


class IndivisibleN(QdualError):
    pass


class OddN(QdualError):
    pass


class UnknownTarget(QdualError):
    pass


class BadProbability(QdualError):
    pass


class StateParseError(QdualError):
    pass
