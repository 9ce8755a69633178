"""Exception hierarchy shared by all modules."""


class SMError(Exception):
    """Base class for every error raised by this package."""


class MalformedInputError(SMError, ValueError):
    """A matching or instance violates its structural invariants."""


class StructureViolationError(SMError):
    """The path/cycle dichotomy of two stable matchings does not hold.

    This is a theorem for stable inputs on regular problems, so seeing it
    means the caller passed something non-stable or non-regular.
    """


class CapExceededError(SMError):
    """An enumeration produced more items than the caller allowed."""

    def __init__(self, cap: int, count: int):
        super().__init__(f"enumeration exceeded cap {cap} (reached {count})")
        self.cap = cap
        self.count = count


class VariantMismatchError(SMError, ValueError):
    pass


class DominancePreconditionError(SMError, ValueError):
    pass


class RegularityError(SMError, ValueError):
    pass


class ProtocolViolationError(SMError):
    """An online algorithm returned a matching that is not stable."""


class PostconditionError(SMError, AssertionError):
    """A construction failed one of its own guaranteed postconditions."""


class IncompleteListError(MalformedInputError):
    """A preference list does not cover the whole opposite side."""


class DuplicateRankError(MalformedInputError):
    """A preference list names the same person twice."""


class PreferenceDriftError(MalformedInputError):
    """Preferences over persons present in two stages differ between them."""
