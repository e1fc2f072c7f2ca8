"""Exception hierarchy shared by all kmslab modules."""


class KmsLabError(Exception):
    """Base class for every error raised by kmslab."""


class PresentationError(KmsLabError, ValueError):
    """Malformed or inconsistent presentation / potential document."""


class EmptyShiftError(KmsLabError, ValueError):
    """The presentation presents the empty shift."""


class NotInShiftError(KmsLabError, ValueError):
    """A point is not readable anywhere in the presentation."""


class DepthError(KmsLabError, ValueError):
    """A potential or function has the wrong depth for the requested operation."""


class NotBackwardClosedError(KmsLabError, ValueError):
    """A vertex subset is not closed under taking preimages."""


class PreconditionError(KmsLabError, ValueError):
    """A numerical precondition failed; the message carries the margins."""


class BudgetExceeded(KmsLabError, RuntimeError):
    """A brute-force enumeration would exceed its budget."""
